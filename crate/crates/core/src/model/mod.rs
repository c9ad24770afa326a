//! Coordinate MLPs: configuration, initialization, forward and backward
//! passes, Adam and the training loop.

mod adam;
mod checkpoint;
mod config;
mod encoding;
mod network;
mod params;
mod train;

pub use adam::{adam_step, AdamState, TrainConfig};
pub use checkpoint::Checkpoint;
pub use config::{Family, ModelConfig};
pub use encoding::fourier_encode;
pub use network::{backward, forward, mse_loss, predict, visit_hidden_outputs, ForwardCache};
pub use params::{init_model, LayerParams, Params};
pub use train::{train, train_from, BestCheckpoint, Diverged, TrainOutcome};
