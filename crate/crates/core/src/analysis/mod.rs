//! Activation spectra at initialization, the 1D overfitting experiment and
//! sweeps over the H-SIREN growth rate.

mod fit1d;
mod rsweep;
mod spectrum;

pub use fit1d::{fit1d_csv, fit1d_dataset, fit1d_target, fit_1d_experiment, fit_1d_with, Fit1dConfig, Fit1dResult};
pub use rsweep::{r_sweep, r_sweep_csv, RSweepPoint};
pub use spectrum::{
    activation_spectrum, mean_neuron_spectrum, spectral_centroid, spectral_p99, spectrum_of,
    SpectrumReport, SPECTRUM_SAMPLES,
};
