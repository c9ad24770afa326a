use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelConfig, Params};
use crate::error::{Error, Result};

/// Model configuration and parameters as a JSON document. Floats are
/// written in shortest round-trip form, so loading restores every bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub seed: u64,
    pub iteration: usize,
    pub params: Params,
}

impl Checkpoint {
    pub fn new(config: ModelConfig, seed: u64, iteration: usize, params: Params) -> Result<Self> {
        params.check_matches(&config)?;
        Ok(Self { config, seed, iteration, params })
    }

    pub fn to_json(&self) -> Result<String> {
        if !self.params.is_finite() {
            return Err(Error::NonFinite("checkpoint parameters contain NaN or infinity".into()));
        }
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        ck.params.check_matches(&ck.config)?;
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_model, Family};
    use crate::numkit::SeededRng;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        for family in Family::ALL {
            let config = ModelConfig::new(family, 2, 3, 8, 3).with_k(Some(0.3));
            let params = init_model(&config, &mut SeededRng::new(9)).unwrap();
            let ck = Checkpoint::new(config, 9, 42, params).unwrap();
            let path = dir.path().join(format!("{family}.json"));
            ck.save(&path).unwrap();
            let back = Checkpoint::load(&path).unwrap();
            assert_eq!(back, ck);
            let bits = |p: &Params| p.flatten().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&back.params), bits(&ck.params));
        }
    }

    #[test]
    fn mismatched_params_are_rejected() {
        let config = ModelConfig::new(Family::Siren, 1, 1, 4, 2);
        let other = ModelConfig::new(Family::Siren, 1, 1, 5, 2);
        let params = init_model(&other, &mut SeededRng::new(0)).unwrap();
        assert!(Checkpoint::new(config, 0, 0, params).is_err());
        assert!(Checkpoint::from_json("{\"config\": 1}").is_err());
    }
}
