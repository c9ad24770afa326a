use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use inr_core::model::{Family, ModelConfig, TrainConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    FitImage,
    FitVideo,
    Superres,
    Fit1d,
    Spectrum,
    RSweep,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::FitImage => "fit-image",
            Task::FitVideo => "fit-video",
            Task::Superres => "superres",
            Task::Fit1d => "fit1d",
            Task::Spectrum => "spectrum",
            Task::RSweep => "r-sweep",
        }
    }

    fn reads_images(self) -> bool {
        matches!(self, Task::FitImage | Task::Superres | Task::RSweep)
    }
}

/// Architecture shared by every family of an experiment. Unset fields take
/// the family defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub hidden_width: usize,
    pub hidden_depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pe_bands: Option<usize>,
}

impl ModelSection {
    pub fn build(&self, family: Family, input_dim: usize, output_dim: usize) -> ModelConfig {
        let mut c = ModelConfig::new(family, input_dim, output_dim, self.hidden_width, self.hidden_depth)
            .with_k(self.k);
        if let Some(w) = self.omega0 {
            c = c.with_omega0(w);
        }
        if let Some(r) = self.r {
            c = c.with_r(r);
        }
        if let Some(s0) = self.s0 {
            c = c.with_s0(s0);
        }
        if let (Some(bands), Family::ReluPe) = (self.pe_bands, family) {
            c = c.with_pe_bands(bands);
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoSection {
    /// PNG files, or frame directories for `fit-video`. Relative paths are
    /// taken from the config file's directory.
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
}

/// Sample counts of the 1D task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsSection {
    pub train: usize,
    pub eval: usize,
}

impl Default for PointsSection {
    fn default() -> Self {
        Self { train: 200, eval: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub task: Task,
    pub families: Vec<Family>,
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainConfig,
    pub io: IoSection,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<PointsSection>,
}

/// A config problem at a dotted field path such as `model.hidden_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct Invalid {
    pub path: String,
    pub message: String,
}

fn invalid(path: &str, message: impl Into<String>) -> Invalid {
    Invalid {
        path: path.into(),
        message: message.into(),
    }
}

fn unique<T: std::hash::Hash + Eq + Copy>(items: &[T]) -> bool {
    let mut seen = HashSet::new();
    items.iter().all(|x| seen.insert(*x))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Reads, parses and validates a config file. Problems come back as
    /// [`CliError::Config`] with the offending line.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config = Self::from_json(&text).map_err(|e| CliError::Config {
            file: path.to_path_buf(),
            line: e.line().max(1),
            message: e.to_string(),
        })?;
        config.validate().map_err(|v| CliError::Config {
            file: path.to_path_buf(),
            line: locate(&text, &v.path),
            message: format!("{}: {}", v.path, v.message),
        })?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), Invalid> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        if self.families.is_empty() {
            return Err(invalid("families", "list at least one family"));
        }
        if !unique(&self.families) {
            return Err(invalid("families", "families repeat"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "list at least one seed"));
        }
        if !unique(&self.seeds) {
            return Err(invalid("seeds", "seeds repeat"));
        }
        for &family in &self.families {
            self.model
                .build(family, 2, 1)
                .validate()
                .map_err(|e| invalid("model", e.to_string()))?;
        }
        self.train.validate().map_err(|e| invalid("train", e.to_string()))?;

        let task = self.task;
        let inputs = &self.io.inputs;
        match task {
            Task::Fit1d | Task::Spectrum if !inputs.is_empty() => {
                return Err(invalid("io.inputs", format!("{} takes no inputs", task.name())));
            }
            Task::Fit1d | Task::Spectrum => {}
            _ if inputs.is_empty() => {
                return Err(invalid("io.inputs", format!("{} needs at least one input", task.name())));
            }
            _ => {
                let stems: Vec<String> = inputs.iter().map(|p| input_stem(p)).collect();
                if stems.iter().any(|s| s.is_empty()) {
                    return Err(invalid("io.inputs", "every input needs a file name"));
                }
                if !unique(&stems.iter().map(String::as_str).collect::<Vec<_>>()) {
                    return Err(invalid("io.inputs", "input file names must be distinct"));
                }
                if task.reads_images() {
                    if let Some(p) = inputs.iter().find(|p| p.extension().is_none_or(|e| e != "png")) {
                        return Err(invalid("io.inputs", format!("{} is not a .png file", p.display())));
                    }
                }
            }
        }
        if task == Task::RSweep {
            if self.families != [Family::Hsiren] {
                return Err(invalid("families", "r-sweep trains hsiren only"));
            }
            if self.r_values.is_empty() {
                return Err(invalid("r_values", "list at least one r"));
            }
            if let Some(r) = self.r_values.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
                return Err(invalid("r_values", format!("r must be positive, got {r}")));
            }
            if self.model.r.is_some() {
                return Err(invalid("model.r", "r-sweep takes r from r_values"));
            }
        } else if !self.r_values.is_empty() {
            return Err(invalid("r_values", "only used by r-sweep"));
        }
        if task == Task::Fit1d {
            let m = &self.model;
            if m.omega0.is_some() || m.r.is_some() || m.s0.is_some() || m.pe_bands.is_some() {
                return Err(invalid("model", "fit1d uses family defaults; only k may be set"));
            }
            let p = self.points.clone().unwrap_or_default();
            if p.train < 2 || p.eval < 2 {
                return Err(invalid("points", "need at least 2 train and 2 eval points"));
            }
        } else if self.points.is_some() {
            return Err(invalid("points", "only used by fit1d"));
        }
        Ok(())
    }
}

/// File name without extension; used to label runs of one input.
pub fn input_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// 1-based line of the field at dotted `path` in `text`, following each key
/// after the previous one. Falls back to the deepest key found.
pub fn locate(text: &str, path: &str) -> usize {
    let mut offset = 0;
    for segment in path.split('.') {
        let key = segment.split('[').next().unwrap_or(segment);
        match text[offset..].find(&format!("\"{key}\"")) {
            Some(i) => offset += i,
            None => break,
        }
    }
    text[..offset].matches('\n').count() + 1
}
