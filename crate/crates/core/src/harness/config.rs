use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::OptimizeOptions;

/// Format version written into every configuration file.
pub const CONFIG_VERSION: u32 = 1;

/// Evenly spaced exponents `start, start + step, ..` up to `end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, end: f64, step: f64) -> Self {
        Self { start, end, step }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.end >= self.start) || !self.start.is_finite() || !self.end.is_finite() {
            return Err(Error::Precondition(format!(
                "grid {}..{} step {} is not ascending",
                self.start, self.end, self.step
            )));
        }
        Ok(())
    }

    /// Points computed as `start + i·step` (no accumulated drift), with the
    /// endpoint kept when it lies within `1e-9` steps of the grid.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub n_curves: usize,
    pub n: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { n_curves: 50, n: 512 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiguresConfig {
    pub coarse: Grid,
    pub fine: Grid,
    pub optimizer: OptimizeOptions,
    /// Exponents drawn in the gallery; each is matched to the nearest grid row.
    pub gallery: Vec<f64>,
}

impl Default for FiguresConfig {
    fn default() -> Self {
        Self {
            coarse: Grid::new(1.0, 4.0, 0.05),
            fine: Grid::new(3.462, 3.484, 0.002),
            optimizer: OptimizeOptions::default(),
            gallery: vec![2.0, 3.0, 3.462, 3.474, 3.484, 3.6, 3.8, 4.0],
        }
    }
}

/// Parameters of every harness command, stored as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub seed: u64,
    pub verify: VerifyConfig,
    pub figures: FiguresConfig,
    pub outdir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            seed: 1,
            verify: VerifyConfig::default(),
            figures: FiguresConfig::default(),
            outdir: PathBuf::from("figures"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        if config.version != CONFIG_VERSION {
            return Err(Error::Precondition(format!(
                "configuration version {} is not supported (expected {CONFIG_VERSION})",
                config.version
            )));
        }
        config.figures.coarse.validate()?;
        config.figures.fine.validate()?;
        config.figures.optimizer.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}
