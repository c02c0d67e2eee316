//! Run configuration shared by every command.
//!
//! Stored as TOML. Every key is optional and falls back to its default:
//!
//! ```toml
//! seed = 42
//! t2 = 64
//! stride = 5
//! include_shape = true
//! drop_labels = []          # collective labels, e.g. ["Queuing"]
//!
//! [smoothing]
//! alpha = 0.5
//! t_s = 0.25
//!
//! [pid]
//! t1 = 64
//! sigma_rho = 0.25
//! sigma_theta = 0.39269908169872414
//! k_s = 3.0
//! l_max = 1
//! grid_samples_per_axis = 9
//! variance_denominator = false
//! soft_assignment = true
//!
//! [pid_forest]              # same keys for [cbd_forest]
//! n_trees = 100
//! min_samples_split = 2
//! # max_depth = 12
//! # features_per_split = 5
//! ```
//!
//! The `seed` key of the forest tables is ignored: forest seeds are derived
//! from the run seed so that one `seed` reproduces a whole run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cbd::{CollectiveLabel, CueSet};
use crate::error::{Error, Result};
use crate::forest::ForestConfig;
use crate::pid::{PidConfig, PidExtractor, PolarGrid};
use crate::trajectory::SmoothingConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Collective window length in frames.
    pub t2: usize,
    /// Window step for training, evaluation and prediction, and the spacing
    /// of PID centers inside a collective window.
    pub stride: usize,
    pub include_shape: bool,
    /// Sequences carrying one of these collective labels are left out of
    /// training in cross-corpus runs.
    pub drop_labels: Vec<CollectiveLabel>,
    pub smoothing: SmoothingConfig,
    pub pid: PidConfig,
    pub pid_forest: ForestConfig,
    pub cbd_forest: ForestConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            t2: 64,
            stride: 5,
            include_shape: true,
            drop_labels: Vec::new(),
            smoothing: SmoothingConfig::default(),
            pid: PidConfig::default(),
            pid_forest: ForestConfig::default(),
            cbd_forest: ForestConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config is representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.smoothing.validate()?;
        self.pid.validate()?;
        if self.t2 < 2 || !self.t2.is_power_of_two() {
            return Err(Error::Config(format!("t2 must be a power of two >= 2, got {}", self.t2)));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be >= 1".into()));
        }
        self.pid_forest.validate(self.pid.descriptor_len(&PolarGrid::default()))?;
        self.cbd_forest.validate(self.cue_set().feature_count())?;
        Ok(())
    }

    pub fn cue_set(&self) -> CueSet {
        if self.include_shape {
            CueSet::Full
        } else {
            CueSet::WithDispersion
        }
    }

    pub fn pid_extractor(&self) -> Result<PidExtractor> {
        PidExtractor::new(&self.pid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!((c.t2, c.pid.t1, c.stride), (64, 64, 5));
        c.validate().unwrap();
        assert_eq!(RunConfig::from_toml("").unwrap(), c);
    }

    #[test]
    fn toml_round_trip() {
        let mut c = RunConfig::default();
        c.drop_labels = vec![CollectiveLabel::Queuing];
        c.pid_forest.max_depth = Some(7);
        c.pid.l_max = 2;
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn partial_files_keep_defaults() {
        let c = RunConfig::from_toml("seed = 7\n[pid]\nl_max = 2\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.pid.l_max, 2);
        assert_eq!(c.pid.t1, 64);
        assert_eq!(c.pid_forest, ForestConfig::default());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(RunConfig::from_toml("sede = 1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml("drop_labels = [\"Dancing\"]"), Err(Error::Config(_))));
        let c = RunConfig { t2: 48, ..RunConfig::default() };
        assert!(c.validate().is_err());
        let c = RunConfig { stride: 0, ..RunConfig::default() };
        assert!(c.validate().is_err());
    }
}
