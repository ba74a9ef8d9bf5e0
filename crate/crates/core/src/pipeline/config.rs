use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::context::DEFAULT_WINDOW;
use crate::detect::DEFAULT_MIN_TOKEN_SORT;
use crate::{Error, Result};

pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Sentences on each side of a mention in its feature context.
    pub window: usize,
    /// A candidate is a hit when its confidence exceeds this.
    pub tau: f64,
    /// Lowest token-set similarity that still makes a candidate.
    pub min_token_sort: f64,
    /// Run extrinsic filters with a resolved neighbor on one side only.
    pub relax_extrinsic_gate: bool,
    pub filter_java_lang: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window: DEFAULT_WINDOW,
            tau: DEFAULT_TAU,
            min_token_sort: DEFAULT_MIN_TOKEN_SORT,
            relax_extrinsic_gate: false,
            filter_java_lang: true,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.tau) {
            return Err(Error::Config(format!("tau {} outside [0, 1)", self.tau)));
        }
        if !(self.min_token_sort > 0.0 && self.min_token_sort <= 1.0) {
            return Err(Error::Config(format!(
                "min_token_sort {} outside (0, 1]",
                self.min_token_sort
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_files() {
        let c = PipelineConfig::from_toml("").unwrap();
        assert_eq!(c, PipelineConfig::default());
        assert_eq!(c.window, 3);
        let c = PipelineConfig::from_toml("window = 1\nrelax_extrinsic_gate = true").unwrap();
        assert_eq!((c.window, c.relax_extrinsic_gate, c.tau), (1, true, 0.5));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PipelineConfig::from_toml("tau = 1.5").is_err());
        assert!(PipelineConfig::from_toml("min_token_sort = 0").is_err());
        assert!(PipelineConfig::from_toml("colour = 1").is_err());
    }
}
