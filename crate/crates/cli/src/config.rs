//! Experiment configuration: one JSON document per run.

use std::path::Path;

use anyhow::{bail, Context, Result};
use helmstab::borninv::BandParams;
use helmstab::nearboundary::NearBoundaryConfig;
use helmstab::numerics::PotentialSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_ppw")]
    pub points_per_wavelength: f64,
}

fn default_ppw() -> f64 {
    12.0
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { points_per_wavelength: default_ppw() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularConfig {
    #[serde(default = "default_n_dir")]
    pub n_dir: usize,
}

fn default_n_dir() -> usize {
    64
}

impl Default for AngularConfig {
    fn default() -> Self {
        AngularConfig { n_dir: default_n_dir() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lambdas: Vec<f64>,
    /// First potential of the experiment.
    pub potential: PotentialSpec,
    /// Second potential for pair experiments; zero when absent.
    #[serde(default)]
    pub reference: Option<PotentialSpec>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub angular: AngularConfig,
    #[serde(default)]
    pub band: BandParams,
    #[serde(default)]
    pub near_boundary: NearBoundaryConfig,
    /// Mode truncation; defaults to `ceil(12 lambda)`.
    #[serde(default)]
    pub n_max: Option<usize>,
    /// Frequencies probed by `nearfield-probe`.
    #[serde(default = "default_xis")]
    pub xis: Vec<[f64; 2]>,
    /// Recorded in the run metadata.
    #[serde(default)]
    pub seed: u64,
}

fn default_xis() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0]]
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        cfg.validate().with_context(|| format!("invalid config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            bail!("field `lambdas`: at least one frequency is required");
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l >= 1.0 && l.is_finite())) {
            bail!("field `lambdas`: every frequency must be >= 1, got {l}");
        }
        if !(self.grid.points_per_wavelength >= 10.0) {
            bail!("field `grid.points_per_wavelength`: must be >= 10, got {}", self.grid.points_per_wavelength);
        }
        if self.angular.n_dir < 8 || self.angular.n_dir % 2 != 0 {
            bail!("field `angular.n_dir`: must be even and >= 8, got {}", self.angular.n_dir);
        }
        self.near_boundary.validate().context("field `near_boundary`")?;
        Ok(())
    }

    pub fn reference(&self) -> PotentialSpec {
        self.reference.clone().unwrap_or(PotentialSpec::Zero {})
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"lambdas": [4], "potential": {"kind": "zero"}}"#).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.angular.n_dir, 64);
        assert_eq!(cfg.band.epsilon, 0.2);
        assert_eq!(cfg.near_boundary.kappa, 2.0);
    }

    #[test]
    fn unknown_fields_are_named() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"lambdas": [4], "potential": {"kind": "zero"}, "lamda": 3}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("lamda"), "{err}");
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"lambdas": [4], "potential": {"kind": "bump", "amplitude": 1, "center": 0, "halfwidth": 0.5, "extra": 1}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut cfg: ExperimentConfig = serde_json::from_str(r#"{"lambdas": [4], "potential": {"kind": "zero"}}"#).unwrap();
        cfg.angular.n_dir = 63;
        assert!(cfg.validate().is_err());
        cfg.angular.n_dir = 64;
        cfg.grid.points_per_wavelength = 8.0;
        assert!(cfg.validate().is_err());
        cfg.grid.points_per_wavelength = 12.0;
        cfg.lambdas = vec![0.5];
        assert!(cfg.validate().is_err());
    }
}
