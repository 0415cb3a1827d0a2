//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::noise::NoiseSpec;
use crate::qsd::{ProjectionMode, TimeGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Noisy pair solved with no treatment at all.
    DoingNothing,
    /// One threshold, usually a small multiple of `||S~||`.
    FixedThreshold,
    /// Threshold tied to the noise level, swept over `sigma_list`.
    ThresholdSweep,
    /// Fixed noise level, several thresholds.
    ThresholdChoice,
    AutoThreshold,
    Heuristics,
    AlphaScatter,
    /// Symmetric time grids of increasing half-width on the exact pair.
    NoiselessK,
    /// Thresholding error of an exact pair against its closed-form bound.
    BoundValidation,
    /// Projection error of the 5x5 tightness instance.
    Tightness,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::DoingNothing => "doing-nothing",
            Scenario::FixedThreshold => "fixed-threshold",
            Scenario::ThresholdSweep => "threshold-sweep",
            Scenario::ThresholdChoice => "threshold-choice",
            Scenario::AutoThreshold => "auto-threshold",
            Scenario::Heuristics => "heuristics",
            Scenario::AlphaScatter => "alpha-scatter",
            Scenario::NoiselessK => "noiseless-k",
            Scenario::BoundValidation => "bound-validation",
            Scenario::Tightness => "tightness",
        }
    }

    /// Whether each trial draws a noisy pair.
    pub fn is_noisy(self) -> bool {
        matches!(
            self,
            Scenario::DoingNothing
                | Scenario::FixedThreshold
                | Scenario::ThresholdSweep
                | Scenario::ThresholdChoice
                | Scenario::AutoThreshold
                | Scenario::Heuristics
        )
    }
}

/// How the threshold is chosen for each noisy pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EpsilonRule {
    Fixed { value: f64 },
    /// `factor * ||S~||`.
    Relative { factor: f64 },
    /// `multiplier * sigma * ||S~||`.
    Scaled { multiplier: f64 },
    /// Every value in turn, absolute or relative to `||S~||`.
    Sweep {
        values: Vec<f64>,
        #[serde(default)]
        relative: bool,
    },
}

impl EpsilonRule {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(config_error("epsilon_rule", msg));
        match self {
            EpsilonRule::Fixed { value } if !(*value > 0.0 && value.is_finite()) => bad("value must be positive"),
            EpsilonRule::Relative { factor } if !(*factor > 0.0 && factor.is_finite()) => {
                bad("factor must be positive")
            }
            EpsilonRule::Scaled { multiplier } if !(*multiplier > 0.0 && multiplier.is_finite()) => {
                bad("multiplier must be positive")
            }
            EpsilonRule::Sweep { values, .. } if values.is_empty() => bad("sweep needs at least one value"),
            EpsilonRule::Sweep { values, .. } if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) => {
                bad("sweep values must be positive")
            }
            _ => Ok(()),
        }
    }

    /// Number of thresholds the rule produces per pair.
    pub fn len(&self) -> usize {
        match self {
            EpsilonRule::Sweep { values, .. } => values.len(),
            _ => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn resolve(&self, sigma: f64, norm_s: f64) -> Vec<f64> {
        match self {
            EpsilonRule::Fixed { value } => vec![*value],
            EpsilonRule::Relative { factor } => vec![factor * norm_s],
            EpsilonRule::Scaled { multiplier } => vec![multiplier * sigma * norm_s],
            EpsilonRule::Sweep { values, relative } => {
                values.iter().map(|v| if *relative { v * norm_s } else { *v }).collect()
            }
        }
    }

    /// Whether every pair gets the same thresholds.
    pub fn is_absolute(&self) -> bool {
        matches!(self, EpsilonRule::Fixed { .. } | EpsilonRule::Sweep { relative: false, .. })
    }
}

/// A named synthetic pair used in place of a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSource {
    pub name: String,
    #[serde(default)]
    pub param: Option<f64>,
    /// Defaults to `base_seed`.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutoOptions {
    pub cutoffs: Vec<f64>,
    /// Starting threshold relative to `||S~||`.
    pub epsilon0_factor: f64,
}

impl Default for AutoOptions {
    fn default() -> Self {
        AutoOptions { cutoffs: vec![1e-1, 1e-3, 1e-5], epsilon0_factor: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicOptions {
    pub k: usize,
    /// `h0` relative to `||S~||`.
    pub h0_factor: f64,
    /// Threshold relative to `||S~||` for the candidate solve.
    pub tiny_factor: f64,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions { k: 5, h0_factor: 1e-2, tiny_factor: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiselessKOptions {
    pub k_list: Vec<usize>,
    /// Index `M` of the energy fixing the grid spacing `pi / (E_M - E_0)`.
    /// Defaults to `N-1`, or `N-2` when the top energy is an isolated
    /// outlier far above the rest of the spectrum.
    pub gap_index: Option<usize>,
}

impl Default for NoiselessKOptions {
    fn default() -> Self {
        NoiselessKOptions { k_list: (1..=12).map(|i| 5 * i).collect(), gap_index: None }
    }
}

/// Parameters of the end-to-end bound attached to thresholded trials.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundOptions {
    pub enabled: bool,
    /// Defaults to 1/4 with `mu` fitted on the reference pair.
    pub alpha: Option<f64>,
    pub mu: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSource>,
    #[serde(default)]
    pub grid: Option<TimeGrid>,
    #[serde(default)]
    pub projection: ProjectionMode,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub sigma_list: Vec<f64>,
    #[serde(default)]
    pub epsilon_rule: Option<EpsilonRule>,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Pair file reused across runs; written when missing.
    #[serde(default)]
    pub pair_cache: Option<PathBuf>,
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub auto: AutoOptions,
    #[serde(default)]
    pub heuristics: HeuristicOptions,
    #[serde(default)]
    pub noiseless_k: NoiselessKOptions,
    #[serde(default = "default_floor")]
    pub alpha_floor: f64,
    #[serde(default)]
    pub bounds: BoundOptions,
}

fn one() -> usize {
    1
}

fn default_floor() -> f64 {
    1e-16
}

pub(crate) fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config { field: field.to_string(), message: message.into() }
}

impl ExperimentConfig {
    /// Parses and validates a JSON config. Syntax and schema errors carry
    /// the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            config_error(&format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Threshold rule, with the scenario's default when unset.
    pub fn epsilon_rule(&self) -> EpsilonRule {
        if let Some(rule) = &self.epsilon_rule {
            return rule.clone();
        }
        match self.scenario {
            Scenario::FixedThreshold => EpsilonRule::Relative { factor: 1e-8 },
            Scenario::ThresholdChoice => {
                EpsilonRule::Sweep { values: (2..=12).rev().map(|p| 10f64.powi(-p)).collect(), relative: true }
            }
            Scenario::NoiselessK => EpsilonRule::Fixed { value: 1e-6 },
            Scenario::BoundValidation => {
                EpsilonRule::Sweep { values: (2..=12).rev().map(|p| 10f64.powi(-p)).collect(), relative: false }
            }
            Scenario::Tightness => EpsilonRule::Fixed { value: 1.5e-10 },
            _ => EpsilonRule::Scaled { multiplier: 25.0 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config_error("trials", "must be at least 1"));
        }
        if let Some(m) = &self.model {
            m.validate().map_err(|e| config_error("model", e.to_string()))?;
        }
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| config_error("grid", e.to_string()))?;
        }
        self.noise.validate().map_err(|e| config_error("noise", e.to_string()))?;
        if let Some(rule) = &self.epsilon_rule {
            rule.validate()?;
        }
        if self.model.is_some() && self.synthetic.is_some() {
            return Err(config_error("model", "give either model or synthetic, not both"));
        }
        if self.sigma_list.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(config_error("sigma_list", "noise levels must be finite and nonnegative"));
        }
        if !(self.alpha_floor > 0.0 && self.alpha_floor < 1.0) {
            return Err(config_error("alpha_floor", "must lie in (0, 1)"));
        }

        let needs_model_grid = |what: &str| -> Result<()> {
            if self.model.is_none() {
                return Err(config_error("model", format!("{what} needs a model")));
            }
            if self.grid.is_none() {
                return Err(config_error("grid", format!("{what} needs a grid")));
            }
            Ok(())
        };
        let name = self.scenario.name();
        match self.scenario {
            s if s.is_noisy() => {
                if self.synthetic.is_none() {
                    needs_model_grid(name)?;
                }
                if self.sigma_list.is_empty() {
                    return Err(config_error("sigma_list", format!("{name} needs at least one noise level")));
                }
                let toeplitz_noise = !matches!(self.noise, NoiseSpec::DenseGaussian);
                if toeplitz_noise && (self.synthetic.is_some() || self.projection == ProjectionMode::Direct) {
                    return Err(config_error(
                        "noise",
                        "first-row noise needs a Toeplitz pair; use dense-gaussian noise",
                    ));
                }
                if s == Scenario::AutoThreshold {
                    let a = &self.auto;
                    if a.cutoffs.is_empty() || a.cutoffs.iter().any(|r| !(*r > 0.0)) {
                        return Err(config_error("auto.cutoffs", "need at least one positive cutoff"));
                    }
                    if !(a.epsilon0_factor > 0.0) {
                        return Err(config_error("auto.epsilon0_factor", "must be positive"));
                    }
                }
                if s == Scenario::Heuristics {
                    let h = &self.heuristics;
                    if h.k == 0 {
                        return Err(config_error("heuristics.k", "must be at least 1"));
                    }
                    if !(h.h0_factor > 0.0) || !(h.tiny_factor > 0.0) {
                        return Err(config_error("heuristics", "h0_factor and tiny_factor must be positive"));
                    }
                }
                if let Some(alpha) = self.bounds.alpha {
                    if !(0.0..=0.5).contains(&alpha) {
                        return Err(config_error("bounds.alpha", "must lie in [0, 1/2]"));
                    }
                }
                Ok(())
            }
            Scenario::AlphaScatter => needs_model_grid(name),
            Scenario::NoiselessK => {
                if self.model.is_none() {
                    return Err(config_error("model", "noiseless-k needs a model"));
                }
                if self.noiseless_k.k_list.is_empty() {
                    return Err(config_error("noiseless_k.k_list", "needs at least one k"));
                }
                Ok(())
            }
            Scenario::BoundValidation => {
                if self.synthetic.is_none() && self.model.is_none() {
                    return Err(config_error("synthetic", "bound-validation needs a synthetic pair or a model"));
                }
                if self.model.is_some() && self.grid.is_none() {
                    return Err(config_error("grid", "a model needs a grid"));
                }
                Ok(())
            }
            Scenario::Tightness => Ok(()),
            _ => unreachable!("noisy scenarios handled above"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = r#"{
        "scenario": "threshold-sweep",
        "model": {"kind": "tfim", "L": 4, "g": -1.4142135623730951},
        "grid": {"kind": "forward", "n": 6, "dt": 1.0},
        "sigma_list": [1e-6],
        "epsilon_rule": {"rule": "scaled", "multiplier": 25},
        "trials": 3,
        "base_seed": 11
    }"#;

    #[test]
    fn parses_sweep_config() {
        let cfg = ExperimentConfig::from_json(SWEEP).unwrap();
        assert_eq!(cfg.scenario, Scenario::ThresholdSweep);
        assert_eq!(cfg.noise, NoiseSpec::ToeplitzGaussian);
        assert_eq!(cfg.epsilon_rule().resolve(1e-6, 2.0), vec![25.0 * 1e-6 * 2.0]);
    }

    #[test]
    fn unknown_key_reports_position() {
        let text = SWEEP.replace("\"trials\": 3", "\"trails\": 3");
        match ExperimentConfig::from_json(&text) {
            Err(Error::Config { field, message }) => {
                assert!(field.starts_with("line 7"), "{field}");
                assert!(message.contains("trails"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let text = SWEEP.replace("\"trials\": 3", "\"trials\": 0");
        assert!(matches!(ExperimentConfig::from_json(&text), Err(Error::Config { field, .. }) if field == "trials"));
        let text = SWEEP.replace("[1e-6]", "[]");
        assert!(
            matches!(ExperimentConfig::from_json(&text), Err(Error::Config { field, .. }) if field == "sigma_list")
        );
        let text = SWEEP.replace("\"L\": 4", "\"L\": 40");
        assert!(matches!(ExperimentConfig::from_json(&text), Err(Error::Config { field, .. }) if field == "model"));
    }

    #[test]
    fn sweep_rule_resolution() {
        let rule = EpsilonRule::Sweep { values: vec![1e-2, 1e-4], relative: true };
        assert_eq!(rule.resolve(0.0, 10.0), vec![1e-2 * 10.0, 1e-4 * 10.0]);
        assert_eq!(rule.len(), 2);
        assert!(!rule.is_absolute());
    }
}
