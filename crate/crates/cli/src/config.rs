//! Scenario configuration: one JSON document per run.
//!
//! Rates are in units of `κ_c` and times in units of `1/κ_c`, except for the
//! `experiment` block, which takes absolute values in s⁻¹ and seconds.

use std::path::Path;

use serde::Deserialize;

use eprsim::feasibility::ExperimentParams;
use eprsim::lindblad::LindbladModel;
use eprsim::nopa::NopaParams;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    /// Reserved; every computation is deterministic.
    #[allow(dead_code)]
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub nopa: Option<NopaBlock>,
    #[serde(default)]
    pub model: Option<ModelBlock>,
    #[serde(default)]
    pub basis: Option<BasisBlock>,
    #[serde(default)]
    pub spectrum: Option<SpectrumBlock>,
    #[serde(default)]
    pub time: Option<TimeBlock>,
    #[serde(default)]
    pub wigner: Option<WignerBlock>,
    #[serde(default)]
    pub bell: Option<BellBlock>,
    #[serde(default)]
    pub experiment: Option<ExperimentParams>,
    #[serde(default)]
    pub feasibility: Option<FeasibilityBlock>,
    #[serde(default)]
    pub cascade: Option<CascadeBlock>,
    #[serde(default)]
    pub steady_state: Option<SteadyStateBlock>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NopaBlock {
    /// Pump amplitude in units of `κ_c`.
    pub epsilon: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub gamma: f64,
    /// Bath parameters; both absent means "derive from the nopa block".
    #[serde(default)]
    pub n: Option<f64>,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub heating_rate: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisBlock {
    pub n_max: usize,
}

/// Either an explicit list of values or `points` evenly spaced values from
/// `min` to `max` inclusive.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
}

impl AxisSpec {
    pub fn resolve(&self, field: &str) -> Result<Vec<f64>, CliError> {
        let values = match (&self.values, self.min, self.max, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(n)) => {
                if hi < lo {
                    return Err(CliError::config(field, "max must be >= min"));
                }
                match n {
                    0 => Vec::new(),
                    1 => vec![lo],
                    _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
                }
            }
            _ => {
                return Err(CliError::config(
                    field,
                    "give either `values` or all of `min`, `max`, `points`",
                ))
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::config(field, "values must be finite"));
        }
        Ok(values)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub omega: AxisSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    pub t: AxisSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerSource {
    /// Truncated two-mode squeezed vacuum with the configured `r`.
    Tmss,
    Vacuum,
    /// Fock-space steady state of the configured model.
    SteadyState,
    /// Closed form only.
    None,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerBlock {
    /// Squeeze parameter; defaults to the one implied by the nopa block.
    #[serde(default)]
    pub r: Option<f64>,
    /// Shared axis for all four coordinates.
    #[serde(default)]
    pub axis: Option<AxisSpec>,
    #[serde(default)]
    pub q1: Option<AxisSpec>,
    #[serde(default)]
    pub p1: Option<AxisSpec>,
    #[serde(default)]
    pub q2: Option<AxisSpec>,
    #[serde(default)]
    pub p2: Option<AxisSpec>,
    pub source: WignerSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellStateChoice {
    Tmss,
    Vacuum,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellBlock {
    #[serde(default)]
    pub r: Option<AxisSpec>,
    #[serde(default, rename = "J")]
    pub j: Option<AxisSpec>,
    #[serde(default)]
    pub beta_sign: Option<f64>,
    #[serde(default)]
    pub state: Option<BellStateChoice>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityBlock {
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeBlock {
    pub kappa_over_gamma: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethodChoice {
    Auto,
    InverseIteration,
    LongTimeIntegration,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyStateBlock {
    #[serde(default)]
    pub method: Option<SteadyMethodChoice>,
    #[serde(default)]
    pub tol: Option<f64>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "config".to_owned() } else { path };
            CliError::config(&field, e.into_inner())
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", cfg.schema_version),
            ));
        }
        Ok(cfg)
    }

    pub fn nopa(&self) -> Result<Option<NopaParams>, CliError> {
        match &self.nopa {
            None => Ok(None),
            Some(b) => NopaParams::from_ratio(b.epsilon)
                .map(Some)
                .map_err(|e| CliError::from_core("nopa", e)),
        }
    }

    pub fn require_nopa(&self) -> Result<NopaParams, CliError> {
        self.nopa()?
            .ok_or_else(|| CliError::config("nopa", "block is required for this command"))
    }

    pub fn model(&self) -> Result<LindbladModel, CliError> {
        let block = self
            .model
            .as_ref()
            .ok_or_else(|| CliError::config("model", "block is required for this command"))?;
        let model = match (block.n, block.m) {
            (Some(n), Some(m)) => LindbladModel::new(block.gamma, n, m),
            (None, None) => {
                let nopa = self
                    .nopa()?
                    .ok_or_else(|| CliError::config("model.n", "give n and m, or a nopa block to derive them"))?;
                LindbladModel::from_nopa(&nopa, block.gamma)
            }
            (Some(_), None) => return Err(CliError::config("model.m", "missing (n is given)")),
            (None, Some(_)) => return Err(CliError::config("model.n", "missing (m is given)")),
        };
        model
            .and_then(|m| m.with_heating(block.heating_rate))
            .map_err(|e| CliError::from_core("model", e))
    }

    /// Basis size: command-line override, then the config, then `default`.
    pub fn n_max(&self, cli: Option<usize>, default: usize) -> usize {
        cli.or(self.basis.as_ref().map(|b| b.n_max)).unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(json: &str) -> Result<Vec<f64>, CliError> {
        serde_json::from_str::<AxisSpec>(json).unwrap().resolve("x")
    }

    #[test]
    fn axis_forms() {
        assert_eq!(axis(r#"{"values":[3,1]}"#).unwrap(), [3.0, 1.0]);
        assert_eq!(axis(r#"{"min":0,"max":1,"points":3}"#).unwrap(), [0.0, 0.5, 1.0]);
        assert_eq!(axis(r#"{"min":2,"max":2,"points":1}"#).unwrap(), [2.0]);
        assert!(axis(r#"{"min":0,"max":1,"points":0}"#).unwrap().is_empty());
        assert!(axis(r#"{"values":[0],"min":0}"#).is_err());
        assert!(axis(r#"{"min":0,"points":2}"#).is_err());
        assert!(axis(r#"{"min":1,"max":0,"points":2}"#).is_err());
    }

    #[test]
    fn model_derivation() {
        let cfg = ScenarioConfig::parse(r#"{"schema_version":1,"nopa":{"epsilon":0.5},"model":{"gamma":2}}"#).unwrap();
        let m = cfg.model().unwrap();
        assert!((m.n_param() - 16.0 / 9.0).abs() < 1e-14);
        assert!((m.m_param() - 20.0 / 9.0).abs() < 1e-14);
        assert_eq!(m.gamma(), 2.0);

        let direct = ScenarioConfig::parse(r#"{"schema_version":1,"model":{"gamma":1,"n":0.2,"m":0.1}}"#).unwrap();
        assert_eq!(direct.model().unwrap().m_param(), 0.1);

        let half = ScenarioConfig::parse(r#"{"schema_version":1,"model":{"gamma":1,"n":0.2}}"#).unwrap();
        assert!(matches!(half.model(), Err(CliError::Config(msg)) if msg.starts_with("model.m")));
        let orphan = ScenarioConfig::parse(r#"{"schema_version":1,"model":{"gamma":1}}"#).unwrap();
        assert!(matches!(orphan.model(), Err(CliError::Config(msg)) if msg.starts_with("model.n")));
    }

    #[test]
    fn parse_errors_name_the_path() {
        let err = ScenarioConfig::parse(r#"{"schema_version":1,"model":{"gamma":"fast"}}"#).unwrap_err();
        assert!(matches!(err, CliError::Config(msg) if msg.starts_with("model.gamma")));
        let err = ScenarioConfig::parse(r#"{"schema_version":2}"#).unwrap_err();
        assert!(matches!(err, CliError::Config(msg) if msg.starts_with("schema_version")));
    }

    #[test]
    fn n_max_precedence() {
        let cfg = ScenarioConfig::parse(r#"{"schema_version":1,"basis":{"n_max":12}}"#).unwrap();
        assert_eq!(cfg.n_max(Some(5), 40), 5);
        assert_eq!(cfg.n_max(None, 40), 12);
        let bare = ScenarioConfig::parse(r#"{"schema_version":1}"#).unwrap();
        assert_eq!(bare.n_max(None, 40), 40);
    }
}
