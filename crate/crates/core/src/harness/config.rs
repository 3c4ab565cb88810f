use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};
use crate::perception::{PerceptionMode, SensorRig};
use crate::safety::EvaluationConfig;
use crate::stochastic::DemographicsTable;
use crate::world::{builtin_scenario, ScenarioConfig, TrafficModels};

fn default_modes() -> Vec<PerceptionMode> {
    PerceptionMode::ALL.to_vec()
}
fn default_episodes() -> usize {
    1000
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// One batch experiment. Exactly one of `scenario` and `scenario_config`
/// must be given; the remaining optional sections replace the matching
/// sections of the chosen scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Name of a built-in scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    /// A complete inline scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_config: Option<Box<ScenarioConfig>>,
    #[serde(default = "default_modes")]
    pub modes: Vec<PerceptionMode>,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; absent means one per core. Outputs do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traffic: Option<TrafficModels>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demographics: Option<DemographicsTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensors: Option<SensorRig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvaluationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<usize>,
}

impl ExperimentConfig {
    pub fn builtin(name: &str, episodes: usize, master_seed: u64) -> Self {
        Self {
            scenario: Some(name.to_string()),
            scenario_config: None,
            modes: default_modes(),
            episodes,
            master_seed,
            output_dir: default_output_dir(),
            workers: None,
            traffic: None,
            demographics: None,
            sensors: None,
            evaluation: None,
            frames: None,
        }
    }

    /// The scenario with every override applied, validated.
    pub fn resolve_scenario(&self) -> Result<ScenarioConfig> {
        let mut s = match (&self.scenario, &self.scenario_config) {
            (Some(name), None) => builtin_scenario(name).map_err(|e| HarnessError::Config(format!("scenario: {e}")))?,
            (None, Some(inline)) => (**inline).clone(),
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config(
                    "scenario: give either a name or scenario_config, not both".into(),
                ))
            }
            (None, None) => return Err(HarnessError::Config("scenario: missing".into())),
        };
        if let Some(t) = self.traffic {
            s.traffic = t;
        }
        if let Some(d) = &self.demographics {
            s.demographics = d.clone();
        }
        if let Some(r) = self.sensors {
            s.sensors = r;
        }
        if let Some(e) = self.evaluation {
            s.evaluation = e;
        }
        if let Some(f) = self.frames {
            s.frames = f;
        }
        s.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(HarnessError::Config("episodes: must be at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(HarnessError::Config("modes: at least one mode is required".into()));
        }
        for (i, m) in self.modes.iter().enumerate() {
            if self.modes[..i].contains(m) {
                return Err(HarnessError::Config(format!("modes: {m} listed twice")));
            }
        }
        if self.workers == Some(0) {
            return Err(HarnessError::Config("workers: must be at least 1".into()));
        }
        self.resolve_scenario().map(|_| ())
    }

    pub fn scenario_name(&self) -> String {
        match (&self.scenario, &self.scenario_config) {
            (_, Some(s)) => s.name.clone(),
            (Some(n), None) => n.clone(),
            (None, None) => String::new(),
        }
    }
}

/// Parses and validates a config document. Parse errors carry line and
/// column.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(text)
        .map_err(|e| HarnessError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
