//! Scenario configuration: TOML, validated against the published schema
//! before it is deserialized.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use ramgate::drift::{hidden_components, DriftConfig, DEFAULT_MIX, DEFAULT_P_DRIFT, DEFAULT_SEED};
use ramgate::gate::{ActionClass, Privilege};
use ramgate::lab::{AdmissionRule, FiniteInstance};
use ramgate::sim::{default_grid, validate_grid, ModelSet, Scenario, DEFAULT_EPISODE_LENGTH, DEFAULT_LAG, DEFAULT_STEPS};
use ramgate::state::components;
use ramgate::{ComponentId, Universe};

use crate::CliError;

pub const SCHEMA: &str = include_str!("../schema/scenario.schema.json");
pub const SEED_ENV: &str = "RAMGATE_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub universe: Option<Vec<String>>,
    #[serde(default)]
    pub action_classes: Vec<ActionClassConfig>,
    #[serde(default)]
    pub drift: DriftSection,
    #[serde(default)]
    pub models: ModelsSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionClassConfig {
    pub name: String,
    pub privileges: Vec<PrivilegeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivilegeConfig {
    pub name: String,
    pub requires: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    pub p_drift: Option<f64>,
    pub mix: Option<[f64; 4]>,
    pub seed: Option<u64>,
    pub coverage: Option<f64>,
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsSection {
    pub attestation: Option<bool>,
    pub oracle: Option<bool>,
    pub ram: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub extra_visible: Option<Vec<String>>,
    pub lag: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub steps: Option<u64>,
    pub episode_length: Option<u64>,
    pub action_class: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let schema: serde_json::Value = serde_json::from_str(SCHEMA).expect("bundled schema is JSON");
        jsonschema::validator_for(&schema).expect("bundled schema compiles")
    })
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let json = serde_json::to_value(&doc).map_err(|e| CliError::Config(e.to_string()))?;
        let errors: Vec<String> = validator()
            .iter_errors(&json)
            .map(|e| format!("{}: {}", e.instance_path(), e))
            .collect();
        if !errors.is_empty() {
            return Err(CliError::Config(format!("schema violation: {}", errors.join("; "))));
        }
        serde_json::from_value(json).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// `--seed`, then the config, then `RAMGATE_SEED`, then the default.
    pub fn resolve_seed(&self, flag: Option<u64>, env: Option<&str>) -> Result<u64, CliError> {
        if let Some(s) = flag.or(self.drift.seed) {
            return Ok(s);
        }
        match env {
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
            None => Ok(DEFAULT_SEED),
        }
    }

    pub fn steps(&self) -> u64 {
        self.run.steps.unwrap_or(DEFAULT_STEPS)
    }

    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        let grid = self.drift.grid.clone().unwrap_or_else(default_grid);
        validate_grid(&grid).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(grid)
    }

    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    fn universe(&self) -> Result<Universe, CliError> {
        match &self.universe {
            Some(names) => Universe::new(names.iter().map(String::as_str)).map_err(|e| CliError::Config(e.to_string())),
            None => Ok(Universe::five_component()),
        }
    }

    fn action_class(&self) -> Result<ActionClass, CliError> {
        let chosen = match &self.run.action_class {
            Some(name) => Some(
                self.action_classes
                    .iter()
                    .find(|c| &c.name == name)
                    .ok_or_else(|| CliError::Config(format!("run.action_class `{name}` is not declared")))?,
            ),
            None => self.action_classes.first(),
        };
        let class = match chosen {
            Some(c) => c
                .privileges
                .iter()
                .map(|p| Privilege::new(&p.name, p.requires.iter().map(String::as_str)))
                .collect::<Result<Vec<_>, _>>()
                .and_then(ActionClass::new),
            None => ActionClass::single("execute", components::ALL),
        };
        class.map_err(|e| CliError::Config(e.to_string()))
    }

    /// Builds the validated scenario with `seed` in place of the configured one.
    pub fn scenario(&self, seed: u64) -> Result<Scenario, CliError> {
        let drift = DriftConfig {
            p_drift: self.drift.p_drift.unwrap_or(DEFAULT_P_DRIFT),
            mix: self.drift.mix.unwrap_or(DEFAULT_MIX),
            seed,
            coverage: self.drift.coverage.unwrap_or(1.0),
        };
        let models = ModelSet {
            attestation: self.models.attestation.unwrap_or(true),
            oracle: self.models.oracle.unwrap_or(true),
            ram: self.models.ram.unwrap_or(true),
        };
        let extra: BTreeSet<ComponentId> = match &self.oracle.extra_visible {
            Some(names) => names.iter().map(ComponentId::new).collect(),
            None => [components::C, components::R].into_iter().map(ComponentId::new).collect(),
        };
        let oracle = ramgate::baseline::OracleChannel::new(
            extra,
            self.oracle.lag.unwrap_or(DEFAULT_LAG),
            &hidden_components(),
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        Scenario::new(
            self.universe()?,
            drift,
            models,
            self.action_class()?,
            oracle,
            self.run.episode_length.unwrap_or(DEFAULT_EPISODE_LENGTH),
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Lab instance file. Same conventions as the scenario file, but no
/// published schema: the shape mirrors [`FiniteInstance`] directly.
pub fn load_instance(path: &Path) -> Result<FiniteInstance, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let inst: FiniteInstance = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    inst.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(inst)
}

/// Five components, `E` hidden, authority requires all five, admission
/// unless something visible is provably invalid.
pub fn default_instance() -> FiniteInstance {
    let universe: Vec<ComponentId> = components::ALL.into_iter().map(ComponentId::new).collect();
    FiniteInstance {
        visible: universe.iter().filter(|id| id.as_str() != components::E).cloned().collect(),
        authority_requirements: universe.iter().cloned().collect(),
        admission_rule: AdmissionRule::NotProvablyFalse,
        universe,
    }
}
