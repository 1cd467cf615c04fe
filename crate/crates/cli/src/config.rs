//! Experiment configuration.
//!
//! Configs are JSON with a `schema_version` field. Every struct rejects
//! unknown keys, and every tagged object names its variant with `kind`.

use std::fs;
use std::path::{Path, PathBuf};

use arrowlab_core::scenario::{linspace, DEFAULT_P_VALUES};
use arrowlab_core::{MacrostatePartition, PermutationDynamics, PhaseSpace, RegionSet};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn json_format() -> OutputFormat {
    OutputFormat::Json
}

fn check_schema(version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(CliError::Invalid(format!(
            "unsupported schema_version {version}; expected {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

/// A grid of s values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    Linspace {
        start: f64,
        stop: f64,
        points: usize,
    },
    List {
        values: Vec<f64>,
    },
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Linspace {
                start,
                stop,
                points,
            } => linspace(*start, *stop, *points),
            GridSpec::List { values } => values.clone(),
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Linspace {
            start: 0.001,
            stop: 0.999,
            points: 997,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DynamicsSpec {
    Identity,
    CyclicShift {
        offset: i64,
    },
    /// Seeded random permutation; without a seed the run's master seed is used.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Explicit {
        map: Vec<usize>,
    },
}

impl DynamicsSpec {
    pub fn build(&self, cell_count: usize, master_seed: u64) -> Result<PermutationDynamics> {
        let dynamics = match self {
            DynamicsSpec::Identity => PermutationDynamics::identity(cell_count)?,
            DynamicsSpec::CyclicShift { offset } => {
                PermutationDynamics::cyclic_shift(cell_count, *offset)?
            }
            DynamicsSpec::Random { seed } => {
                PermutationDynamics::random(seed.unwrap_or(master_seed), cell_count)?
            }
            DynamicsSpec::Explicit { map } => {
                if map.len() != cell_count {
                    return Err(CliError::Invalid(format!(
                        "explicit map has {} entries for {cell_count} cells",
                        map.len()
                    )));
                }
                PermutationDynamics::new(map.clone())?
            }
        };
        Ok(dynamics)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionSpec {
    /// Contiguous equal-measure blocks labelled D1..Dk.
    Equal { blocks: usize },
    Explicit {
        labels: Vec<String>,
        blocks: Vec<Vec<usize>>,
    },
}

impl PartitionSpec {
    pub fn build(&self, space: PhaseSpace) -> Result<MacrostatePartition> {
        let partition = match self {
            PartitionSpec::Equal { blocks } => MacrostatePartition::equal_measure(space, *blocks)?,
            PartitionSpec::Explicit { labels, blocks } => {
                let regions = blocks
                    .iter()
                    .map(|cells| space.region(cells.iter().copied()))
                    .collect::<arrowlab_core::Result<Vec<_>>>()?;
                MacrostatePartition::new(space, labels.clone(), regions)?
            }
        };
        Ok(partition)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Full,
    Cells { cells: Vec<usize> },
    Range { start: usize, end: usize },
    Block { label: String },
}

impl RegionSpec {
    pub fn build(&self, partition: &MacrostatePartition) -> Result<RegionSet> {
        let space = partition.space();
        let region = match self {
            RegionSpec::Full => space.full(),
            RegionSpec::Cells { cells } => space.region(cells.iter().copied())?,
            RegionSpec::Range { start, end } => space.range(*start, *end)?,
            RegionSpec::Block { label } => partition.block(label)?.clone(),
        };
        Ok(region)
    }
}

/// Phase space size, coarse-graining and dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub cell_count: usize,
    pub partition: PartitionSpec,
    pub dynamics: DynamicsSpec,
}

pub struct System {
    pub partition: MacrostatePartition,
    pub dynamics: PermutationDynamics,
}

impl SystemSpec {
    pub fn build(&self, master_seed: u64) -> Result<System> {
        let space = PhaseSpace::new(self.cell_count)?;
        Ok(System {
            partition: self.partition.build(space)?,
            dynamics: self.dynamics.build(self.cell_count, master_seed)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoTimeSpec {
    pub system: SystemSpec,
    pub epsilon0: RegionSpec,
    pub epsilon_t: RegionSpec,
    pub t: i64,
    pub final_time: i64,
}

impl Default for TwoTimeSpec {
    fn default() -> Self {
        TwoTimeSpec {
            system: SystemSpec {
                cell_count: 6,
                partition: PartitionSpec::Equal { blocks: 3 },
                dynamics: DynamicsSpec::CyclicShift { offset: 1 },
            },
            epsilon0: RegionSpec::Block { label: "D1".into() },
            epsilon_t: RegionSpec::Block { label: "D2".into() },
            t: 1,
            final_time: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyScanConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub svg: bool,
    #[serde(default = "default_p_values")]
    pub p_values: Vec<f64>,
    #[serde(default)]
    pub s_grid: GridSpec,
}

fn default_p_values() -> Vec<f64> {
    DEFAULT_P_VALUES.to_vec()
}

impl Default for EntropyScanConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            master_seed: 0,
            output_dir: default_output_dir(),
            format: OutputFormat::Csv,
            svg: false,
            p_values: default_p_values(),
            s_grid: GridSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoTimeConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub problem: TwoTimeSpec,
}

impl Default for TwoTimeConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            master_seed: 0,
            output_dir: default_output_dir(),
            format: OutputFormat::Csv,
            problem: TwoTimeSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RetrodictMode {
    /// Prior and likelihood column given directly.
    Abstract {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hypotheses: Option<Vec<String>>,
        prior: Vec<f64>,
        likelihoods: Vec<f64>,
        #[serde(default = "default_observed")]
        observed: String,
    },
    /// Likelihoods derived from the dynamics, one hypothesis per macrostate.
    Dynamical {
        system: SystemSpec,
        prior: Vec<f64>,
        observed: String,
        lag: i64,
    },
    FireAlarm {
        prior_fire: f64,
        prior_drill: f64,
    },
}

fn default_observed() -> String {
    "observed".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrodictConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "json_format")]
    pub format: OutputFormat,
    pub mode: RetrodictMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
}

impl Default for RetrodictConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            master_seed: 0,
            output_dir: default_output_dir(),
            format: OutputFormat::Json,
            mode: RetrodictMode::FireAlarm {
                prior_fire: 0.01,
                prior_drill: 0.1,
            },
            deltas: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSpec {
    pub s: f64,
    pub p: f64,
    pub trials: u64,
}

impl Default for MonteCarloSpec {
    fn default() -> Self {
        Self {
            s: 0.25,
            p: 0.5,
            trials: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheckConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_fixture_count")]
    pub two_time_fixtures: u64,
    #[serde(default = "default_fixture_count")]
    pub retrodiction_fixtures: u64,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
    #[serde(default)]
    pub monte_carlo: MonteCarloSpec,
    #[serde(default = "default_scenario_draws")]
    pub scenario_draws: u64,
    /// Extra hand-written two-time problems checked against enumeration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixtures: Vec<TwoTimeSpec>,
}

fn default_fixture_count() -> u64 {
    200
}

fn default_max_cells() -> usize {
    24
}

fn default_scenario_draws() -> u64 {
    100_000
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            master_seed: 0,
            output_dir: default_output_dir(),
            format: OutputFormat::Csv,
            two_time_fixtures: default_fixture_count(),
            retrodiction_fixtures: default_fixture_count(),
            max_cells: default_max_cells(),
            monte_carlo: MonteCarloSpec::default(),
            scenario_draws: default_scenario_draws(),
            fixtures: Vec::new(),
        }
    }
}

/// A fully resolved configuration for one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub enum CommandConfig {
    EntropyScan(EntropyScanConfig),
    TwoTime(TwoTimeConfig),
    Retrodict(RetrodictConfig),
    OracleCheck(OracleCheckConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    EntropyScan,
    TwoTime,
    Retrodict,
    OracleCheck,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::EntropyScan => "entropy-scan",
            CommandKind::TwoTime => "two-time",
            CommandKind::Retrodict => "retrodict",
            CommandKind::OracleCheck => "oracle-check",
        }
    }
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub svg: bool,
    pub format: Option<OutputFormat>,
}

fn parse_strict<T: DeserializeOwned>(value: Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| CliError::Invalid(format!("config: {e}")))
}

impl CommandConfig {
    pub fn kind(&self) -> CommandKind {
        match self {
            CommandConfig::EntropyScan(_) => CommandKind::EntropyScan,
            CommandConfig::TwoTime(_) => CommandKind::TwoTime,
            CommandConfig::Retrodict(_) => CommandKind::Retrodict,
            CommandConfig::OracleCheck(_) => CommandKind::OracleCheck,
        }
    }

    pub fn default_for(kind: CommandKind) -> Self {
        match kind {
            CommandKind::EntropyScan => CommandConfig::EntropyScan(Default::default()),
            CommandKind::TwoTime => CommandConfig::TwoTime(Default::default()),
            CommandKind::Retrodict => CommandConfig::Retrodict(Default::default()),
            CommandKind::OracleCheck => CommandConfig::OracleCheck(Default::default()),
        }
    }

    /// Parses a config, or the `config` embedded in a run manifest.
    pub fn from_json(kind: CommandKind, text: &str) -> Result<Self> {
        let mut value: Value =
            serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("config: {e}")))?;
        if value.get("manifest_version").is_some() {
            let command = value
                .get("command")
                .and_then(Value::as_str)
                .unwrap_or_default();
            if command != kind.name() {
                return Err(CliError::Invalid(format!(
                    "manifest was written by `{command}`, not `{}`",
                    kind.name()
                )));
            }
            value = value
                .get_mut("config")
                .map(Value::take)
                .ok_or_else(|| CliError::Invalid("manifest has no `config`".into()))?;
        }
        let config = match kind {
            CommandKind::EntropyScan => CommandConfig::EntropyScan(parse_strict(value)?),
            CommandKind::TwoTime => CommandConfig::TwoTime(parse_strict(value)?),
            CommandKind::Retrodict => CommandConfig::Retrodict(parse_strict(value)?),
            CommandKind::OracleCheck => CommandConfig::OracleCheck(parse_strict(value)?),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(kind: CommandKind, path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(kind, &text)
    }

    pub fn to_json(&self) -> Value {
        let value = match self {
            CommandConfig::EntropyScan(c) => serde_json::to_value(c),
            CommandConfig::TwoTime(c) => serde_json::to_value(c),
            CommandConfig::Retrodict(c) => serde_json::to_value(c),
            CommandConfig::OracleCheck(c) => serde_json::to_value(c),
        };
        value.expect("configs serialise to JSON")
    }

    pub fn schema_version(&self) -> u32 {
        match self {
            CommandConfig::EntropyScan(c) => c.schema_version,
            CommandConfig::TwoTime(c) => c.schema_version,
            CommandConfig::Retrodict(c) => c.schema_version,
            CommandConfig::OracleCheck(c) => c.schema_version,
        }
    }

    /// Schema version plus the structural checks that need no computation,
    /// so malformed explicit maps fail at load time.
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version())?;
        let systems: Vec<&SystemSpec> = match self {
            CommandConfig::EntropyScan(_) => Vec::new(),
            CommandConfig::TwoTime(c) => vec![&c.problem.system],
            CommandConfig::Retrodict(c) => match &c.mode {
                RetrodictMode::Dynamical { system, .. } => vec![system],
                _ => Vec::new(),
            },
            CommandConfig::OracleCheck(c) => c.fixtures.iter().map(|f| &f.system).collect(),
        };
        for system in systems {
            if let DynamicsSpec::Explicit { .. } = system.dynamics {
                system.dynamics.build(system.cell_count, 0)?;
            }
        }
        Ok(())
    }

    pub fn output_dir(&self) -> &Path {
        match self {
            CommandConfig::EntropyScan(c) => &c.output_dir,
            CommandConfig::TwoTime(c) => &c.output_dir,
            CommandConfig::Retrodict(c) => &c.output_dir,
            CommandConfig::OracleCheck(c) => &c.output_dir,
        }
    }

    pub fn apply(&mut self, overrides: &Overrides) -> Result<()> {
        let (seed, out, format) = match self {
            CommandConfig::EntropyScan(c) => {
                c.svg |= overrides.svg;
                (&mut c.master_seed, &mut c.output_dir, &mut c.format)
            }
            CommandConfig::TwoTime(c) => (&mut c.master_seed, &mut c.output_dir, &mut c.format),
            CommandConfig::Retrodict(c) => (&mut c.master_seed, &mut c.output_dir, &mut c.format),
            CommandConfig::OracleCheck(c) => (&mut c.master_seed, &mut c.output_dir, &mut c.format),
        };
        if let Some(s) = overrides.seed {
            *seed = s;
        }
        if let Some(o) = &overrides.out {
            *out = o.clone();
        }
        if let Some(f) = overrides.format {
            *format = f;
        }
        if overrides.svg && self.kind() != CommandKind::EntropyScan {
            return Err(CliError::Invalid(
                "--svg applies to entropy-scan only".into(),
            ));
        }
        Ok(())
    }
}
