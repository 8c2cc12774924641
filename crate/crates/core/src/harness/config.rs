//! Declarative experiment configuration (JSON or TOML).
//!
//! Every field is addressable through dotted `--set` overrides, applied on
//! the generic JSON tree before the typed parse so errors carry field paths.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::comms::AttackStrategy;
use crate::error::{Error, Result};
use crate::learning::ScheduleParams;
use crate::mdp::{ActionPair, BehaviorPolicy, RestartRule};
use crate::rng::{derive_seed, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub mdp: MdpSpec,
    pub graph: GraphSpec,
    pub algorithm: Algorithm,
    pub attack: AttackSpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    pub horizon: u64,
    #[serde(default)]
    pub seeds: SeedSpec,
    #[serde(default)]
    pub behavior: BehaviorSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub assertions: AssertionSpec,
    #[serde(default)]
    pub metrics: MetricsSpec,
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MdpSpec {
    TaskAssignment {
        n: usize,
    },
    /// A serialized model document.
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    /// Clique on `0..r` with the remaining nodes attached to all of it.
    Construct {
        n: usize,
        r: usize,
    },
    EdgeList {
        path: PathBuf,
    },
    /// One edge list per step, cycled.
    Schedule {
        paths: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Frqd,
    Qd,
    TrimBaseline,
    LaplacianReference,
}

impl Algorithm {
    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Frqd => "frqd",
            Algorithm::Qd => "qd",
            Algorithm::TrimBaseline => "trim_baseline",
            Algorithm::LaplacianReference => "laplacian_reference",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Algorithm::Frqd,
            Algorithm::Qd,
            Algorithm::TrimBaseline,
            Algorithm::LaplacianReference,
        ]
        .into_iter()
        .find(|a| a.id() == s)
        .ok_or_else(|| Error::arg(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub strategy: AttackStrategy,
    pub f: usize,
    /// Replay an explicit plan instead of drawing one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    /// Defaults to `1/n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Defaults to `1/n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub tau1: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// Overrides `τ₁ - 1/(2+ε₁) - ε₂`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau2: Option<f64>,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec {
            a: None,
            b: None,
            tau1: 1.0,
            eps1: 1e-4,
            eps2: 1e-4,
            tau2: None,
        }
    }
}

impl ScheduleSpec {
    pub fn resolve(&self, n: usize) -> Result<ScheduleParams> {
        let a = self.a.unwrap_or(1.0 / n as f64);
        let b = self.b.unwrap_or(1.0 / n as f64);
        let tau2 = self.tau2.unwrap_or(self.tau1 - 1.0 / (2.0 + self.eps1) - self.eps2);
        ScheduleParams::new(a, b, self.tau1, tau2, self.eps1).map_err(|e| Error::config("schedule", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub master: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<u64>,
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec {
            master: 2024,
            costs: None,
            attack: None,
            init: None,
            trajectory: None,
        }
    }
}

/// Concrete per-stream seeds after derivation from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedSeeds {
    pub master: u64,
    pub costs: u64,
    pub attack: u64,
    pub init: u64,
    pub trajectory: u64,
}

impl SeedSpec {
    pub fn resolve(&self) -> ResolvedSeeds {
        let pick = |o: Option<u64>, s| o.unwrap_or_else(|| derive_seed(self.master, s));
        ResolvedSeeds {
            master: self.master,
            costs: pick(self.costs, Stream::Costs),
            attack: pick(self.attack, Stream::Attack),
            init: pick(self.init, Stream::Init),
            trajectory: pick(self.trajectory, Stream::Trajectory),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BehaviorSpec {
    #[serde(default)]
    pub policy: BehaviorPolicy,
    #[serde(default)]
    pub restart: RestartRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub report: bool,
    #[serde(default)]
    pub trajectory_csv: bool,
    /// Emit trace rows every this many steps.
    #[serde(default = "one")]
    pub trace_stride: u64,
    #[serde(default)]
    pub svg: bool,
    #[serde(default)]
    pub mdp_json: bool,
}

fn yes() -> bool {
    true
}

fn one() -> u64 {
    1
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            report: true,
            trajectory_csv: false,
            trace_stride: 1,
            svg: false,
            mdp_json: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertionSpec {
    #[serde(default)]
    pub lemma2_bound: bool,
    #[serde(default)]
    pub filter_soundness: bool,
    #[serde(default)]
    pub filter_symmetry: bool,
    #[serde(default)]
    pub equivalence_check: bool,
    #[serde(default = "default_equivalence_tolerance")]
    pub equivalence_tolerance: f64,
    /// Stop at the first violation instead of counting.
    #[serde(default = "yes")]
    pub fail_fast: bool,
}

fn default_equivalence_tolerance() -> f64 {
    1e-12
}

impl Default for AssertionSpec {
    fn default() -> Self {
        AssertionSpec {
            lemma2_bound: false,
            filter_soundness: false,
            filter_symmetry: false,
            equivalence_check: false,
            equivalence_tolerance: default_equivalence_tolerance(),
            fail_fast: true,
        }
    }
}

impl AssertionSpec {
    pub fn any_filter_check(&self) -> bool {
        self.lemma2_bound || self.filter_soundness || self.filter_symmetry
    }
}

/// A state-action entry whose per-agent trajectory is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackedEntry {
    /// 1-based state label.
    pub state: usize,
    pub action: ActionPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSpec {
    /// Record the error once every non-terminal pair reaches each count.
    #[serde(default = "default_checkpoints")]
    pub visit_checkpoints: Vec<u64>,
    #[serde(default = "default_tracked")]
    pub tracked: Vec<TrackedEntry>,
    /// Density of the logarithmic sampling grid.
    #[serde(default = "default_points_per_decade")]
    pub points_per_decade: u32,
}

fn default_checkpoints() -> Vec<u64> {
    vec![30, 100, 300]
}

fn default_tracked() -> Vec<TrackedEntry> {
    vec![
        TrackedEntry {
            state: 1,
            action: ActionPair(0, 1),
        },
        TrackedEntry {
            state: 1,
            action: ActionPair(0, 2),
        },
    ]
}

fn default_points_per_decade() -> u32 {
    20
}

impl Default for MetricsSpec {
    fn default() -> Self {
        MetricsSpec {
            visit_checkpoints: default_checkpoints(),
            tracked: default_tracked(),
            points_per_decade: default_points_per_decade(),
        }
    }
}

impl ExperimentConfig {
    /// The experiment topology and task with the given algorithm: ten agents
    /// on the clique-plus-attachments graph with `r = 7`, one compromised
    /// edge per round.
    pub fn reference(algorithm: Algorithm) -> Self {
        ExperimentConfig {
            name: format!("reference-{}", algorithm.id()),
            mdp: MdpSpec::TaskAssignment { n: 10 },
            graph: GraphSpec::Construct { n: 10, r: 7 },
            algorithm,
            attack: AttackSpec {
                strategy: AttackStrategy::ExtremeThenFalsified,
                f: 1,
                plan_path: None,
            },
            schedule: ScheduleSpec::default(),
            horizon: 1_500_000,
            seeds: SeedSpec::default(),
            behavior: BehaviorSpec::default(),
            outputs: OutputSpec::default(),
            assertions: AssertionSpec::default(),
            metrics: MetricsSpec::default(),
        }
    }

    pub fn agent_count(&self) -> Option<usize> {
        match &self.mdp {
            MdpSpec::TaskAssignment { n } => Some(*n),
            MdpSpec::File { .. } => None,
        }
    }

    /// Checks everything that does not require touching the filesystem.
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be at least 1"));
        }
        if self.outputs.trace_stride == 0 {
            return Err(Error::config("outputs.trace_stride", "must be at least 1"));
        }
        if self.metrics.points_per_decade == 0 {
            return Err(Error::config("metrics.points_per_decade", "must be at least 1"));
        }
        if !(self.assertions.equivalence_tolerance >= 0.0) {
            return Err(Error::config(
                "assertions.equivalence_tolerance",
                "must be non-negative",
            ));
        }
        if let MdpSpec::TaskAssignment { n } = self.mdp {
            if n < 2 {
                return Err(Error::config("mdp.n", "task assignment needs at least 2 agents"));
            }
            self.schedule.resolve(n)?;
            if let GraphSpec::Construct { n: gn, r } = self.graph {
                if gn != n {
                    return Err(Error::config(
                        "graph.n",
                        format!("graph has {gn} nodes but the MDP has {n} agents"),
                    ));
                }
                if r == 0 || gn <= r {
                    return Err(Error::config("graph.r", "construction requires n > r >= 1"));
                }
            }
        }
        if let GraphSpec::Schedule { paths } = &self.graph {
            if paths.is_empty() {
                return Err(Error::config("graph.paths", "schedule needs at least one edge list"));
            }
        }
        if self.assertions.equivalence_check && self.algorithm != Algorithm::Frqd {
            return Err(Error::config(
                "assertions.equivalence_check",
                "only applies to the frqd algorithm",
            ));
        }
        if self.assertions.any_filter_check() && self.algorithm != Algorithm::Frqd {
            return Err(Error::config(
                "assertions",
                "filter assertions only apply to the frqd algorithm",
            ));
        }
        Ok(())
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let config: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            Error::config(
                if path == "." { String::new() } else { path },
                e.into_inner().to_string(),
            )
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn parse(text: &str, format: ConfigFormat) -> Result<Self> {
        Self::from_value(parse_tree(text, format)?)
    }

    /// Loads a config file, applies `key=value` overrides, resolves relative
    /// paths against the file's directory, and validates.
    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut tree = parse_tree(&text, ConfigFormat::from_path(path))?;
        for o in overrides {
            apply_override(&mut tree, o)?;
        }
        let mut config = Self::from_value(tree)?;
        if let Some(base) = path.parent() {
            config.rebase_paths(base);
        }
        Ok(config)
    }

    fn rebase_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.mdp {
            MdpSpec::File { path } => fix(path),
            MdpSpec::TaskAssignment { .. } => {}
        }
        match &mut self.graph {
            GraphSpec::EdgeList { path } => fix(path),
            GraphSpec::Schedule { paths } => paths.iter_mut().for_each(fix),
            GraphSpec::Construct { .. } => {}
        }
        if let Some(p) = &mut self.attack.plan_path {
            fix(p);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::config("", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigFormat {
    Json,
    Toml,
}

impl ConfigFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => ConfigFormat::Json,
            _ => ConfigFormat::Toml,
        }
    }
}

fn parse_tree(text: &str, format: ConfigFormat) -> Result<Value> {
    match format {
        ConfigFormat::Json => serde_json::from_str(text).map_err(|e| Error::config("", e.to_string())),
        ConfigFormat::Toml => toml::from_str::<Value>(text).map_err(|e| Error::config("", e.to_string())),
    }
}

/// Applies `dotted.path=value`. The value is read as JSON when it parses,
/// otherwise as a bare string.
pub fn apply_override(tree: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::config(assignment, "empty override key"));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));

    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    for (depth, part) in parts.iter().enumerate() {
        if !node.is_object() {
            return Err(Error::config(
                parts[..depth].join("."),
                "cannot descend into a non-table value",
            ));
        }
        let map = node.as_object_mut().expect("checked above");
        if depth + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}
