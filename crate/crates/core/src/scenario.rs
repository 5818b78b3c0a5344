//! Scenario files: parsing, overrides, assumption checks, and the bundled
//! reproduction scenarios.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attacks::{
    validate_attack_model, AdversaryMode, AdversarySpec, AttackModel, DoSSchedule, Edge, PeriodicDos, ResidualSpec,
    Signal,
};
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::graph::{check_r_robust, check_rs_robust, Digraph, NodeId, Role, MAX_ENUMERATION_NODES};
use crate::optimization::{
    check_redundancy, grid_minimizer, subgradient_bound, CostExpr, CostFunction, GridBox, StepSchedule,
};
use crate::protocol::{check_weight, Policy, DEFAULT_C};

pub const DEFAULT_HORIZON: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Consensus,
    Optimization,
}

fn default_policy() -> Policy {
    Policy::HoldLast
}

fn default_attack_model() -> AttackModel {
    AttackModel::FLocal
}

fn default_c() -> f64 {
    DEFAULT_C
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

fn default_t_d() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub mode: Mode,
    #[serde(default = "default_policy")]
    pub policy: Policy,
    pub dim: usize,
    pub faults: usize,
    #[serde(default = "default_attack_model")]
    pub attack_model: AttackModel,
    pub alpha: f64,
    /// Optional time-varying weight, cycled over rounds for every benign agent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_schedule: Option<Vec<f64>>,
    #[serde(default = "default_c")]
    pub c: f64,
    /// Sampling period `T` in seconds.
    pub period: f64,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub steps: StepSchedule,
    #[serde(default)]
    pub residual: ResidualSpec,
    #[serde(default)]
    pub dos: DosConfig,
    #[serde(rename = "agent")]
    pub agents: Vec<AgentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DosConfig {
    #[serde(default)]
    pub mu_d: f64,
    #[serde(default = "default_t_d")]
    pub t_d: f64,
    #[serde(default, rename = "generator", skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<PeriodicDos>,
    #[serde(default, rename = "interval", skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<DosInterval>,
}

impl Default for DosConfig {
    fn default() -> Self {
        DosConfig {
            mu_d: 0.0,
            t_d: default_t_d(),
            generators: Vec::new(),
            intervals: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DosInterval {
    pub edge: Edge,
    pub start: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub id: NodeId,
    #[serde(default = "benign")]
    pub role: Role,
    #[serde(default)]
    pub in_neighbors: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostExpr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversaryConfig>,
}

fn benign() -> Role {
    Role::Benign
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    pub mode: AdversaryMode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trajectory: Vec<Signal>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_target: BTreeMap<String, Vec<Signal>>,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(format!("cannot serialize scenario: {e}")))
    }

    /// Parses `text` after applying `key=value` overrides to the document.
    pub fn from_toml_with(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        if overrides.is_empty() {
            return Self::from_toml(text);
        }
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        apply_overrides(&mut doc, overrides)?;
        let value = toml::Value::Table(doc);
        value.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn digest(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }
}

/// Scenario keys that `--set key=value` may change.
pub const OVERRIDABLE_KEYS: &[&str] = &[
    "name",
    "mode",
    "policy",
    "dim",
    "faults",
    "attack_model",
    "alpha",
    "alpha_schedule",
    "c",
    "period",
    "horizon",
    "seed",
    "dos.mu_d",
    "dos.t_d",
    "residual.default.form",
    "residual.default.scale",
    "residual.default.rate",
    "steps.form",
    "steps.a",
    "steps.b",
    "steps.c0",
    "steps.value",
];

/// Parses `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidParameter(format!("override {s:?} is not key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Sets documented keys in a parsed scenario document. Unknown keys are errors.
pub fn apply_overrides(doc: &mut toml::Table, overrides: &[(String, String)]) -> Result<()> {
    for (key, raw) in overrides {
        if !OVERRIDABLE_KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "unknown override key {key:?}; allowed: {}",
                OVERRIDABLE_KEYS.join(", ")
            )));
        }
        let mut parts: Vec<&str> = key.split('.').collect();
        let last = parts.pop().expect("split yields at least one part");
        let mut table = &mut *doc;
        for p in parts {
            let entry = table
                .entry(p.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry
                .as_table_mut()
                .ok_or_else(|| Error::InvalidParameter(format!("override {key:?}: {p} is not a table")))?;
        }
        table.insert(last.to_string(), parse_value(raw));
    }
    Ok(())
}

/// Outcome of one assumption or definition check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub title: String,
    pub passed: bool,
    /// Advisory checks are reported but do not reject the scenario.
    pub advisory: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn push(&mut self, id: &str, title: &str, advisory: bool, outcome: std::result::Result<String, String>) {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(Check {
            id: id.into(),
            title: title.into(),
            passed,
            advisory,
            detail,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.advisory)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed && !c.advisory)
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = match (c.passed, c.advisory) {
                (true, _) => "pass",
                (false, true) => "warn",
                (false, false) => "FAIL",
            };
            writeln!(f, "{status:4} {:<13} {}: {}", c.id, c.title, c.detail)?;
        }
        Ok(())
    }
}

/// A parsed scenario with its derived objects and assumption report.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub graph: Digraph,
    /// Initial states of benign agents.
    pub initial: BTreeMap<NodeId, Vec<f64>>,
    pub alphas: BTreeMap<NodeId, f64>,
    pub adversaries: BTreeMap<NodeId, AdversarySpec>,
    pub dos: DoSSchedule,
    pub costs: BTreeMap<NodeId, CostFunction>,
    pub report: ValidationReport,
}

impl Scenario {
    /// Builds and validates. Fails when any non-advisory check fails.
    pub fn from_config(config: ScenarioConfig) -> Result<Self> {
        let s = Self::build(config)?;
        if !s.report.passed() {
            return Err(Error::Validation(s.report.to_string()));
        }
        Ok(s)
    }

    /// Builds the scenario objects and runs every check without rejecting.
    /// Structural errors (ids, dimensions, malformed specs) still fail.
    pub fn build(config: ScenarioConfig) -> Result<Self> {
        let n = config.agents.len();
        if n == 0 {
            return Err(Error::Validation("scenario has no agents".into()));
        }
        if config.dim == 0 {
            return Err(Error::Validation("dim must be at least 1".into()));
        }
        let ids: BTreeSet<NodeId> = config.agents.iter().map(|a| a.id).collect();
        if ids.len() != n || ids != (1..=n).collect() {
            return Err(Error::Validation(format!("agent ids must be exactly 1..={n}, each once")));
        }
        let mut agents: Vec<&AgentConfig> = config.agents.iter().collect();
        agents.sort_by_key(|a| a.id);

        let edges = agents
            .iter()
            .flat_map(|a| a.in_neighbors.iter().map(move |&j| (a.id, j)));
        let adversarial = agents.iter().filter(|a| a.role == Role::Adversarial).map(|a| a.id);
        let graph = Digraph::new(n, edges, adversarial)?;
        let d = config.dim;

        let mut initial = BTreeMap::new();
        let mut alphas = BTreeMap::new();
        let mut adversaries = BTreeMap::new();
        let mut costs = BTreeMap::new();
        for a in &agents {
            if let Some(x) = &a.initial {
                if x.len() != d || x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Validation(format!(
                        "agent {}: initial state must have {d} finite coordinates",
                        a.id
                    )));
                }
            }
            match a.role {
                Role::Benign => {
                    if a.adversary.is_some() {
                        return Err(Error::Validation(format!("benign agent {} has an adversary spec", a.id)));
                    }
                    let x = a
                        .initial
                        .clone()
                        .ok_or_else(|| Error::Validation(format!("benign agent {} has no initial state", a.id)))?;
                    initial.insert(a.id, x);
                    alphas.insert(a.id, a.alpha.unwrap_or(config.alpha));
                    if let Some(expr) = &a.cost {
                        expr.validate(d)
                            .map_err(|e| Error::Validation(format!("agent {} cost: {e}", a.id)))?;
                        costs.insert(
                            a.id,
                            CostFunction {
                                owner: a.id,
                                expr: expr.clone(),
                            },
                        );
                    }
                }
                Role::Adversarial => {
                    let spec = adversary_spec(a, d)?;
                    for t in spec.per_target.keys() {
                        if !graph.has_edge(*t, a.id) {
                            return Err(Error::Validation(format!(
                                "adversary {}: per-target override for {t}, which does not receive from it",
                                a.id
                            )));
                        }
                    }
                    adversaries.insert(a.id, spec);
                }
            }
        }
        if initial.is_empty() {
            return Err(Error::Validation("scenario has no benign agents".into()));
        }
        if config.mode == Mode::Optimization {
            if let Some(i) = initial.keys().find(|i| !costs.contains_key(i)) {
                return Err(Error::Validation(format!(
                    "optimization mode: benign agent {i} has no cost function"
                )));
            }
        }
        if !(config.period > 0.0) || !config.period.is_finite() {
            return Err(Error::Validation(format!("period {} must be positive", config.period)));
        }
        if config.horizon == 0 {
            return Err(Error::Validation("horizon must be at least one round".into()));
        }

        let end = config.horizon as f64 * config.period;
        let mut dos = DoSSchedule::new(config.dos.mu_d, config.dos.t_d)
            .map_err(|e| Error::Validation(format!("DoS parameters: {e}")))?;
        for g in &config.dos.generators {
            check_edges(&graph, &g.edges)?;
            dos.add_periodic(g, end)
                .map_err(|e| Error::Validation(e.to_string()))?;
        }
        for iv in &config.dos.intervals {
            check_edges(&graph, &[iv.edge])?;
            dos.add_interval(iv.edge, iv.start, iv.duration)
                .map_err(|e| Error::Validation(e.to_string()))?;
        }

        let mut s = Scenario {
            config,
            graph,
            initial,
            alphas,
            adversaries,
            dos,
            costs,
            report: ValidationReport::default(),
        };
        s.report = s.run_checks();
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn faults(&self) -> usize {
        self.config.faults
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    pub fn policy(&self) -> Policy {
        self.config.policy
    }

    pub fn period(&self) -> f64 {
        self.config.period
    }

    pub fn horizon(&self) -> usize {
        self.config.horizon
    }

    pub fn benign(&self) -> Vec<NodeId> {
        self.initial.keys().copied().collect()
    }

    /// Copy with a different DoS policy.
    pub fn with_policy(&self, policy: Policy) -> Self {
        let mut s = self.clone();
        s.config.policy = policy;
        s
    }

    /// Weight used by agent `i` at round `k`.
    pub fn alpha_at(&self, i: NodeId, k: usize) -> f64 {
        match &self.config.alpha_schedule {
            Some(seq) if !seq.is_empty() => seq[k % seq.len()],
            _ => self.alphas.get(&i).copied().unwrap_or(self.config.alpha),
        }
    }

    pub fn initial_benign_set(&self) -> Result<PointSet> {
        PointSet::from_tagged(self.initial.iter().map(|(&i, x)| (i, x.clone())))
    }

    pub fn digest(&self) -> Result<String> {
        self.config.digest()
    }

    /// Benign cost functions in id order.
    pub fn benign_costs(&self) -> Vec<CostFunction> {
        self.costs.values().cloned().collect()
    }

    /// Bounding box of the benign initial states, padded on every side by
    /// half its widest side (at least 1).
    pub fn validity_box(&self) -> GridBox {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for x in self.initial.values() {
            for c in 0..d {
                lo[c] = lo[c].min(x[c]);
                hi[c] = hi[c].max(x[c]);
            }
        }
        let pad = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| h - l)
            .fold(0.0f64, f64::max)
            * 0.5;
        let pad = pad.max(1.0);
        GridBox {
            lo: lo.iter().map(|v| v - pad).collect(),
            hi: hi.iter().map(|v| v + pad).collect(),
        }
    }

    fn run_checks(&self) -> ValidationReport {
        let cfg = &self.config;
        let (d, f) = (cfg.dim, cfg.faults);
        let mut r = ValidationReport::default();

        let mut weights: Vec<(String, f64)> = self.alphas.iter().map(|(i, a)| (format!("agent {i}"), *a)).collect();
        if let Some(seq) = &cfg.alpha_schedule {
            weights.extend(seq.iter().enumerate().map(|(k, a)| (format!("alpha_schedule[{k}]"), *a)));
        }
        let bad: Vec<String> = weights
            .iter()
            .filter_map(|(who, a)| check_weight(*a, cfg.c).err().map(|e| format!("{who}: {e}")))
            .collect();
        r.push(
            "weights",
            "weight constraint 1-c < alpha < c",
            false,
            if bad.is_empty() {
                Ok(format!("{} weights inside ({}, {})", weights.len(), 1.0 - cfg.c, cfg.c))
            } else {
                Err(bad.join("; "))
            },
        );

        r.push(
            "assumption-1",
            "summable residuals",
            false,
            cfg.residual
                .validate(d)
                .map(|_| "every residual form is summable".to_string())
                .map_err(|e| e.to_string()),
        );

        let need = (d + 1) * f + 1;
        let short: Vec<String> = self
            .benign()
            .into_iter()
            .filter_map(|i| {
                let deg = self.graph.in_neighbors(i).map(|s| s.len()).unwrap_or(0);
                (deg < need).then(|| format!("agent {i} has {deg}"))
            })
            .collect();
        r.push(
            "assumption-2",
            "in-degree at least (d+1)F+1",
            false,
            if short.is_empty() {
                Ok(format!("every benign agent has at least {need} in-neighbors"))
            } else {
                Err(format!("need {need}: {}", short.join(", ")))
            },
        );

        let end = cfg.horizon as f64 * cfg.period;
        let excess = self.dos.max_window_excess(0.0, end);
        let whole = self.dos.blocked_measure(0.0, end);
        r.push(
            "assumption-3",
            "DoS duration bound",
            false,
            if excess <= self.dos.mu_d + 1e-9 {
                Ok(format!(
                    "blocked {whole:.3} s of {end} s; worst window excess {excess:.3} <= mu_d = {}",
                    self.dos.mu_d
                ))
            } else {
                Err(format!(
                    "some window exceeds mu_d + len/T_d by {:.3} s (worst excess {excess:.3}, mu_d = {}, T_d = {})",
                    excess - self.dos.mu_d,
                    self.dos.mu_d,
                    self.dos.t_d
                ))
            },
        );

        let model_ok = validate_attack_model(&self.graph, f, cfg.attack_model);
        r.push(
            "attack-model",
            "adversary count within F",
            false,
            if model_ok {
                Ok(format!(
                    "{} adversaries, F = {f}, {:?}",
                    self.adversaries.len(),
                    cfg.attack_model
                ))
            } else {
                Err(match cfg.attack_model {
                    AttackModel::FTotal => format!("{} adversaries exceed F = {f}", self.adversaries.len()),
                    AttackModel::FLocal => {
                        let over: Vec<String> = self
                            .benign()
                            .into_iter()
                            .filter_map(|i| {
                                let k = self
                                    .graph
                                    .in_neighbors(i)
                                    .map(|s| s.iter().filter(|j| !self.graph.is_benign(**j)).count())
                                    .unwrap_or(0);
                                (k > f).then(|| format!("agent {i} hears {k}"))
                            })
                            .collect();
                        format!("more than F = {f} adversarial in-neighbors: {}", over.join(", "))
                    }
                })
            },
        );

        if cfg.mode == Mode::Optimization {
            let costs = self.benign_costs();
            let bounds = self.validity_box();
            let res = grid_resolution(&bounds, 200);
            r.push(
                "assumption-4",
                "bounded subgradients",
                false,
                match subgradient_bound(&costs, &bounds, res) {
                    Ok(l) if l.is_finite() => Ok(format!("L = {l:.4} over the padded initial box")),
                    Ok(l) => Err(format!("subgradient norm {l} on the padded initial box")),
                    Err(e) => Err(e.to_string()),
                },
            );
            r.push(
                "assumption-5",
                "step-size schedule",
                false,
                cfg.steps
                    .validate(cfg.period)
                    .map(|_| format!("{:?}", cfg.steps))
                    .map_err(|e| e.to_string()),
            );
            r.push(
                "assumption-6",
                "bounded nonempty minimizer set",
                true,
                match grid_minimizer(&costs, &bounds, res) {
                    Ok((p, _)) => {
                        let edge = p.iter().enumerate().any(|(c, v)| {
                            (v - bounds.lo[c]).abs() < res * 0.5 || (bounds.hi[c] - v).abs() < res * 0.5
                        });
                        if edge {
                            Err(format!("grid minimizer {p:?} sits on the search box boundary"))
                        } else {
                            Ok(format!("grid minimizer {p:?} is interior"))
                        }
                    }
                    Err(e) => Err(e.to_string()),
                },
            );
        }

        let n = self.graph.node_count();
        let (rr, rs) = ((d + 1) * f + 1, (d * f + 1, f + 1));
        if n > MAX_ENUMERATION_NODES {
            r.push(
                "definition-1",
                "robustness",
                true,
                Err(format!("{n} nodes exceed the exhaustive-check limit")),
            );
        } else {
            let outcome = match cfg.attack_model {
                AttackModel::FLocal => check_r_robust(&self.graph, rr.min(n)).map(|c| (c, format!("{rr}-robust"))),
                AttackModel::FTotal => check_rs_robust(&self.graph, rs.0.min(n), rs.1.min(n))
                    .map(|c| (c, format!("({}, {})-robust", rs.0, rs.1))),
            };
            let (id, title) = match cfg.attack_model {
                AttackModel::FLocal => ("definition-1", "r-robust digraph"),
                AttackModel::FTotal => ("definition-2", "(r,s)-robust digraph"),
            };
            r.push(
                id,
                title,
                true,
                match outcome {
                    Ok((c, what)) if c.holds && rr <= n => Ok(format!("graph is {what}")),
                    Ok((c, what)) => Err(match c.witness {
                        Some((a, b)) => format!("graph is not {what}; violating pair {a:?} / {b:?}"),
                        None => format!("graph is not {what}: needs more than {n} nodes"),
                    }),
                    Err(e) => Err(e.to_string()),
                },
            );
        }

        if cfg.mode == Mode::Optimization {
            let costs = self.benign_costs();
            let bounds = self.validity_box();
            let res = grid_resolution(&bounds, 100);
            r.push(
                "definition-3",
                "F-redundant local costs",
                true,
                if f >= costs.len() {
                    Err(format!("F = {f} leaves no benign cost to compare"))
                } else {
                    match check_redundancy(&costs, f, &bounds, res) {
                        Ok(true) => Ok(format!("all {}-subsets share a grid minimizer set", costs.len() - f)),
                        Ok(false) => Err(format!(
                            "subsets of {} benign costs have different grid minimizers (resolution {res:.3})",
                            costs.len() - f
                        )),
                        Err(e) => Err(e.to_string()),
                    }
                },
            );
        }
        r
    }
}

/// Spacing giving about `cells` cells along the widest side of the box.
fn grid_resolution(b: &GridBox, cells: usize) -> f64 {
    let widest = b.lo.iter().zip(&b.hi).map(|(l, h)| h - l).fold(0.0f64, f64::max);
    widest / cells as f64
}

fn check_edges(g: &Digraph, edges: &[Edge]) -> Result<()> {
    for &(i, j) in edges {
        if !g.has_edge(i, j) {
            return Err(Error::Validation(format!("DoS target ({i}, {j}) is not an edge of the graph")));
        }
    }
    Ok(())
}

fn adversary_spec(a: &AgentConfig, d: usize) -> Result<AdversarySpec> {
    let cfg = a
        .adversary
        .as_ref()
        .ok_or_else(|| Error::Validation(format!("adversarial agent {} has no adversary spec", a.id)))?;
    let trajectory = if cfg.mode == AdversaryMode::Stubborn && cfg.trajectory.is_empty() {
        let x = a.initial.as_ref().ok_or_else(|| {
            Error::Validation(format!("stubborn agent {} needs an initial state or a trajectory", a.id))
        })?;
        x.iter().map(|&value| Signal::Constant { value }).collect()
    } else {
        cfg.trajectory.clone()
    };
    let mut per_target = BTreeMap::new();
    for (k, v) in &cfg.per_target {
        let t: NodeId = k
            .parse()
            .map_err(|_| Error::Validation(format!("adversary {}: per-target key {k:?} is not a node id", a.id)))?;
        per_target.insert(t, v.clone());
    }
    let spec = AdversarySpec {
        agent: a.id,
        mode: cfg.mode,
        trajectory,
        per_target,
        seed: cfg.seed,
    };
    spec.validate(d).map_err(|e| Error::Validation(e.to_string()))?;
    Ok(spec)
}

/// Scenario files shipped with the library.
pub mod bundled {
    pub const TABLE1_CONSENSUS: &str = include_str!("../scenarios/table1_consensus.toml");
    pub const TABLE1_ZERO_SUBSTITUTE: &str = include_str!("../scenarios/table1_zero_substitute.toml");
    pub const TABLE1_OPTIMIZATION: &str = include_str!("../scenarios/table1_optimization.toml");
    pub const SHARED_MINIMIZER: &str = include_str!("../scenarios/shared_minimizer.toml");

    pub const ALL: &[(&str, &str)] = &[
        ("table1_consensus", TABLE1_CONSENSUS),
        ("table1_zero_substitute", TABLE1_ZERO_SUBSTITUTE),
        ("table1_optimization", TABLE1_OPTIMIZATION),
        ("shared_minimizer", SHARED_MINIMIZER),
    ];

    pub fn get(name: &str) -> Option<&'static str> {
        ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
    }
}

/// Prefix selecting a bundled scenario instead of a file path.
pub const BUILTIN_PREFIX: &str = "builtin:";

/// Reads a scenario file (or `builtin:<name>`), applies overrides, builds it,
/// and rejects it if any required assumption fails.
pub fn load_scenario(path: impl AsRef<Path>, overrides: &[(String, String)]) -> Result<Scenario> {
    Scenario::from_config(read_config(path, overrides)?)
}

/// Parses a scenario file (or `builtin:<name>`) with overrides applied.
pub fn read_config(path: impl AsRef<Path>, overrides: &[(String, String)]) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = match path.to_str().and_then(|s| s.strip_prefix(BUILTIN_PREFIX)) {
        Some(name) => bundled::get(name)
            .ok_or_else(|| Error::InvalidParameter(format!("no bundled scenario named {name:?}")))?
            .to_string(),
        None => std::fs::read_to_string(path)?,
    };
    ScenarioConfig::from_toml_with(&text, overrides).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}
