//! Synchronous round loop, trace recording, and policy comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::analysis::{diameter_of, MetricsRow, VALIDITY_TOL};
use crate::attacks::{adversary_emit, is_blocked, residual_sample};
use crate::error::{Error, Result};
use crate::geometry::hull_distance;
use crate::graph::{NodeId, Role};
use crate::optimization::{global_cost, step_size_unchecked, CostFunction};
use crate::protocol::{collect_states, consensus_input, optimization_input, step, AgentState, Policy, Reception};
use crate::scenario::{Mode, Scenario};

/// Diameter threshold used for rounds-to-tolerance in summaries.
pub const AGREEMENT_TOL: f64 = 1e-2;

/// One agent at one round: its state at `t_k` and, for benign agents, the
/// input it applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentRecord {
    pub k: usize,
    pub t: f64,
    pub agent: NodeId,
    pub role: Role,
    pub x: Vec<f64>,
    pub u: Option<Vec<f64>>,
    pub aux: Option<Vec<f64>>,
    /// Number of this agent's in-edges blocked at `t_k`.
    pub blocked: usize,
}

pub trait TraceSink {
    fn record(&mut self, row: &AgentRecord) -> Result<()>;

    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

impl TraceSink for Vec<AgentRecord> {
    fn record(&mut self, row: &AgentRecord) -> Result<()> {
        self.push(row.clone());
        Ok(())
    }
}

/// Discards rows; used when only metrics are wanted.
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _row: &AgentRecord) -> Result<()> {
        Ok(())
    }
}

/// Streams rows as CSV: `k,t,agent,role,x1..xd,u1..ud,aux1..auxd,blocked`.
pub struct CsvTraceWriter<W: Write> {
    out: csv::Writer<W>,
    dim: usize,
}

impl<W: Write> CsvTraceWriter<W> {
    pub fn new(inner: W, dim: usize) -> Result<Self> {
        let mut out = csv::Writer::from_writer(inner);
        let mut header = vec!["k".to_string(), "t".into(), "agent".into(), "role".into()];
        for prefix in ["x", "u", "aux"] {
            header.extend((1..=dim).map(|c| format!("{prefix}{c}")));
        }
        header.push("blocked".into());
        out.write_record(&header)?;
        Ok(CsvTraceWriter { out, dim })
    }

    pub fn into_inner(self) -> Result<W> {
        self.out
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

impl<W: Write> TraceSink for CsvTraceWriter<W> {
    fn record(&mut self, row: &AgentRecord) -> Result<()> {
        let mut rec = vec![
            row.k.to_string(),
            row.t.to_string(),
            row.agent.to_string(),
            match row.role {
                Role::Benign => "benign".into(),
                Role::Adversarial => "adversarial".into(),
            },
        ];
        rec.extend(row.x.iter().map(f64::to_string));
        for v in [&row.u, &row.aux] {
            match v {
                Some(v) => rec.extend(v.iter().map(f64::to_string)),
                None => rec.extend(std::iter::repeat_n(String::new(), self.dim)),
            }
        }
        rec.push(row.blocked.to_string());
        self.out.write_record(&rec)?;
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub rows: Vec<AgentRecord>,
    pub metrics: Vec<MetricsRow>,
    pub digest: String,
    /// Benign states after the last round.
    pub final_states: BTreeMap<NodeId, Vec<f64>>,
}

/// Metrics and final states of a run whose rows went to a sink.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub metrics: Vec<MetricsRow>,
    pub digest: String,
    pub final_states: BTreeMap<NodeId, Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Order in which benign agents are evaluated within a round. Any
    /// permutation gives the same trace; the default is ascending id.
    pub evaluation_order: Option<Vec<NodeId>>,
}

/// Runs the scenario and keeps every row in memory.
pub fn run(s: &Scenario) -> Result<SimulationTrace> {
    let mut rows = Vec::with_capacity(s.horizon() * s.graph.node_count());
    let out = run_with_sink(s, &RunOptions::default(), &mut rows)?;
    Ok(SimulationTrace {
        rows,
        metrics: out.metrics,
        digest: out.digest,
        final_states: out.final_states,
    })
}

/// Runs the scenario, streaming rows to `sink`.
pub fn run_with_sink(s: &Scenario, opts: &RunOptions, sink: &mut dyn TraceSink) -> Result<RunOutcome> {
    let d = s.dim();
    let f = s.faults();
    let period = s.period();
    let benign = s.benign();
    let order = match &opts.evaluation_order {
        Some(o) => {
            let given: BTreeSet<NodeId> = o.iter().copied().collect();
            if given.len() != o.len() || given != benign.iter().copied().collect() {
                return Err(Error::InvalidParameter(
                    "evaluation order must be a permutation of the benign agents".into(),
                ));
            }
            o.clone()
        }
        None => benign.clone(),
    };
    let benign_set: BTreeSet<NodeId> = benign.iter().copied().collect();
    let costs: Vec<CostFunction> = s.benign_costs();
    let initial_hull = s.initial_benign_set()?;

    // what `j` transmits to `i` at time t
    let sent = |j: NodeId, i: NodeId, t: f64, states: &BTreeMap<NodeId, AgentState>| -> Vec<f64> {
        match s.adversaries.get(&j) {
            Some(a) => adversary_emit(a, t, i),
            None => states[&j].x.clone(),
        }
    };

    let mut states: BTreeMap<NodeId, AgentState> = BTreeMap::new();
    for &i in &benign {
        let seed: BTreeMap<NodeId, Vec<f64>> = s
            .graph
            .in_neighbors(i)?
            .iter()
            .map(|&j| {
                let v = match s.adversaries.get(&j) {
                    Some(a) => adversary_emit(a, 0.0, i),
                    None => s.initial[&j].clone(),
                };
                (j, v)
            })
            .collect();
        states.insert(i, AgentState::new(i, s.initial[&i].clone(), s.alpha_at(i, 0), seed));
    }

    let mut metrics = Vec::with_capacity(s.horizon());
    let mut delta_budget = 0.0;
    let mut prev_cost: Option<f64> = None;
    for k in 0..s.horizon() {
        let t = k as f64 * period;
        let snapshot = &states;
        let mut next: BTreeMap<NodeId, AgentState> = BTreeMap::new();
        let mut records: BTreeMap<NodeId, AgentRecord> = BTreeMap::new();
        let mut max_eps = 0.0f64;
        for &i in &order {
            let mut agent = snapshot[&i].clone();
            agent.alpha = s.alpha_at(i, k);
            let mut fresh = BTreeMap::new();
            let mut blocked = 0;
            for &j in s.graph.in_neighbors(i)? {
                if is_blocked(&s.dos, (i, j), t) {
                    blocked += 1;
                    fresh.insert(j, Reception::Blocked);
                } else {
                    fresh.insert(j, Reception::Fresh(sent(j, i, t, snapshot)));
                }
            }
            let wrap = |e: Error| Error::Runtime {
                round: k,
                agent: i,
                source: Box::new(e),
            };
            let x_set = collect_states(&mut agent, &fresh, s.policy()).map_err(wrap)?;
            let input = match s.mode() {
                Mode::Consensus => consensus_input(&agent, &x_set, d, f),
                Mode::Optimization => {
                    let beta = step_size_unchecked(&s.config.steps, k, period);
                    optimization_input(&agent, &x_set, d, f, &s.costs[&i], beta)
                }
            }
            .map_err(wrap)?;
            let eps = residual_sample(&s.config.residual, i, k, t, s.config.seed, d);
            max_eps = max_eps.max(eps.iter().map(|v| v * v).sum::<f64>().sqrt());
            let updated = step(&agent, &input, &eps);
            records.insert(
                i,
                AgentRecord {
                    k,
                    t,
                    agent: i,
                    role: Role::Benign,
                    x: agent.x.clone(),
                    u: Some(input.u),
                    aux: Some(input.aux),
                    blocked,
                },
            );
            next.insert(i, updated);
        }
        for (&j, a) in &s.adversaries {
            let blocked = s
                .graph
                .in_neighbors(j)?
                .iter()
                .filter(|&&m| is_blocked(&s.dos, (j, m), t))
                .count();
            records.insert(
                j,
                AgentRecord {
                    k,
                    t,
                    agent: j,
                    role: Role::Adversarial,
                    x: a.broadcast(t),
                    u: None,
                    aux: None,
                    blocked,
                },
            );
        }
        for row in records.values() {
            sink.record(row)?;
        }
        states = next;

        delta_budget += max_eps;
        let diameter = diameter_of(states.values().map(|a| a.x.as_slice()))?;
        let mut valid = true;
        for a in states.values() {
            if hull_distance(&a.x, &initial_hull)? > delta_budget + VALIDITY_TOL {
                valid = false;
                break;
            }
        }
        let cost = if s.mode() == Mode::Optimization {
            let mean = benign_mean(&states, d);
            Some(global_cost(&costs, &benign_set, &mean)?)
        } else {
            None
        };
        let cost_rate = match (cost, prev_cost) {
            (Some(c), Some(p)) => Some((c - p) / period),
            _ => None,
        };
        prev_cost = cost;
        metrics.push(MetricsRow {
            k,
            t: (k + 1) as f64 * period,
            diameter,
            validity: valid,
            delta_budget,
            global_cost: cost,
            cost_rate,
        });
    }
    sink.finish()?;
    Ok(RunOutcome {
        metrics,
        digest: s.digest()?,
        final_states: states.into_iter().map(|(i, a)| (i, a.x)).collect(),
    })
}

fn benign_mean(states: &BTreeMap<NodeId, AgentState>, d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d];
    for a in states.values() {
        for (mc, v) in m.iter_mut().zip(&a.x) {
            *mc += v;
        }
    }
    let n = states.len() as f64;
    m.iter_mut().for_each(|v| *v /= n);
    m
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub policy: Policy,
    pub rounds: usize,
    pub final_diameter: Vec<f64>,
    /// Validity held after every round.
    pub validity: bool,
    pub delta_budget: f64,
    /// First round after which every diameter is below `AGREEMENT_TOL`.
    pub rounds_to_tolerance: Option<usize>,
    /// Mean of the final benign states.
    pub agreement_point: Vec<f64>,
    pub final_global_cost: Option<f64>,
    pub final_cost_rate: Option<f64>,
    pub digest: String,
}

impl RunSummary {
    pub fn from_outcome(policy: Policy, metrics: &[MetricsRow], final_states: &BTreeMap<NodeId, Vec<f64>>, digest: &str) -> Self {
        let last = metrics.last();
        let d = final_states.values().next().map_or(0, Vec::len);
        let mut point = vec![0.0; d];
        for x in final_states.values() {
            for (p, v) in point.iter_mut().zip(x) {
                *p += v / final_states.len() as f64;
            }
        }
        RunSummary {
            policy,
            rounds: metrics.len(),
            final_diameter: last.map(|m| m.diameter.clone()).unwrap_or_default(),
            validity: metrics.iter().all(|m| m.validity),
            delta_budget: last.map_or(0.0, |m| m.delta_budget),
            rounds_to_tolerance: metrics
                .iter()
                .position(|m| m.diameter.iter().all(|v| *v < AGREEMENT_TOL))
                .map(|p| p + 1),
            agreement_point: point,
            final_global_cost: last.and_then(|m| m.global_cost),
            final_cost_rate: last.and_then(|m| m.cost_rate),
            digest: digest.to_string(),
        }
    }
}

impl SimulationTrace {
    pub fn summary(&self, policy: Policy) -> RunSummary {
        RunSummary::from_outcome(policy, &self.metrics, &self.final_states, &self.digest)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyComparison {
    pub hold_last: SimulationTrace,
    pub zero_substitute: SimulationTrace,
}

impl PolicyComparison {
    pub fn summaries(&self) -> [RunSummary; 2] {
        [
            self.hold_last.summary(Policy::HoldLast),
            self.zero_substitute.summary(Policy::ZeroSubstitute),
        ]
    }
}

/// Runs the scenario under both DoS policies with the same seed.
pub fn compare_policies(s: &Scenario) -> Result<PolicyComparison> {
    Ok(PolicyComparison {
        hold_last: run(&s.with_policy(Policy::HoldLast))?,
        zero_substitute: run(&s.with_policy(Policy::ZeroSubstitute))?,
    })
}
