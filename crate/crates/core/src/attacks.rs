//! Adversarial agents, edge-targeted DoS schedules, and residual disturbances.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Digraph, NodeId};

/// Directed edge `(receiver, sender)`.
pub type Edge = (NodeId, NodeId);

/// Closed blocking interval `[start, end]` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t <= self.end
    }
}

/// Sorts and merges overlapping (or touching) intervals in place.
fn merge(intervals: &mut Vec<Interval>) {
    intervals.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for iv in intervals.drain(..) {
        match out.last_mut() {
            Some(last) if iv.start <= last.end => last.end = last.end.max(iv.end),
            _ => out.push(iv),
        }
    }
    *intervals = out;
}

/// Periodic burst generator: on each edge, a block of length `on` starts at
/// `phase + n·period + jitter_n` for `n = 0, 1, ...` (with `jitter_n` drawn
/// uniformly from `[0, jitter]`) until `until`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicDos {
    #[serde(default)]
    pub name: String,
    pub edges: Vec<Edge>,
    pub period: f64,
    pub on: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub jitter: f64,
    #[serde(default)]
    pub until: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl PeriodicDos {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("DoS generator {:?}: {m}", self.name)));
        if !(self.period > 0.0) {
            return bad(format!("period {} must be positive", self.period));
        }
        if !(self.on >= 0.0) {
            return bad(format!("on-duration {} must be nonnegative", self.on));
        }
        if !(self.jitter >= 0.0) {
            return bad(format!("jitter {} must be nonnegative", self.jitter));
        }
        Ok(())
    }

    /// Burst intervals up to time `horizon` (or `until`, whichever is earlier).
    pub fn bursts(&self, horizon: f64) -> Result<Vec<Interval>> {
        self.validate()?;
        let stop = self.until.map_or(horizon, |u| u.min(horizon));
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::new();
        let mut n = 0u64;
        loop {
            let jitter = if self.jitter > 0.0 {
                rng.gen_range(0.0..=self.jitter)
            } else {
                0.0
            };
            let start = self.phase + n as f64 * self.period + jitter;
            if start > stop {
                break;
            }
            out.push(Interval {
                start,
                end: start + self.on,
            });
            n += 1;
        }
        Ok(out)
    }
}

/// Per-edge DoS blocking intervals plus the duration-bound parameters
/// `|Π_D(t1,t2)| <= μ_d + (t2 − t1)/T_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoSSchedule {
    intervals: BTreeMap<Edge, Vec<Interval>>,
    pub mu_d: f64,
    pub t_d: f64,
}

impl DoSSchedule {
    pub fn new(mu_d: f64, t_d: f64) -> Result<Self> {
        if !(mu_d >= 0.0) || !mu_d.is_finite() {
            return Err(Error::InvalidParameter(format!("mu_d = {mu_d} must be nonnegative")));
        }
        if !(t_d > 1.0) || !t_d.is_finite() {
            return Err(Error::InvalidParameter(format!("T_d = {t_d} must exceed 1")));
        }
        Ok(DoSSchedule {
            intervals: BTreeMap::new(),
            mu_d,
            t_d,
        })
    }

    /// Blocks `edge` over `[start, start + duration]`.
    pub fn add_interval(&mut self, edge: Edge, start: f64, duration: f64) -> Result<()> {
        if !(duration >= 0.0) || !start.is_finite() || !duration.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "DoS interval on {edge:?}: start {start}, duration {duration}"
            )));
        }
        let list = self.intervals.entry(edge).or_default();
        list.push(Interval {
            start,
            end: start + duration,
        });
        merge(list);
        Ok(())
    }

    pub fn add_periodic(&mut self, generator: &PeriodicDos, horizon: f64) -> Result<()> {
        let bursts = generator.bursts(horizon)?;
        for &edge in &generator.edges {
            let list = self.intervals.entry(edge).or_default();
            list.extend(bursts.iter().copied());
            merge(list);
        }
        Ok(())
    }

    pub fn intervals(&self, edge: Edge) -> &[Interval] {
        self.intervals.get(&edge).map_or(&[], Vec::as_slice)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.intervals.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.values().all(Vec::is_empty)
    }

    /// Merged union over all edges of the blocked intervals.
    pub fn union(&self) -> Vec<Interval> {
        let mut all: Vec<Interval> = self.intervals.values().flatten().copied().collect();
        merge(&mut all);
        all
    }

    /// Measure of the set of instants in `(t1, t2)` at which at least one edge is blocked.
    pub fn blocked_measure(&self, t1: f64, t2: f64) -> f64 {
        self.union()
            .iter()
            .map(|iv| (iv.end.min(t2) - iv.start.max(t1)).max(0.0))
            .sum()
    }

    /// Largest value of `|Π_D(t1,t2)| − (t2 − t1)/T_d` over windows inside
    /// `[lo, hi]`. The supremum is attained with `t1` at the start and `t2`
    /// at the end of merged union intervals, so only those are scanned.
    pub fn max_window_excess(&self, lo: f64, hi: f64) -> f64 {
        let clipped: Vec<Interval> = self
            .union()
            .into_iter()
            .filter_map(|iv| {
                let s = iv.start.max(lo);
                let e = iv.end.min(hi);
                (e > s).then_some(Interval { start: s, end: e })
            })
            .collect();
        let mut best = 0.0f64;
        for a in 0..clipped.len() {
            let mut measure = 0.0;
            for b in a..clipped.len() {
                measure += clipped[b].len();
                let window = clipped[b].end - clipped[a].start;
                best = best.max(measure - window / self.t_d);
            }
        }
        best
    }
}

/// Whether `edge` is blocked at instant `t` (closed intervals).
pub fn is_blocked(s: &DoSSchedule, edge: Edge, t: f64) -> bool {
    let list = s.intervals(edge);
    // intervals are sorted and disjoint: find the last one starting at or before t
    let idx = list.partition_point(|iv| iv.start <= t);
    idx > 0 && list[idx - 1].contains(t)
}

/// Checks the DoS duration bound on the window `(t1, t2)`.
pub fn dos_duration_ok(s: &DoSSchedule, t1: f64, t2: f64) -> Result<bool> {
    if !(t2 > t1) || !(t1 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "window ({t1}, {t2}) must satisfy t2 > t1 >= 0"
        )));
    }
    Ok(s.blocked_measure(t1, t2) <= s.mu_d + (t2 - t1) / s.t_d + 1e-12)
}

/// A scalar signal of time used for one coordinate of an adversary's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Signal {
    Constant { value: f64 },
    Linear { slope: f64, offset: f64 },
    Sin {
        amplitude: f64,
        #[serde(default = "one")]
        omega: f64,
        #[serde(default)]
        offset: f64,
    },
    Cos {
        amplitude: f64,
        #[serde(default = "one")]
        omega: f64,
        #[serde(default)]
        offset: f64,
    },
    Uniform { low: f64, high: f64 },
}

fn one() -> f64 {
    1.0
}

/// splitmix64 finalizer for deriving per-sample seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn sample_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0u64, |acc, &p| mix(acc ^ p))
}

impl Signal {
    fn eval(&self, t: f64, seed: u64) -> f64 {
        match *self {
            Signal::Constant { value } => value,
            Signal::Linear { slope, offset } => slope * t + offset,
            Signal::Sin {
                amplitude,
                omega,
                offset,
            } => amplitude * (omega * t).sin() + offset,
            Signal::Cos {
                amplitude,
                omega,
                offset,
            } => amplitude * (omega * t).cos() + offset,
            Signal::Uniform { low, high } => {
                if high <= low {
                    low
                } else {
                    ChaCha8Rng::seed_from_u64(seed).gen_range(low..high)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryMode {
    Malicious,
    Byzantine,
    Stubborn,
}

/// What an adversarial agent transmits. Malicious and stubborn agents send
/// one value per instant to everyone; Byzantine agents may send a different
/// trajectory to each out-neighbor listed in `per_target`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarySpec {
    pub agent: NodeId,
    pub mode: AdversaryMode,
    pub trajectory: Vec<Signal>,
    pub per_target: BTreeMap<NodeId, Vec<Signal>>,
    pub seed: u64,
}

impl AdversarySpec {
    pub fn malicious(agent: NodeId, trajectory: Vec<Signal>) -> Self {
        AdversarySpec {
            agent,
            mode: AdversaryMode::Malicious,
            trajectory,
            per_target: BTreeMap::new(),
            seed: 0,
        }
    }

    /// A stubborn agent broadcasts its initial state forever.
    pub fn stubborn(agent: NodeId, initial: &[f64]) -> Self {
        AdversarySpec {
            agent,
            mode: AdversaryMode::Stubborn,
            trajectory: initial.iter().map(|&value| Signal::Constant { value }).collect(),
            per_target: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.trajectory.len()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("adversary {}: {m}", self.agent)));
        if self.trajectory.len() != dim {
            return bad(format!("trajectory has {} coordinates, expected {dim}", self.trajectory.len()));
        }
        if !self.per_target.is_empty() && self.mode != AdversaryMode::Byzantine {
            return bad("per-target trajectories require byzantine mode".into());
        }
        if let Some((t, tr)) = self.per_target.iter().find(|(_, tr)| tr.len() != dim) {
            return bad(format!("override for target {t} has {} coordinates", tr.len()));
        }
        Ok(())
    }

    fn eval(&self, signals: &[Signal], t: f64, stream: u64) -> Vec<f64> {
        signals
            .iter()
            .enumerate()
            .map(|(c, s)| s.eval(t, sample_seed(&[self.seed, self.agent as u64, t.to_bits(), c as u64, stream])))
            .collect()
    }

    /// The value sent to everyone without a per-target override.
    pub fn broadcast(&self, t: f64) -> Vec<f64> {
        self.eval(&self.trajectory, t, 0)
    }
}

/// Value adversary `a` transmits to `target` at time `t`.
pub fn adversary_emit(a: &AdversarySpec, t: f64, target: NodeId) -> Vec<f64> {
    match a.per_target.get(&target) {
        Some(signals) if a.mode == AdversaryMode::Byzantine => a.eval(signals, t, target as u64 + 1),
        _ => a.broadcast(t),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackModel {
    #[serde(rename = "f-total")]
    FTotal,
    #[serde(rename = "f-local")]
    FLocal,
}

/// Checks the adversary count against the F-total or F-local model.
pub fn validate_attack_model(g: &Digraph, faults: usize, model: AttackModel) -> bool {
    let adversarial = g.adversarial();
    match model {
        AttackModel::FTotal => adversarial.len() <= faults,
        AttackModel::FLocal => g.benign().into_iter().all(|i| {
            g.in_neighbors(i)
                .map(|s| s.iter().filter(|j| !g.is_benign(**j)).count() <= faults)
                .unwrap_or(false)
        }),
    }
}

/// Additive disturbance on a benign agent's update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum ResidualForm {
    Zero,
    /// `scale · rate^t`, replicated on every coordinate, or along the unit
    /// vector of `direction` when one is given.
    Geometric {
        scale: f64,
        rate: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
    },
    /// `scale · rate^t` along a direction drawn uniformly from the unit sphere.
    RandomGeometric { scale: f64, rate: f64 },
    /// Explicit per-round vectors; zero after the table ends.
    Table { values: Vec<Vec<f64>> },
}

impl ResidualForm {
    /// Checks summability of the disturbance.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ResidualForm::Zero => Ok(()),
            ResidualForm::Geometric { scale, rate, direction } => {
                check_geometric(*scale, *rate)?;
                if let Some(dir) = direction {
                    if dir.len() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: dir.len(),
                        });
                    }
                    if dir.iter().map(|v| v * v).sum::<f64>() == 0.0 {
                        return Err(Error::InvalidParameter("residual direction is zero".into()));
                    }
                }
                Ok(())
            }
            ResidualForm::RandomGeometric { scale, rate } => check_geometric(*scale, *rate),
            ResidualForm::Table { values } => {
                if let Some(v) = values.iter().find(|v| v.len() != dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: v.len(),
                    });
                }
                if values.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("residual table has non-finite entries".into()));
                }
                Ok(())
            }
        }
    }
}

fn check_geometric(scale: f64, rate: f64) -> Result<()> {
    if !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("residual scale {scale} is not finite")));
    }
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "residual rate {rate} must lie in (0, 1) for the series to converge"
        )));
    }
    Ok(())
}

/// Residual forms per agent, with a default for agents not listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSpec {
    pub default: ResidualForm,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_agent: BTreeMap<String, ResidualForm>,
}

impl Default for ResidualSpec {
    fn default() -> Self {
        ResidualSpec {
            default: ResidualForm::Zero,
            per_agent: BTreeMap::new(),
        }
    }
}

impl ResidualSpec {
    pub fn uniform(form: ResidualForm) -> Self {
        ResidualSpec {
            default: form,
            per_agent: BTreeMap::new(),
        }
    }

    pub fn form_for(&self, agent: NodeId) -> &ResidualForm {
        self.per_agent.get(&agent.to_string()).unwrap_or(&self.default)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        self.default.validate(dim)?;
        for (k, f) in &self.per_agent {
            k.parse::<NodeId>()
                .map_err(|_| Error::InvalidParameter(format!("residual override key {k:?} is not a node id")))?;
            f.validate(dim)?;
        }
        Ok(())
    }
}

/// Disturbance `ε_agent(t_k)`, deterministic in `(seed, agent, round, t)`.
pub fn residual_sample(r: &ResidualSpec, agent: NodeId, round: usize, t: f64, seed: u64, dim: usize) -> Vec<f64> {
    match r.form_for(agent) {
        ResidualForm::Zero => vec![0.0; dim],
        ResidualForm::Geometric { scale, rate, direction } => {
            let mag = scale * rate.powf(t);
            match direction {
                None => vec![mag; dim],
                Some(dir) => {
                    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                    dir.iter().map(|v| mag * v / norm).collect()
                }
            }
        }
        ResidualForm::RandomGeometric { scale, rate } => {
            let mag = scale * rate.powf(t);
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(&[seed, agent as u64, round as u64, t.to_bits()]));
            loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-3 && norm <= 1.0 {
                    return v.iter().map(|x| mag * x / norm).collect();
                }
            }
        }
        ResidualForm::Table { values } => values.get(round).cloned().unwrap_or_else(|| vec![0.0; dim]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule_with(edge: Edge, start: f64, dur: f64) -> DoSSchedule {
        let mut s = DoSSchedule::new(2.0, 4.0).unwrap();
        s.add_interval(edge, start, dur).unwrap();
        s
    }

    #[test]
    fn blocking_is_closed() {
        let s = schedule_with((4, 2), 2.0, 3.0);
        assert!(is_blocked(&s, (4, 2), 3.0));
        assert!(is_blocked(&s, (4, 2), 5.0));
        assert!(is_blocked(&s, (4, 2), 2.0));
        assert!(!is_blocked(&s, (4, 2), 6.0));
        assert!(!is_blocked(&s, (4, 2), 1.999));
        assert!(!is_blocked(&s, (2, 4), 3.0));
    }

    #[test]
    fn duration_bound_examples() {
        // bound on (0, 12) is 2 + 12/4 = 5
        let s = schedule_with((1, 2), 1.0, 5.0);
        assert!(dos_duration_ok(&s, 0.0, 12.0).unwrap());
        let s = schedule_with((1, 2), 1.0, 5.5);
        assert!(!dos_duration_ok(&s, 0.0, 12.0).unwrap());
        let empty = DoSSchedule::new(2.0, 4.0).unwrap();
        assert!(dos_duration_ok(&empty, 0.0, 1e6).unwrap());
        assert!(dos_duration_ok(&empty, 3.0, 3.0).is_err());
    }

    #[test]
    fn union_counts_overlap_once() {
        let mut s = DoSSchedule::new(0.0, 2.0).unwrap();
        s.add_interval((1, 2), 0.0, 4.0).unwrap();
        s.add_interval((3, 2), 2.0, 4.0).unwrap();
        assert!((s.blocked_measure(0.0, 10.0) - 6.0).abs() < 1e-12);
        assert!((s.blocked_measure(1.0, 3.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_inputs_merge() {
        let mut s = DoSSchedule::new(0.0, 2.0).unwrap();
        s.add_interval((1, 2), 5.0, 2.0).unwrap();
        s.add_interval((1, 2), 0.0, 1.0).unwrap();
        s.add_interval((1, 2), 6.0, 3.0).unwrap();
        assert_eq!(
            s.intervals((1, 2)),
            &[Interval { start: 0.0, end: 1.0 }, Interval { start: 5.0, end: 9.0 }]
        );
        assert!(s.add_interval((1, 2), 0.0, -1.0).is_err());
    }

    #[test]
    fn window_excess_finds_worst_burst() {
        // a single 3 s burst: worst window is the burst itself, 3 - 3/2
        let mut s = DoSSchedule::new(0.0, 2.0).unwrap();
        s.add_interval((1, 2), 10.0, 3.0).unwrap();
        assert!((s.max_window_excess(0.0, 100.0) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn periodic_bursts() {
        let g = PeriodicDos {
            name: "p".into(),
            edges: vec![(1, 2)],
            period: 10.0,
            on: 2.0,
            phase: 1.0,
            jitter: 0.0,
            until: None,
            seed: 0,
        };
        let b = g.bursts(25.0).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b[2], Interval { start: 21.0, end: 23.0 });
        let jittered = PeriodicDos { jitter: 1.0, seed: 9, ..g.clone() };
        assert_eq!(jittered.bursts(25.0).unwrap(), jittered.bursts(25.0).unwrap());
    }

    #[test]
    fn table_one_trajectories_at_zero() {
        let a2 = AdversarySpec::malicious(
            2,
            vec![
                Signal::Sin { amplitude: 3.0, omega: 1.0, offset: 0.0 },
                Signal::Linear { slope: 1.0, offset: 2.0 },
            ],
        );
        assert_eq!(adversary_emit(&a2, 0.0, 1), vec![0.0, 2.0]);
        let a12 = AdversarySpec::malicious(
            12,
            vec![
                Signal::Cos { amplitude: 6.0, omega: 1.0, offset: 0.0 },
                Signal::Linear { slope: 3.0, offset: 0.0 },
            ],
        );
        assert_eq!(adversary_emit(&a12, 0.0, 1), vec![6.0, 0.0]);
        assert_eq!(adversary_emit(&a12, 2.0, 1), vec![6.0 * 2f64.cos(), 6.0]);
    }

    #[test]
    fn byzantine_overrides_are_per_target() {
        let mut a = AdversarySpec::malicious(3, vec![Signal::Constant { value: 0.0 }; 2]);
        a.mode = AdversaryMode::Byzantine;
        a.per_target.insert(5, vec![Signal::Constant { value: 9.0 }; 2]);
        assert_eq!(adversary_emit(&a, 1.0, 5), vec![9.0, 9.0]);
        assert_eq!(adversary_emit(&a, 1.0, 7), vec![0.0, 0.0]);
        assert!(a.validate(2).is_ok());
        a.mode = AdversaryMode::Malicious;
        assert!(a.validate(2).is_err());
    }

    #[test]
    fn uniform_broadcast_is_shared_by_targets() {
        let a = AdversarySpec {
            seed: 11,
            ..AdversarySpec::malicious(4, vec![Signal::Uniform { low: -1.0, high: 1.0 }])
        };
        let v = adversary_emit(&a, 2.5, 1);
        assert_eq!(v, adversary_emit(&a, 2.5, 9));
        assert!(v[0] >= -1.0 && v[0] < 1.0);
        assert_ne!(v, adversary_emit(&a, 3.0, 1));
    }

    #[test]
    fn stubborn_holds_initial_state() {
        let a = AdversarySpec::stubborn(4, &[1.5, -2.0]);
        assert_eq!(adversary_emit(&a, 100.0, 1), vec![1.5, -2.0]);
    }

    #[test]
    fn attack_model_counts() {
        let g = Digraph::new(4, [(1, 2), (1, 3), (4, 2), (4, 3)], [2, 3]).unwrap();
        assert!(!validate_attack_model(&g, 1, AttackModel::FTotal));
        assert!(!validate_attack_model(&g, 1, AttackModel::FLocal));
        assert!(validate_attack_model(&g, 2, AttackModel::FLocal));
        let g3 = Digraph::new(4, [(1, 2)], [2, 3, 4]).unwrap();
        assert!(!validate_attack_model(&g3, 2, AttackModel::FTotal));
        let clean = Digraph::complete(3).unwrap();
        assert!(validate_attack_model(&clean, 0, AttackModel::FTotal));
        assert!(validate_attack_model(&clean, 0, AttackModel::FLocal));
    }

    #[test]
    fn residual_examples() {
        let geo = ResidualSpec::uniform(ResidualForm::Geometric {
            scale: 1.0,
            rate: 0.1,
            direction: None,
        });
        assert_eq!(residual_sample(&geo, 1, 0, 0.0, 0, 2), vec![1.0, 1.0]);
        let v = residual_sample(&geo, 1, 4, 2.0, 0, 2);
        assert!((v[0] - 0.01).abs() < 1e-15);
        let zero = ResidualSpec::default();
        assert_eq!(residual_sample(&zero, 3, 5, 2.5, 0, 3), vec![0.0; 3]);

        let unit = ResidualSpec::uniform(ResidualForm::Geometric {
            scale: 1.0,
            rate: 0.1,
            direction: Some(vec![1.0, 1.0]),
        });
        let v = residual_sample(&unit, 1, 0, 0.0, 0, 2);
        assert!((v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_residual_is_seeded() {
        let spec = ResidualSpec::uniform(ResidualForm::RandomGeometric { scale: 2.0, rate: 0.5 });
        let a = residual_sample(&spec, 2, 3, 1.5, 42, 3);
        assert_eq!(a, residual_sample(&spec, 2, 3, 1.5, 42, 3));
        assert_ne!(a, residual_sample(&spec, 2, 3, 1.5, 43, 3));
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 2.0 * 0.5f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn geometric_rate_must_converge() {
        assert!(ResidualForm::Geometric { scale: 1.0, rate: 1.0, direction: None }.validate(2).is_err());
        assert!(ResidualForm::Table { values: vec![vec![0.1]] }.validate(2).is_err());
    }
}
