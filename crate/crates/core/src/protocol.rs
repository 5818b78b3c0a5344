//! Per-agent update laws: resilient consensus via the auxiliary point, and
//! its subgradient extension for distributed optimization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Side};
use crate::geometry::{auxiliary_point, extreme_sets, safe_kernel_point, KernelQuery, PointSet};
use crate::graph::NodeId;
use crate::optimization::CostFunction;

pub const DEFAULT_C: f64 = 0.9;

/// What a benign agent substitutes for an in-neighbor whose edge is blocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Use the last value received on that edge.
    HoldLast,
    /// Treat the neighbor's state as the zero vector.
    ZeroSubstitute,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::HoldLast => "hold-last",
            Policy::ZeroSubstitute => "zero-substitute",
        }
    }
}

/// One edge's delivery at a sampling instant.
#[derive(Debug, Clone, PartialEq)]
pub enum Reception {
    Fresh(Vec<f64>),
    Blocked,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: NodeId,
    pub x: Vec<f64>,
    pub alpha: f64,
    /// Last value received from each in-neighbor.
    pub cache: BTreeMap<NodeId, Vec<f64>>,
}

impl AgentState {
    /// State with its cache pre-seeded from the neighbors' initial values.
    pub fn new(id: NodeId, x: Vec<f64>, alpha: f64, seed: BTreeMap<NodeId, Vec<f64>>) -> Self {
        AgentState {
            id,
            x,
            alpha,
            cache: seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlInput {
    pub u: Vec<f64>,
    pub aux: Vec<f64>,
    pub subgrad: Option<Vec<f64>>,
    pub step: Option<f64>,
}

/// Checks `1 − c < alpha < c` with `0.5 < c < 1`.
pub fn check_weight(alpha: f64, c: f64) -> Result<()> {
    if !(c > 0.5 && c < 1.0) {
        return Err(Error::InvalidParameter(format!("c = {c} must lie in (0.5, 1)")));
    }
    if !(alpha > 1.0 - c && alpha < c) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must lie in ({}, {c})",
            1.0 - c
        )));
    }
    Ok(())
}

/// Builds `X_i(t_k)` from this round's deliveries and refreshes the cache.
///
/// Under hold-last a blocked neighbor contributes its cached value. A blocked
/// neighbor with no cached value (never seeded) falls back to the agent's own
/// state. Under zero-substitute a blocked neighbor contributes the zero vector.
pub fn collect_states(
    agent: &mut AgentState,
    fresh: &BTreeMap<NodeId, Reception>,
    policy: Policy,
) -> Result<PointSet> {
    let dim = agent.x.len();
    let mut entries = Vec::with_capacity(fresh.len());
    for (&j, rec) in fresh {
        let value = match rec {
            Reception::Fresh(v) => {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: v.len(),
                    });
                }
                agent.cache.insert(j, v.clone());
                v.clone()
            }
            Reception::Blocked => match policy {
                Policy::HoldLast => agent.cache.get(&j).cloned().unwrap_or_else(|| agent.x.clone()),
                Policy::ZeroSubstitute => vec![0.0; dim],
            },
        };
        entries.push((j, value));
    }
    PointSet::from_tagged(entries)
}

/// Auxiliary point of `x_set`: per coordinate, a safe-kernel point of the
/// lowest and of the highest `(d+1)F + 1` neighbor values, then the
/// bounding-box midpoint of those `2d` points.
pub fn auxiliary_target(x_set: &PointSet, faults: usize) -> Result<Vec<f64>> {
    let d = x_set.dim();
    let k = (d + 1) * faults + 1;
    if x_set.len() < k {
        return Err(Error::KernelEmpty {
            points: x_set.len(),
            faults,
            detail: format!("agent has {} in-neighbors, needs at least {k}", x_set.len()),
        });
    }
    // Y/Z sets frequently coincide across coordinates; solve each distinct one once
    let mut solved: Vec<(Vec<NodeId>, Vec<f64>)> = Vec::new();
    let mut lambda = Vec::with_capacity(2 * d);
    for p in 0..d {
        let (low, high) = extreme_sets(x_set, p, k)?;
        for (side, set) in [(Side::Low, low), (Side::High, high)] {
            if let Some((_, pt)) = solved.iter().find(|(tags, _)| tags.as_slice() == set.tags()) {
                lambda.push(pt.clone());
                continue;
            }
            let tags = set.tags().to_vec();
            let pt = KernelQuery::new(set, faults)
                .and_then(|q| safe_kernel_point(&q))
                .map_err(|e| Error::KernelAt {
                    dim: p + 1,
                    side,
                    source: Box::new(e),
                })?;
            solved.push((tags, pt.clone()));
            lambda.push(pt);
        }
    }
    auxiliary_point(&PointSet::from_points(lambda)?)
}

/// Consensus control `u = (1 − α)(aux − x)`.
pub fn consensus_input(agent: &AgentState, x_set: &PointSet, d: usize, faults: usize) -> Result<ControlInput> {
    check_dims(agent, x_set, d)?;
    let aux = auxiliary_target(x_set, faults)?;
    let u = agent
        .x
        .iter()
        .zip(&aux)
        .map(|(x, a)| (1.0 - agent.alpha) * (a - x))
        .collect();
    Ok(ControlInput {
        u,
        aux,
        subgrad: None,
        step: None,
    })
}

/// Optimization control `u = (1 − α)(aux − x) − β g` with `g` a subgradient
/// of `f` at `α x + (1 − α) aux`.
pub fn optimization_input(
    agent: &AgentState,
    x_set: &PointSet,
    d: usize,
    faults: usize,
    f: &CostFunction,
    beta: f64,
) -> Result<ControlInput> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("step size {beta} must be nonnegative")));
    }
    let mut input = consensus_input(agent, x_set, d, faults)?;
    let a = agent.alpha;
    let at: Vec<f64> = agent
        .x
        .iter()
        .zip(&input.aux)
        .map(|(x, aux)| a * x + (1.0 - a) * aux)
        .collect();
    let g = f.subgradient(&at)?;
    for (u, gc) in input.u.iter_mut().zip(&g) {
        *u -= beta * gc;
    }
    input.subgrad = Some(g);
    input.step = Some(beta);
    Ok(input)
}

/// Applies `x ← x + u + ε`. The cache is left as is.
pub fn step(agent: &AgentState, input: &ControlInput, eps: &[f64]) -> AgentState {
    let mut next = agent.clone();
    for ((x, u), e) in next.x.iter_mut().zip(&input.u).zip(eps) {
        *x += u + e;
    }
    next
}

fn check_dims(agent: &AgentState, x_set: &PointSet, d: usize) -> Result<()> {
    if agent.x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: agent.x.len(),
        });
    }
    if x_set.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x_set.dim(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimization::{Affine, CostExpr};

    fn agent(x: Vec<f64>, alpha: f64) -> AgentState {
        AgentState::new(1, x, alpha, BTreeMap::new())
    }

    fn line(values: &[f64]) -> PointSet {
        PointSet::from_points(values.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    #[test]
    fn weight_bounds() {
        assert!(check_weight(0.5, 0.9).is_ok());
        assert!(check_weight(0.95, 0.9).is_err());
        assert!(check_weight(0.05, 0.9).is_err());
        assert!(check_weight(0.5, 0.5).is_err());
        assert!(check_weight(0.5, 1.0).is_err());
    }

    #[test]
    fn hold_last_uses_cache() {
        let mut a = AgentState::new(1, vec![0.0, 0.0], 0.5, BTreeMap::from([(3, vec![1.0, 2.0])]));
        let fresh = BTreeMap::from([(2, Reception::Fresh(vec![5.0, 5.0])), (3, Reception::Blocked)]);
        let x = collect_states(&mut a, &fresh, Policy::HoldLast).unwrap();
        assert_eq!(x.tags(), &[2, 3]);
        assert_eq!(x.points()[1], vec![1.0, 2.0]);
        assert_eq!(a.cache[&2], vec![5.0, 5.0]);

        let z = collect_states(&mut a, &fresh, Policy::ZeroSubstitute).unwrap();
        assert_eq!(z.points()[1], vec![0.0, 0.0]);
    }

    #[test]
    fn unblocked_round_refreshes_everything() {
        let mut a = AgentState::new(1, vec![0.0], 0.5, BTreeMap::from([(2, vec![9.0]), (3, vec![9.0])]));
        let fresh = BTreeMap::from([(2, Reception::Fresh(vec![1.0])), (3, Reception::Fresh(vec![2.0]))]);
        let x = collect_states(&mut a, &fresh, Policy::HoldLast).unwrap();
        assert_eq!(x.points(), &[vec![1.0], vec![2.0]]);
        assert_eq!(a.cache, BTreeMap::from([(2, vec![1.0]), (3, vec![2.0])]));
    }

    #[test]
    fn one_dimensional_example() {
        // extreme sets of size 3: {0,1,2} has kernel {1}, {4,5,6} has kernel {5}
        let x = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let u = consensus_input(&agent(vec![0.0], 0.5), &x, 1, 1).unwrap();
        assert!((u.aux[0] - 3.0).abs() < 1e-9);
        assert!((u.u[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_gives_zero_input() {
        let x = line(&[2.0; 5]);
        let u = consensus_input(&agent(vec![2.0], 0.5), &x, 1, 1).unwrap();
        assert_eq!(u.u, vec![0.0]);
    }

    #[test]
    fn too_few_neighbors_is_kernel_error() {
        let x = line(&[0.0, 1.0]);
        let err = consensus_input(&agent(vec![0.0], 0.5), &x, 1, 1).unwrap_err();
        assert!(err.is_runtime());
    }

    #[test]
    fn l1_subgradient_cancels_consensus_term() {
        // neighbors placed so that aux = (2, 2)
        let pts = vec![vec![2.0, 2.0]; 4];
        let x = PointSet::from_points(pts).unwrap();
        let a = agent(vec![0.0, 0.0], 0.5);
        let f = CostFunction {
            owner: 1,
            expr: CostExpr::Sum {
                args: vec![
                    CostExpr::Abs { arg: Affine::new(vec![1.0, 0.0], 0.0) },
                    CostExpr::Abs { arg: Affine::new(vec![0.0, 1.0], 0.0) },
                ],
            },
        };
        let c = consensus_input(&a, &x, 2, 1).unwrap();
        assert_eq!(c.u, vec![1.0, 1.0]);
        let o = optimization_input(&a, &x, 2, 1, &f, 1.0).unwrap();
        assert_eq!(o.u, vec![0.0, 0.0]);
        let zero = optimization_input(&a, &x, 2, 1, &f, 0.0).unwrap();
        assert_eq!(zero.u, c.u);
    }

    #[test]
    fn step_matches_convex_combination() {
        let a = agent(vec![0.0, 0.0], 0.5);
        let input = ControlInput {
            u: vec![1.0, 1.0],
            aux: vec![2.0, 2.0],
            subgrad: None,
            step: None,
        };
        assert_eq!(step(&a, &input, &[0.01, 0.01]).x, vec![1.01, 1.01]);
        let still = ControlInput {
            u: vec![0.0, 0.0],
            ..input
        };
        assert_eq!(step(&a, &still, &[0.0, 0.0]).x, vec![0.0, 0.0]);
    }
}
