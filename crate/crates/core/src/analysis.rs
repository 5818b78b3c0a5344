//! Trace metrics and the Sarymsakov matrix checker.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hull_distance, PointSet};
use crate::graph::{find_violating_pair, NodeId, MAX_ENUMERATION_NODES};

pub const ROW_SUM_TOL: f64 = 1e-12;

/// Nonnegative square matrix whose rows sum to one. Indices are 1-based in
/// the public API.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty("matrix"));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotRowStochastic(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                return Err(Error::NotRowStochastic(format!("row {} has entry {v}", i + 1)));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotRowStochastic(format!("row {} sums to {sum}", i + 1)));
            }
            entries.extend_from_slice(row);
        }
        Ok(StochasticMatrix { n, entries })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
    }

    /// Dense rows, whitespace or comma separated, `#` comments and blank lines ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("line {}: bad number {s:?}", ln + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::new(rows)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Entry `a_ij`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i - 1) * self.n + (j - 1)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    fn row_masks(&self) -> Vec<u32> {
        self.entries
            .chunks(self.n)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v > 0.0)
                    .fold(0u32, |m, (j, _)| m | 1 << j)
            })
            .collect()
    }
}

impl fmt::Display for StochasticMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// `I_A(V1) = { j : a_ij > 0 for some i ∈ V1 }`.
pub fn consequent_indices(a: &StochasticMatrix, v1: &BTreeSet<NodeId>) -> Result<BTreeSet<NodeId>> {
    if v1.is_empty() {
        return Err(Error::Empty("index set"));
    }
    if let Some(&i) = v1.iter().find(|&&i| i == 0 || i > a.n) {
        return Err(Error::UnknownNode(i));
    }
    Ok((1..=a.n)
        .filter(|&j| v1.iter().any(|&i| a.get(i, j) > 0.0))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SarymsakovReport {
    pub holds: bool,
    pub witness: Option<(Vec<NodeId>, Vec<NodeId>)>,
}

fn mask_ids(m: u32) -> Vec<NodeId> {
    (0..32).filter(|b| m >> b & 1 == 1).map(|b| b as usize + 1).collect()
}

/// Exhaustive Sarymsakov test: for all disjoint nonempty `V1, V2`, the
/// consequent sets intersect or their union is strictly larger than `V1 ∪ V2`.
pub fn is_sarymsakov(a: &StochasticMatrix) -> Result<SarymsakovReport> {
    if a.n > MAX_ENUMERATION_NODES {
        return Err(Error::InvalidParameter(format!(
            "exhaustive check supports at most {MAX_ENUMERATION_NODES} rows, matrix has {}",
            a.n
        )));
    }
    let rows = a.row_masks();
    let cons = |m: u32| {
        (0..a.n)
            .filter(|i| m >> i & 1 == 1)
            .fold(0u32, |acc, i| acc | rows[i])
    };
    let witness = find_violating_pair(a.n, |m1, m2| {
        let (c1, c2) = (cons(m1), cons(m2));
        c1 & c2 == 0 && (c1 | c2).count_ones() <= (m1 | m2).count_ones()
    });
    Ok(SarymsakovReport {
        holds: witness.is_none(),
        witness: witness.map(|(x, y)| (mask_ids(x), mask_ids(y))),
    })
}

/// Per-coordinate spread `max − min` over the given states.
pub fn diameter(states: &BTreeMap<NodeId, Vec<f64>>) -> Result<Vec<f64>> {
    diameter_of(states.values().map(Vec::as_slice))
}

pub(crate) fn diameter_of<'a>(mut states: impl Iterator<Item = &'a [f64]>) -> Result<Vec<f64>> {
    let first = states.next().ok_or(Error::Empty("state set"))?;
    let mut lo = first.to_vec();
    let mut hi = first.to_vec();
    for s in states {
        if s.len() != lo.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: s.len(),
            });
        }
        for c in 0..s.len() {
            lo[c] = lo[c].min(s[c]);
            hi[c] = hi[c].max(s[c]);
        }
    }
    Ok(hi.iter().zip(&lo).map(|(h, l)| h - l).collect())
}

/// Slack on distance comparisons.
pub const VALIDITY_TOL: f64 = 1e-9;

/// Whether every state is within Euclidean distance `budget` of `Conv(initial)`.
pub fn validity(states: &BTreeMap<NodeId, Vec<f64>>, initial: &PointSet, budget: f64) -> Result<bool> {
    for x in states.values() {
        if hull_distance(x, initial)? > budget + VALIDITY_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Metrics for the benign states after one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub k: usize,
    pub t: f64,
    pub diameter: Vec<f64>,
    pub validity: bool,
    pub delta_budget: f64,
    pub global_cost: Option<f64>,
    pub cost_rate: Option<f64>,
}
