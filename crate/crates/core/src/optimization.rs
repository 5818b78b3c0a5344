//! Convex local costs as expression trees, subgradient oracles, step-size
//! schedules, and a grid oracle for objective redundancy.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::combinations;
use crate::graph::NodeId;

/// `a·x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub coeffs: Vec<f64>,
    #[serde(default)]
    pub constant: f64,
}

impl Affine {
    pub fn new(coeffs: Vec<f64>, constant: f64) -> Self {
        Affine { coeffs, constant }
    }

    /// `x(c) + b`, with `c` 0-based.
    pub fn coord(dim: usize, c: usize, constant: f64) -> Self {
        let mut coeffs = vec![0.0; dim];
        coeffs[c] = 1.0;
        Affine { coeffs, constant }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + self.constant
    }
}

/// Convex expression. Every constructor preserves convexity: affine maps,
/// absolute value, squared and plain Euclidean norms of affine vectors,
/// pointwise max, sums, and nonnegative scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum CostExpr {
    Affine { arg: Affine },
    Abs { arg: Affine },
    /// `Σ_k (a_k·x + b_k)²`
    SqNorm { terms: Vec<Affine> },
    /// `sqrt(Σ_k (a_k·x + b_k)²)`
    Norm { terms: Vec<Affine> },
    Max { args: Vec<CostExpr> },
    Sum { args: Vec<CostExpr> },
    Scale { factor: f64, arg: Box<CostExpr> },
}

impl CostExpr {
    /// `‖x − center‖²`.
    pub fn sq_dist(center: &[f64]) -> Self {
        let d = center.len();
        CostExpr::SqNorm {
            terms: (0..d).map(|c| Affine::coord(d, c, -center[c])).collect(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let affine = |a: &Affine| -> Result<()> {
            if a.coeffs.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.coeffs.len(),
                });
            }
            if a.coeffs.iter().chain([&a.constant]).any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("cost coefficients must be finite".into()));
            }
            Ok(())
        };
        match self {
            CostExpr::Affine { arg } | CostExpr::Abs { arg } => affine(arg),
            CostExpr::SqNorm { terms } | CostExpr::Norm { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidParameter("norm needs at least one term".into()));
                }
                terms.iter().try_for_each(affine)
            }
            CostExpr::Max { args } | CostExpr::Sum { args } => {
                if args.is_empty() {
                    return Err(Error::InvalidParameter("max/sum needs at least one argument".into()));
                }
                args.iter().try_for_each(|a| a.validate(dim))
            }
            CostExpr::Scale { factor, arg } => {
                if !(*factor >= 0.0) || !factor.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "scale factor {factor} must be nonnegative to keep the cost convex"
                    )));
                }
                arg.validate(dim)
            }
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            CostExpr::Affine { arg } => arg.eval(x),
            CostExpr::Abs { arg } => arg.eval(x).abs(),
            CostExpr::SqNorm { terms } => terms.iter().map(|t| t.eval(x).powi(2)).sum(),
            CostExpr::Norm { terms } => terms.iter().map(|t| t.eval(x).powi(2)).sum::<f64>().sqrt(),
            CostExpr::Max { args } => args.iter().map(|a| a.evaluate(x)).fold(f64::NEG_INFINITY, f64::max),
            CostExpr::Sum { args } => args.iter().map(|a| a.evaluate(x)).sum(),
            CostExpr::Scale { factor, arg } => factor * arg.evaluate(x),
        }
    }

    fn subgradient_into(&self, x: &[f64], weight: f64, g: &mut [f64]) {
        let add = |g: &mut [f64], a: &Affine, w: f64| {
            for (gc, ac) in g.iter_mut().zip(&a.coeffs) {
                *gc += w * ac;
            }
        };
        match self {
            CostExpr::Affine { arg } => add(g, arg, weight),
            CostExpr::Abs { arg } => {
                let v = arg.eval(x);
                if v != 0.0 {
                    add(g, arg, weight * v.signum());
                }
            }
            CostExpr::SqNorm { terms } => {
                for t in terms {
                    add(g, t, weight * 2.0 * t.eval(x));
                }
            }
            CostExpr::Norm { terms } => {
                let vals: Vec<f64> = terms.iter().map(|t| t.eval(x)).collect();
                let norm = vals.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for (t, v) in terms.iter().zip(&vals) {
                        add(g, t, weight * v / norm);
                    }
                }
            }
            CostExpr::Max { args } => {
                let vals: Vec<f64> = args.iter().map(|a| a.evaluate(x)).collect();
                let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let tied: Vec<&CostExpr> = args.iter().zip(&vals).filter(|(_, v)| **v == top).map(|(a, _)| a).collect();
                let share = weight / tied.len() as f64;
                for a in tied {
                    a.subgradient_into(x, share, g);
                }
            }
            CostExpr::Sum { args } => {
                for a in args {
                    a.subgradient_into(x, weight, g);
                }
            }
            CostExpr::Scale { factor, arg } => arg.subgradient_into(x, weight * factor, g),
        }
    }
}

/// A local cost `f_i` owned by agent `owner`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostFunction {
    pub owner: NodeId,
    pub expr: CostExpr,
}

impl CostFunction {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.expr.evaluate(x)
    }

    /// An element of `∂f(x)`. Kinks resolve deterministically: `|·|` at zero
    /// and the norm at zero contribute nothing, and a max tie averages the
    /// tied branches.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "subgradient of f_{} requested at non-finite point {x:?}",
                self.owner
            )));
        }
        let mut g = vec![0.0; x.len()];
        self.expr.subgradient_into(x, 1.0, &mut g);
        Ok(g)
    }
}

/// Convenience wrapper for the free-function form.
pub fn subgradient(f: &CostFunction, x: &[f64]) -> Result<Vec<f64>> {
    f.subgradient(x)
}

/// Step sizes `β_k` as a function of `t_k = k·T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum StepSchedule {
    /// `a / (b·t + c0)`
    Harmonic { a: f64, b: f64, c0: f64 },
    /// Explicit values for the first rounds, then the harmonic tail.
    Table { values: Vec<f64>, tail: HarmonicTail },
    Constant { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTail {
    pub a: f64,
    pub b: f64,
    pub c0: f64,
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::Harmonic { a: 1.0, b: 5.0, c0: 1.0 }
    }
}

fn harmonic(a: f64, b: f64, c0: f64, t: f64) -> f64 {
    a / (b * t + c0)
}

fn check_harmonic(a: f64, b: f64, c0: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0 && c0 > 0.0) || ![a, b, c0].iter().all(|v| v.is_finite()) {
        return Err(Error::StepSchedule(format!(
            "harmonic a/(b·t + c0) needs a, b, c0 > 0 (got {a}, {b}, {c0})"
        )));
    }
    Ok(())
}

impl StepSchedule {
    /// Checks non-negativity, non-increase, vanishing, `Σβ = ∞` and `Σβ² < ∞`.
    pub fn validate(&self, period: f64) -> Result<()> {
        match self {
            StepSchedule::Harmonic { a, b, c0 } => check_harmonic(*a, *b, *c0),
            StepSchedule::Table { values, tail } => {
                check_harmonic(tail.a, tail.b, tail.c0)?;
                if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                    return Err(Error::StepSchedule(format!("table entry {v} is not a nonnegative number")));
                }
                let first_tail = harmonic(tail.a, tail.b, tail.c0, values.len() as f64 * period);
                let seq: Vec<f64> = values.iter().copied().chain([first_tail]).collect();
                if let Some(w) = seq.windows(2).position(|w| w[1] > w[0]) {
                    return Err(Error::StepSchedule(format!(
                        "step table increases at round {} ({} -> {})",
                        w + 1,
                        seq[w],
                        seq[w + 1]
                    )));
                }
                Ok(())
            }
            StepSchedule::Constant { value } => Err(Error::StepSchedule(format!(
                "constant step {value} does not vanish: the squared steps are not summable"
            ))),
        }
    }
}

/// `β_k` at `t_k = k·T`.
pub fn step_size(s: &StepSchedule, k: usize, period: f64) -> Result<f64> {
    s.validate(period)?;
    Ok(step_size_unchecked(s, k, period))
}

pub(crate) fn step_size_unchecked(s: &StepSchedule, k: usize, period: f64) -> f64 {
    let t = k as f64 * period;
    match s {
        StepSchedule::Harmonic { a, b, c0 } => harmonic(*a, *b, *c0, t),
        StepSchedule::Table { values, tail } => values
            .get(k)
            .copied()
            .unwrap_or_else(|| harmonic(tail.a, tail.b, tail.c0, t)),
        StepSchedule::Constant { value } => *value,
    }
}

/// Axis-aligned search box `[lo_c, hi_c]` per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridBox {
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        GridBox {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Largest number of grid points the oracle will evaluate.
pub const MAX_GRID_POINTS: usize = 20_000_000;

/// Regular grid over a box at a fixed spacing.
#[derive(Debug, Clone)]
pub struct Grid {
    lo: Vec<f64>,
    res: f64,
    counts: Vec<usize>,
}

impl Grid {
    pub fn new(bounds: &GridBox, resolution: f64) -> Result<Self> {
        let d = bounds.dim();
        if d == 0 || d > 3 || bounds.hi.len() != d {
            return Err(Error::Resolution(format!("grid oracle supports 1 to 3 dimensions, got {d}")));
        }
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::Resolution(format!("resolution {resolution} must be positive")));
        }
        let mut counts = Vec::with_capacity(d);
        for c in 0..d {
            let width = bounds.hi[c] - bounds.lo[c];
            if !(width > 0.0) {
                return Err(Error::Resolution(format!("box side {c} is empty")));
            }
            let steps = width / resolution;
            if steps < 4.0 {
                return Err(Error::Resolution(format!(
                    "resolution {resolution} leaves fewer than 4 cells on side {c}; minimizers cannot be separated"
                )));
            }
            counts.push(steps.floor() as usize + 1);
        }
        let total = counts.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
        match total {
            Some(t) if t <= MAX_GRID_POINTS => Ok(Grid {
                lo: bounds.lo.clone(),
                res: resolution,
                counts,
            }),
            _ => Err(Error::Resolution(format!(
                "grid of {counts:?} points exceeds the {MAX_GRID_POINTS}-point limit"
            ))),
        }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid point with linear index `idx` (last coordinate varies fastest).
    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.counts.len()];
        for c in (0..self.counts.len()).rev() {
            p[c] = self.lo[c] + (idx % self.counts[c]) as f64 * self.res;
            idx /= self.counts[c];
        }
        p
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Grid minimizers of a sampled function: every point within a relative
/// `1e-9` of the minimum value, as linear indices.
fn argmin_set(values: &[f64]) -> Vec<usize> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * (1.0 + min.abs());
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v <= min + tol)
        .map(|(i, _)| i)
        .collect()
}

fn hausdorff(grid: &Grid, a: &[usize], b: &[usize]) -> f64 {
    let pa: Vec<Vec<f64>> = a.iter().map(|&i| grid.point(i)).collect();
    let pb: Vec<Vec<f64>> = b.iter().map(|&i| grid.point(i)).collect();
    let dist = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let directed = |from: &[Vec<f64>], to: &[Vec<f64>]| {
        from.iter()
            .map(|p| to.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(&pa, &pb).max(directed(&pb, &pa))
}

/// Grid minimizer of `Σ f` over the box: the lexicographically smallest point
/// attaining the smallest sampled value.
pub fn grid_minimizer(fs: &[CostFunction], bounds: &GridBox, resolution: f64) -> Result<(Vec<f64>, f64)> {
    if fs.is_empty() {
        return Err(Error::Empty("cost function list"));
    }
    let grid = Grid::new(bounds, resolution)?;
    let mut best = (0usize, f64::INFINITY);
    for (i, p) in grid.points().enumerate() {
        let v: f64 = fs.iter().map(|f| f.evaluate(&p)).sum();
        if v < best.1 {
            best = (i, v);
        }
    }
    Ok((grid.point(best.0), best.1))
}

/// Grid oracle for r-redundancy: every sum over `N − r` of the functions has
/// the same minimizer set, up to Hausdorff distance `2·resolution`.
pub fn check_redundancy(fs: &[CostFunction], r: usize, bounds: &GridBox, resolution: f64) -> Result<bool> {
    let n = fs.len();
    if n == 0 {
        return Err(Error::Empty("cost function list"));
    }
    if r >= n {
        return Err(Error::InvalidParameter(format!("r = {r} must be at most N − 1 = {}", n - 1)));
    }
    let grid = Grid::new(bounds, resolution)?;
    if r == 0 {
        return Ok(true);
    }
    let g = grid.len();
    let mut samples = vec![0.0; n * g];
    for (idx, p) in grid.points().enumerate() {
        for (k, f) in fs.iter().enumerate() {
            samples[k * g + idx] = f.evaluate(&p);
        }
    }
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut sums = vec![0.0; g];
    for keep in combinations(n, n - r) {
        sums.iter_mut().for_each(|v| *v = 0.0);
        for &k in &keep {
            for (s, v) in sums.iter_mut().zip(&samples[k * g..(k + 1) * g]) {
                *s += v;
            }
        }
        let set = argmin_set(&sums);
        if !sets.contains(&set) {
            sets.push(set);
        }
    }
    let tol = 2.0 * resolution + 1e-12;
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            if hausdorff(&grid, &sets[a], &sets[b]) > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Mean of the costs owned by members of `subset`, at `x`.
pub fn global_cost(fs: &[CostFunction], subset: &BTreeSet<NodeId>, x: &[f64]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::Empty("agent subset"));
    }
    let mut total = 0.0;
    for &i in subset {
        let f = fs
            .iter()
            .find(|f| f.owner == i)
            .ok_or_else(|| Error::InvalidParameter(format!("agent {i} has no cost function")))?;
        total += f.evaluate(x);
    }
    Ok(total / subset.len() as f64)
}

/// Largest subgradient norm over a grid of the box, an empirical `L`.
pub fn subgradient_bound(fs: &[CostFunction], bounds: &GridBox, resolution: f64) -> Result<f64> {
    let grid = Grid::new(bounds, resolution)?;
    let mut best = 0.0f64;
    for p in grid.points() {
        for f in fs {
            let g = f.subgradient(&p)?;
            best = best.max(g.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
    }
    Ok(best)
}
