//! Safe kernels and auxiliary points.
//!
//! The safe kernel of a point set `X` with fault bound `F` is the intersection
//! of the convex hulls of every subset of `X` that omits `F` points. When
//! `|X| >= (d+1)F + 1` Helly's theorem guarantees it is nonempty, and any
//! point inside it lies in the hull of the benign points no matter which `F`
//! of them were adversarial.

mod lp;
mod minnorm;
mod nnls;


use crate::error::{Error, Result};
use crate::graph::NodeId;
use lp::{Cmp, LinearProgram, LpOutcome, Method, WarmStart};
use nalgebra::DMatrix;

/// Reconstruction tolerance (infinity norm) for hull and kernel feasibility.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Room left for the centering stage above the best achievable residual.
const STAGE2_SLACK: f64 = 1e-12;

/// Tagged points in `R^d`, kept in ascending tag order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    tags: Vec<NodeId>,
}

impl PointSet {
    /// Builds a set from `(tag, point)` pairs. Entries are stably sorted by tag.
    pub fn from_tagged<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, Vec<f64>)>,
    {
        let mut entries: Vec<(NodeId, Vec<f64>)> = entries.into_iter().collect();
        let Some(first) = entries.first() else {
            return Err(Error::Empty("point set"));
        };
        let dim = first.1.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("points must have dimension >= 1".into()));
        }
        if let Some((_, p)) = entries.iter().find(|(_, p)| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        if entries.iter().any(|(_, p)| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidParameter("point coordinates must be finite".into()));
        }
        entries.sort_by_key(|(tag, _)| *tag);
        let (tags, points) = entries.into_iter().unzip();
        Ok(PointSet { dim, points, tags })
    }

    /// Builds a set whose tags are the positions `1..=n`.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_tagged(points.into_iter().enumerate().map(|(i, p)| (i + 1, p)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn tags(&self) -> &[NodeId] {
        &self.tags
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &[f64])> {
        self.tags.iter().copied().zip(self.points.iter().map(Vec::as_slice))
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for p in &self.points {
            for (mc, pc) in m.iter_mut().zip(p) {
                *mc += pc;
            }
        }
        let n = self.points.len() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    fn subset(&self, keep: &[usize]) -> PointSet {
        PointSet {
            dim: self.dim,
            points: keep.iter().map(|&i| self.points[i].clone()).collect(),
            tags: keep.iter().map(|&i| self.tags[i]).collect(),
        }
    }
}

/// A safe-kernel request: the base set and the number of points any hull may omit.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelQuery {
    pub base: PointSet,
    pub faults: usize,
}

impl KernelQuery {
    pub fn new(base: PointSet, faults: usize) -> Result<Self> {
        if faults >= base.len() {
            return Err(Error::InvalidParameter(format!(
                "F = {faults} must be smaller than the point count {}",
                base.len()
            )));
        }
        Ok(KernelQuery { base, faults })
    }

    /// Whether `|base| >= (d+1)F + 1`, the size that guarantees a nonempty kernel.
    pub fn meets_helly_bound(&self) -> bool {
        self.base.len() >= (self.base.dim() + 1) * self.faults + 1
    }
}

/// All `k`-element index combinations of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Index lists of every subset that omits exactly `faults` of `n` points,
/// ordered lexicographically by the omitted indices.
fn kept_indices(n: usize, faults: usize) -> Vec<Vec<usize>> {
    combinations(n, faults)
        .into_iter()
        .map(|omit| (0..n).filter(|i| !omit.contains(i)).collect())
        .collect()
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Translation and uniform scale that map `points` into the unit box around
/// `center`. Hull and kernel questions are invariant under this map.
fn normalizer<'a>(center: &[f64], points: impl Iterator<Item = &'a [f64]>) -> f64 {
    let mut scale = 0.0f64;
    for p in points {
        for (v, c) in p.iter().zip(center) {
            scale = scale.max((v - c).abs());
        }
    }
    scale
}

/// Tests whether `x` lies in `Conv(s)` up to `tol` in the infinity norm.
pub fn hull_membership(x: &[f64], s: &PointSet, tol: f64) -> Result<bool> {
    Ok(hull_residual(x, s)? <= tol)
}

/// Smallest infinity-norm reconstruction error `min ‖Σγ_j s_j − x‖∞` over
/// convex weights `γ`.
pub fn hull_residual(x: &[f64], s: &PointSet) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::Empty("hull point set"));
    }
    check_dim(s.dim(), x.len())?;
    let scale = normalizer(x, s.points().iter().map(Vec::as_slice));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut lp = LinearProgram::new();
    let t = lp.nonneg(1.0);
    let gamma: Vec<usize> = (0..s.len()).map(|_| lp.nonneg(0.0)).collect();
    lp.row(gamma.iter().map(|&g| (g, 1.0)).collect(), Cmp::Eq, 1.0);
    for c in 0..s.dim() {
        let recon: Vec<(usize, f64)> = gamma
            .iter()
            .zip(s.points())
            .map(|(&g, p)| (g, (p[c] - x[c]) / scale))
            .collect();
        let mut le = recon.clone();
        le.push((t, -1.0));
        lp.row(le, Cmp::Le, 0.0);
        let mut ge = recon;
        ge.push((t, 1.0));
        lp.row(ge, Cmp::Ge, 0.0);
    }
    match lp.solve()? {
        LpOutcome::Optimal { objective, .. } => Ok(objective.max(0.0) * scale),
        other => Err(Error::Solver(format!("hull residual program ended with {other:?}"))),
    }
}

/// Euclidean distance from `x` to `Conv(s)`.
pub fn hull_distance(x: &[f64], s: &PointSet) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::Empty("hull point set"));
    }
    check_dim(s.dim(), x.len())?;
    let shifted: Vec<Vec<f64>> = s
        .points()
        .iter()
        .map(|p| p.iter().zip(x).map(|(a, b)| a - b).collect())
        .collect();
    let w = minnorm::min_norm_point(&shifted);
    Ok(w.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Every subset of the base set with `|base| − F` points, in lexicographic
/// order of the omitted indices.
pub fn enumerate_subsets(q: &KernelQuery) -> Result<Vec<PointSet>> {
    if q.faults >= q.base.len() {
        return Err(Error::InvalidParameter(format!(
            "F = {} must be smaller than the point count {}",
            q.faults,
            q.base.len()
        )));
    }
    Ok(kept_indices(q.base.len(), q.faults)
        .iter()
        .map(|keep| q.base.subset(keep))
        .collect())
}

/// A kernel candidate with its certified residual: the largest
/// infinity-norm reconstruction error over the subset hulls, divided by the
/// spread of the base set.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPoint {
    pub point: Vec<f64>,
    pub residual: f64,
}

/// A point of the safe kernel `Ψ(base, F)`, certified to within
/// [`FEASIBILITY_TOL`] relative to the spread of the base set.
///
/// See [`kernel_candidate`] for how the point is chosen.
pub fn safe_kernel_point(q: &KernelQuery) -> Result<Vec<f64>> {
    let best = kernel_candidate(q)?;
    if best.residual > FEASIBILITY_TOL {
        return Err(kernel_empty(q, best.residual));
    }
    Ok(best.point)
}

fn kernel_empty(q: &KernelQuery, residual: f64) -> Error {
    Error::KernelEmpty {
        points: q.base.len(),
        faults: q.faults,
        detail: format!(
            "no point lies in all {} subset hulls (best relative residual {residual:.3e}){}",
            binomial(q.base.len(), q.faults),
            if q.meets_helly_bound() {
                ""
            } else {
                "; fewer than (d+1)F+1 points"
            }
        ),
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Best available kernel point and its residual.
///
/// The quick route works with halfspaces: every hyperplane through `d`
/// base points that keeps at least `n − F` points on one side bounds the
/// kernel, and a small program over the point alone finds the least
/// violation of those halfspaces. When that route does not certify, a
/// linear program over the point and one convex-weight vector per subset
/// minimizes the worst reconstruction error. Both stages then pick the
/// 1-norm closest point to the mean of the base set within that error. Each
/// proposal is re-checked against every subset hull with explicit convex
/// weights: the program's own (clamped), or failing that an exact simplex
/// fit or a nonnegative least-squares fit.
/// With exactly `(d+1)F+1` points the kernel is generically a single
/// point, often a base point itself, so base points are tried after the
/// dual simplex; primal simplex and interior point follow. The first
/// candidate within [`FEASIBILITY_TOL`] wins; otherwise the one with the
/// smallest residual is returned.
pub fn kernel_candidate(q: &KernelQuery) -> Result<KernelPoint> {
    let base = &q.base;
    if q.faults >= base.len() {
        return Err(Error::InvalidParameter(format!(
            "F = {} must be smaller than the point count {}",
            q.faults,
            base.len()
        )));
    }
    let d = base.dim();
    let center = base.mean();
    let scale = normalizer(&center, base.points().iter().map(Vec::as_slice));
    if scale == 0.0 {
        return Ok(KernelPoint {
            point: center,
            residual: 0.0,
        });
    }
    let pts: Vec<Vec<f64>> = base
        .points()
        .iter()
        .map(|p| p.iter().zip(&center).map(|(v, c)| (v - c) / scale).collect())
        .collect();
    let subsets = kept_indices(base.len(), q.faults);

    // the programs run in principal coordinates: thin, nearly flat sets
    // are otherwise badly scaled, and convex weights do not change
    let frame = PrincipalFrame::of(&pts);
    let local: Vec<Vec<f64>> = pts.iter().map(|p| frame.to_local(p)).collect();

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut consider = |(point, weights): Proposal| -> bool {
        let r = worst_hull_residual(&point, &pts, &subsets, weights.as_deref());
        if best.as_ref().is_none_or(|(_, b)| r < *b) {
            best = Some((point, r));
        }
        r <= FEASIBILITY_TOL
    };

    let quick = depth_region_proposals(&local, q.faults)
        .into_iter()
        .any(|y| consider((frame.to_global(&y, d), None)));
    if !quick {
        hull_program_search(&local, &subsets, &frame, &mut consider);
    }
    let (point, residual) = best.expect("base points are always proposed");
    Ok(KernelPoint {
        point: point.iter().zip(&center).map(|(v, c)| c + v * scale).collect(),
        residual,
    })
}

/// Kernel proposals from the halfspace description: `x` is in the kernel
/// exactly when every closed halfspace holding at least `n − F` points
/// holds `x`. Only hyperplanes through `d` of the points are used, which
/// can only enlarge the region, so proposals still need certifying. The
/// same two stages as the hull program run over these few constraints.
fn depth_region_proposals(pts: &[Vec<f64>], faults: usize) -> Vec<Vec<f64>> {
    let n = pts.len();
    let r = pts[0].len();
    if r == 0 || binomial(n, r) > MAX_HYPERPLANES {
        return Vec::new();
    }
    let need = n - faults;
    let mut halfspaces: Vec<(Vec<f64>, f64)> = Vec::new();
    for chosen in combinations(n, r) {
        let Some(normal) = hyperplane_normal(pts, &chosen) else {
            continue;
        };
        let offset: f64 = normal.iter().zip(&pts[chosen[0]]).map(|(a, b)| a * b).sum();
        let side: Vec<f64> = pts
            .iter()
            .map(|p| normal.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() - offset)
            .collect();
        // points within rounding of the hyperplane count on both sides
        let above = side.iter().filter(|&&v| v >= -ON_PLANE_TOL).count();
        let below = side.iter().filter(|&&v| v <= ON_PLANE_TOL).count();
        if above >= need {
            halfspaces.push((normal.clone(), offset));
        }
        if below >= need {
            halfspaces.push((normal.iter().map(|v| -v).collect(), -offset));
        }
    }
    if halfspaces.is_empty() {
        return Vec::new();
    }

    // a·x + t ≥ b for every halfspace, minimizing the violation t first
    let mut lp = LinearProgram::new();
    let x: Vec<usize> = (0..r).map(|_| lp.free(0.0)).collect();
    let t = lp.nonneg(1.0);
    for (a, b) in &halfspaces {
        let mut row: Vec<(usize, f64)> = x.iter().zip(a).map(|(&xc, &v)| (xc, v)).collect();
        row.push((t, 1.0));
        lp.row(row, Cmp::Ge, *b);
    }
    let small = (|| {
        let LpOutcome::Optimal { x: first, .. } = lp.solve_small().ok()? else {
            return None;
        };
        let mut narrowed = lp.clone();
        narrow_to_center(&mut narrowed, &x, t, first[t]);
        let LpOutcome::Optimal { x: second, .. } = narrowed.solve_small().ok()? else {
            return None;
        };
        Some((first, second))
    })();
    let (first, second) = match small {
        Some(found) => found,
        None => {
            let Ok((LpOutcome::Optimal { x: first, .. }, Some(mut narrowed))) = lp.solve_warm(Method::DualSimplex) else {
                return Vec::new();
            };
            narrow_to_center(&mut narrowed, &x, t, first[t]);
            match narrowed.resolve() {
                Ok(LpOutcome::Optimal { x: second, .. }) => (first, second),
                _ => return vec![x.iter().map(|&xc| first[xc]).collect()],
            }
        }
    };
    vec![
        x.iter().map(|&xc| second[xc]).collect(),
        x.iter().map(|&xc| first[xc]).collect(),
    ]
}

/// Second stage: drop the violation from the objective, cap it near its
/// optimum, and minimize the 1-norm of the point instead.
fn narrow_to_center(lp: &mut impl StageTwo, x: &[usize], t: usize, t_opt: f64) {
    lp.set_cost(t, 0.0);
    lp.set_bounds(t, 0.0, (2.0 * t_opt).max(STAGE2_SLACK));
    for &xc in x {
        let e = lp.nonneg(1.0);
        lp.row(vec![(xc, 1.0), (e, -1.0)], Cmp::Le, 0.0);
        lp.row(vec![(xc, 1.0), (e, 1.0)], Cmp::Ge, 0.0);
    }
}

trait StageTwo {
    fn set_cost(&mut self, j: usize, v: f64);
    fn set_bounds(&mut self, j: usize, lo: f64, hi: f64);
    fn nonneg(&mut self, cost: f64) -> usize;
    fn row(&mut self, coeffs: Vec<(usize, f64)>, cmp: Cmp, rhs: f64);
}

impl StageTwo for LinearProgram {
    fn set_cost(&mut self, j: usize, v: f64) {
        LinearProgram::set_cost(self, j, v)
    }
    fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        LinearProgram::set_bounds(self, j, lo, hi)
    }
    fn nonneg(&mut self, cost: f64) -> usize {
        LinearProgram::nonneg(self, cost)
    }
    fn row(&mut self, coeffs: Vec<(usize, f64)>, cmp: Cmp, rhs: f64) {
        LinearProgram::row(self, coeffs, cmp, rhs)
    }
}

impl StageTwo for WarmStart {
    fn set_cost(&mut self, j: usize, v: f64) {
        WarmStart::set_cost(self, j, v)
    }
    fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        WarmStart::set_bounds(self, j, lo, hi)
    }
    fn nonneg(&mut self, cost: f64) -> usize {
        WarmStart::nonneg(self, cost)
    }
    fn row(&mut self, coeffs: Vec<(usize, f64)>, cmp: Cmp, rhs: f64) {
        WarmStart::row(self, coeffs, cmp, rhs)
    }
}

// above this many candidate hyperplanes the halfspace route is skipped
const MAX_HYPERPLANES: usize = 5_000;
// signed distance, in principal coordinates, treated as on the hyperplane
const ON_PLANE_TOL: f64 = 1e-12;

/// Unit normal of the hyperplane through the chosen points, or `None` when
/// they are affinely dependent.
fn hyperplane_normal(pts: &[Vec<f64>], chosen: &[usize]) -> Option<Vec<f64>> {
    let r = pts[0].len();
    if r == 1 {
        return Some(vec![1.0]);
    }
    let p0 = &pts[chosen[0]];
    let diffs = DMatrix::from_fn(r, r, |i, j| if i + 1 < r { pts[chosen[i + 1]][j] - p0[j] } else { 0.0 });
    let svd = diffs.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let sv = &svd.singular_values;
    let top = sv.max();
    // the zero row contributes one null direction; a second means dependence
    let (null, _) = sv.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
    let small = sv.iter().filter(|&&v| v <= RANK_TOL * top).count();
    if top == 0.0 || small > 1 {
        return None;
    }
    Some(v_t.row(null).iter().copied().collect())
}

/// Two-stage hull program with one weight vector per subset, solved by each
/// simplex variant and interior point in turn until a proposal certifies.
fn hull_program_search(
    local: &[Vec<f64>],
    subsets: &[Vec<usize>],
    frame: &PrincipalFrame,
    consider: &mut dyn FnMut(Proposal) -> bool,
) {
    let r = frame.rank();
    let d = frame.dim();
    let mut lp = LinearProgram::new();
    let x: Vec<usize> = (0..r).map(|_| lp.free(0.0)).collect();
    let t = lp.nonneg(1.0);
    let mut weight_cols: Vec<Vec<usize>> = Vec::with_capacity(subsets.len());
    for keep in subsets {
        let w: Vec<usize> = keep.iter().map(|_| lp.nonneg(0.0)).collect();
        lp.row(w.iter().map(|&g| (g, 1.0)).collect(), Cmp::Eq, 1.0);
        for c in 0..r {
            let mut recon: Vec<(usize, f64)> = w.iter().zip(keep).map(|(&g, &i)| (g, local[i][c])).collect();
            recon.push((x[c], -1.0));
            let mut le = recon.clone();
            le.push((t, -1.0));
            lp.row(le, Cmp::Le, 0.0);
            recon.push((t, 1.0));
            lp.row(recon, Cmp::Ge, 0.0);
        }
        weight_cols.push(w);
    }
    let from_solution = |sol: &[f64]| -> Proposal {
        let y: Vec<f64> = x.iter().map(|&xc| sol[xc]).collect();
        let weights = weight_cols.iter().map(|w| w.iter().map(|&g| sol[g]).collect()).collect();
        (frame.to_global(&y, d), Some(weights))
    };

    let mut order: Vec<usize> = (0..local.len()).collect();
    let l1 = |i: usize| -> f64 { local[i].iter().map(|v| v.abs()).sum() };
    order.sort_by(|&a, &b| l1(a).total_cmp(&l1(b)).then(a.cmp(&b)));

    // the dual simplex can stop inside its tolerance band on nearly
    // collinear sets; the other methods then serve as second opinions
    for method in [Method::DualSimplex, Method::PrimalSimplex, Method::InteriorPoint] {
        if let Ok((LpOutcome::Optimal { x: first, .. }, Some(mut narrowed))) = lp.solve_warm(method) {
            narrow_to_center(&mut narrowed, &x, t, first[t]);
            if let Ok(LpOutcome::Optimal { x: second, .. }) = narrowed.resolve() {
                if consider(from_solution(&second)) {
                    return;
                }
            }
            if consider(from_solution(&first)) {
                return;
            }
        }
        if method == Method::DualSimplex {
            // cheap to check, and often the kernel itself
            for &i in &order {
                if consider((frame.to_global(&local[i], d), None)) {
                    return;
                }
            }
        }
    }
}

/// Orthonormal principal axes of a centered point cloud, each scaled to
/// its singular value. Axes with negligible extent are dropped, so the
/// local dimension is the numerical affine rank.
struct PrincipalFrame {
    // (unit axis, singular value)
    axes: Vec<(Vec<f64>, f64)>,
    dim: usize,
}

impl PrincipalFrame {
    fn of(pts: &[Vec<f64>]) -> Self {
        let d = pts[0].len();
        let m = DMatrix::from_fn(pts.len(), d, |i, j| pts[i][j]);
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors were requested");
        let top = svd.singular_values.max();
        let axes = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > RANK_TOL * top)
            .map(|i| (v_t.row(i).iter().copied().collect(), svd.singular_values[i]))
            .collect();
        PrincipalFrame { axes, dim: d }
    }

    fn rank(&self) -> usize {
        self.axes.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn to_local(&self, p: &[f64]) -> Vec<f64> {
        self.axes
            .iter()
            .map(|(v, s)| v.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() / s)
            .collect()
    }

    fn to_global(&self, y: &[f64], d: usize) -> Vec<f64> {
        let mut p = vec![0.0; d];
        for ((v, s), yi) in self.axes.iter().zip(y) {
            for (pc, vc) in p.iter_mut().zip(v) {
                *pc += yi * s * vc;
            }
        }
        p
    }
}

// relative singular value below which an axis counts as flat
const RANK_TOL: f64 = 1e-12;

// a candidate point and, when it came from the program, its subset weights
type Proposal = (Vec<f64>, Option<Vec<Vec<f64>>>);

/// Largest reconstruction error of `point` over the subset hulls. Each
/// subset uses the best of the weights proposed alongside the point, a
/// simplex-enumeration certificate and a nonnegative least-squares fit.
fn worst_hull_residual(point: &[f64], pts: &[Vec<f64>], subsets: &[Vec<usize>], proposed: Option<&[Vec<f64>]>) -> f64 {
    subsets
        .iter()
        .enumerate()
        .map(|(s, keep)| {
            let members: Vec<&[f64]> = keep.iter().map(|&i| pts[i].as_slice()).collect();
            let mut err = f64::INFINITY;
            if let Some(w) = proposed {
                err = nnls::reconstruction_error(point, &members, &w[s]);
            }
            if err > FEASIBILITY_TOL {
                if let Some(cert) = nnls::simplex_certificate(point, &members) {
                    err = err.min(cert);
                }
            }
            if err > FEASIBILITY_TOL {
                err = err.min(nnls::hull_weights(point, &members).1);
            }
            err
        })
        .fold(0.0, f64::max)
}

/// Sorts `x` by coordinate `p` (0-based; ties by ascending tag) and returns
/// the first `k` and last `k` points.
pub fn extreme_sets(x: &PointSet, p: usize, k: usize) -> Result<(PointSet, PointSet)> {
    if p >= x.dim() {
        return Err(Error::InvalidParameter(format!(
            "coordinate {p} out of range for dimension {}",
            x.dim()
        )));
    }
    if k > x.len() || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "extreme set size {k} must be in 1..={}",
            x.len()
        )));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| {
        x.points[a][p]
            .total_cmp(&x.points[b][p])
            .then(x.tags[a].cmp(&x.tags[b]))
    });
    let low = &order[..k];
    let high = &order[order.len() - k..];
    let pick = |idx: &[usize]| {
        PointSet::from_tagged(idx.iter().map(|&i| (x.tags[i], x.points[i].clone())))
    };
    Ok((pick(low)?, pick(high)?))
}

/// Midpoint of the axis-aligned bounding box of `lambda`.
pub fn auxiliary_point(lambda: &PointSet) -> Result<Vec<f64>> {
    if lambda.is_empty() {
        return Err(Error::Empty("auxiliary point set"));
    }
    Ok((0..lambda.dim())
        .map(|c| {
            let (lo, hi) = lambda
                .points()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p[c]), hi.max(p[c]))
                });
            0.5 * lo + 0.5 * hi
        })
        .collect())
}
