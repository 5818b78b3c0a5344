//! Slow, obviously-correct reference implementations used to check the
//! library: they enumerate everything and share no code with it.
//!
//! Node ids are 1-based throughout, matching the scenario files.

use rand::Rng;

/// Calls `f(v1, v2)` for every ordered pair of disjoint nonempty subsets of
/// `1..=n`, given as membership vectors. Stops at the first `false`.
fn all_disjoint_pairs(n: usize, mut f: impl FnMut(&[bool], &[bool]) -> bool) -> bool {
    let total = 3usize.pow(n as u32);
    let mut v1 = vec![false; n];
    let mut v2 = vec![false; n];
    for code in 0..total {
        let mut c = code;
        for i in 0..n {
            v1[i] = c % 3 == 1;
            v2[i] = c % 3 == 2;
            c /= 3;
        }
        if v1.iter().any(|&b| b) && v2.iter().any(|&b| b) && !f(&v1, &v2) {
            return false;
        }
    }
    true
}

/// r-robustness straight from the definition. `in_nbrs[i - 1]` lists the
/// in-neighbors of node `i`.
pub fn is_r_robust(in_nbrs: &[Vec<usize>], r: usize) -> bool {
    let n = in_nbrs.len();
    let reachable = |set: &[bool]| {
        (0..n).any(|i| set[i] && in_nbrs[i].iter().filter(|&&j| !set[j - 1]).count() >= r)
    };
    all_disjoint_pairs(n, |v1, v2| reachable(v1) || reachable(v2))
}

/// Random digraph on `n` nodes with each edge present with probability `p`,
/// redrawn until it is r-robust.
pub fn random_robust_digraph(rng: &mut impl Rng, n: usize, r: usize, p: f64) -> Vec<Vec<usize>> {
    loop {
        let g: Vec<Vec<usize>> = (1..=n)
            .map(|i| (1..=n).filter(|&j| j != i && rng.gen_bool(p)).collect())
            .collect();
        if is_r_robust(&g, r) {
            return g;
        }
    }
}

/// Definition of a Sarymsakov matrix, evaluated clause by clause over every
/// pair of disjoint nonempty index sets.
pub fn is_sarymsakov(rows: &[Vec<f64>]) -> bool {
    let n = rows.len();
    let consequents = |set: &[bool]| -> Vec<bool> {
        (0..n).map(|j| (0..n).any(|i| set[i] && rows[i][j] > 0.0)).collect()
    };
    all_disjoint_pairs(n, |v1, v2| {
        let c1 = consequents(v1);
        let c2 = consequents(v2);
        let intersect = (0..n).any(|j| c1[j] && c2[j]);
        let union_c = (0..n).filter(|&j| c1[j] || c2[j]).count();
        let union_v = (0..n).filter(|&j| v1[j] || v2[j]).count();
        intersect || union_c > union_v
    })
}

/// Random row-stochastic matrix. Each entry is zero with probability
/// `sparsity`; every row keeps at least one positive entry.
pub fn random_stochastic(rng: &mut impl Rng, n: usize, sparsity: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..n)
                .map(|_| if rng.gen_bool(sparsity) { 0.0 } else { rng.gen_range(0.1..1.0) })
                .collect();
            if row.iter().all(|&v| v == 0.0) {
                row[rng.gen_range(0..n)] = 1.0;
            }
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
            row
        })
        .collect()
}

/// Smallest value of `f` on the grid `lo + k·res` covering `[lo, hi]^dim`,
/// and the first grid point attaining it.
pub fn grid_argmin(f: impl Fn(&[f64]) -> f64, dim: usize, lo: f64, hi: f64, res: f64) -> (Vec<f64>, f64) {
    let steps = ((hi - lo) / res).round() as usize + 1;
    let mut best = (vec![lo; dim], f64::INFINITY);
    let mut x = vec![0.0; dim];
    for code in 0..steps.pow(dim as u32) {
        let mut c = code;
        for v in x.iter_mut() {
            *v = lo + (c % steps) as f64 * res;
            c /= steps;
        }
        let v = f(&x);
        if v < best.1 {
            best = (x.clone(), v);
        }
    }
    best
}
