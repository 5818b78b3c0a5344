//! Householder least squares, Lawson–Hanson nonnegative least squares and a
//! simplex-enumeration certificate, used to check hull membership with
//! explicit convex weights.

const MAX_OUTER: usize = 500;

/// Least-squares solution of `A z ≈ b` for column-major `cols` (each of
/// length `m`, at most `m` columns). `None` when a column is numerically
/// dependent on the earlier ones.
pub(crate) fn lstsq(cols: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let k = cols.len();
    let m = b.len();
    if k == 0 {
        return Some(Vec::new());
    }
    if k > m {
        return None;
    }
    let mut a: Vec<Vec<f64>> = cols.to_vec();
    let mut b = b.to_vec();
    let norm0 = a.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if norm0 == 0.0 {
        return None;
    }
    for j in 0..k {
        let alpha = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha <= 1e-13 * norm0 {
            return None;
        }
        let alpha = if a[j][j] > 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        let reflect = |col: &mut [f64]| {
            let f = 2.0 * v.iter().zip(col.iter()).map(|(x, y)| x * y).sum::<f64>() / vv;
            for (c, x) in col.iter_mut().zip(&v) {
                *c -= f * x;
            }
        };
        for col in a.iter_mut().skip(j) {
            reflect(&mut col[j..]);
        }
        reflect(&mut b[j..]);
    }
    let mut z = vec![0.0; k];
    for j in (0..k).rev() {
        let tail: f64 = (j + 1..k).map(|i| a[i][j] * z[i]).sum();
        z[j] = (b[j] - tail) / a[j][j];
    }
    Some(z)
}

/// `min ‖A w − b‖` over `w ≥ 0` by the Lawson–Hanson active-set method.
pub(crate) fn nnls(cols: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = cols.len();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let residual = |w: &[f64]| -> Vec<f64> {
        let mut r = b.to_vec();
        for (c, &wj) in cols.iter().zip(w) {
            if wj != 0.0 {
                for (ri, ci) in r.iter_mut().zip(c) {
                    *ri -= wj * ci;
                }
            }
        }
        r
    };
    let scale = cols.iter().flatten().chain(b).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let tol = 10.0 * f64::EPSILON * scale * scale * n.max(1) as f64;
    let mut w = vec![0.0; n];
    let mut passive = vec![false; n];
    // columns dependent on the passive set at the time they tried to enter
    let mut skipped = vec![false; n];
    for _ in 0..MAX_OUTER {
        let r = residual(&w);
        let grad: Vec<f64> = cols.iter().map(|c| dot(c, &r)).collect();
        let Some(j) = (0..n)
            .filter(|&j| !passive[j] && !skipped[j] && grad[j] > tol)
            .max_by(|&a, &b| grad[a].total_cmp(&grad[b]))
        else {
            break;
        };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let sub: Vec<Vec<f64>> = idx.iter().map(|&i| cols[i].clone()).collect();
            let Some(z) = lstsq(&sub, b) else {
                passive[j] = false;
                skipped[j] = true;
                break;
            };
            if z.iter().all(|&v| v > 0.0) {
                for (&i, &v) in idx.iter().zip(&z) {
                    w[i] = v;
                }
                break;
            }
            let mut theta = 1.0f64;
            for (&i, &v) in idx.iter().zip(&z) {
                if v <= 0.0 {
                    theta = theta.min(w[i] / (w[i] - v));
                }
            }
            for (&i, &v) in idx.iter().zip(&z) {
                w[i] += theta * (v - w[i]);
                if w[i] <= 0.0 {
                    w[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !idx.iter().any(|&i| passive[i]) {
                break;
            }
        }
    }
    w
}

/// Convex weights for `x` over `points` and their infinity-norm
/// reconstruction error, including the deviation of the weight sum from one.
pub(crate) fn hull_weights(x: &[f64], points: &[&[f64]]) -> (Vec<f64>, f64) {
    // the sum-to-one row shares the scale of the coordinates; a point in the
    // hull still has an exact zero-residual solution
    let rho = points
        .iter()
        .flat_map(|p| p.iter())
        .chain(x)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let cols: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().copied().chain(std::iter::once(rho)).collect())
        .collect();
    let b: Vec<f64> = x.iter().copied().chain(std::iter::once(rho)).collect();
    let w = nnls(&cols, &b);
    let err = reconstruction_error(x, points, &w);
    (w, err)
}

/// Infinity-norm error of `x ≈ Σ w_j p_j` with negative weights clamped to
/// zero, including the deviation of the weight sum from one.
pub(crate) fn reconstruction_error(x: &[f64], points: &[&[f64]], w: &[f64]) -> f64 {
    let w: Vec<f64> = w.iter().map(|v| v.max(0.0)).collect();
    let mut err = (w.iter().sum::<f64>() - 1.0).abs();
    for (c, xc) in x.iter().enumerate() {
        let recon: f64 = points.iter().zip(&w).map(|(p, wj)| wj * p[c]).sum();
        err = err.max((recon - xc).abs());
    }
    err
}

/// Upper bound on the hull reconstruction error of `x` over `points`:
/// every simplex of at most `d+1` points is fitted exactly by least squares,
/// negative weights are clamped, and the smallest error of the resulting
/// explicit weights is returned. Exact up to rounding when `x` is in the
/// hull. Returns `None` when there are too many simplices to enumerate.
pub(crate) fn simplex_certificate(x: &[f64], points: &[&[f64]]) -> Option<f64> {
    let d = x.len();
    let n = points.len();
    let kmax = (d + 1).min(n);
    let count: usize = (1..=kmax).map(|k| super::binomial(n, k)).sum();
    if count > MAX_SIMPLICES {
        return None;
    }
    let mut best = f64::INFINITY;
    for k in 1..=kmax {
        for set in super::combinations(n, k) {
            let p0 = points[set[0]];
            let diffs: Vec<Vec<f64>> = set[1..]
                .iter()
                .map(|&i| points[i].iter().zip(p0).map(|(a, b)| a - b).collect())
                .collect();
            let rhs: Vec<f64> = x.iter().zip(p0).map(|(a, b)| a - b).collect();
            let Some(mu) = lstsq(&diffs, &rhs) else {
                continue;
            };
            let mut w = Vec::with_capacity(k);
            w.push((1.0 - mu.iter().sum::<f64>()).max(0.0));
            w.extend(mu.iter().map(|v| v.max(0.0)));
            let mut err = (w.iter().sum::<f64>() - 1.0).abs();
            for c in 0..d {
                let recon: f64 = set.iter().zip(&w).map(|(&i, wi)| wi * points[i][c]).sum();
                err = err.max((recon - x[c]).abs());
            }
            best = best.min(err);
            if best == 0.0 {
                return Some(0.0);
            }
        }
    }
    Some(best)
}

const MAX_SIMPLICES: usize = 20_000;
