//! Wolfe's minimum-norm-point method: the point of `Conv(points)` closest to
//! the origin, used for Euclidean distances to convex hulls.

use super::nnls::lstsq;

const MAX_MAJOR: usize = 1_000;
const MAX_MINOR: usize = 1_000;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `min ‖Σ μ_i p_i‖` subject to `Σ μ_i = 1` (no sign constraint).
///
/// Written as the least-squares problem `min ‖p_0 + Σ_{i≥1} μ_i (p_i − p_0)‖`
/// and solved by Householder QR, which keeps the full precision that the
/// Gram-matrix normal equations would lose.
fn affine_minimizer(points: &[&[f64]]) -> Option<Vec<f64>> {
    let k = points.len();
    if k == 1 {
        return Some(vec![1.0]);
    }
    let diffs: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(points[0]).map(|(x, y)| x - y).collect())
        .collect();
    let rhs: Vec<f64> = points[0].iter().map(|v| -v).collect();
    let mu = lstsq(&diffs, &rhs)?;
    let mut out = Vec::with_capacity(k);
    out.push(1.0 - mu.iter().sum::<f64>());
    out.extend(mu);
    Some(out)
}

/// Returns the minimum-norm point of the convex hull of `points`.
pub(crate) fn min_norm_point(points: &[Vec<f64>]) -> Vec<f64> {
    let dim = points[0].len();
    let max_sq = points.iter().map(|p| dot(p, p)).fold(0.0f64, f64::max);
    if max_sq == 0.0 {
        return vec![0.0; dim];
    }
    // optimality gap near rounding level; `w` is always a hull point, so its
    // norm bounds the distance from above whenever the loop stops
    let tol = 16.0 * f64::EPSILON * max_sq;
    let combine = |set: &[usize], lambda: &[f64]| {
        let mut w = vec![0.0; dim];
        for (&i, &l) in set.iter().zip(lambda) {
            for (wc, pc) in w.iter_mut().zip(&points[i]) {
                *wc += l * pc;
            }
        }
        w
    };

    let start = (0..points.len())
        .min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b])))
        .unwrap_or(0);
    let mut set = vec![start];
    let mut lambda = vec![1.0];
    let mut w = points[start].clone();

    for _ in 0..MAX_MAJOR {
        let ww = dot(&w, &w);
        let (j, wp) = (0..points.len())
            .map(|j| (j, dot(&w, &points[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if ww - wp <= tol || set.contains(&j) {
            break;
        }
        set.push(j);
        lambda.push(0.0);
        for _ in 0..MAX_MINOR {
            let refs: Vec<&[f64]> = set.iter().map(|&i| points[i].as_slice()).collect();
            let Some(mu) = affine_minimizer(&refs) else {
                // affinely dependent support: drop the newest point and stop
                set.pop();
                lambda.pop();
                return combine(&set, &lambda);
            };
            if mu.iter().all(|&v| v > 1e-14) {
                lambda = mu;
                break;
            }
            let mut theta = 1.0f64;
            for (l, m) in lambda.iter().zip(&mu) {
                if *m <= 1e-14 && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l = (1.0 - theta) * *l + theta * m;
            }
            let mut k = 0;
            while k < set.len() {
                if lambda[k] <= 1e-14 {
                    set.remove(k);
                    lambda.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = lambda.iter().sum();
            for l in &mut lambda {
                *l /= total;
            }
        }
        w = combine(&set, &lambda);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_projection() {
        // segment from (1,-1) to (1,1): closest point to origin is (1,0)
        let p = min_norm_point(&[vec![1.0, -1.0], vec![1.0, 1.0]]);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn origin_inside() {
        let p = min_norm_point(&[vec![-1.0, -1.0], vec![2.0, -1.0], vec![0.0, 3.0]]);
        assert!(dot(&p, &p).sqrt() < 1e-9);
    }

    #[test]
    fn vertex_projection() {
        let p = min_norm_point(&[vec![1.0, 1.0], vec![2.0, 1.0], vec![1.0, 3.0]]);
        assert!((p[0] - 1.0).abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12);
    }
}
