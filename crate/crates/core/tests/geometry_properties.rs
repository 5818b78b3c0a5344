use proptest::prelude::*;
use rescon::geometry::{
    auxiliary_point, enumerate_subsets, extreme_sets, hull_distance, hull_membership, safe_kernel_point, KernelQuery,
    PointSet,
};

const TOL: f64 = 1e-9;

/// `n = (d+1)F + 1 + extra` points in `[-1, 1]^d`.
fn instance(max_extra: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, usize)> {
    (1usize..=3, 1usize..=2, 0..=max_extra).prop_flat_map(|(d, f, extra)| {
        let n = (d + 1) * f + 1 + extra;
        (prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), n), Just(f))
    })
}

fn in_all_hulls(x: &[f64], q: &KernelQuery) -> bool {
    enumerate_subsets(q)
        .unwrap()
        .iter()
        .all(|s| hull_membership(x, s, TOL).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_point_lies_in_every_subset_hull((pts, f) in instance(2)) {
        let q = KernelQuery::new(PointSet::from_points(pts).unwrap(), f).unwrap();
        let x = safe_kernel_point(&q).unwrap();
        prop_assert!(in_all_hulls(&x, &q));
        // the same conclusion through the Euclidean projection
        for s in enumerate_subsets(&q).unwrap() {
            prop_assert!(hull_distance(&x, &s).unwrap() <= TOL);
        }
    }

    #[test]
    fn helly_bound_gives_nonempty_kernel((pts, f) in instance(0)) {
        let q = KernelQuery::new(PointSet::from_points(pts).unwrap(), f).unwrap();
        prop_assert!(q.meets_helly_bound());
        prop_assert!(safe_kernel_point(&q).is_ok());
    }

    #[test]
    fn kernel_shrinks_as_faults_grow(d in 1usize..=2, extra in 0usize..=1, seed in prop::collection::vec(-1.0f64..1.0, 24)) {
        let n = 2 * (d + 1) + 1 + extra;
        let pts: Vec<Vec<f64>> = (0..n).map(|i| seed[i * d..(i + 1) * d].to_vec()).collect();
        let base = PointSet::from_points(pts).unwrap();
        let x = safe_kernel_point(&KernelQuery::new(base.clone(), 2).unwrap()).unwrap();
        prop_assert!(in_all_hulls(&x, &KernelQuery::new(base, 1).unwrap()));
    }

    #[test]
    fn convex_combinations_are_members(pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 1..8), w in prop::collection::vec(0.0f64..1.0, 8)) {
        let w = &w[..pts.len()];
        let total: f64 = w.iter().sum();
        prop_assume!(total > 1e-3);
        let x: Vec<f64> = (0..2)
            .map(|c| pts.iter().zip(w).map(|(p, wi)| p[c] * wi / total).sum())
            .collect();
        let s = PointSet::from_points(pts.clone()).unwrap();
        prop_assert!(hull_membership(&x, &s, TOL).unwrap());
        // a point beyond the bounding box is not
        let far = vec![6.0, x[1]];
        prop_assert!(!hull_membership(&far, &s, TOL).unwrap());
    }

    #[test]
    fn auxiliary_point_is_the_box_center(pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..7)) {
        let s = PointSet::from_points(pts.clone()).unwrap();
        let aux = auxiliary_point(&s).unwrap();
        for c in 0..3 {
            let lo = pts.iter().map(|p| p[c]).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(|p| p[c]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= aux[c] && aux[c] <= hi);
            prop_assert!((aux[c] - (lo + hi) / 2.0).abs() <= 1e-12);
        }
        if pts.len() == 1 {
            prop_assert_eq!(&aux, &pts[0]);
        }
    }

    #[test]
    fn extreme_sets_ignore_input_order(pts in prop::collection::vec(prop::collection::vec(-3i32..3, 2), 4..9), k in 1usize..4, p in 0usize..2) {
        // small integers force ties, which must break by tag
        let tagged: Vec<(usize, Vec<f64>)> = pts
            .iter()
            .enumerate()
            .map(|(i, v)| (i + 1, v.iter().map(|&c| c as f64).collect()))
            .collect();
        let mut reversed = tagged.clone();
        reversed.reverse();
        let a = PointSet::from_tagged(tagged).unwrap();
        let b = PointSet::from_tagged(reversed).unwrap();
        let (lo_a, hi_a) = extreme_sets(&a, p, k).unwrap();
        let (lo_b, hi_b) = extreme_sets(&b, p, k).unwrap();
        prop_assert_eq!(lo_a.tags(), lo_b.tags());
        prop_assert_eq!(hi_a.tags(), hi_b.tags());
        let again = extreme_sets(&a, p, k).unwrap();
        prop_assert_eq!(again.0.tags(), lo_a.tags());
        let top = lo_a.points().iter().map(|v| v[p]).fold(f64::NEG_INFINITY, f64::max);
        let rest = a.iter().filter(|(t, _)| !lo_a.tags().contains(t)).map(|(_, v)| v[p]);
        for v in rest {
            prop_assert!(v >= top);
        }
    }
}

#[test]
fn unit_square_kernel_is_its_center() {
    let s = PointSet::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let x = safe_kernel_point(&KernelQuery::new(s, 1).unwrap()).unwrap();
    // the four omit-one-corner triangles meet only at the center; scan a grid
    let q = KernelQuery::new(
        PointSet::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap(),
        1,
    )
    .unwrap();
    let mut members = Vec::new();
    for i in 0..=40 {
        for j in 0..=40 {
            let p = [i as f64 / 40.0, j as f64 / 40.0];
            if in_all_hulls(&p, &q) {
                members.push(p);
            }
        }
    }
    assert_eq!(members, vec![[0.5, 0.5]]);
    assert!((x[0] - 0.5).abs() < 1e-9 && (x[1] - 0.5).abs() < 1e-9);
}
