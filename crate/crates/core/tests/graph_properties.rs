use proptest::prelude::*;
use rescon::graph::{check_r_robust, check_rs_robust, max_robustness, witness_violates};
use rescon::Digraph;
use rescon_oracles::is_r_robust;

fn digraph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..=7).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (1..=n)
            .flat_map(|i| (1..=n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        (Just(n), proptest::sample::subsequence(pairs.clone(), 0..=pairs.len()))
    })
}

fn in_lists(g: &Digraph) -> Vec<Vec<usize>> {
    g.nodes().map(|i| g.in_neighbors(i).unwrap().iter().copied().collect()).collect()
}

/// Nodes of `set` with at least `r` in-neighbors outside it.
fn reachable(g: &Digraph, set: &[usize], r: usize) -> usize {
    set.iter()
        .filter(|&&i| g.in_neighbors(i).unwrap().iter().filter(|j| !set.contains(j)).count() >= r)
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn agrees_with_brute_force((n, edges) in digraph(), r in 1usize..5) {
        let g = Digraph::new(n, edges, []).unwrap();
        let r = r.min(n);
        prop_assert_eq!(check_r_robust(&g, r).unwrap().holds, is_r_robust(&in_lists(&g), r));
    }

    #[test]
    fn robustness_is_monotone_in_r((n, edges) in digraph()) {
        let g = Digraph::new(n, edges, []).unwrap();
        let top = max_robustness(&g).unwrap();
        for r in 1..=n {
            prop_assert_eq!(check_r_robust(&g, r).unwrap().holds, r <= top);
        }
    }

    #[test]
    fn r_robust_implies_rs_with_s_one((n, edges) in digraph(), r in 1usize..5) {
        let g = Digraph::new(n, edges, []).unwrap();
        let r = r.min(n);
        if check_r_robust(&g, r).unwrap().holds {
            prop_assert!(check_rs_robust(&g, r, 1).unwrap().holds);
        }
    }

    #[test]
    fn adding_an_edge_keeps_robustness((n, edges) in digraph(), r in 1usize..4, s in 1usize..4, pick in any::<prop::sample::Index>()) {
        let g = Digraph::new(n, edges, []).unwrap();
        let (r, s) = (r.min(n), s.min(n));
        let missing: Vec<(usize, usize)> = (1..=n)
            .flat_map(|i| (1..=n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && !g.has_edge(i, j))
            .collect();
        prop_assume!(!missing.is_empty());
        let (i, j) = missing[pick.index(missing.len())];
        let h = g.with_edge(i, j).unwrap();
        if check_r_robust(&g, r).unwrap().holds {
            prop_assert!(check_r_robust(&h, r).unwrap().holds);
        }
        if check_rs_robust(&g, r, s).unwrap().holds {
            prop_assert!(check_rs_robust(&h, r, s).unwrap().holds);
        }
    }

    #[test]
    fn witnesses_fail_every_clause((n, edges) in digraph(), r in 1usize..5, s in 1usize..5) {
        let g = Digraph::new(n, edges, []).unwrap();
        let (r, s) = (r.min(n), s.min(n));
        for cert in [check_r_robust(&g, r).unwrap(), check_rs_robust(&g, r, s).unwrap()] {
            if cert.holds {
                prop_assert!(cert.witness.is_none());
                continue;
            }
            prop_assert!(witness_violates(&g, &cert));
            let (v1, v2) = cert.witness.clone().unwrap();
            prop_assert!(!v1.is_empty() && !v2.is_empty());
            prop_assert!(v1.iter().all(|i| !v2.contains(i)));
            let (x1, x2) = (reachable(&g, &v1, cert.r), reachable(&g, &v2, cert.r));
            if cert.s == 1 {
                prop_assert!(x1 == 0 && x2 == 0);
            } else {
                prop_assert!(x1 < v1.len() && x2 < v2.len() && x1 + x2 < cert.s);
            }
        }
    }
}

#[test]
fn complete_graph_robustness() {
    // K_n is ceil(n/2)-robust
    for n in 2..=8 {
        let g = Digraph::complete(n).unwrap();
        assert_eq!(max_robustness(&g).unwrap(), n.div_ceil(2), "n = {n}");
    }
}
