//! Randomized structural properties of the graph operations and the LP
//! solver.

use proptest::prelude::*;

use fgb::graph::{self, generate, FeedbackGraph, GraphSpec};
use fgb::lp::{solve_covering_lp, verify_feasible, CoverRow, CoveringLp, DEFAULT_TOL};

fn er_graph(k: usize, p: f64, seed: u64) -> FeedbackGraph {
    generate(&GraphSpec::ErdosRenyi { k, p, seed }).unwrap()
}

/// Exact minimum dominating set size by subset enumeration.
fn gamma_exact(g: &FeedbackGraph) -> usize {
    let k = g.vertex_count();
    for size in 1..=k {
        for mask in 0u32..(1 << k) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let mut covered = vec![false; k];
            for v in 0..k {
                if mask & (1 << v) != 0 {
                    for &u in g.neighbors(v) {
                        covered[u] = true;
                    }
                }
            }
            if covered.iter().all(|c| *c) {
                return size;
            }
        }
    }
    k
}

/// Exact independence number by subset enumeration.
fn alpha_exact(g: &FeedbackGraph) -> usize {
    let k = g.vertex_count();
    let mut best = 0;
    for mask in 0u32..(1 << k) {
        let members: Vec<usize> = (0..k).filter(|&v| mask & (1 << v) != 0).collect();
        let ok = members
            .iter()
            .all(|&a| members.iter().all(|&b| a == b || !g.is_adjacent(a, b)));
        if ok {
            best = best.max(members.len());
        }
    }
    best
}

fn dominates(g: &FeedbackGraph, set: &[usize]) -> bool {
    let mut covered = vec![false; g.vertex_count()];
    for &v in set {
        for &u in g.neighbors(v) {
            covered[u] = true;
        }
    }
    covered.iter().all(|c| *c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_graphs_validate(k in 2usize..=12, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let g = er_graph(k, p, seed);
        prop_assert!(g.validate().is_empty());
    }

    #[test]
    fn greedy_dominating_set_dominates_and_approximates(
        k in 2usize..=12, p in 0.0f64..=1.0, seed in any::<u64>()
    ) {
        let g = er_graph(k, p, seed);
        let set = graph::greedy_dominating_set(&g);
        prop_assert!(dominates(&g, &set));
        let exact = gamma_exact(&g);
        let bound = (1.0 + (k as f64).ln()) * exact as f64;
        prop_assert!(set.len() as f64 <= bound + 1e-9,
            "greedy {} vs (1+ln K) * {}", set.len(), exact);
    }

    #[test]
    fn domination_below_independence(k in 2usize..=12, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let g = er_graph(k, p, seed);
        prop_assert!(gamma_exact(&g) <= alpha_exact(&g));
    }

    #[test]
    fn mis_matches_enumeration(k in 2usize..=10, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let g = er_graph(k, p, seed);
        let weights: Vec<f64> = (0..k).map(|i| 0.5 + (i as f64) * 0.3).collect();
        let result = graph::max_weight_independent_set(&g, &weights).unwrap();
        prop_assert!(result.exact);
        let mut best = 0.0f64;
        for mask in 0u32..(1 << k) {
            let members: Vec<usize> = (0..k).filter(|&v| mask & (1 << v) != 0).collect();
            let ok = members
                .iter()
                .all(|&a| members.iter().all(|&b| a == b || !g.is_adjacent(a, b)));
            if ok {
                best = best.max(members.iter().map(|&v| weights[v]).sum());
            }
        }
        prop_assert!((result.weight - best).abs() < 1e-9);
    }

    #[test]
    fn collapse_idempotent_and_cliques(k in 2usize..=12, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let g = er_graph(k, p, seed);
        let once = graph::collapse(&g);
        for class in &once.representatives {
            for &a in class {
                for &b in class {
                    prop_assert!(a == b || g.is_adjacent(a, b));
                }
            }
        }
        let twice = graph::collapse(&once.quotient);
        prop_assert_eq!(twice.quotient.vertex_count(), once.quotient.vertex_count());
        prop_assert!(twice.representatives.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn lp_cost_scaling(
        lambda in 0.1f64..10.0,
        c0 in 0.1f64..3.0,
        c1 in 0.1f64..3.0,
        b0 in 0.5f64..8.0,
        b1 in 0.5f64..8.0,
    ) {
        let rows = vec![
            CoverRow { support: vec![0, 1], threshold: b0 },
            CoverRow { support: vec![1], threshold: b1 },
        ];
        let base = CoveringLp::new(vec![c0, c1], rows.clone()).unwrap();
        let scaled = CoveringLp::new(vec![lambda * c0, lambda * c1], rows).unwrap();
        let a = solve_covering_lp(&base, DEFAULT_TOL).unwrap();
        let b = solve_covering_lp(&scaled, DEFAULT_TOL).unwrap();
        prop_assert!((b.value - lambda * a.value).abs() <= 1e-7 * (1.0 + b.value.abs()));
    }

    #[test]
    fn lp_threshold_monotonicity(
        c0 in 0.1f64..3.0,
        c1 in 0.1f64..3.0,
        b0 in 0.5f64..8.0,
        bump in 0.0f64..4.0,
    ) {
        let make = |t: f64| {
            CoveringLp::new(
                vec![c0, c1],
                vec![CoverRow { support: vec![0, 1], threshold: t }],
            )
            .unwrap()
        };
        let lo = solve_covering_lp(&make(b0), DEFAULT_TOL).unwrap();
        let hi = solve_covering_lp(&make(b0 + bump), DEFAULT_TOL).unwrap();
        prop_assert!(hi.value >= lo.value - 1e-9);
    }

    #[test]
    fn lp_extra_row_monotonicity(
        c0 in 0.1f64..3.0,
        c1 in 0.1f64..3.0,
        b0 in 0.5f64..8.0,
        b1 in 0.5f64..8.0,
    ) {
        let base = CoveringLp::new(
            vec![c0, c1],
            vec![CoverRow { support: vec![0, 1], threshold: b0 }],
        )
        .unwrap();
        let more = CoveringLp::new(
            vec![c0, c1],
            vec![
                CoverRow { support: vec![0, 1], threshold: b0 },
                CoverRow { support: vec![0], threshold: b1 },
            ],
        )
        .unwrap();
        let a = solve_covering_lp(&base, DEFAULT_TOL).unwrap();
        let b = solve_covering_lp(&more, DEFAULT_TOL).unwrap();
        prop_assert!(b.value >= a.value - 1e-9);
        prop_assert!(verify_feasible(&more, &b.primal, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn lp_dual_is_lower_bound(
        c0 in 0.0f64..3.0,
        c1 in 0.1f64..3.0,
        b0 in 0.5f64..8.0,
        b1 in 0.5f64..8.0,
    ) {
        let lp = CoveringLp::new(
            vec![c0, c1],
            vec![
                CoverRow { support: vec![0, 1], threshold: b0 },
                CoverRow { support: vec![1], threshold: b1 },
            ],
        )
        .unwrap();
        let sol = solve_covering_lp(&lp, DEFAULT_TOL).unwrap();
        prop_assert!(sol.dual_value <= sol.value + 1e-9);
        prop_assert!(verify_feasible(&lp, &sol.primal, DEFAULT_TOL).unwrap());
    }
}

#[test]
fn star_condition_star_family() {
    for k in 2..=12 {
        let g = generate(&GraphSpec::Star { k }).unwrap();
        assert!(graph::check_dstar_condition(&g));
    }
}
