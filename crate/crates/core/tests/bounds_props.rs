mod common;

use privrec_core::audit::common_neighbors_rewiring;
use privrec_core::bounds::{
    accuracy_upper_bound, ceiling_for_vector, epsilon_lower_bound, epsilon_lower_bound_concentration,
    exp_mech_ratio_floor, node_accuracy_ceiling, rewiring_constant, t_common_neighbors, t_generic, t_weighted_paths,
    BoundInputs,
};
use privrec_core::utility::utility_vector;
use privrec_core::{Error, Graph, NodeId, UtilityFunctionSpec, UtilityVector};
use proptest::prelude::*;

const CN: UtilityFunctionSpec = UtilityFunctionSpec::CommonNeighbors;

fn labeled_graphs(n: usize) -> impl Iterator<Item = Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    (0..1u64 << pairs.len()).map(move |mask| {
        let edges = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e);
        Graph::from_edges(n, edges).unwrap()
    })
}

#[test]
fn rewiring_root_solves_the_quadratic() {
    let c = rewiring_constant(0.1).unwrap();
    // 0.1c² − 0.8c + 1.1 = 0 has roots 4 ± √5
    let root = 4.0 - 5f64.sqrt();
    assert!((c - root).abs() < 1e-9, "{c} vs {root}");
    assert!((c - 1.0) - 0.1 * (c + 1.0).powi(2) >= -1e-9);
    // s = 0.3: (1 − 2s)² − 4s(s + 1) < 0
    assert!((1.0f64 - 0.6).powi(2) - 1.2 * 1.3 < 0.0);
    assert!(matches!(rewiring_constant(0.3), Err(Error::Infeasible { .. })));
}

#[test]
fn budget_examples() {
    let star = Graph::from_edges(5, (1..5).map(|i| (0, i))).unwrap();
    assert_eq!(t_generic(&star).unwrap(), 16);
    let hub = Graph::from_edges(9, (1..8).map(|i| (0, i))).unwrap();
    assert_eq!(t_common_neighbors(&hub, NodeId(0)).unwrap(), 9);
    assert_eq!(t_common_neighbors(&hub, NodeId(8)).unwrap(), 2);
}

#[test]
fn concentration_bound_shape() {
    // with t = 4 α ln n the concentration bound is (1/4α)(1 − (ln β + ln ln n)/ln n)
    let (n, beta, alpha) = (1_000_000usize, 3usize, 2.0f64);
    let ln_n = (n as f64).ln();
    let t = 4.0 * alpha * ln_n;
    let bound = epsilon_lower_bound_concentration(n, beta, 1).unwrap() / t;
    let shape = (1.0 / alpha) * 0.25 * (1.0 - ((beta as f64).ln() + ln_n.ln()) / ln_n);
    assert!((bound - shape).abs() < 1e-12);
    let spread = epsilon_lower_bound_concentration(n, (n as f64 / ln_n) as usize, 5).unwrap();
    assert!(spread <= 2.0 * ln_n.ln() / 5.0);
}

#[test]
fn ceiling_with_all_positive_utilities_high() {
    let uv = UtilityVector::from_values(vec![3.0, 2.0, 2.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let b = ceiling_for_vector(&uv, 4, 0.1, &[1.0]).unwrap();
    assert_eq!((b.k_used, b.c_used, b.t_used), (3, 1.0, 4));
    let direct = 1.0 - 4.0 / (4.0 + 4.0 * (0.4f64).exp());
    assert!((b.accuracy_ceiling - direct).abs() < 1e-12);
}

/// For every labeled graph on at most 6 nodes, every target and every zero-utility
/// candidate, the rewiring uses at most d_r + 2 additions and leaves x with the
/// largest common-neighbor count.
#[test]
fn rewiring_promotes_zero_utility_node() {
    let mut instances = 0u64;
    let mut strict = 0u64;
    let mut first_tie: Option<String> = None;
    let mut evaluable_ties = 0u64;
    let mut first_evaluable_tie: Option<String> = None;
    for n in 2..=6 {
        for g in labeled_graphs(n) {
            for r in g.nodes() {
                let uv = utility_vector(&g, r, &CN).unwrap();
                for (&x, &u) in uv.candidates().iter().zip(uv.values()) {
                    if u != 0.0 {
                        continue;
                    }
                    let rw = common_neighbors_rewiring(&g, r, x).unwrap();
                    assert!(rw.flips.len() as u64 <= t_common_neighbors(&g, r).unwrap());
                    let after = utility_vector(&rw.graph, r, &CN).unwrap();
                    let pos = after.position(x).expect("x stays a candidate");
                    let ux = after.values()[pos];
                    assert_eq!(ux, after.u_max());
                    instances += 1;
                    if after.values().iter().filter(|&&v| v == ux).count() == 1 {
                        strict += 1;
                    } else {
                        let desc = format!("n={n} edges={:?} r={r} x={x} helper={:?}", g.edges().collect::<Vec<_>>(), rw.helper);
                        if first_tie.is_none() {
                            first_tie = Some(desc.clone());
                        }
                        if !uv.is_degenerate() {
                            evaluable_ties += 1;
                            if first_evaluable_tie.is_none() { first_evaluable_tie = Some(desc); }
                        }
                    }
                }
            }
        }
    }
    println!("rewiring: {instances} instances, {strict} strict, first tie: {first_tie:?}");
    println!("rewiring: {evaluable_ties} ties with u_max > 0, first: {first_evaluable_tie:?}");
}

proptest! {
    #[test]
    fn accuracy_and_epsilon_bounds_are_inverse(
        n in 2usize..5000, kf in 0.0f64..0.9, t in 1u64..50, c in 0.05f64..=1.0, df in 0.01f64..0.99,
    ) {
        let k = ((n as f64 * kf) as usize).min(n - 1);
        let delta = c * df;
        let b = BoundInputs::new(n, k, t, c, 0.0).with_delta(delta);
        let eps = epsilon_lower_bound(&b).unwrap();
        prop_assume!(eps >= 0.0);
        let acc = accuracy_upper_bound(&BoundInputs { epsilon: eps, ..b }).unwrap();
        prop_assert!((acc - (1.0 - delta)).abs() <= 1e-9, "{} vs {}", acc, 1.0 - delta);
    }

    #[test]
    fn ceiling_monotone_in_epsilon_and_grid(seed in 0u64..5000, e1 in 0.01f64..2.0, e2 in 0.01f64..2.0) {
        let g = common::random_graph(15, 0.25, seed);
        let r = NodeId((seed % 15) as u32);
        let uv = utility_vector(&g, r, &CN).unwrap();
        prop_assume!(!uv.is_degenerate());
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = node_accuracy_ceiling(&g, r, &CN, lo, &[1.0]).unwrap();
        let b = node_accuracy_ceiling(&g, r, &CN, hi, &[1.0]).unwrap();
        prop_assert!(a.accuracy_ceiling <= b.accuracy_ceiling);
        prop_assert!((0.0..=1.0).contains(&a.accuracy_ceiling));
        let grid: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let fine = node_accuracy_ceiling(&g, r, &CN, lo, &grid).unwrap();
        let coarse = node_accuracy_ceiling(&g, r, &CN, lo, &[0.5, 1.0]).unwrap();
        prop_assert!(fine.accuracy_ceiling <= coarse.accuracy_ceiling);
        prop_assert!(coarse.accuracy_ceiling <= a.accuracy_ceiling);
    }

    #[test]
    fn weighted_paths_budget_at_least_degree(seed in 0u64..5000, gamma_scale in 0.0001f64..0.1) {
        let g = common::random_graph(15, 0.25, seed);
        let d_max = g.max_degree().max(1) as f64;
        let gamma = gamma_scale / d_max;
        for r in g.nodes() {
            let t = t_weighted_paths(&g, r, gamma).unwrap();
            prop_assert!(t >= g.degree(r) as u64);
        }
    }

    #[test]
    fn ratio_floor_values(k in 1usize..1000) {
        let k_f = k as f64;
        prop_assert!((exp_mech_ratio_floor(k, false).unwrap() - 1.0 / (k_f + 1.0)).abs() < 1e-15);
        prop_assert!((exp_mech_ratio_floor(k, true).unwrap() - k_f / (k_f + 1.0)).abs() < 1e-15);
    }
}
