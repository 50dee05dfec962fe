use proptest::prelude::*;

use vtresist::bounds::{nash_williams_bound, power_sum_sandwich, sphere_cutsets};
use vtresist::graph::{
    build_ball, dirichlet_problem, DirichletMode, Family, GenTerm, Graph, GraphSpec, Modulus, TerminalProblem,
};
use vtresist::penergy::{p_energy, p_resistance, stokes_check};

const P_GRID: [f64; 5] = [1.5, 2.0, 2.5, 3.0, 4.0];

fn random_graph() -> impl Strategy<Value = Graph> {
    (3usize..12).prop_flat_map(|n| {
        let extra = prop::collection::vec((0..n, 0..n, 1u32..4), 0..2 * n);
        (Just(n), extra).prop_map(|(n, extra)| {
            let mut edges: Vec<(usize, usize, u32)> = (1..n).map(|i| (i - 1, i, 1)).collect();
            edges.extend(extra.into_iter().filter(|(u, v, _)| u != v));
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

/// Abelian Cayley specs in 1 to 3 dimensions, some factors infinite, with
/// either the box or the coordinate generators plus one extra offset.
fn random_spec() -> impl Strategy<Value = (GraphSpec, u32)> {
    (1usize..=3).prop_flat_map(|d| {
        let factors = prop::collection::vec(
            prop_oneof![Just(Modulus::Infinite), (5u64..14).prop_map(Modulus::Finite)],
            d,
        );
        let extra = prop::collection::vec(-2i64..=2, d);
        let radius = if d == 3 { 2u32..4 } else { 2u32..7 };
        (factors, any::<bool>(), extra, radius).prop_map(move |(factors, use_box, extra, radius)| {
            let generators = if use_box {
                vec![GenTerm::Box]
            } else {
                let mut g = Vec::new();
                for i in 0..d {
                    let mut e = vec![0; d];
                    e[i] = 1;
                    g.push(GenTerm::Offset(e.iter().map(|x| -x).collect()));
                    g.push(GenTerm::Offset(e));
                }
                if extra.iter().any(|&x| x != 0) {
                    g.push(GenTerm::Offset(extra.iter().map(|x| -x).collect()));
                    g.push(GenTerm::Offset(extra));
                }
                g
            };
            (GraphSpec::new(Family::Explicit, factors, generators).unwrap(), radius)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn stokes_holds(graph in random_graph(), seed in any::<u64>(), p in 1.1f64..5.0) {
        let n = graph.n();
        let mut s = seed;
        let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); s };
        let f: Vec<f64> = (0..n).map(|_| (next() >> 11) as f64 / (1u64 << 53) as f64 * 6.0 - 3.0).collect();
        let set: Vec<usize> = (0..n).filter(|_| next() >> 63 == 1).collect();
        prop_assume!(!set.is_empty());
        prop_assert!(stokes_check(&graph, &f, p, &set).unwrap() <= 1e-9);
    }

    #[test]
    fn nash_williams_below_resistance((spec, radius) in random_spec(), pi in 0usize..5) {
        let p = P_GRID[pi];
        let ball = build_ball(&spec, radius).unwrap();
        prop_assume!(!ball.sphere(radius).is_empty());
        let cutsets = sphere_cutsets(&ball, radius).unwrap();
        let nw: f64 = nash_williams_bound(&cutsets, p).unwrap();
        let problem = dirichlet_problem(&ball, radius - 1, DirichletMode::Sphere).unwrap();
        let r = p_resistance::<f64>(&problem, p)
            .unwrap_or_else(|e| panic!("{e} on {} radius {radius} p {p}", spec.to_text()))
            .resistance;
        prop_assert!(nw <= r * (1.0 + 1e-9), "NW {nw} > R {r}");
    }

    #[test]
    fn series_and_parallel(m in 1usize..=10, k in 1u32..=10, pi in 0usize..5) {
        let p = P_GRID[pi];
        let path = Graph::from_edges(m + 1, (0..m).map(|i| (i, i + 1, 1))).unwrap();
        let series = TerminalProblem::collapse(&path, &[0], &[m]).unwrap();
        let r = p_resistance::<f64>(&series, p).unwrap().resistance;
        let want = (m as f64).powf(p - 1.0);
        prop_assert!((r - want).abs() <= 1e-8 * want);

        let bundle = Graph::from_edges(2, [(0, 1, k)]).unwrap();
        let parallel = TerminalProblem::collapse(&bundle, &[0], &[1]).unwrap();
        let r = p_resistance::<f64>(&parallel, p).unwrap().resistance;
        prop_assert!((r - 1.0 / k as f64).abs() <= 1e-8 / k as f64);
    }

    #[test]
    fn potential_minimises_energy(graph in random_graph(), p in 1.5f64..4.0, bump in -0.2f64..0.2, at in 0usize..100) {
        let n = graph.n();
        let problem = TerminalProblem::collapse(&graph, &[0], &[n - 1]).unwrap();
        prop_assume!(problem.free_count() > 0);
        let flow = p_resistance::<f64>(&problem, p).unwrap();
        let f = flow.potential.values.clone();
        let best = p_energy(&problem.graph, &f, p).unwrap();
        let mut g = f.clone();
        let v = 1 + at % problem.free_count();
        g[v] += bump;
        prop_assert!(p_energy(&problem.graph, &g, p).unwrap() >= best * (1.0 - 1e-9));
    }

    #[test]
    fn power_sum(a in 0.0f64..1e3, b in 0.0f64..1e3, p in 0.0f64..6.0) {
        prop_assert!(power_sum_sandwich(a, b, p));
    }
}
