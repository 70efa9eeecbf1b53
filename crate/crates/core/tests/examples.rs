use avta::datagen::{gen_cone_instance, gen_hull_instance, simplex_chart, InstanceSpec, Noise};
use avta::lp::{
    cone_feasibility, prune_columns_feasibility, prune_columns_optimization, LinearSystem,
};
use avta::oracle::{solve_lp_f64, ExactSet, LpOutcome};
use avta::points::{distance, squared_distance};
use avta::project::{choose_target_dim, distance_ratios, membership_certificate, JlMap};
use avta::robust::{avta_robust, multi_projection_vote, sigma_from_gamma};
use avta::triangle::{
    solve_full, solve_membership, solve_membership_observed, validate_witness, PivotMode,
    PivotRule, SolverConfig, SolverState,
};
use avta::vertices::{avta_gamma, avta_k, farthest, AvtaConfig};
use avta::{ConvexCombination, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian_set(n: usize, m: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
        .collect();
    PointSet::from_rows(&rows).unwrap()
}

fn brute_diameter(ps: &PointSet) -> f64 {
    let mut best = 0.0f64;
    for i in 0..ps.len() {
        for j in 0..ps.len() {
            let d: f64 = ps
                .point(i)
                .iter()
                .zip(ps.point(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            best = best.max(d.sqrt());
        }
    }
    best
}

fn triangle() -> PointSet {
    PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap()
}

fn square_center() -> PointSet {
    PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]).unwrap()
}

#[test]
fn diameter_matches_double_loop() {
    for seed in 0..5 {
        let ps = gaussian_set(50, 4, seed);
        assert_eq!(ps.diameter(), brute_diameter(&ps));
    }
}

#[test]
fn min_distance_matches_double_loop() {
    let ps = gaussian_set(40, 3, 9);
    let mut best = f64::INFINITY;
    for i in 0..40 {
        for j in 0..40 {
            if i != j {
                best = best.min(squared_distance(ps.point(i), ps.point(j)).sqrt());
            }
        }
    }
    let md = ps.min_pairwise_distance().unwrap();
    assert_eq!(md.value, best);
    assert!(!md.duplicates);
}

#[test]
fn gram_is_bit_equal_to_direct_dot() {
    let ps = gaussian_set(10, 6, 2);
    for (i, j) in [(3, 7), (7, 3), (0, 9)] {
        let direct: f64 = ps
            .point(i)
            .iter()
            .zip(ps.point(j))
            .map(|(a, b)| a * b)
            .sum();
        let first = ps.gram(i, j).unwrap();
        assert_eq!(first.to_bits(), ps.gram(i, j).unwrap().to_bits());
        assert!((first - direct).abs() <= 1e-15 * (1.0 + direct.abs()));
    }
}

#[test]
fn materialize_matches_reversed_sum() {
    let ps = gaussian_set(5, 3, 4);
    let w = [0.1, 0.3, 0.2, 0.25, 0.15];
    let c = ConvexCombination::from_weights(w.iter().copied().enumerate()).unwrap();
    let x = ps.materialize(&c).unwrap();
    let mut rev = vec![0.0; 3];
    for i in (0..5).rev() {
        for d in 0..3 {
            rev[d] += w[i] * ps.point(i)[d];
        }
    }
    for d in 0..3 {
        assert!((x[d] - rev[d]).abs() < 1e-10);
    }
}

#[test]
fn pivots_satisfy_the_distance_inequality() {
    let ps = gaussian_set(30, 4, 11);
    let all: Vec<usize> = (0..30).collect();
    let p = vec![0.05, -0.1, 0.0, 0.2];
    let mut state = SolverState::new(&ps, &all, &p, None).unwrap();
    for _ in 0..20 {
        let it = state.iterate();
        let Some(j) = state.find_pivot(PivotRule::Greedy) else {
            break;
        };
        let v = ps.point(j);
        assert!(distance(&it, v) >= distance(&p, v) - 1e-12);
        state.apply_pivot(j).unwrap();
    }
}

#[test]
fn step_examples() {
    let ps = PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
    let mut state = SolverState::new(
        &ps,
        &[0, 1],
        &[0.5, 0.0],
        Some(&ConvexCombination::vertex(0)),
    )
    .unwrap();
    let step = state.apply_pivot(1).unwrap();
    assert_eq!(step.alpha, 0.5);
    assert_eq!(state.iterate(), vec![0.5, 0.0]);
    let mut state = SolverState::new(
        &ps,
        &[0, 1],
        &[1.0, 0.0],
        Some(&ConvexCombination::vertex(0)),
    )
    .unwrap();
    assert_eq!(state.apply_pivot(1).unwrap().alpha, 1.0);
    assert_eq!(state.iterate(), vec![1.0, 0.0]);
}

#[test]
fn strict_pivot_examples() {
    let ps = PointSet::from_rows(&[[1.0, 0.0], [-1.0, 0.0], [1.0, 1.0]]).unwrap();
    let mut state = SolverState::new(
        &ps,
        &[0, 1, 2],
        &[0.0, 0.0],
        Some(&ConvexCombination::vertex(0)),
    )
    .unwrap();
    assert_eq!(state.strict_pivot(PivotRule::Greedy).unwrap(), Some(1));
    let mut state = SolverState::new(
        &ps,
        &[0, 2],
        &[0.0, 0.0],
        Some(&ConvexCombination::vertex(0)),
    )
    .unwrap();
    assert_eq!(state.strict_pivot(PivotRule::Greedy).unwrap(), None);
}

#[test]
fn triangle_membership_examples() {
    let ps = triangle();
    let r = solve_full(&ps, &[0.2, 0.2], 0.01, &SolverConfig::default()).unwrap();
    assert!(r.is_approx());
    assert!(r.distance_to_query <= 0.01 * 2f64.sqrt());
    let r = solve_full(&ps, &[1.0, 1.0], 0.01, &SolverConfig::default()).unwrap();
    assert!(r.is_witness());
    assert!(validate_witness(&ps, &[0, 1, 2], &[1.0, 1.0], &r.combination).unwrap());
    let inside = solve_full(&ps, &[0.2, 0.2], 0.01, &SolverConfig::default()).unwrap();
    assert!(!validate_witness(&ps, &[0, 1, 2], &[0.2, 0.2], &inside.combination).unwrap());
}

#[test]
fn interior_queries_stay_under_the_iteration_bound() {
    for seed in 0..30u64 {
        let inst = gen_hull_instance(&InstanceSpec::new(5, 5, 4, seed)).unwrap();
        let ex = ExactSet::from_point_set(&inst.points);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..5).map(|_| rng.random::<f64>() + 0.05).collect();
        let s: f64 = w.iter().sum();
        let c = ConvexCombination::from_weights(w.iter().map(|x| x / s).enumerate()).unwrap();
        let p = inst.points.materialize(&c).unwrap();
        assert!(ex.contains(&p));
        let r = solve_full(&inst.points, &p, 0.05, &SolverConfig::default()).unwrap();
        assert!(r.is_approx());
        assert!(r.iterations as f64 <= 48.0 / 0.0025);
    }
}

#[test]
fn approximate_solutions_never_validate_as_witnesses() {
    for seed in 0..20u64 {
        let ps = gaussian_set(12, 3, seed);
        let ex = ExactSet::from_point_set(&ps);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let p: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 0.4 - 0.2).collect();
        if !ex.contains(&p) {
            continue;
        }
        let r = solve_full(&ps, &p, 0.01, &SolverConfig::default()).unwrap();
        assert!(r.is_approx());
        let all: Vec<usize> = (0..12).collect();
        assert!(!validate_witness(&ps, &all, &p, &r.combination).unwrap());
    }
}

#[test]
fn strict_mode_is_not_slower_on_interior_queries() {
    let (mut plain_total, mut strict_total) = (0, 0);
    for seed in 0..30u64 {
        let inst = gen_hull_instance(&InstanceSpec::new(6, 30, 4, seed)).unwrap();
        let p = inst.points.point(inst.points.len() - 1).to_vec();
        let all: Vec<usize> = (0..inst.points.len()).collect();
        let ex = ExactSet::from_point_set(&inst.points);
        if !ex.hull_contains(&inst.vertices, &avta::oracle::q_vec(&p)) {
            continue;
        }
        let plain = solve_membership(
            &inst.points,
            &inst.vertices,
            &p,
            0.001,
            None,
            &SolverConfig::default(),
        )
        .unwrap();
        let cfg = SolverConfig {
            mode: PivotMode::Strict,
            ..SolverConfig::default()
        };
        let strict = solve_membership(&inst.points, &inst.vertices, &p, 0.001, None, &cfg).unwrap();
        assert!(plain.is_approx() && strict.is_approx());
        plain_total += plain.iterations;
        strict_total += strict.iterations;
        let _ = all;
    }
    assert!(
        strict_total <= plain_total,
        "strict {strict_total} vs plain {plain_total}"
    );
}

#[test]
fn every_step_contracts() {
    for seed in 0..10u64 {
        let ps = gaussian_set(25, 3, seed);
        let all: Vec<usize> = (0..25).collect();
        let p = vec![0.01 * seed as f64, 0.0, -0.02];
        let mut steps = Vec::new();
        let mut obs = |s: &avta::triangle::StepRecord| steps.push(*s);
        solve_membership_observed(
            &ps,
            &all,
            &p,
            0.001,
            None,
            &SolverConfig::default(),
            Some(&mut obs),
        )
        .unwrap();
        for s in steps {
            let bound = s.gap_before
                * (1.0 - s.gap_before.powi(2) / (4.0 * s.radius * s.radius))
                    .max(0.0)
                    .sqrt();
            assert!(s.gap_after <= bound + 1e-9);
            assert!(s.gap_after < s.gap_before);
        }
    }
}

#[test]
fn farthest_examples() {
    let ps = PointSet::from_rows(&[[2.0, 0.0], [1.0, 0.5]]).unwrap();
    assert_eq!(farthest(&ps, &[0.0, 0.0], &[0, 1]).unwrap(), 0);
    let seg = PointSet::from_rows(&[[0.0], [3.0]]).unwrap();
    assert_eq!(farthest(&seg, &[1.5], &[0, 1]).unwrap(), 0);
}

#[test]
fn avta_matches_the_oracle_vertex_set() {
    for seed in 0..12u64 {
        let m = 2 + (seed % 3) as usize;
        let k = m + 1 + (seed % 2) as usize;
        let inst = gen_hull_instance(&InstanceSpec::new(k, 25, m, seed)).unwrap();
        let ex = ExactSet::from_point_set(&inst.points);
        let verts = ex.vertices();
        assert_eq!(verts, inst.vertices);
        let gamma = 0.9 * ex.gamma_star().unwrap() / inst.points.diameter();
        let r = avta_gamma(&inst.points, gamma, &AvtaConfig::seeded(seed)).unwrap();
        assert_eq!(r.sorted_indices(), verts);
        let byk = avta_k(&inst.points, k, &AvtaConfig::seeded(seed)).unwrap();
        for i in byk.sorted_indices() {
            assert!(ex.is_vertex(i));
        }
    }
}

#[test]
fn reported_vertices_are_vertices_for_any_gamma() {
    for seed in 0..12u64 {
        let inst = gen_hull_instance(&InstanceSpec::new(5, 30, 3, 50 + seed)).unwrap();
        let ex = ExactSet::from_point_set(&inst.points);
        let gamma = ChaCha8Rng::seed_from_u64(seed).random_range(0.01..0.99);
        let r = avta_gamma(&inst.points, gamma, &AvtaConfig::seeded(seed)).unwrap();
        for &i in &r.vertex_indices {
            assert!(ex.is_vertex(i), "seed {seed}: {i} is not a vertex");
        }
    }
}

#[test]
fn sigma_bound_is_below_the_oracle_value() {
    for seed in 0..5u64 {
        let inst = gen_hull_instance(&InstanceSpec::new(4, 15, 2, 70 + seed)).unwrap();
        let ex = ExactSet::from_point_set(&inst.points);
        let r = inst.points.diameter();
        let rho = inst.points.min_pairwise_distance().unwrap().value;
        let gamma = ex.gamma_star().unwrap() / r;
        let bound = sigma_from_gamma(gamma, rho, r).unwrap();
        assert!(ex.sigma_star().unwrap() / r >= bound * (1.0 - 1e-12));
    }
    let two = PointSet::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
    let r = two.diameter();
    assert_eq!(sigma_from_gamma(1.0, r, r).unwrap(), 1.0);
}

#[test]
fn spurious_vertex_is_close_to_the_others() {
    let ps = PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.001, 0.5]])
        .unwrap();
    let ex = ExactSet::from_point_set(&ps);
    assert!(ex.is_vertex(4));
    let d = ex.distance(&[0, 1, 2, 3], ex.point(4));
    assert!(d <= 2.0 * 0.001 * ps.diameter());
    let r = avta_robust(&ps, 0.3, 0.001, &AvtaConfig::default()).unwrap();
    assert_eq!(r.pruned_indices, vec![0, 1, 2, 3]);
}

#[test]
fn robust_recovery_on_perturbed_instances() {
    for seed in 0..6u64 {
        let inst = gen_hull_instance(&InstanceSpec::new(4, 20, 2, 300 + seed)).unwrap();
        let ex = ExactSet::from_point_set(&inst.points);
        let r = inst.points.diameter();
        let sigma = ex.sigma_star().unwrap() / r;
        let eps = sigma / 5.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = inst
            .points
            .rows()
            .map(|p| {
                let t: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                let rad = eps * r * rng.random::<f64>();
                vec![p[0] + rad * t.cos(), p[1] + rad * t.sin()]
            })
            .collect();
        let pe = PointSet::from_rows(&rows).unwrap();
        let rep = avta_robust(&pe, 0.9 * sigma, eps, &AvtaConfig::seeded(seed)).unwrap();
        assert_eq!(rep.pruned_indices, inst.vertices);
    }
}

#[test]
fn target_dim_examples() {
    assert_eq!(choose_target_dim(1000, 0.5, 4.0, 1000).unwrap(), 111);
    assert_eq!(choose_target_dim(1000, 0.5, 4.0, 50).unwrap(), 50);
}

#[test]
fn projected_distances_are_mostly_preserved() {
    let ps = gaussian_set(200, 400, 5);
    let k = choose_target_dim(200, 0.5, 4.0, 400).unwrap();
    let map = JlMap::gaussian(400, k, 17).unwrap();
    let ratios = distance_ratios(&ps, &map.project(&ps).unwrap()).unwrap();
    let good = ratios.iter().filter(|r| (0.5..=1.5).contains(*r)).count();
    assert!(good as f64 >= 0.95 * ratios.len() as f64);
}

#[test]
fn projected_vertices_come_from_vertices() {
    for seed in 0..8u64 {
        let inst = gen_hull_instance(&InstanceSpec::new(6, 25, 4, 400 + seed)).unwrap();
        let ex = ExactSet::from_point_set(&inst.points);
        let map = JlMap::gaussian(4, 3, seed).unwrap();
        let rows: Vec<&[f64]> = (0..3).map(|r| map.row(r)).collect();
        for i in ex.linear_image(&rows).vertices() {
            assert!(ex.is_vertex(i));
        }
    }
}

#[test]
fn projected_outside_frequency_respects_the_floor() {
    let ps = PointSet::from_rows(&[
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ])
    .unwrap();
    let p = [1.0, 1.0, 1.0];
    let cert = membership_certificate(&ps, &p).unwrap();
    assert!(cert.bound_holds);
    let ex = ExactSet::from_point_set(&ps);
    let mut outside = 0;
    for seed in 0..50u64 {
        let map = JlMap::gaussian(3, 2, seed).unwrap();
        let rows: Vec<&[f64]> = (0..2).map(|r| map.row(r)).collect();
        let img = ex.linear_image(&rows);
        let q = avta::oracle::q_vec(&map.apply(&p).unwrap());
        if !img.hull_contains(&[0, 1, 2, 3], &q) {
            outside += 1;
        }
    }
    let floor = 1.0 - 2.0 * 16.0 * (-cert.epsilon_bound.powi(2) * 2.0).exp();
    assert!(outside as f64 / 50.0 >= floor);
}

#[test]
fn vote_returns_corners() {
    let r = multi_projection_vote(
        &square_center(),
        4,
        1e-3,
        3,
        Some(2),
        &AvtaConfig::seeded(1),
    )
    .unwrap();
    assert_eq!(r.selected, vec![0, 1, 2, 3]);
}

#[test]
fn lp_pruning_examples() {
    let sys = LinearSystem::from_columns(
        &[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
        vec![1.0, 1.0],
        None,
    )
    .unwrap();
    let p = prune_columns_feasibility(&sys, 0.3, &AvtaConfig::default(), false).unwrap();
    assert_eq!(p.kept, vec![0, 1, 2]);
    let dup = LinearSystem::from_columns(
        &[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![1.0, 1.0],
        None,
    )
    .unwrap();
    assert_eq!(
        prune_columns_feasibility(&dup, 0.3, &AvtaConfig::default(), true)
            .unwrap()
            .kept
            .len(),
        2
    );
    let opt = prune_columns_optimization(&dup, &[2.0, 2.0, 1.0], 0.3, &AvtaConfig::default(), true)
        .unwrap();
    assert_eq!(opt.kept.len(), 2);
    let id = prune_columns_optimization(&sys, &[1.0, 1.0, 1.0], 0.3, &AvtaConfig::default(), false)
        .unwrap();
    assert_eq!(id.kept, vec![0, 1, 2]);
}

#[test]
fn pruned_systems_keep_their_verdicts() {
    for seed in 0..4u64 {
        let inst = gen_hull_instance(&InstanceSpec::new(5, 40, 3, 500 + seed)).unwrap();
        let cols: Vec<Vec<f64>> = inst.points.rows().map(|r| r.to_vec()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in 0..6 {
            let b: Vec<f64> = if t % 2 == 0 {
                let j = rng.random_range(0..cols.len());
                cols[j].iter().map(|x| 2.0 * x).collect()
            } else {
                (0..3).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect()
            };
            let sys = LinearSystem::from_columns(&cols, b, None).unwrap();
            let pruned =
                prune_columns_feasibility(&sys, 0.01, &AvtaConfig::seeded(seed), false).unwrap();
            let full = solve_lp_f64(&sys.a, &sys.b, None).is_feasible();
            let red = solve_lp_f64(&pruned.system.a, &pruned.system.b, None).is_feasible();
            assert_eq!(full, red);
        }
    }
}

#[test]
fn cone_examples() {
    let cols = [vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
    let sys = LinearSystem::from_columns(&cols, vec![1.0, 1.0], None).unwrap();
    assert!(cone_feasibility(&sys, 0.3, 0.001, &AvtaConfig::default())
        .unwrap()
        .verdict
        .is_feasible());
    let sys = sys.with_b(vec![-1.0, 0.0]).unwrap();
    assert!(!cone_feasibility(&sys, 0.3, 0.001, &AvtaConfig::default())
        .unwrap()
        .verdict
        .is_feasible());
}

#[test]
fn cone_instances_agree_with_the_oracle() {
    let inst = gen_cone_instance(10, 200, 5, 10.0, 3).unwrap();
    let ex = ExactSet::from_rows(&simplex_chart(&inst.system.columns()));
    let gens = ex.vertices();
    assert_eq!(gens, inst.generators);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for t in 0..10 {
        let b: Vec<f64> = if t % 2 == 0 {
            let mut b = vec![0.0; 5];
            for &g in &inst.generators {
                let w = rng.random::<f64>();
                for (o, x) in b.iter_mut().zip(inst.system.column(g)) {
                    *o += w * x;
                }
            }
            b
        } else {
            (0..5).map(|_| rng.random::<f64>()).collect()
        };
        let sys = inst.system.with_b(b).unwrap();
        let oracle = solve_lp_f64(&sys.a, &sys.b, None).is_feasible();
        let got = cone_feasibility(&sys, 0.001, 1e-6, &AvtaConfig::seeded(t)).unwrap();
        assert_eq!(got.verdict.is_feasible(), oracle, "query {t}");
    }
}

#[test]
fn optimal_values_survive_pruning() {
    for seed in 0..4u64 {
        let inst = gen_hull_instance(&InstanceSpec::new(5, 30, 3, 600 + seed)).unwrap();
        let cols: Vec<Vec<f64>> = inst.points.rows().map(|r| r.to_vec()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..cols.len()).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = cols[3].iter().map(|x| 1.5 * x).collect();
        let sys = LinearSystem::from_columns(&cols, b, None).unwrap();
        let pruned =
            prune_columns_optimization(&sys, &c, 0.01, &AvtaConfig::seeded(seed), false).unwrap();
        let full = solve_lp_f64(&sys.a, &sys.b, Some(&c));
        let red = solve_lp_f64(
            &pruned.system.a,
            &pruned.system.b,
            pruned.system.c.as_deref(),
        );
        match (full, red) {
            (LpOutcome::Optimal { value: a, .. }, LpOutcome::Optimal { value: b, .. }) => {
                let (a, b) = (avta::oracle::to_f64(&a), avta::oracle::to_f64(&b));
                assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()));
            }
            (a, b) => assert_eq!(a.is_feasible(), b.is_feasible()),
        }
    }
}

#[test]
fn generated_interior_points_are_inside() {
    let inst = gen_hull_instance(&InstanceSpec::new(4, 12, 3, 77)).unwrap();
    let ex = ExactSet::from_point_set(&inst.points);
    for i in 0..12 {
        if !inst.vertices.contains(&i) {
            assert!(ex.hull_contains(&inst.vertices, ex.point(i)));
        }
    }
    let all = gen_hull_instance(&InstanceSpec::new(5, 5, 3, 1)).unwrap();
    assert_eq!(all.vertices, vec![0, 1, 2, 3, 4]);
    let noisy = InstanceSpec {
        noise: Noise::Gaussian { tau: 0.01 },
        ..InstanceSpec::new(4, 12, 3, 77)
    };
    let a = gen_hull_instance(&noisy).unwrap();
    let b = gen_hull_instance(&noisy).unwrap();
    assert_eq!(a.points, b.points);
}
