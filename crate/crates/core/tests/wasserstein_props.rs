use frechet_lab::wasserstein::lp::LinearProgram;
use frechet_lab::wasserstein::{
    barycenter_multimarginal, feasible_region, frechet_functional_w, interpolation_feasible, w2_distance, w2_squared,
    DiscreteMeasure, InterpolationPoint,
};
use proptest::prelude::*;

fn measure(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    (1..=max_atoms)
        .prop_flat_map(|k| (prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), k), prop::collection::vec(0.05f64..1.0, k)))
        .prop_filter_map("repeated atoms", |(support, raw)| {
            let total: f64 = raw.iter().sum();
            DiscreteMeasure::new(support, raw.iter().map(|w| w / total).collect()).ok()
        })
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn permutations3() -> Vec<[usize; 3]> {
    vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
}

fn sym(p: [f64; 2]) -> DiscreteMeasure {
    DiscreteMeasure::uniform(vec![p.to_vec(), vec![-p[0], -p[1]]]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn w2_is_a_metric(mu in measure(6), nu in measure(6), eta in measure(6)) {
        let (d_mn, _) = w2_distance(&mu, &nu).unwrap();
        let (d_nm, _) = w2_distance(&nu, &mu).unwrap();
        let (d_ne, _) = w2_distance(&nu, &eta).unwrap();
        let (d_me, _) = w2_distance(&mu, &eta).unwrap();
        prop_assert!((d_mn - d_nm).abs() < 1e-12);
        prop_assert!(d_me <= d_mn + d_ne + 1e-8);
        prop_assert!(w2_distance(&mu, &mu).unwrap().0 < 1e-7);
    }

    #[test]
    fn plans_are_feasible_and_priced_correctly(mu in measure(6), nu in measure(6)) {
        let (cost, plan) = w2_squared(&mu, &nu).unwrap();
        prop_assert!(plan.marginal_error(&mu, &nu) < 1e-10);
        prop_assert!((plan.cost(&mu, &nu) - cost).abs() < 1e-10);
        prop_assert!(plan.rows().iter().flatten().all(|&p| p >= -1e-12));
    }

    #[test]
    fn uniform_three_point_matches_permutations(
        xs in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 3),
        ys in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 3),
    ) {
        let mu = DiscreteMeasure::uniform(xs.clone());
        let nu = DiscreteMeasure::uniform(ys.clone());
        prop_assume!(mu.is_ok() && nu.is_ok());
        let (cost, _) = w2_squared(&mu.unwrap(), &nu.unwrap()).unwrap();
        let best = permutations3()
            .iter()
            .map(|s| (0..3).map(|i| sq(&xs[i], &ys[s[i]])).sum::<f64>() / 3.0)
            .fold(f64::INFINITY, f64::min);
        prop_assert!((cost - best).abs() < 1e-10);
    }

    #[test]
    fn lp_optimum_is_below_every_vertex(c in prop::collection::vec(0.0f64..5.0, 4)) {
        // 2x2 transport polytope with uniform marginals
        let lp = LinearProgram {
            a: vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0, 0.0]],
            b: vec![0.5, 0.5, 0.5],
            c: c.clone(),
        };
        let sol = lp.solve().unwrap();
        let vertices = [0.5 * (c[0] + c[3]), 0.5 * (c[1] + c[2])];
        let best = vertices[0].min(vertices[1]);
        prop_assert!((sol.objective - best).abs() < 1e-12);
        for v in lp.optimal_vertices(16).unwrap() {
            prop_assert!((v.objective - best).abs() < 1e-12);
        }
    }
}

#[test]
fn symmetric_pair_certificate() {
    let measures = [sym([0.0, 1.0]), sym([1.0, 0.0])];
    let weights = [0.5, 0.5];
    let set = barycenter_multimarginal(&measures, &weights).unwrap();
    assert!((set.frechet_value - 0.5).abs() < 1e-9);
    assert!(set.minimizers.len() >= 2);
    for b in &set.minimizers {
        let v = frechet_functional_w(&measures, &weights, b).unwrap();
        assert!((v - set.frechet_value).abs() < 1e-9);
    }
    let e = sym([-0.5, 0.5]);
    let f = sym([0.5, 0.5]);
    assert!((frechet_functional_w(&measures, &weights, &e).unwrap() - 0.5).abs() < 1e-9);
    assert!((frechet_functional_w(&measures, &weights, &f).unwrap() - 0.5).abs() < 1e-9);
    assert!((w2_squared(&e, &f).unwrap().0 - 1.0).abs() < 1e-9);
    // any other candidate does no better
    for c in [&measures[0], &measures[1], &sym([0.3, 0.1])] {
        assert!(frechet_functional_w(&measures, &weights, c).unwrap() >= set.frechet_value - 1e-9);
    }
}

fn two_point_data() -> Vec<InterpolationPoint> {
    vec![
        InterpolationPoint::new(&[-0.5, 0.5], &[0.0, 1.0], 0.0),
        InterpolationPoint::new(&[0.5, -0.5], &[0.0, -1.0], 0.0),
    ]
}

#[test]
fn checker_matches_closed_form_region() {
    let data = two_point_data();
    let mut disagreements = 0;
    for i in 0..50 {
        let gamma = 1.5 + 4.5 * i as f64 / 49.0;
        for j in 0..50 {
            let alpha = 3.0 * j as f64 / 49.0;
            let beta = gamma + alpha;
            let closed = match feasible_region(gamma) {
                Ok(r) => {
                    if (beta - r.beta_hi).abs() < 1e-9 || (beta - r.beta_lo).abs() < 1e-9 {
                        continue;
                    }
                    r.contains(beta)
                }
                Err(_) => false,
            };
            if (gamma - 2.0).abs() < 1e-9 {
                continue;
            }
            if interpolation_feasible(alpha, beta, &data).unwrap() != closed {
                disagreements += 1;
            }
        }
    }
    assert_eq!(disagreements, 0);
}

#[test]
fn minimal_gap_pins_the_constants() {
    let r = feasible_region(2.0).unwrap();
    assert_eq!((r.beta_lo, r.beta_hi), (2.0, 2.0));
    assert!(interpolation_feasible(0.0, 2.0, &two_point_data()).unwrap());
    assert!(!interpolation_feasible(1e-3, 2.0 + 1e-3, &two_point_data()).unwrap());
}
