use std::f64::consts::{PI, TAU};

use frechet_lab::circle::{brute_force_mean, intrinsic_mean_exact, CircleDensity};
use frechet_lab::circle::{arc_distance, CirclePoint};
use frechet_lab::frechet::EmpiricalMeasure;
use frechet_lab::harness::Sampler;
use frechet_lab::rng;
use frechet_lab::quad::integrate;
use proptest::prelude::*;

fn atoms() -> impl Strategy<Value = Vec<f64>> {
    // mixed atoms: free angles plus a few repeated or antipodal ones
    (prop::collection::vec(-PI..PI, 1..40), prop::collection::vec(0usize..4, 0..10)).prop_map(|(mut xs, extra)| {
        for e in extra {
            let base = xs[e % xs.len()];
            xs.push(if e % 2 == 0 { base } else { base + PI });
        }
        xs
    })
}

fn measure(xs: &[f64]) -> EmpiricalMeasure<CirclePoint> {
    EmpiricalMeasure::uniform(xs.iter().map(|&x| CirclePoint::new(x)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn exact_agrees_with_grid_oracle(xs in atoms()) {
        let mu = measure(&xs);
        let exact = intrinsic_mean_exact(&mu);
        let oracle = brute_force_mean(&mu, 100_000).unwrap();
        prop_assert!((exact.frechet_value - oracle.frechet_value).abs() < 1e-8);
        for o in &oracle.minimizers {
            let near = exact.minimizers.iter().map(|e| arc_distance(*e, *o)).fold(f64::INFINITY, f64::min);
            prop_assert!(near < 1e-5, "oracle minimizer {} missing from exact set", o.angle());
        }
    }

    #[test]
    fn rotation_moves_every_minimizer(xs in atoms(), theta in -PI..PI) {
        let mu = measure(&xs);
        let rotated = EmpiricalMeasure::uniform(mu.atoms().iter().map(|a| a.rotate(theta)).collect()).unwrap();
        let a = intrinsic_mean_exact(&mu);
        let b = intrinsic_mean_exact(&rotated);
        prop_assert_eq!(a.minimizers.len(), b.minimizers.len());
        prop_assert!((a.frechet_value - b.frechet_value).abs() < 1e-9);
        for m in &a.minimizers {
            let near = b.minimizers.iter().map(|e| arc_distance(*e, m.rotate(theta))).fold(f64::INFINITY, f64::min);
            prop_assert!(near < 1e-9);
        }
    }

    #[test]
    fn minimizers_attain_reported_value(xs in atoms()) {
        let mu = measure(&xs);
        let set = intrinsic_mean_exact(&mu);
        for m in &set.minimizers {
            let f: f64 = mu.iter().map(|(a, w)| w * arc_distance(*m, *a).powi(2)).sum();
            prop_assert!((f - set.frechet_value).abs() < 1e-9);
        }
    }

    #[test]
    fn antipode_of_mean_has_small_density(seed in any::<u64>(), n in 2000usize..4000, which in 0usize..3) {
        let density = match which {
            0 => CircleDensity::power_smeary(1.0).unwrap(),
            1 => CircleDensity::power_smeary(2.0).unwrap(),
            _ => CircleDensity::log_smeary(1.0).unwrap(),
        };
        prop_assert!(density.antipode_density(CirclePoint::new(0.0)) <= 1.0 / TAU + 1e-9);
        let mut rng = rng::stream(seed, 0);
        let sample = density.sampler().sample(n, &mut rng);
        let mean = intrinsic_mean_exact(&EmpiricalMeasure::uniform(sample).unwrap());
        for m in &mean.minimizers {
            prop_assert!(density.antipode_density(*m) <= 1.0 / TAU + 1e-9);
        }
    }
}

#[test]
fn power_smeary_densities_integrate_to_one() {
    for r in [0.5, 1.0, 2.0, 4.0] {
        let d = CircleDensity::power_smeary(r).unwrap();
        let total = integrate(|x| d.pdf(x), -PI, PI, 1e-12);
        assert!((total - 1.0).abs() < 1e-6, "r = {r}: {total}");
        assert!((d.integral() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn two_antipodal_atoms_have_two_means() {
    let set = intrinsic_mean_exact(&measure(&[0.0, PI]));
    assert_eq!(set.minimizers.len(), 2);
    assert!(!set.unique);
    assert!((set.diameter - PI).abs() < 1e-12);
}
