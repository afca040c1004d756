use std::f64::consts::PI;

use frechet_lab::circle::{intrinsic_mean_exact, Circle, CircleDirac, CirclePoint, UniformCircle, WrappedNormal};
use frechet_lab::frechet::{frechet_value, EmpiricalMeasure, SquaredDistance};
use frechet_lab::harness::{rate_estimate, risk, MeanEstimator, Sampler};
use frechet_lab::lowerbound::ConstantEstimator;
use frechet_lab::rng;
use proptest::prelude::*;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let sampler = WrappedNormal { mean: 0.4, sd: 0.7 };
    let run = || risk(&Circle, &MeanEstimator(&Circle), &sampler, &CirclePoint::new(0.4), 57, 2.0, 300, 99).unwrap();
    let one = in_pool(1, run);
    let four = in_pool(4, run);
    assert_eq!(one, four);
    assert_eq!(one.estimate.to_bits(), four.estimate.to_bits());
    assert_eq!(one.std_error.to_bits(), four.std_error.to_bits());
}

#[test]
fn constant_truth_estimator_has_zero_risk() {
    let truth = CirclePoint::new(1.0);
    let est = ConstantEstimator(truth);
    for n in [1, 10, 1000] {
        let r = risk(&Circle, &est, &UniformCircle, &truth, n, 2.0, 20, 3).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.std_error, 0.0);
    }
}

#[test]
fn dirac_sampler_gives_degenerate_regression() {
    let x = CirclePoint::new(0.2);
    let err = rate_estimate(&Circle, &CircleDirac(x), &x, &[10, 100, 1000], 5, 1).unwrap_err();
    assert!(matches!(err, frechet_lab::Error::DegenerateRegression), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mean_set_values_match_reevaluation(seed in any::<u64>(), n in 1usize..60) {
        let sample = UniformCircle.sample(n, &mut rng::stream(seed, 0));
        let mu = EmpiricalMeasure::uniform(sample).unwrap();
        let set = intrinsic_mean_exact(&mu);
        for m in &set.minimizers {
            let v = frechet_value(&Circle, &SquaredDistance(&Circle), &mu, m).unwrap();
            prop_assert!((v - set.frechet_value).abs() < 1e-9);
        }
    }

    #[test]
    fn risk_is_nonnegative(seed in any::<u64>(), n in 1usize..40, p in 1.0f64..3.0) {
        let r = risk(&Circle, &MeanEstimator(&Circle), &UniformCircle, &CirclePoint::new(-PI / 3.0), n, p, 8, seed).unwrap();
        prop_assert!(r.estimate >= 0.0 && r.std_error >= 0.0);
    }
}
