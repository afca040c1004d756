use std::f64::consts::PI;

use frechet_lab::circle::CirclePoint;
use frechet_lab::io::{
    parse_angles_csv, parse_landmarks_csv, parse_measure_json, parse_sphere_csv, write_angles_csv, write_sphere_csv,
};
use frechet_lab::sphere::SpherePoint;
use frechet_lab::wasserstein::DiscreteMeasure;
use nalgebra::DVector;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn angles_round_trip_bit_exact(xs in prop::collection::vec(-PI..PI, 1..50)) {
        let pts: Vec<CirclePoint> = xs.iter().map(|&x| CirclePoint::new(x)).collect();
        let back = parse_angles_csv(&write_angles_csv(&pts)).unwrap();
        prop_assert_eq!(back, pts);
    }

    #[test]
    fn sphere_round_trip(vs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..30)) {
        let pts: Vec<SpherePoint> = vs
            .into_iter()
            .filter_map(|v| SpherePoint::normalize(DVector::from_vec(v)).ok())
            .collect();
        prop_assume!(!pts.is_empty());
        let back = parse_sphere_csv(&write_sphere_csv(&pts)).unwrap();
        prop_assert_eq!(back.len(), pts.len());
        for (a, b) in back.iter().zip(&pts) {
            prop_assert!((a.coords() - b.coords()).norm() < 1e-15);
        }
    }

    #[test]
    fn measure_json_round_trip(
        support in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 1..6),
    ) {
        let Ok(mu) = DiscreteMeasure::uniform(support) else { return Ok(()) };
        let text = serde_json::to_string(&mu).unwrap();
        prop_assert_eq!(parse_measure_json(&text).unwrap(), mu);
    }

    #[test]
    fn parsers_never_panic(text in ".{0,200}") {
        let _ = parse_angles_csv(&text);
        let _ = parse_sphere_csv(&text);
        let _ = parse_landmarks_csv(&text, 2, 3, true);
        let _ = parse_measure_json(&text);
    }
}

#[test]
fn errors_name_the_line() {
    let err = parse_angles_csv("0.1\n0.2\nabc\n").unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
    let err = parse_sphere_csv("1,0,0\n0,2,0\n").unwrap_err().to_string();
    assert!(err.contains("line 2"), "{err}");
}
