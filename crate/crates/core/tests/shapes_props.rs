use frechet_lab::frechet::EmpiricalMeasure;
use frechet_lab::shapes::{
    clt_cov_procrustes, procrustes_distance, procrustes_mean, residual_distance, residual_mean, EigenStructure,
    PreShape, ProcrustesOptions,
};
use frechet_lab::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn preshape(m: usize, k: usize) -> impl Strategy<Value = PreShape> {
    prop::collection::vec(-1.0f64..1.0, m * (k - 1))
        .prop_filter_map("zero config", move |v| PreShape::normalize(DMatrix::from_vec(m, k - 1, v)).ok())
}

fn rotation(m: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, m * m).prop_filter_map("singular", move |v| {
        let a = DMatrix::from_vec(m, m, v);
        if a.determinant().abs() < 1e-3 {
            return None;
        }
        let mut q = a.qr().q();
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        Some(q)
    })
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((2, 3)), Just((2, 5)), Just((3, 4)), Just((3, 6))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn procrustes_distance_is_a_metric(
        (x, y, z) in dims().prop_flat_map(|(m, k)| (preshape(m, k), preshape(m, k), preshape(m, k)))
    ) {
        let dxy = procrustes_distance(&x, &y).unwrap().0;
        let dyx = procrustes_distance(&y, &x).unwrap().0;
        let dyz = procrustes_distance(&y, &z).unwrap().0;
        let dxz = procrustes_distance(&x, &z).unwrap().0;
        prop_assert!((dxy - dyx).abs() < 1e-9);
        prop_assert!(dxz <= dxy + dyz + 1e-9);
        prop_assert!(procrustes_distance(&x, &x).unwrap().0 < 1e-6);
    }

    #[test]
    fn procrustes_distance_ignores_rotations(
        (x, y, g, h) in dims().prop_flat_map(|(m, k)| (preshape(m, k), preshape(m, k), rotation(m), rotation(m)))
    ) {
        let a = procrustes_distance(&x, &y).unwrap().0;
        let b = procrustes_distance(&x.rotate(&g), &y.rotate(&h)).unwrap().0;
        prop_assert!((a - b).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn procrustes_mean_ignores_rotations(
        (base, noise, rots) in (2usize..4).prop_flat_map(|m| {
            let k = m + 2;
            (preshape(m, k), prop::collection::vec(preshape(m, k), 12), prop::collection::vec(rotation(m), 12))
        })
    ) {
        let m = base.m();
        let k = base.k();
        // concentrate the sample around `base` so the mean is well separated
        let atoms: Vec<PreShape> = noise
            .iter()
            .map(|e| PreShape::normalize(base.config() + e.config() * 0.2).unwrap())
            .collect();
        let moved: Vec<PreShape> = atoms.iter().zip(&rots).map(|(x, g)| x.rotate(g)).collect();
        let a = procrustes_mean(&EmpiricalMeasure::uniform(atoms).unwrap(), ProcrustesOptions::default()).unwrap();
        let b = procrustes_mean(&EmpiricalMeasure::uniform(moved).unwrap(), ProcrustesOptions::default()).unwrap();
        let d = procrustes_distance(&a.mean.minimizers[0], &b.mean.minimizers[0]).unwrap().0;
        prop_assert!(d < 1e-8, "m = {m}, k = {k}, d = {d}");
    }

    #[test]
    fn eigenstructure_reconstructs_second_moment(xs in prop::collection::vec(preshape(2, 4), 3..20)) {
        let mu = EmpiricalMeasure::uniform(xs).unwrap();
        let eig = EigenStructure::from_measure(&mu).unwrap();
        let mut direct = DMatrix::zeros(6, 6);
        for (x, w) in mu.iter() {
            let v = x.vec();
            direct.ger(w, &v, &v, 1.0);
        }
        prop_assert!((eig.reconstruct() - &direct).norm() < 1e-9);
        prop_assert!(eig.lambdas.iter().all(|&l| l > -1e-12));
        prop_assert!((eig.lambdas.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clt_covariance_is_psd_with_leading_kernel(xs in prop::collection::vec(preshape(2, 3), 5..30)) {
        let mu = EmpiricalMeasure::uniform(xs).unwrap();
        let eig = EigenStructure::from_measure(&mu).unwrap();
        prop_assume!(eig.gap() > 1e-3);
        let cov = clt_cov_procrustes(&eig).unwrap();
        prop_assert!((&cov - cov.transpose()).norm() < 1e-10 * (1.0 + cov.norm()));
        prop_assert!((&cov * eig.leading()).norm() < 1e-9 * (1.0 + cov.norm()));
        let min_eig = cov.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(min_eig > -1e-9 * (1.0 + cov.norm()));
    }
}

#[test]
fn equal_leading_eigenvalues_are_rejected() {
    // two orthogonal pre-shapes with equal weight: lambda_1 = lambda_2 = 1/2
    let x = PreShape::new(2, 3, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    let y = PreShape::new(2, 3, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    let mu = EmpiricalMeasure::uniform(vec![x, y]).unwrap();
    let eig = EigenStructure::from_measure(&mu).unwrap();
    assert!(matches!(clt_cov_procrustes(&eig), Err(Error::DegenerateEigengap(_))));
    let set = residual_mean(&mu).unwrap();
    assert!(!set.unique);
}

#[test]
fn residual_mean_of_a_single_shape_is_that_shape() {
    let x = PreShape::normalize(DMatrix::from_row_slice(2, 2, &[0.3, -0.1, 0.8, 0.4])).unwrap();
    let set = residual_mean(&EmpiricalMeasure::uniform(vec![x.clone(), x.negate()]).unwrap()).unwrap();
    assert!(residual_distance(&set.minimizers[0], &x).unwrap() < 1e-12);
    let v: DVector<f64> = set.minimizers[0].vec();
    assert!((v.norm() - 1.0).abs() < 1e-12);
}
