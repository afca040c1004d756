use nalgebra::{DMatrix, DVector};

use super::{exp_map, SpherePoint};
use crate::error::{Error, Result};
use crate::frechet::{Degeneracy, EmpiricalMeasure, MeanSet};

/// Below this norm the Euclidean mean is treated as the origin.
const FOCAL_TOLERANCE: f64 = 1e-12;
const MAX_HALVINGS: usize = 60;

/// Extrinsic mean: the projection of the Euclidean mean onto the sphere, or
/// the whole sphere when the Euclidean mean is the origin. The reported
/// Fréchet value is that of the chordal loss `|x - X|^2`.
pub fn extrinsic_mean(mu: &EmpiricalMeasure<SpherePoint>) -> MeanSet<SpherePoint> {
    let v = euclidean_mean(mu);
    let norm = v.norm();
    if norm > FOCAL_TOLERANCE {
        MeanSet::singleton(SpherePoint::from_unit(v / norm), 2.0 - 2.0 * norm)
    } else {
        MeanSet {
            minimizers: Vec::new(),
            frechet_value: 2.0,
            diameter: 2.0,
            unique: false,
            degeneracy: Some(Degeneracy::WholeSpace),
        }
    }
}

fn euclidean_mean(mu: &EmpiricalMeasure<SpherePoint>) -> DVector<f64> {
    let mut v = DVector::zeros(mu.atoms()[0].coords().len());
    for (x, w) in mu.iter() {
        v.axpy(w, x.coords(), 1.0);
    }
    v
}

/// Limit covariance `C Sigma C^T` of `sqrt(n)` times the extrinsic sample
/// mean, with `C = (I - m m^T) / |E X|` and `m = E X / |E X|`.
pub fn extrinsic_clt_cov(mean_vector: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = mean_vector.len();
    if sigma.nrows() != d || sigma.ncols() != d {
        return Err(Error::InvalidInput(format!(
            "covariance is {}x{} but the mean vector has length {d}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let norm = mean_vector.norm();
    if norm <= FOCAL_TOLERANCE {
        return Err(Error::OutOfRegime("Euclidean mean is the origin; the extrinsic mean is not unique".into()));
    }
    let m = mean_vector / norm;
    let c = (DMatrix::identity(d, d) - &m * m.transpose()) / norm;
    Ok(&c * sigma * c.transpose())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrinsicOptions {
    /// Stop when the Riemannian gradient norm drops below this value.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IntrinsicOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 10_000 }
    }
}

/// Atoms with identical coordinates merged into one weighted atom, stored
/// row by row in a flat buffer.
struct Merged {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

/// Value, `sum_i w_i log_x(X_i)` (minus half the gradient) and optionally
/// the Riemannian Hessian of the Fréchet function at a point.
struct Local {
    value: f64,
    half_gradient: DVector<f64>,
    hessian: Option<DMatrix<f64>>,
}

impl Merged {
    fn new(mu: &EmpiricalMeasure<SpherePoint>) -> Self {
        let mut order: Vec<usize> = (0..mu.len()).collect();
        let atoms = mu.atoms();
        order.sort_by(|&a, &b| {
            atoms[a]
                .coords()
                .iter()
                .zip(atoms[b].coords().iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let dim = atoms[0].coords().len();
        let mut coords: Vec<f64> = Vec::with_capacity(dim * atoms.len());
        let mut weights: Vec<f64> = Vec::new();
        for i in order {
            let c = atoms[i].coords().as_slice();
            let n = weights.len();
            if n > 0 && &coords[(n - 1) * dim..n * dim] == c {
                weights[n - 1] += mu.weights()[i];
            } else {
                coords.extend_from_slice(c);
                weights.push(mu.weights()[i]);
            }
        }
        Self { dim, coords, weights }
    }

    fn local(&self, x: &SpherePoint, with_hessian: bool) -> Result<Local> {
        let d = self.dim;
        let xc = x.coords().as_slice();
        let mut value = 0.0;
        let mut g = vec![0.0; d];
        // sum w (1 - c_i) uu^T and sum w c_i, with c_i = theta cot theta
        let mut uu = vec![0.0; d * d];
        let mut cot_sum = 0.0;
        let mut v = vec![0.0; d];
        for (p, w) in self.coords.chunks_exact(d).zip(&self.weights) {
            let c: f64 = p.iter().zip(xc).map(|(a, b)| a * b).sum();
            for j in 0..d {
                v[j] = p[j] - c * xc[j];
            }
            let s = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if s < 1e-15 {
                if c < 0.0 {
                    return Err(Error::AntipodalPoint);
                }
                cot_sum += w;
                continue;
            }
            let theta = s.atan2(c);
            value += w * theta * theta;
            let scale = theta / s;
            for j in 0..d {
                g[j] += w * scale * v[j];
            }
            if with_hessian {
                let cot = if theta < 1e-6 { 1.0 - theta * theta / 3.0 } else { theta / theta.tan() };
                cot_sum += w * cot;
                let f = w * (1.0 - cot) / (s * s);
                for a in 0..d {
                    let fa = f * v[a];
                    for b in 0..d {
                        uu[a * d + b] += fa * v[b];
                    }
                }
            }
        }
        let hessian = with_hessian.then(|| {
            let proj = DMatrix::identity(d, d) - x.coords() * x.coords().transpose();
            (proj * cot_sum + DMatrix::from_row_slice(d, d, &uu)) * 2.0
        });
        Ok(Local { value, half_gradient: DVector::from_vec(g), hessian })
    }
}

/// Whether moving from a point with value `f_old` and gradient norm `g_old`
/// to one with `f_new`, `g_new` counts as progress. Values within a few ulps
/// are compared through the gradient instead, so flat (smeary) minima can be
/// resolved beyond the resolution of the objective.
fn accept(f_old: f64, f_new: f64, g_old: f64, g_new: f64) -> bool {
    f_new < f_old || (f_new <= f_old * (1.0 + 4.0 * f64::EPSILON) && g_new < g_old)
}

fn max_iterations(iterations: usize, residual: f64, x: &SpherePoint) -> Error {
    Error::MaxIterations {
        iterations,
        residual,
        last: x.coords().as_slice().to_vec(),
    }
}

/// Riemannian gradient descent `x <- exp_x(step * sum_i w_i log_x(X_i))`
/// with unit step, halved until the Fréchet function decreases.
pub fn intrinsic_mean_gd(
    mu: &EmpiricalMeasure<SpherePoint>,
    init: &SpherePoint,
    opts: IntrinsicOptions,
) -> Result<MeanSet<SpherePoint>> {
    let data = Merged::new(mu);
    let mut x = init.clone();
    let start = data.local(&x, false)?;
    let mut f = start.value;
    let mut g = start.half_gradient;
    for iter in 0..opts.max_iter {
        let gnorm = 2.0 * g.norm();
        if gnorm < opts.tol {
            return Ok(MeanSet::singleton(x, f));
        }
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..MAX_HALVINGS {
            let cand = exp_map(&x, &(&g * step));
            if let Ok(next) = data.local(&cand, false) {
                if accept(f, next.value, gnorm, 2.0 * next.half_gradient.norm()) {
                    x = cand;
                    f = next.value;
                    g = next.half_gradient;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            return Err(max_iterations(iter + 1, gnorm, &x));
        }
    }
    Err(max_iterations(opts.max_iter, 2.0 * g.norm(), &x))
}

/// Safeguarded Riemannian Newton iteration for the intrinsic mean. Falls
/// back to the gradient step when the Hessian is not positive definite and
/// stops at numerical stationarity when no step makes progress. Converges
/// where unit-step gradient descent stalls, e.g. at degenerate minima.
pub fn intrinsic_mean_newton(
    mu: &EmpiricalMeasure<SpherePoint>,
    init: &SpherePoint,
    opts: IntrinsicOptions,
) -> Result<MeanSet<SpherePoint>> {
    let data = Merged::new(mu);
    let mut x = init.clone();
    let mut here = data.local(&x, true)?;
    for _ in 0..opts.max_iter {
        let f = here.value;
        let half = here.half_gradient.clone();
        let gnorm = 2.0 * half.norm();
        if gnorm < opts.tol {
            return Ok(MeanSet::singleton(x, f));
        }
        let grad = &half * -2.0;
        let xc = x.coords();
        let shifted = here.hessian.take().expect("hessian requested") + xc * xc.transpose();
        let newton = shifted.cholesky().map(|c| {
            let mut v = c.solve(&(-&grad));
            let along = v.dot(xc);
            v.axpy(-along, xc, 1.0);
            v
        });
        let mut directions = Vec::with_capacity(2);
        if let Some(v) = newton {
            if v.dot(&grad) < 0.0 && v.iter().all(|c| c.is_finite()) {
                directions.push(v);
            }
        }
        directions.push(half.clone());
        let mut moved = false;
        'search: for dir in &directions {
            let mut step = 1.0;
            for _ in 0..MAX_HALVINGS {
                let cand = exp_map(&x, &(dir * step));
                if let Ok(next) = data.local(&cand, true) {
                    if accept(f, next.value, gnorm, 2.0 * next.half_gradient.norm()) {
                        x = cand;
                        here = next;
                        moved = true;
                        break 'search;
                    }
                }
                step *= 0.5;
            }
        }
        if !moved {
            return Ok(MeanSet::singleton(x, f));
        }
    }
    Err(max_iterations(opts.max_iter, 2.0 * here.half_gradient.norm(), &x))
}

/// Intrinsic mean by [`intrinsic_mean_newton`], started at the extrinsic
/// mean when it exists and at the first atom otherwise.
pub fn intrinsic_mean(mu: &EmpiricalMeasure<SpherePoint>) -> Result<MeanSet<SpherePoint>> {
    let ext = extrinsic_mean(mu);
    let first = mu.atoms()[0].clone();
    let init = ext.minimizers.into_iter().next().unwrap_or(first.clone());
    match intrinsic_mean_newton(mu, &init, IntrinsicOptions::default()) {
        Err(Error::AntipodalPoint) if init != first => {
            intrinsic_mean_newton(mu, &first, IntrinsicOptions::default())
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::super::geodesic_distance;
    use super::*;

    fn pt(c: &[f64]) -> SpherePoint {
        SpherePoint::normalize(DVector::from_column_slice(c)).unwrap()
    }

    #[test]
    fn extrinsic_examples() {
        let e1 = SpherePoint::basis(2, 0);
        let e2 = SpherePoint::basis(2, 1);
        let one = extrinsic_mean(&EmpiricalMeasure::uniform(vec![e1.clone()]).unwrap());
        assert_eq!(one.minimizers, vec![e1.clone()]);
        let two = extrinsic_mean(&EmpiricalMeasure::uniform(vec![e1.clone(), e2]).unwrap());
        assert!((two.minimizers[0].coords() - pt(&[1.0, 1.0, 0.0]).coords()).norm() < 1e-15);
        let whole = extrinsic_mean(&EmpiricalMeasure::uniform(vec![e1.clone(), e1.negate()]).unwrap());
        assert!(whole.minimizers.is_empty());
        assert!(!whole.unique);
        assert_eq!(whole.degeneracy, Some(Degeneracy::WholeSpace));
        assert_eq!(whole.diameter, 2.0);
    }

    #[test]
    fn clt_cov_of_dirac_is_zero() {
        let e1 = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
        let c = extrinsic_clt_cov(&e1, &DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(c.norm(), 0.0);
        assert!(matches!(
            extrinsic_clt_cov(&DVector::zeros(3), &DMatrix::identity(3, 3)),
            Err(Error::OutOfRegime(_))
        ));
    }

    #[test]
    fn clt_cov_quadruples_when_mean_norm_halves() {
        let sigma = DMatrix::from_row_slice(3, 3, &[0.1, 0.02, 0.0, 0.02, 0.3, 0.01, 0.0, 0.01, 0.2]);
        let v = DVector::from_column_slice(&[0.6, 0.0, 0.0]);
        let a = extrinsic_clt_cov(&v, &sigma).unwrap();
        let b = extrinsic_clt_cov(&(&v * 0.5), &sigma).unwrap();
        assert!((b - a * 4.0).norm() < 1e-12);
    }

    #[test]
    fn intrinsic_singleton() {
        let x = pt(&[0.3, -0.2, 0.9]);
        let mu = EmpiricalMeasure::uniform(vec![x.clone()]).unwrap();
        let set = intrinsic_mean_gd(&mu, &SpherePoint::basis(2, 2), IntrinsicOptions::default()).unwrap();
        assert!(geodesic_distance(&set.minimizers[0], &x) < 1e-10);
        assert!(set.frechet_value < 1e-20);
    }

    #[test]
    fn symmetric_pair_midpoint() {
        // a 1-D grid oracle on the great circle through e2 and e3
        let e2 = SpherePoint::basis(2, 1);
        let e3 = SpherePoint::basis(2, 2);
        let mu = EmpiricalMeasure::uniform(vec![e2.clone(), e3.clone()]).unwrap();
        let oracle = (0..=20_000)
            .map(|i| {
                let t = -PI + 2.0 * PI * i as f64 / 20_000.0;
                let p = pt(&[0.0, t.cos(), t.sin()]);
                let f = 0.5 * (geodesic_distance(&p, &e2).powi(2) + geodesic_distance(&p, &e3).powi(2));
                (f, p)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
        let init = pt(&[0.2, 0.5, 0.4]);
        for set in [
            intrinsic_mean_gd(&mu, &init, IntrinsicOptions::default()).unwrap(),
            intrinsic_mean_newton(&mu, &init, IntrinsicOptions::default()).unwrap(),
        ] {
            let m = &set.minimizers[0];
            assert!((m.coords() - pt(&[0.0, 1.0, 1.0]).coords()).norm() < 1e-9);
            assert!(geodesic_distance(m, &oracle.1) < 1e-3);
            assert!((set.frechet_value - PI * PI / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn concentrated_cap_close_to_extrinsic() {
        let spread = 0.05;
        let atoms: Vec<SpherePoint> = (0..12)
            .map(|i| {
                let a = i as f64 * 0.7;
                pt(&[1.0, spread * a.cos(), spread * (1.3 * a).sin() + 0.3 * spread])
            })
            .collect();
        let mu = EmpiricalMeasure::uniform(atoms).unwrap();
        let ext = extrinsic_mean(&mu).minimizers[0].clone();
        let int = intrinsic_mean(&mu).unwrap().minimizers[0].clone();
        assert!(geodesic_distance(&ext, &int) < spread.powi(3));
    }

    #[test]
    fn gd_reports_max_iterations() {
        let atoms = vec![pt(&[1.0, 0.1, 0.0]), pt(&[1.0, -0.3, 0.2]), pt(&[0.5, 0.0, 1.0])];
        let mu = EmpiricalMeasure::uniform(atoms).unwrap();
        let err = intrinsic_mean_gd(&mu, &SpherePoint::basis(2, 1), IntrinsicOptions { tol: 1e-14, max_iter: 2 });
        match err {
            Err(Error::MaxIterations { iterations, last, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(last.len(), 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_are_merged() {
        let e1 = SpherePoint::basis(2, 0);
        let y = pt(&[0.0, 1.0, 0.2]);
        let mu = EmpiricalMeasure::uniform(vec![e1.clone(), y.clone(), e1.clone(), e1.clone()]).unwrap();
        let w = EmpiricalMeasure::weighted(vec![e1, y], vec![0.75, 0.25]).unwrap();
        let a = intrinsic_mean(&mu).unwrap();
        let b = intrinsic_mean(&w).unwrap();
        assert!(geodesic_distance(&a.minimizers[0], &b.minimizers[0]) < 1e-12);
    }
}
