//! The unit sphere `S^m` in `R^{m+1}`: geodesic geometry, extrinsic and
//! intrinsic means, the half-sphere mixture family and CLT covariances.

mod mean;
mod mixture;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frechet::{Canonical, EmpiricalMeasure, FrechetMean, MeanSet, MetricSpace, SpaceKind};

pub use mean::{
    extrinsic_clt_cov, extrinsic_mean, intrinsic_mean, intrinsic_mean_gd, intrinsic_mean_newton, IntrinsicOptions,
};
pub use mixture::{gamma_m, sample_halfsphere_mixture, AntipodalCapMixture, ConcentratedCap, HalfSphereMixture};

const UNIT_TOLERANCE: f64 = 1e-12;

/// A unit vector of `R^{m+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpherePoint(DVector<f64>);

impl SpherePoint {
    /// Accepts coordinates whose norm is 1 within `1e-12`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let v = DVector::from_vec(coords);
        if v.len() < 2 || v.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("sphere point needs at least two finite coordinates".into()));
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidInput(format!("sphere point has norm {norm}, expected 1")));
        }
        Ok(Self(v))
    }

    /// Projects a nonzero vector onto the sphere.
    pub fn normalize(v: DVector<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) || v.len() < 2 {
            return Err(Error::InvalidInput("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self(v / norm))
    }

    /// Standard basis vector `e_{i+1}` of `R^{m+1}`.
    pub fn basis(m: usize, i: usize) -> Self {
        Self(DVector::from_fn(m + 1, |j, _| if j == i { 1.0 } else { 0.0 }))
    }

    /// `e_1`, the pole of the half-sphere mixture.
    pub fn north_pole(m: usize) -> Self {
        Self::basis(m, 0)
    }

    pub(crate) fn from_unit(v: DVector<f64>) -> Self {
        Self(v)
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    /// Intrinsic dimension `m`.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn negate(&self) -> Self {
        Self(-&self.0)
    }
}

impl TryFrom<Vec<f64>> for SpherePoint {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SpherePoint> for Vec<f64> {
    fn from(p: SpherePoint) -> Vec<f64> {
        p.0.as_slice().to_vec()
    }
}

impl Canonical for SpherePoint {
    fn canonical_coords(&self) -> Vec<f64> {
        self.0.as_slice().to_vec()
    }
}

/// Great-circle distance, computed as `atan2(|y - <x,y> x|, <x,y>)` which
/// stays accurate for nearby and nearly antipodal points.
pub fn geodesic_distance(x: &SpherePoint, y: &SpherePoint) -> f64 {
    let c = x.0.dot(&y.0);
    let s = (&y.0 - &x.0 * c).norm();
    s.atan2(c)
}

/// Exponential map at `x` of the tangent vector `v`.
pub fn exp_map(x: &SpherePoint, v: &DVector<f64>) -> SpherePoint {
    let t = v.norm();
    if t == 0.0 {
        return x.clone();
    }
    let y = &x.0 * t.cos() + v * (t.sin() / t);
    SpherePoint(&y / y.norm())
}

/// Inverse of [`exp_map`]; undefined at the antipode of `x`.
pub fn log_map(x: &SpherePoint, y: &SpherePoint) -> Result<DVector<f64>> {
    let c = x.0.dot(&y.0);
    let w = &y.0 - &x.0 * c;
    let s = w.norm();
    if s < 1e-15 {
        if c > 0.0 {
            return Ok(DVector::zeros(x.0.len()));
        }
        return Err(Error::AntipodalPoint);
    }
    let theta = s.atan2(c);
    Ok(w * (theta / s))
}

/// `S^m` with the great-circle metric. Its Fréchet mean is the intrinsic mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sphere {
    pub m: usize,
}

impl Sphere {
    pub fn new(m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidInput("sphere dimension must be at least 1".into()));
        }
        Ok(Self { m })
    }
}

impl MetricSpace for Sphere {
    type Point = SpherePoint;

    fn kind(&self) -> SpaceKind {
        SpaceKind::Sphere { m: self.m }
    }

    fn distance(&self, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(geodesic_distance(x, y))
    }

    fn validate(&self, x: &SpherePoint) -> Result<()> {
        if x.dim() != self.m {
            return Err(Error::InvalidInput(format!(
                "point of S^{} used in S^{}",
                x.dim(),
                self.m
            )));
        }
        Ok(())
    }
}

impl FrechetMean for Sphere {
    fn frechet_mean(&self, mu: &EmpiricalMeasure<SpherePoint>) -> Result<MeanSet<SpherePoint>> {
        for x in mu.atoms() {
            self.validate(x)?;
        }
        intrinsic_mean(mu)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rand::Rng;
    use rand_distr::StandardNormal;

    use super::*;
    use crate::rng;

    fn random_point(m: usize, rng: &mut impl Rng) -> SpherePoint {
        SpherePoint::normalize(DVector::from_fn(m + 1, |_, _| rng.sample(StandardNormal))).unwrap()
    }

    #[test]
    fn distances() {
        let (e1, e2) = (SpherePoint::basis(2, 0), SpherePoint::basis(2, 1));
        assert!((geodesic_distance(&e1, &e2) - PI / 2.0).abs() < 1e-15);
        assert!((geodesic_distance(&e1, &e1.negate()) - PI).abs() < 1e-15);
        assert_eq!(geodesic_distance(&e1, &e1), 0.0);
    }

    #[test]
    fn log_of_base_is_zero_and_antipode_fails() {
        let x = SpherePoint::basis(3, 2);
        assert_eq!(log_map(&x, &x).unwrap().norm(), 0.0);
        assert_eq!(log_map(&x, &x.negate()), Err(Error::AntipodalPoint));
    }

    #[test]
    fn exp_log_round_trip() {
        let mut rng = rng::stream(11, 0);
        for i in 0..1000 {
            let m = 1 + i % 4;
            let x = random_point(m, &mut rng);
            let y = random_point(m, &mut rng);
            let v = log_map(&x, &y).unwrap();
            assert!(v.dot(x.coords()).abs() < 1e-12);
            assert!((v.norm() - geodesic_distance(&x, &y)).abs() < 1e-12);
            let z = exp_map(&x, &v);
            assert!((z.coords() - y.coords()).norm() < 1e-10);
        }
    }

    #[test]
    fn construction_checks_norm() {
        assert!(SpherePoint::new(vec![1.0, 0.0, 0.0]).is_ok());
        assert!(SpherePoint::new(vec![1.0, 0.1, 0.0]).is_err());
        assert!(SpherePoint::normalize(DVector::zeros(3)).is_err());
        let p: SpherePoint = serde_json::from_str("[0.0, 1.0]").unwrap();
        assert_eq!(p.dim(), 1);
        assert!(serde_json::from_str::<SpherePoint>("[0.5, 0.5]").is_err());
    }
}
