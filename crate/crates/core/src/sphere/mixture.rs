use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use super::SpherePoint;
use crate::error::{Error, Result};
use crate::harness::Sampler;
use crate::rng::{self, StreamRng};

/// `gamma_m = (sqrt(pi)/2) Gamma((m+1)/2) / Gamma((m+2)/2)`.
pub fn gamma_m(m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidInput("gamma_m needs m >= 1".into()));
    }
    let m = m as f64;
    Ok(0.5 * PI.sqrt() * (ln_gamma((m + 1.0) / 2.0) - ln_gamma((m + 2.0) / 2.0)).exp())
}

/// `alpha` times the uniform law on the lower half-sphere `{x_1 <= 0}` plus
/// `1 - alpha` times a point mass at the north pole `e_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSphereMixture {
    alpha: f64,
    m: usize,
    pole: SpherePoint,
}

impl HalfSphereMixture {
    pub fn new(alpha: f64, m: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if m < 2 {
            return Err(Error::InvalidInput(format!("dimension must be at least 2, got {m}")));
        }
        Ok(Self { alpha, m, pole: SpherePoint::north_pole(m) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn pole(&self) -> &SpherePoint {
        &self.pole
    }

    /// `1 / (1 + gamma_m)`; the pole is the unique intrinsic mean exactly
    /// for `alpha` below this value.
    pub fn critical_alpha(&self) -> f64 {
        critical_alpha(self.m)
    }
}

pub(crate) fn critical_alpha(m: usize) -> f64 {
    1.0 / (1.0 + gamma_m(m).expect("m >= 2"))
}

impl Sampler for HalfSphereMixture {
    type Point = SpherePoint;

    fn draw(&self, rng: &mut StreamRng) -> SpherePoint {
        if rng.random::<f64>() >= self.alpha {
            return self.pole.clone();
        }
        loop {
            let mut v = DVector::from_fn(self.m + 1, |_, _| rng.sample::<f64, _>(StandardNormal));
            v[0] = -v[0].abs();
            if let Ok(p) = SpherePoint::normalize(v) {
                return p;
            }
        }
    }
}

/// `n` draws from [`HalfSphereMixture`].
pub fn sample_halfsphere_mixture(alpha: f64, m: usize, n: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    let family = HalfSphereMixture::new(alpha, m)?;
    Ok(family.sample(n, &mut rng::stream(seed, 0)))
}

/// `(center + spread Z) / |center + spread Z|` with `Z` standard normal in
/// the ambient space; rotationally symmetric about `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentratedCap {
    pub center: SpherePoint,
    pub spread: f64,
}

impl Sampler for ConcentratedCap {
    type Point = SpherePoint;

    fn draw(&self, rng: &mut StreamRng) -> SpherePoint {
        loop {
            let z = DVector::from_fn(self.center.coords().len(), |_, _| rng.sample::<f64, _>(StandardNormal));
            if let Ok(p) = SpherePoint::normalize(self.center.coords() + z * self.spread) {
                return p;
            }
        }
    }
}

/// A [`ConcentratedCap`] whose draws are replaced by their antipodes with
/// probability `antipodal_weight`. This scales the Euclidean mean by
/// `1 - 2 antipodal_weight` and leaves the second moment unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct AntipodalCapMixture {
    pub cap: ConcentratedCap,
    pub antipodal_weight: f64,
}

impl Sampler for AntipodalCapMixture {
    type Point = SpherePoint;

    fn draw(&self, rng: &mut StreamRng) -> SpherePoint {
        let x = self.cap.draw(rng);
        if rng.random::<f64>() < self.antipodal_weight {
            x.negate()
        } else {
            x
        }
    }
}
