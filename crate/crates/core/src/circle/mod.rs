//! The circle `[-pi, pi)` with arc-length distance: exact intrinsic means,
//! smeary example densities and CLT statistics.

mod clt;
mod density;
mod mean;

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::frechet::{Canonical, EmpiricalMeasure, FrechetMean, MeanSet, MetricSpace, SpaceKind};
use crate::harness::Sampler;
use crate::rng::StreamRng;

pub use clt::{
    clt_variance_part_i, log_smeary_centered_statistic, log_smeary_scaled_mean, rescaled_statistic_part_ii,
    SmearyModulus,
};
pub use density::{
    log_smeary_constant, sample_log_smeary, sample_power_smeary, CircleDensity, DensityKind, DensityPiece,
    DensitySampler, PieceShape,
};
pub use mean::{brute_force_mean, intrinsic_mean_exact};

/// Wrap an angle into `[-pi, pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y >= PI {
        y - TAU
    } else {
        y
    }
}

/// A point of the circle, stored as its angle in `[-pi, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(angle: f64) -> Self {
        Self(wrap_angle(angle))
    }

    pub fn angle(self) -> f64 {
        self.0
    }

    /// The antipodal point.
    pub fn antipode(self) -> Self {
        Self::new(self.0 + PI)
    }

    pub fn rotate(self, theta: f64) -> Self {
        Self::new(self.0 + theta)
    }
}

impl From<f64> for CirclePoint {
    fn from(angle: f64) -> Self {
        Self::new(angle)
    }
}

impl From<CirclePoint> for f64 {
    fn from(p: CirclePoint) -> f64 {
        p.0
    }
}

impl Canonical for CirclePoint {
    fn canonical_coords(&self) -> Vec<f64> {
        vec![self.0]
    }
}

/// `min(|x - y|, 2 pi - |x - y|)`.
pub fn arc_distance(x: CirclePoint, y: CirclePoint) -> f64 {
    let d = (x.0 - y.0).abs();
    d.min(TAU - d)
}

/// Signed shortest displacement from `from` to `to`, in `[-pi, pi)`.
pub fn signed_displacement(from: CirclePoint, to: CirclePoint) -> f64 {
    wrap_angle(to.0 - from.0)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Circle;

impl MetricSpace for Circle {
    type Point = CirclePoint;

    fn kind(&self) -> SpaceKind {
        SpaceKind::Circle
    }

    fn distance(&self, x: &CirclePoint, y: &CirclePoint) -> Result<f64> {
        Ok(arc_distance(*x, *y))
    }
}

impl FrechetMean for Circle {
    fn frechet_mean(&self, mu: &EmpiricalMeasure<CirclePoint>) -> Result<MeanSet<CirclePoint>> {
        Ok(intrinsic_mean_exact(mu))
    }
}

/// Uniform distribution on the whole circle.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformCircle;

impl Sampler for UniformCircle {
    type Point = CirclePoint;

    fn draw(&self, rng: &mut StreamRng) -> CirclePoint {
        CirclePoint::new(rng.random_range(-PI..PI))
    }
}

/// Uniform distribution on the arc `[center - half_width, center + half_width]`.
#[derive(Debug, Clone, Copy)]
pub struct UniformArc {
    pub center: f64,
    pub half_width: f64,
}

impl UniformArc {
    /// Population value of `E[d^2(X, center)]`.
    pub fn variance(&self) -> f64 {
        self.half_width * self.half_width / 3.0
    }
}

impl Sampler for UniformArc {
    type Point = CirclePoint;

    fn draw(&self, rng: &mut StreamRng) -> CirclePoint {
        let u: f64 = rng.random_range(-1.0..=1.0);
        CirclePoint::new(self.center + u * self.half_width)
    }
}

/// Normal distribution wrapped onto the circle.
#[derive(Debug, Clone, Copy)]
pub struct WrappedNormal {
    pub mean: f64,
    pub sd: f64,
}

impl Sampler for WrappedNormal {
    type Point = CirclePoint;

    fn draw(&self, rng: &mut StreamRng) -> CirclePoint {
        let z: f64 = Normal::new(self.mean, self.sd).expect("sd must be positive").sample(rng);
        CirclePoint::new(z)
    }
}

/// Point mass.
#[derive(Debug, Clone, Copy)]
pub struct CircleDirac(pub CirclePoint);

impl Sampler for CircleDirac {
    type Point = CirclePoint;

    fn draw(&self, _rng: &mut StreamRng) -> CirclePoint {
        self.0
    }
}
