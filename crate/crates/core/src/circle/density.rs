use std::f64::consts::{PI, TAU};

use rand::Rng;

use super::CirclePoint;
use crate::error::{Error, Result};
use crate::harness::Sampler;
use crate::quad;
use crate::rng::{self, StreamRng};

const QUAD_TOL: f64 = 1e-13;

/// Shape of one piece of a circular density. Tail shapes are expressed in
/// the distance `pi - |x|` to the point `-pi ~ pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PieceShape {
    Constant(f64),
    /// `(1 - dist^r) / (2 pi)`.
    PowerTail { r: f64 },
    /// `max(1 - G_r'(dist), 0) / (2 pi)` with `G_r(u) = exp(-1/u^r)`.
    LogTail { r: f64 },
}

/// Derivative of `G_r(u) = exp(-u^{-r})` for `u > 0`, evaluated in log space.
pub(crate) fn log_modulus_derivative(r: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let inv = u.powf(-r);
    if inv > 700.0 {
        return 0.0;
    }
    (r.ln() - (r + 1.0) * u.ln() - inv).exp()
}

impl PieceShape {
    fn eval(&self, x: f64) -> f64 {
        let dist = PI - x.abs();
        match *self {
            PieceShape::Constant(c) => c,
            PieceShape::PowerTail { r } => (1.0 - dist.powf(r)) / TAU,
            PieceShape::LogTail { r } => (1.0 - log_modulus_derivative(r, dist)).max(0.0) / TAU,
        }
    }

    fn sup(&self) -> f64 {
        match *self {
            PieceShape::Constant(c) => c,
            PieceShape::PowerTail { .. } | PieceShape::LogTail { .. } => 1.0 / TAU,
        }
    }
}

/// A density piece supported on the closed interval `[lo, hi]` of `[-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub shape: PieceShape,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityKind {
    PowerSmeary { r: f64 },
    LogSmeary { r: f64, c_r: f64 },
    Custom,
}

/// A piecewise closed-form density on the circle with respect to arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleDensity {
    pieces: Vec<DensityPiece>,
    kind: DensityKind,
}

impl CircleDensity {
    /// The power-smeary density of order `r`: a plateau of height
    /// `((pi-1) r + pi) / (pi r + pi)` on `[-1/2, 1/2]` and tails
    /// `(1 - (pi - |x|)^r) / (2 pi)` within distance 1 of the antipode.
    pub fn power_smeary(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("order r must be positive, got {r}")));
        }
        let plateau = ((PI - 1.0) * r + PI) / (PI * r + PI);
        Ok(Self {
            pieces: vec![
                DensityPiece { lo: -PI, hi: -PI + 1.0, shape: PieceShape::PowerTail { r } },
                DensityPiece { lo: -0.5, hi: 0.5, shape: PieceShape::Constant(plateau) },
                DensityPiece { lo: PI - 1.0, hi: PI, shape: PieceShape::PowerTail { r } },
            ],
            kind: DensityKind::PowerSmeary { r },
        })
    }

    /// The log-smeary density of order `r`, normalized through
    /// [`log_smeary_constant`].
    pub fn log_smeary(r: f64) -> Result<Self> {
        let c_r = log_smeary_constant(r)?;
        Ok(Self {
            pieces: vec![
                DensityPiece { lo: -PI, hi: -PI + 0.5, shape: PieceShape::LogTail { r } },
                DensityPiece { lo: -0.5, hi: 0.5, shape: PieceShape::Constant(c_r) },
                DensityPiece { lo: PI - 0.5, hi: PI, shape: PieceShape::LogTail { r } },
            ],
            kind: DensityKind::LogSmeary { r, c_r },
        })
    }

    /// Constant density `f_antipode` within distance 1 of `-pi` and the
    /// remaining mass spread uniformly over `[-1/2, 1/2]`. Its intrinsic mean
    /// is 0 and its density at the antipode is `f_antipode`.
    pub fn antipodal_plateau(f_antipode: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&f_antipode) {
            return Err(Error::InvalidInput(format!(
                "antipodal density must lie in [0, 1/2), got {f_antipode}"
            )));
        }
        let mut pieces = vec![DensityPiece { lo: -0.5, hi: 0.5, shape: PieceShape::Constant(1.0 - 2.0 * f_antipode) }];
        if f_antipode > 0.0 {
            pieces.insert(0, DensityPiece { lo: -PI, hi: -PI + 1.0, shape: PieceShape::Constant(f_antipode) });
            pieces.push(DensityPiece { lo: PI - 1.0, hi: PI, shape: PieceShape::Constant(f_antipode) });
        }
        Self::custom(pieces)
    }

    /// A user-supplied density built from disjoint pieces.
    pub fn custom(mut pieces: Vec<DensityPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidDensity("no pieces".into()));
        }
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for p in &pieces {
            if !(p.lo >= -PI && p.hi <= PI && p.lo < p.hi) {
                return Err(Error::InvalidDensity(format!("piece [{}, {}] is not inside [-pi, pi]", p.lo, p.hi)));
            }
        }
        if pieces.windows(2).any(|w| w[1].lo < w[0].hi) {
            return Err(Error::InvalidDensity("pieces overlap".into()));
        }
        let density = Self { pieces, kind: DensityKind::Custom };
        density.validate()?;
        Ok(density)
    }

    fn validate(&self) -> Result<()> {
        for p in &self.pieces {
            for i in 0..=64 {
                let x = p.lo + (p.hi - p.lo) * i as f64 / 64.0;
                let v = p.shape.eval(x);
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidDensity(format!("density is {v} at {x}")));
                }
            }
        }
        let total = self.integral();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidDensity(format!("density integrates to {total}")));
        }
        Ok(())
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }

    /// Density at angle `x` (any real; wrapped first).
    pub fn pdf(&self, x: f64) -> f64 {
        let x = super::wrap_angle(x);
        // -pi and pi are the same point
        let probe = |x: f64| {
            self.pieces
                .iter()
                .find(|p| p.lo <= x && x <= p.hi)
                .map(|p| p.shape.eval(x))
        };
        probe(x).or_else(|| if x == -PI { probe(PI) } else { None }).unwrap_or(0.0)
    }

    /// Upper bound of the density used as the rejection envelope.
    pub fn envelope(&self) -> f64 {
        self.pieces.iter().map(|p| p.shape.sup()).fold(0.0, f64::max)
    }

    /// `int f(x) x^k dx` over `[lo, hi]`, with `x` the angle in `[-pi, pi)`.
    fn moment_on(&self, k: i32, lo: f64, hi: f64) -> f64 {
        self.pieces
            .iter()
            .map(|p| {
                let (a, b) = (p.lo.max(lo), p.hi.min(hi));
                if a >= b {
                    0.0
                } else {
                    quad::integrate(|x| p.shape.eval(x) * x.powi(k), a, b, QUAD_TOL)
                }
            })
            .sum()
    }

    pub fn integral(&self) -> f64 {
        self.moment_on(0, -PI, PI)
    }

    /// Probability of the angle interval `[lo, hi]`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        self.moment_on(0, lo, hi)
    }

    /// The Euclidean variance `E[X^2]` for the angle in `[-pi, pi)`.
    pub fn second_moment(&self) -> f64 {
        self.moment_on(2, -PI, PI)
    }

    /// Density at the antipode of `mean`.
    pub fn antipode_density(&self, mean: CirclePoint) -> f64 {
        self.pdf(mean.antipode().angle())
    }

    pub fn sampler(&self) -> DensitySampler {
        DensitySampler {
            envelope: self.envelope(),
            density: self.clone(),
        }
    }
}

/// `c_r = 1 - 2 int_0^{1/2} max(1 - G_r'(u), 0) / (2 pi) du`, the plateau
/// height that makes the log-smeary density integrate to one.
pub fn log_smeary_constant(r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("order r must be positive, got {r}")));
    }
    let tail = quad::integrate(|u| (1.0 - log_modulus_derivative(r, u)).max(0.0) / TAU, 0.0, 0.5, QUAD_TOL);
    let c_r = 1.0 - 2.0 * tail;
    if !(c_r > 1.0 / TAU && c_r.is_finite()) {
        return Err(Error::InvalidDensity(format!("normalizing constant c_r = {c_r} is not above 1/(2 pi)")));
    }
    Ok(c_r)
}

/// Rejection sampler with a uniform proposal on `[-pi, pi)`.
#[derive(Debug, Clone)]
pub struct DensitySampler {
    density: CircleDensity,
    envelope: f64,
}

impl DensitySampler {
    pub fn density(&self) -> &CircleDensity {
        &self.density
    }
}

impl Sampler for DensitySampler {
    type Point = CirclePoint;

    fn draw(&self, rng: &mut StreamRng) -> CirclePoint {
        loop {
            let x: f64 = rng.random_range(-PI..PI);
            let u: f64 = rng.random::<f64>() * self.envelope;
            if u < self.density.pdf(x) {
                return CirclePoint::new(x);
            }
        }
    }
}

/// `n` draws from the power-smeary density of order `r`.
pub fn sample_power_smeary(r: f64, n: usize, seed: u64) -> Result<Vec<CirclePoint>> {
    let sampler = CircleDensity::power_smeary(r)?.sampler();
    Ok(sampler.sample(n, &mut rng::stream(seed, 0)))
}

/// `n` draws from the log-smeary density of order `r`.
pub fn sample_log_smeary(r: f64, n: usize, seed: u64) -> Result<Vec<CirclePoint>> {
    let sampler = CircleDensity::log_smeary(r)?.sampler();
    Ok(sampler.sample(n, &mut rng::stream(seed, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_smeary_normalizes() {
        for r in [0.5, 1.0, 2.0, 4.0] {
            let d = CircleDensity::power_smeary(r).unwrap();
            assert!((d.integral() - 1.0).abs() < 1e-6, "r = {r}");
            // closed form of the plateau plus the two tails telescopes to one
            let plateau = ((PI - 1.0) * r + PI) / (PI * r + PI);
            let tails = r / (PI * (r + 1.0));
            assert!((plateau + tails - 1.0).abs() < 1e-15);
            assert!((d.envelope() - plateau.max(1.0 / TAU)).abs() < 1e-15);
        }
        assert!(CircleDensity::power_smeary(0.0).is_err());
    }

    #[test]
    fn power_tail_mass_matches_quadrature_oracle() {
        // r = 1: each tail holds int_0^1 (1 - u) / (2 pi) du = 1 / (4 pi)
        let d = CircleDensity::power_smeary(1.0).unwrap();
        assert!((d.mass(PI - 1.0, PI) - 1.0 / (4.0 * PI)).abs() < 1e-12);
        assert!((d.mass(-PI, -PI + 1.0) - 1.0 / (4.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn log_smeary_constant_exceeds_uniform_height() {
        for r in [0.5, 1.0, 2.0, 3.0] {
            let c = log_smeary_constant(r).unwrap();
            assert!(c > 1.0 / TAU);
            let d = CircleDensity::log_smeary(r).unwrap();
            assert!((d.integral() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn antipodal_density_is_dominated_by_uniform() {
        let d = CircleDensity::power_smeary(1.5).unwrap();
        assert!((d.antipode_density(CirclePoint::new(0.0)) - 1.0 / TAU).abs() < 1e-15);
        let plateau = CircleDensity::antipodal_plateau(1.0 / (4.0 * PI)).unwrap();
        assert!((plateau.antipode_density(CirclePoint::new(0.0)) - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn custom_rejects_bad_pieces() {
        let half = DensityPiece { lo: -0.5, hi: 0.5, shape: PieceShape::Constant(0.5) };
        assert!(matches!(CircleDensity::custom(vec![half]), Err(Error::InvalidDensity(_))));
        let neg = DensityPiece { lo: -0.5, hi: 0.5, shape: PieceShape::Constant(-1.0) };
        assert!(CircleDensity::custom(vec![neg]).is_err());
    }

    #[test]
    fn power_samples_respect_support() {
        let xs = sample_power_smeary(1.0, 20_000, 3).unwrap();
        for x in &xs {
            let a = x.angle();
            assert!((-0.5..=0.5).contains(&a) || a >= PI - 1.0 || a <= -PI + 1.0, "{a}");
        }
    }
}
