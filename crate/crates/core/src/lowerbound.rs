//! Two-point (Le Cam) experiments near distributions with several means:
//! perturbed families, total-variation and Hellinger floors, sup-risk of
//! estimator suites and the error floor of two-point tests.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circle::{signed_displacement, Circle, CirclePoint};
use crate::error::{Error, Result};
use crate::frechet::MetricSpace;
use crate::harness::{risk, Estimator, RiskReport, Sampler};
use crate::rng::{self, StreamRng};
use crate::sphere::{exp_map, log_map, Sphere, SpherePoint};

/// A base law `P` with registered points of its mean set and a mixing
/// weight `t`; member `x` is `(1 - t) P + t delta_x`.
#[derive(Debug, Clone)]
pub struct PerturbedFamily<B: Sampler> {
    base: B,
    mean_points: Vec<B::Point>,
    t: f64,
}

impl<B: Sampler> PerturbedFamily<B>
where
    B::Point: PartialEq,
{
    pub fn new(base: B, mean_points: Vec<B::Point>, t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidInput(format!("mixing weight must lie in (0, 1], got {t}")));
        }
        if mean_points.is_empty() {
            return Err(Error::InvalidInput("perturbed family needs at least one mean point".into()));
        }
        Ok(Self { base, mean_points, t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn mean_points(&self) -> &[B::Point] {
        &self.mean_points
    }

    /// The same family with another mixing weight.
    pub fn with_t(&self, t: f64) -> Result<Self>
    where
        B: Clone,
    {
        Self::new(self.base.clone(), self.mean_points.clone(), t)
    }

    /// Sampler of `(1 - t) P + t delta_x`. Its mean set is `{x}`.
    pub fn perturbed_sampler(&self, x: &B::Point) -> Result<PerturbedSampler<'_, B>> {
        if !self.mean_points.contains(x) {
            return Err(Error::InvalidInput("point is not a registered mean of the base law".into()));
        }
        Ok(PerturbedSampler { base: &self.base, x: x.clone(), t: self.t })
    }
}

#[derive(Debug, Clone)]
pub struct PerturbedSampler<'a, B: Sampler> {
    base: &'a B,
    x: B::Point,
    t: f64,
}

impl<B: Sampler> Sampler for PerturbedSampler<'_, B> {
    type Point = B::Point;

    fn draw(&self, rng: &mut StreamRng) -> B::Point {
        let u: f64 = rng.random();
        let y = self.base.draw(rng);
        if u < self.t {
            self.x.clone()
        } else {
            y
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidInput(format!("mixing weight must lie in (0, 1], got {t}")));
    }
    Ok(())
}

/// Bound `2 t` on the total variation between two members of a family.
pub fn tv_bound(t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(2.0 * t)
}

/// `(1 - sqrt(1 - (1 - 2t)^n)) / 2`, a lower bound on the larger error of
/// any test between two members from `n` observations. Zero for `t >= 1/2`.
pub fn hellinger_floor(t: f64, n: usize) -> Result<f64> {
    check_t(t)?;
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be positive".into()));
    }
    if t >= 0.5 {
        return Ok(0.0);
    }
    let affinity = ((n as f64) * (-2.0 * t).ln_1p()).exp();
    Ok(0.5 * (1.0 - (1.0 - affinity).max(0.0).sqrt()))
}

/// `((diam - eta) / 2)^p / 2`.
pub fn minimax_floor(diam: f64, p: f64, eta: f64) -> Result<f64> {
    if !(diam >= 0.0 && diam.is_finite()) {
        return Err(Error::InvalidInput(format!("diameter must be finite and nonnegative, got {diam}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("exponent p must be >= 1, got {p}")));
    }
    if diam == 0.0 {
        return Ok(0.0);
    }
    if !(eta >= 0.0 && eta < diam) {
        return Err(Error::InvalidInput(format!("need 0 <= eta < diam, got eta = {eta}")));
    }
    Ok(0.5 * ((diam - eta) / 2.0).powf(p))
}

/// `diam^2 / 9`, the squared-loss floor optimized over the slack.
pub fn squared_loss_floor(diam: f64) -> Result<f64> {
    if !(diam >= 0.0 && diam.is_finite()) {
        return Err(Error::InvalidInput(format!("diameter must be finite and nonnegative, got {diam}")));
    }
    Ok(diam * diam / 9.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FloorReport {
    pub diam: f64,
    pub p: f64,
    pub eta: f64,
    pub asymptotic_floor: f64,
    /// `(d(x, y) / 2)^p * hellinger_floor(t, n)`.
    pub finite_n_floor: f64,
    pub t: f64,
    pub n: usize,
}

impl FloorReport {
    pub fn new(diam: f64, p: f64, t: f64, n: usize) -> Result<Self> {
        Ok(Self {
            diam,
            p,
            eta: 0.0,
            asymptotic_floor: minimax_floor(diam, p, 0.0)?,
            finite_n_floor: (diam / 2.0).powf(p) * hellinger_floor(t, n)?,
            t,
            n,
        })
    }

    /// The finite-sample floor is negligible against the asymptotic one.
    pub fn floor_not_binding(&self) -> bool {
        self.finite_n_floor < 0.01 * self.asymptotic_floor
    }
}

/// An estimator with a display name.
pub struct NamedEstimator<'a, P> {
    pub name: String,
    pub estimator: &'a dyn Estimator<P>,
}

impl<'a, P> NamedEstimator<'a, P> {
    pub fn new(name: impl Into<String>, estimator: &'a dyn Estimator<P>) -> Self {
        Self { name: name.into(), estimator }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorRisk {
    pub name: String,
    pub risk_at_x: RiskReport,
    pub risk_at_y: RiskReport,
    pub sup_risk: f64,
    pub sup_stderr: f64,
    /// `sup_risk + 3 sup_stderr >= finite_n_floor`.
    pub above_floor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LecamReport {
    pub floors: FloorReport,
    pub estimators: Vec<EstimatorRisk>,
    pub floor_not_binding: bool,
}

/// Sup-risk over the two members `x` and `y` of a family for every
/// estimator of a suite, with truth equal to the perturbation point. All
/// estimators see the same samples.
#[allow(clippy::too_many_arguments)]
pub fn lecam_experiment<D, B>(
    space: &D,
    family: &PerturbedFamily<B>,
    x: &B::Point,
    y: &B::Point,
    suite: &[NamedEstimator<'_, B::Point>],
    n: usize,
    p: f64,
    reps: usize,
    seed: u64,
) -> Result<LecamReport>
where
    D: MetricSpace<Point = B::Point>,
    B: Sampler,
    B::Point: PartialEq,
{
    let px = family.perturbed_sampler(x)?;
    let py = family.perturbed_sampler(y)?;
    let floors = FloorReport::new(space.distance(x, y)?, p, family.t(), n)?;
    let (seed_x, seed_y) = (rng::derive_seed(seed, 0), rng::derive_seed(seed, 1));
    let mut estimators = Vec::with_capacity(suite.len());
    for member in suite {
        let risk_at_x = risk(space, member.estimator, &px, x, n, p, reps, seed_x)?;
        let risk_at_y = risk(space, member.estimator, &py, y, n, p, reps, seed_y)?;
        let worst = if risk_at_x.estimate >= risk_at_y.estimate { risk_at_x } else { risk_at_y };
        estimators.push(EstimatorRisk {
            name: member.name.clone(),
            risk_at_x,
            risk_at_y,
            sup_risk: worst.estimate,
            sup_stderr: worst.std_error,
            above_floor: worst.estimate + 3.0 * worst.std_error >= floors.finite_n_floor,
        });
    }
    Ok(LecamReport { floor_not_binding: floors.floor_not_binding(), floors, estimators })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hypothesis {
    X,
    Y,
}

/// A possibly randomized decision between the two members of a family.
pub trait TwoPointTest<P>: Sync {
    fn decide(&self, sample: &[P], rng: &mut StreamRng) -> Hypothesis;
}

/// Decides by a fair coin, ignoring the data.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoinFlip;

impl<P> TwoPointTest<P> for CoinFlip {
    fn decide(&self, _sample: &[P], rng: &mut StreamRng) -> Hypothesis {
        if rng.random::<bool>() {
            Hypothesis::X
        } else {
            Hypothesis::Y
        }
    }
}

/// Decides for the hypothesis whose point is closer to an estimate; ties
/// and estimator failures go to `X`.
pub struct PlugInTest<'a, D: MetricSpace> {
    pub space: &'a D,
    pub estimator: &'a dyn Estimator<D::Point>,
    pub x: D::Point,
    pub y: D::Point,
}

impl<D: MetricSpace> TwoPointTest<D::Point> for PlugInTest<'_, D> {
    fn decide(&self, sample: &[D::Point], _rng: &mut StreamRng) -> Hypothesis {
        let Ok(est) = self.estimator.estimate(sample) else {
            return Hypothesis::X;
        };
        match (self.space.distance(&est, &self.x), self.space.distance(&est, &self.y)) {
            (Ok(dx), Ok(dy)) if dy < dx => Hypothesis::Y,
            _ => Hypothesis::X,
        }
    }
}

/// Larger of the two Monte Carlo misclassification rates of `test` under
/// the members `x` and `y`.
#[allow(clippy::too_many_arguments)]
pub fn test_error_floor<B, T>(
    test: &T,
    family: &PerturbedFamily<B>,
    x: &B::Point,
    y: &B::Point,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<f64>
where
    B: Sampler,
    B::Point: PartialEq,
    T: TwoPointTest<B::Point> + ?Sized,
{
    if reps == 0 || n == 0 {
        return Err(Error::InvalidInput("sample size and replications must be positive".into()));
    }
    let error_rate = |sampler: &PerturbedSampler<'_, B>, truth: Hypothesis, seed: u64| -> f64 {
        let wrong: usize = (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = rng::stream(seed, r as u64);
                let sample = sampler.sample(n, &mut rng);
                usize::from(test.decide(&sample, &mut rng) != truth)
            })
            .sum();
        wrong as f64 / reps as f64
    };
    let ex = error_rate(&family.perturbed_sampler(x)?, Hypothesis::X, rng::derive_seed(seed, 0));
    let ey = error_rate(&family.perturbed_sampler(y)?, Hypothesis::Y, rng::derive_seed(seed, 1));
    Ok(ex.max(ey))
}

/// Spaces with a geodesic between two points.
pub trait Geodesic: MetricSpace {
    /// The point at fraction `s` of a minimizing geodesic from `a` to `b`.
    fn interpolate(&self, a: &Self::Point, b: &Self::Point, s: f64) -> Result<Self::Point>;
}

impl Geodesic for Circle {
    fn interpolate(&self, a: &CirclePoint, b: &CirclePoint, s: f64) -> Result<CirclePoint> {
        Ok(a.rotate(s * signed_displacement(*a, *b)))
    }
}

impl Geodesic for Sphere {
    fn interpolate(&self, a: &SpherePoint, b: &SpherePoint, s: f64) -> Result<SpherePoint> {
        Ok(exp_map(a, &(log_map(a, b)? * s)))
    }
}

/// Always returns the same point.
#[derive(Debug, Clone)]
pub struct ConstantEstimator<P>(pub P);

impl<P: Clone + Sync> Estimator<P> for ConstantEstimator<P> {
    fn estimate(&self, _sample: &[P]) -> Result<P> {
        Ok(self.0.clone())
    }
}

/// Moves the output of `inner` a fraction `lambda` of the way back to
/// `anchor` along a geodesic.
pub struct ShrunkEstimator<'a, D: Geodesic> {
    pub space: &'a D,
    pub inner: &'a dyn Estimator<D::Point>,
    pub anchor: D::Point,
    pub lambda: f64,
}

impl<D: Geodesic> Estimator<D::Point> for ShrunkEstimator<'_, D> {
    fn estimate(&self, sample: &[D::Point]) -> Result<D::Point> {
        let est = self.inner.estimate(sample)?;
        self.space.interpolate(&self.anchor, &est, 1.0 - self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::circle::{intrinsic_mean_exact, UniformCircle};
    use crate::frechet::EmpiricalMeasure;
    use crate::harness::MeanEstimator;

    #[test]
    fn floors() {
        assert_eq!(tv_bound(0.25).unwrap(), 0.5);
        // direct evaluation: 0.998^100 = exp(100 ln 0.998)
        let a: f64 = 0.998f64.powi(100);
        let expected = 0.5 * (1.0 - (1.0 - a).sqrt());
        assert!((hellinger_floor(0.001, 100).unwrap() - expected).abs() < 1e-14);
        assert!((hellinger_floor(0.001, 100).unwrap() - 0.2871).abs() < 1e-4);
        assert!((hellinger_floor(1e-12, 10).unwrap() - 0.5).abs() < 1e-5);
        assert_eq!(hellinger_floor(0.6, 10).unwrap(), 0.0);
        assert_eq!(minimax_floor(1.0, 2.0, 0.0).unwrap(), 0.125);
        assert_eq!(minimax_floor(0.0, 2.0, 0.0).unwrap(), 0.0);
        assert!((squared_loss_floor(1.0).unwrap() - 1.0 / 9.0).abs() < 1e-16);
        assert!(minimax_floor(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn hellinger_floor_is_monotone() {
        let ts = [1e-4, 1e-3, 1e-2, 0.1, 0.3];
        let ns = [1, 10, 100, 1000];
        for &n in &ns {
            for w in ts.windows(2) {
                assert!(hellinger_floor(w[1], n).unwrap() <= hellinger_floor(w[0], n).unwrap());
            }
        }
        for &t in &ts {
            for w in ns.windows(2) {
                assert!(hellinger_floor(t, w[1]).unwrap() <= hellinger_floor(t, w[0]).unwrap());
            }
        }
    }

    fn circle_family(t: f64) -> PerturbedFamily<UniformCircle> {
        PerturbedFamily::new(UniformCircle, vec![CirclePoint::new(0.0), CirclePoint::new(-PI)], t).unwrap()
    }

    #[test]
    fn perturbed_draws() {
        let family = circle_family(1.0);
        let x = CirclePoint::new(0.0);
        let s = family.perturbed_sampler(&x).unwrap();
        let draws = s.sample(100, &mut rng::stream(1, 0));
        assert!(draws.iter().all(|d| *d == x));
        assert!(family.perturbed_sampler(&CirclePoint::new(1.0)).is_err());

        let family = circle_family(0.2);
        let draws = family.perturbed_sampler(&x).unwrap().sample(10_000, &mut rng::stream(2, 0));
        let hits = draws.iter().filter(|d| **d == x).count() as f64 / 1e4;
        assert!((hits - 0.2).abs() < 3.0 * (0.16f64 / 1e4).sqrt());
        let mu = EmpiricalMeasure::uniform(draws).unwrap();
        let mean = intrinsic_mean_exact(&mu);
        let oracle = crate::circle::brute_force_mean(&mu, 100_000).unwrap();
        assert!((mean.minimizers[0].angle() - oracle.minimizers[0].angle()).abs() < 1e-4);
        // the uniform part leaves curvature 2 t = 0.4, so the standard
        // deviation of the mean is about 1.6 * 1.81 / (0.4 * 100) ~ 0.072
        assert!(mean.minimizers[0].angle().abs() < 0.3, "{mean:?}");
    }

    #[test]
    fn constant_estimator_trades_off() {
        let family = circle_family(1e-3);
        let (x, y) = (CirclePoint::new(0.0), CirclePoint::new(-PI));
        let c = ConstantEstimator(x);
        let mean = MeanEstimator(&Circle);
        let suite = [NamedEstimator::new("constant", &c), NamedEstimator::new("mean", &mean)];
        let report = lecam_experiment(&Circle, &family, &x, &y, &suite, 100, 2.0, 200, 3).unwrap();
        let constant = &report.estimators[0];
        assert_eq!(constant.risk_at_x.estimate, 0.0);
        assert!((constant.risk_at_y.estimate - PI * PI).abs() < 1e-12);
        assert!(report.estimators.iter().all(|e| e.above_floor));
        assert!(!report.floor_not_binding);
    }

    #[test]
    fn large_t_is_flagged() {
        let family = circle_family(0.4);
        let (x, y) = (CirclePoint::new(0.0), CirclePoint::new(-PI));
        let mean = MeanEstimator(&Circle);
        let report =
            lecam_experiment(&Circle, &family, &x, &y, &[NamedEstimator::new("mean", &mean)], 1000, 2.0, 20, 4)
                .unwrap();
        assert!(report.floor_not_binding);
    }

    #[test]
    fn tests_error_rates() {
        let (x, y) = (CirclePoint::new(0.0), CirclePoint::new(-PI));
        let family = circle_family(0.5);
        let coin = test_error_floor(&CoinFlip, &family, &x, &y, 10, 4000, 5).unwrap();
        assert!((coin - 0.5).abs() < 0.05);
        let mean = MeanEstimator(&Circle);
        let plug = PlugInTest { space: &Circle, estimator: &mean, x, y };
        let small = test_error_floor(&plug, &family, &x, &y, 10, 400, 6).unwrap();
        let large = test_error_floor(&plug, &family, &x, &y, 200, 400, 6).unwrap();
        assert!(large <= small && large < 0.01);
    }

    #[test]
    fn shrinkage() {
        let anchor = CirclePoint::new(0.0);
        let inner = ConstantEstimator(CirclePoint::new(1.0));
        let s = ShrunkEstimator { space: &Circle, inner: &inner, anchor, lambda: 0.25 };
        assert!((s.estimate(&[]).unwrap().angle() - 0.75).abs() < 1e-15);
        let sp = Sphere::new(2).unwrap();
        let a = SpherePoint::basis(2, 0);
        let b = SpherePoint::basis(2, 1);
        let mid = sp.interpolate(&a, &b, 0.5).unwrap();
        assert!((crate::sphere::geodesic_distance(&mid, &a) - PI / 4.0).abs() < 1e-14);
    }
}
