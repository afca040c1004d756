//! Monte Carlo harness: risk of an estimator, variance modulation and
//! convergence-rate regression.
//!
//! Replications run on the ambient rayon pool. Replication `r` always
//! draws from [`rng::stream`]`(seed, r)` and per-replication losses are
//! reduced in index order, so a report is bit-identical for any number of
//! worker threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frechet::{Canonical, EmpiricalMeasure, FrechetMean, MetricSpace};
use crate::rng::{self, StreamRng};
use crate::stats;

/// A generative model with deterministic seeded sampling.
pub trait Sampler: Sync {
    type Point: Clone + Send + Sync;

    fn draw(&self, rng: &mut StreamRng) -> Self::Point;

    fn sample(&self, n: usize, rng: &mut StreamRng) -> Vec<Self::Point> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

/// A map from samples to points of the space.
pub trait Estimator<P>: Sync {
    fn estimate(&self, sample: &[P]) -> Result<P>;
}

impl<P, F> Estimator<P> for F
where
    F: Fn(&[P]) -> Result<P> + Sync,
{
    fn estimate(&self, sample: &[P]) -> Result<P> {
        self(sample)
    }
}

/// The empirical Fréchet mean of a space, with the lexicographic selection
/// when the empirical mean set has several elements.
#[derive(Debug, Clone, Copy)]
pub struct MeanEstimator<'a, S>(pub &'a S);

impl<S> Estimator<S::Point> for MeanEstimator<'_, S>
where
    S: FrechetMean,
    S::Point: Canonical,
{
    fn estimate(&self, sample: &[S::Point]) -> Result<S::Point> {
        let mu = EmpiricalMeasure::uniform(sample.to_vec())?;
        let set = self.0.frechet_mean(&mu)?;
        set.select()
            .cloned()
            .ok_or_else(|| Error::OutOfRegime("empirical mean set has no listable element".into()))
    }
}

/// Monte Carlo estimate of `E[d^p(estimate, truth)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskReport {
    pub n: usize,
    pub p: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub replications: usize,
}

impl RiskReport {
    fn from_losses(n: usize, p: f64, losses: &[f64]) -> Self {
        let estimate = stats::mean(losses);
        let std_error = (stats::sample_variance(losses) / losses.len() as f64).sqrt();
        Self {
            n,
            p,
            estimate,
            std_error,
            replications: losses.len(),
        }
    }
}

fn check_risk_args(n: usize, p: f64, reps: usize) -> Result<()> {
    if reps < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 replications, got {reps}")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be positive".into()));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("exponent p must be >= 1, got {p}")));
    }
    Ok(())
}

/// Per-replication losses `d^p(estimate, truth)` in replication order.
pub fn replicate_losses<D, S, E>(
    space: &D,
    estimator: &E,
    sampler: &S,
    truth: &S::Point,
    n: usize,
    p: f64,
    reps: usize,
    seed: u64,
) -> Result<Vec<f64>>
where
    D: MetricSpace<Point = S::Point>,
    S: Sampler,
    E: Estimator<S::Point> + ?Sized,
{
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, r as u64);
            let sample = sampler.sample(n, &mut rng);
            let wrap = |e: Error| Error::Estimator {
                replication: r,
                message: e.to_string(),
            };
            let est = estimator.estimate(&sample).map_err(wrap)?;
            let d = space.distance(&est, truth).map_err(wrap)?;
            Ok(d.powf(p))
        })
        .collect()
}

/// Monte Carlo risk `E[d^p(estimator(X_1..X_n), truth)]` over `reps`
/// replications.
#[allow(clippy::too_many_arguments)]
pub fn risk<D, S, E>(
    space: &D,
    estimator: &E,
    sampler: &S,
    truth: &S::Point,
    n: usize,
    p: f64,
    reps: usize,
    seed: u64,
) -> Result<RiskReport>
where
    D: MetricSpace<Point = S::Point>,
    S: Sampler,
    E: Estimator<S::Point> + ?Sized,
{
    check_risk_args(n, p, reps)?;
    let losses = replicate_losses(space, estimator, sampler, truth, n, p, reps, seed)?;
    Ok(RiskReport::from_losses(n, p, &losses))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulationEntry {
    pub n: usize,
    pub m_n: f64,
    pub risk: RiskReport,
}

/// Variance modulation `m_n = n E[d^2(mean_n, truth)] / E[d^2(X, truth)]`
/// along a grid of sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulationCurve {
    pub entries: Vec<ModulationEntry>,
    pub denominator: f64,
}

fn check_grid(n_grid: &[usize], min_len: usize) -> Result<()> {
    if n_grid.len() < min_len {
        return Err(Error::InvalidInput(format!(
            "sample-size grid needs at least {min_len} points, got {}",
            n_grid.len()
        )));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("sample-size grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Variance modulation of the space's empirical Fréchet mean.
pub fn variance_modulation<D, S>(
    space: &D,
    sampler: &S,
    truth: &S::Point,
    population_var: f64,
    n_grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<ModulationCurve>
where
    D: FrechetMean<Point = S::Point>,
    D::Point: Canonical,
    S: Sampler,
{
    variance_modulation_with(space, &MeanEstimator(space), sampler, truth, population_var, n_grid, reps, seed)
}

#[allow(clippy::too_many_arguments)]
pub fn variance_modulation_with<D, S, E>(
    space: &D,
    estimator: &E,
    sampler: &S,
    truth: &S::Point,
    population_var: f64,
    n_grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<ModulationCurve>
where
    D: MetricSpace<Point = S::Point>,
    S: Sampler,
    E: Estimator<S::Point> + ?Sized,
{
    if !(population_var > 0.0 && population_var.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "population variance must be positive, got {population_var}"
        )));
    }
    check_grid(n_grid, 1)?;
    let mut entries = Vec::with_capacity(n_grid.len());
    for (i, &n) in n_grid.iter().enumerate() {
        let report = risk(space, estimator, sampler, truth, n, 2.0, reps, rng::derive_seed(seed, i as u64))?;
        entries.push(ModulationEntry {
            n,
            m_n: n as f64 * report.estimate / population_var,
            risk: report,
        });
    }
    Ok(ModulationCurve {
        entries,
        denominator: population_var,
    })
}

/// Fitted convergence rate: slope of `log E[d(mean_n, truth)]` against `log n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub risks: Vec<RiskReport>,
}

/// Convergence rate of the space's empirical Fréchet mean.
pub fn rate_estimate<D, S>(
    space: &D,
    sampler: &S,
    truth: &S::Point,
    n_grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<RateEstimate>
where
    D: FrechetMean<Point = S::Point>,
    D::Point: Canonical,
    S: Sampler,
{
    rate_estimate_with(space, &MeanEstimator(space), sampler, truth, n_grid, reps, seed)
}

pub fn rate_estimate_with<D, S, E>(
    space: &D,
    estimator: &E,
    sampler: &S,
    truth: &S::Point,
    n_grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<RateEstimate>
where
    D: MetricSpace<Point = S::Point>,
    S: Sampler,
    E: Estimator<S::Point> + ?Sized,
{
    check_grid(n_grid, 3)?;
    let mut risks = Vec::with_capacity(n_grid.len());
    for (i, &n) in n_grid.iter().enumerate() {
        risks.push(risk(space, estimator, sampler, truth, n, 1.0, reps, rng::derive_seed(seed, i as u64))?);
    }
    fit_rate(risks)
}

/// Regress `log risk` on `log n`.
pub fn fit_rate(risks: Vec<RiskReport>) -> Result<RateEstimate> {
    if risks.iter().any(|r| !(r.estimate > 0.0)) {
        return Err(Error::DegenerateRegression);
    }
    let x: Vec<f64> = risks.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = risks.iter().map(|r| r.estimate.ln()).collect();
    let fit = stats::ols(&x, &y);
    Ok(RateEstimate {
        slope: fit.slope,
        stderr: fit.slope_stderr,
        intercept: fit.intercept,
        risks,
    })
}
