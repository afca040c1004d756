//! Named samplers and estimators per space.
//!
//! | space  | samplers | estimators |
//! |--------|----------|------------|
//! | circle | `circle.uniform`, `circle.pow` (r), `circle.log` (r), `circle.wrapped_normal` (spread), `circle.plateau` (f_antipode) | `mean` |
//! | sphere | `sphere.halfmix` (alpha), `sphere.cap` (spread) | `mean`, `mean_gd`, `extrinsic` |
//! | shapes | `shapes.landmarks` (spread) | `mean`, `residual` |

use std::f64::consts::{PI, TAU};

use frechet_lab::circle::{Circle, CircleDensity, CirclePoint, DensitySampler, UniformCircle, WrappedNormal};
use frechet_lab::frechet::{EmpiricalMeasure, MetricSpace};
use frechet_lab::harness::{Estimator, MeanEstimator, Sampler};
use frechet_lab::quad::integrate;
use frechet_lab::rng::{self, StreamRng};
use frechet_lab::shapes::{residual_mean, LandmarkNoise, PreShape, ShapeSpace};
use frechet_lab::sphere::{
    extrinsic_mean, intrinsic_mean_gd, ConcentratedCap, HalfSphereMixture, IntrinsicOptions, Sphere, SpherePoint,
};

use crate::config::{Command, SamplerConfig, SpaceName};
use crate::error::CliError;

pub const CIRCLE_SAMPLERS: &[&str] =
    &["circle.uniform", "circle.pow", "circle.log", "circle.wrapped_normal", "circle.plateau"];
pub const SPHERE_SAMPLERS: &[&str] = &["sphere.halfmix", "sphere.cap"];
pub const SHAPES_SAMPLERS: &[&str] = &["shapes.landmarks"];

/// Draws used for Monte Carlo population variances.
const VARIANCE_DRAWS: usize = 400_000;

/// A sampler with its unique mean (if it has one) and how to get
/// `E d^2(X, truth)`.
pub struct Model<S: Sampler> {
    pub sampler: S,
    pub truth: Option<S::Point>,
    pub population_var: Option<f64>,
}

pub enum CircleModel {
    Uniform,
    Density(DensitySampler),
    WrappedNormal(WrappedNormal),
}

impl Sampler for CircleModel {
    type Point = CirclePoint;

    fn draw(&self, rng: &mut StreamRng) -> CirclePoint {
        match self {
            CircleModel::Uniform => UniformCircle.draw(rng),
            CircleModel::Density(s) => s.draw(rng),
            CircleModel::WrappedNormal(s) => s.draw(rng),
        }
    }
}

pub enum SphereModel {
    HalfMix(HalfSphereMixture),
    Cap(ConcentratedCap),
}

impl Sampler for SphereModel {
    type Point = SpherePoint;

    fn draw(&self, rng: &mut StreamRng) -> SpherePoint {
        match self {
            SphereModel::HalfMix(s) => s.draw(rng),
            SphereModel::Cap(s) => s.draw(rng),
        }
    }
}

fn unknown_sampler(space: SpaceName, name: &str, known: &[&str]) -> CliError {
    CliError::validation(format!(
        "unknown sampler '{name}' for space {space:?} (expected one of {})",
        known.join(", ")
    ))
}

fn required(value: Option<f64>, flag: &str, sampler: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::validation(format!("sampler {sampler} needs --{flag}")))
}

/// Monte Carlo `E d^2(X, truth)` on a stream reserved for this purpose.
fn monte_carlo_variance<D, S>(space: &D, sampler: &S, truth: &S::Point) -> Result<f64, CliError>
where
    D: MetricSpace<Point = S::Point>,
    S: Sampler,
{
    let mut rng = rng::stream(u64::MAX, 0);
    let mut total = 0.0;
    for _ in 0..VARIANCE_DRAWS {
        let x = sampler.draw(&mut rng);
        total += space.distance(&x, truth)?.powi(2);
    }
    Ok(total / VARIANCE_DRAWS as f64)
}

fn wrapped_normal_variance(sd: f64) -> f64 {
    let pdf = |x: f64| -> f64 {
        (-8..=8)
            .map(|k| {
                let z = (x + TAU * k as f64) / sd;
                (-0.5 * z * z).exp()
            })
            .sum::<f64>()
            / (sd * TAU.sqrt())
    };
    integrate(|x| x * x * pdf(x), -PI, PI, 1e-12)
}

pub fn circle_model(cfg: &SamplerConfig) -> Result<Model<CircleModel>, CliError> {
    let name = cfg.name.as_str();
    let density = |d: CircleDensity| Model {
        population_var: Some(d.second_moment()),
        sampler: CircleModel::Density(d.sampler()),
        truth: Some(CirclePoint::new(0.0)),
    };
    Ok(match name {
        "circle.uniform" => Model { sampler: CircleModel::Uniform, truth: None, population_var: None },
        "circle.pow" => density(CircleDensity::power_smeary(required(cfg.r, "r", name)?)?),
        "circle.log" => density(CircleDensity::log_smeary(required(cfg.r, "r", name)?)?),
        "circle.plateau" => density(CircleDensity::antipodal_plateau(cfg.f_antipode.unwrap_or(1.0 / (2.0 * TAU)))?),
        "circle.wrapped_normal" => {
            let sd = cfg.spread.unwrap_or(0.5);
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(CliError::validation(format!("--spread must be positive, got {sd}")));
            }
            Model {
                sampler: CircleModel::WrappedNormal(WrappedNormal { mean: 0.0, sd }),
                truth: Some(CirclePoint::new(0.0)),
                population_var: Some(wrapped_normal_variance(sd)),
            }
        }
        other => return Err(unknown_sampler(SpaceName::Circle, other, CIRCLE_SAMPLERS)),
    })
}

/// `E[theta^2]` for the angle to the pole of a uniform point on the lower
/// half of `S^m`.
fn lower_half_second_moment(m: usize) -> f64 {
    let w = |t: f64| t.sin().powi(m as i32 - 1);
    integrate(|t| t * t * w(t), PI / 2.0, PI, 1e-12) / integrate(w, PI / 2.0, PI, 1e-12)
}

pub fn sphere_model(m: usize, cfg: &SamplerConfig) -> Result<Model<SphereModel>, CliError> {
    let name = cfg.name.as_str();
    Ok(match name {
        "sphere.halfmix" => {
            let mix = HalfSphereMixture::new(required(cfg.alpha, "alpha", name)?, m)?;
            Model {
                truth: Some(mix.pole().clone()),
                population_var: Some(mix.alpha() * lower_half_second_moment(m)),
                sampler: SphereModel::HalfMix(mix),
            }
        }
        "sphere.cap" => {
            let spread = cfg.spread.unwrap_or(0.3);
            if !(spread > 0.0 && spread.is_finite()) {
                return Err(CliError::validation(format!("--spread must be positive, got {spread}")));
            }
            let cap = ConcentratedCap { center: SpherePoint::north_pole(m), spread };
            let truth = cap.center.clone();
            let var = monte_carlo_variance(&Sphere::new(m)?, &cap, &truth)?;
            Model { sampler: SphereModel::Cap(cap), truth: Some(truth), population_var: Some(var) }
        }
        other => return Err(unknown_sampler(SpaceName::Sphere, other, SPHERE_SAMPLERS)),
    })
}

pub fn shapes_model(m: usize, k: usize, cfg: &SamplerConfig) -> Result<Model<LandmarkNoise>, CliError> {
    match cfg.name.as_str() {
        "shapes.landmarks" => {
            let model = LandmarkNoise::new(LandmarkNoise::generic_base(m, k), cfg.spread.unwrap_or(0.05))?;
            let truth = model.truth();
            let var = monte_carlo_variance(&ShapeSpace::new(m, k)?, &model, &truth)?;
            Ok(Model { sampler: model, truth: Some(truth), population_var: Some(var) })
        }
        other => Err(unknown_sampler(SpaceName::Shapes, other, SHAPES_SAMPLERS)),
    }
}

/// Check that a sampler name exists for the space and its parameters are
/// admissible, without the cost of Monte Carlo variances.
pub fn check_sampler(space: SpaceName, cfg: &SamplerConfig) -> Result<(), CliError> {
    let name = cfg.name.as_str();
    match space {
        SpaceName::Circle => circle_model(cfg).map(|_| ()),
        SpaceName::Sphere if SPHERE_SAMPLERS.contains(&name) => {
            if name == "sphere.halfmix" {
                HalfSphereMixture::new(required(cfg.alpha, "alpha", name)?, 2)?;
            }
            if let Some(s) = cfg.spread.filter(|s| !(*s > 0.0 && s.is_finite())) {
                return Err(CliError::validation(format!("--spread must be positive, got {s}")));
            }
            Ok(())
        }
        SpaceName::Sphere => Err(unknown_sampler(space, name, SPHERE_SAMPLERS)),
        SpaceName::Shapes if SHAPES_SAMPLERS.contains(&name) => {
            if let Some(s) = cfg.spread.filter(|s| !(*s > 0.0 && s.is_finite())) {
                return Err(CliError::validation(format!("--spread must be positive, got {s}")));
            }
            Ok(())
        }
        SpaceName::Shapes => Err(unknown_sampler(space, name, SHAPES_SAMPLERS)),
        SpaceName::Wasserstein => Err(CliError::validation("the wasserstein space has no samplers")),
    }
}

fn estimators_for(space: SpaceName) -> &'static [&'static str] {
    match space {
        SpaceName::Circle => &["mean"],
        SpaceName::Sphere => &["mean", "mean_gd", "extrinsic"],
        SpaceName::Shapes => &["mean", "residual"],
        SpaceName::Wasserstein => &["mean"],
    }
}

pub fn check_estimator(command: Command, space: SpaceName, name: &str) -> Result<(), CliError> {
    if command == Command::Lecam && space != SpaceName::Circle {
        return Err(CliError::validation("lecam runs on the circle"));
    }
    let known = estimators_for(space);
    if known.contains(&name) {
        Ok(())
    } else {
        Err(CliError::validation(format!(
            "unknown estimator '{name}' for space {space:?} (expected one of {})",
            known.join(", ")
        )))
    }
}

pub fn circle_estimator(name: &str) -> Result<Box<dyn Estimator<CirclePoint>>, CliError> {
    check_estimator(Command::Simulate, SpaceName::Circle, name)?;
    Ok(Box::new(MeanEstimator(&Circle)))
}

fn first<P: Clone>(set: frechet_lab::frechet::MeanSet<P>) -> P {
    set.minimizers[0].clone()
}

pub fn sphere_estimator(m: usize, name: &str) -> Result<Box<dyn Estimator<SpherePoint>>, CliError> {
    check_estimator(Command::Simulate, SpaceName::Sphere, name)?;
    let sphere = Sphere::new(m)?;
    Ok(match name {
        "mean_gd" => Box::new(|s: &[SpherePoint]| {
            let mu = EmpiricalMeasure::uniform(s.to_vec())?;
            let init = extrinsic_mean(&mu).minimizers[0].clone();
            intrinsic_mean_gd(&mu, &init, IntrinsicOptions::default()).map(first)
        }),
        "extrinsic" => Box::new(|s: &[SpherePoint]| {
            let set = extrinsic_mean(&EmpiricalMeasure::uniform(s.to_vec())?);
            if set.unique {
                Ok(first(set))
            } else {
                Err(frechet_lab::Error::OutOfRegime("extrinsic mean of a centered sample".into()))
            }
        }),
        _ => Box::new(move |s: &[SpherePoint]| MeanEstimator(&sphere).estimate(s)),
    })
}

pub fn shapes_estimator(m: usize, k: usize, name: &str) -> Result<Box<dyn Estimator<PreShape>>, CliError> {
    check_estimator(Command::Simulate, SpaceName::Shapes, name)?;
    let space = ShapeSpace::new(m, k)?;
    Ok(match name {
        "residual" => Box::new(|s: &[PreShape]| residual_mean(&EmpiricalMeasure::uniform(s.to_vec())?).map(first)),
        _ => Box::new(move |s: &[PreShape]| MeanEstimator(&space).estimate(s)),
    })
}
