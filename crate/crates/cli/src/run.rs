//! Command dispatch.

use std::f64::consts::PI;

use frechet_lab::circle::{Circle, CirclePoint, UniformCircle};
use frechet_lab::frechet::{EmpiricalMeasure, FrechetMean, MetricSpace};
use frechet_lab::harness::{rate_estimate_with, risk, variance_modulation_with, Estimator, MeanEstimator, Sampler};
use frechet_lab::io;
use frechet_lab::lowerbound::{
    lecam_experiment, test_error_floor, CoinFlip, ConstantEstimator, NamedEstimator, PerturbedFamily, PlugInTest,
    ShrunkEstimator,
};
use frechet_lab::rng::derive_seed;
use frechet_lab::shapes::{procrustes_mean, residual_mean, ProcrustesOptions, ShapeSpace};
use frechet_lab::sphere::{extrinsic_mean, intrinsic_mean_gd, IntrinsicOptions, Sphere};
use frechet_lab::wasserstein::{barycenter_multimarginal, feasible_region};
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig, SpaceName};
use crate::error::CliError;
use crate::registry::{self, Model};
use crate::table::{Cell, Table};

/// Shrinkage of the regularized estimator in the Le Cam suite.
const SHRINK_LAMBDA: f64 = 0.5;

/// Everything a run produces: a JSON document and, for tabular
/// commands, a CSV table.
pub struct Outcome {
    pub document: Value,
    pub table: Option<String>,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let (result, table) = match cfg.command {
        Command::Mean => (mean(cfg)?, None),
        Command::Barycenter => barycenter(cfg)?,
        Command::Region => (region(cfg)?, None),
        Command::Lecam => lecam(cfg)?,
        Command::Simulate | Command::Rate | Command::Modulation => simulation(cfg)?,
    };
    let config: Value = serde_json::from_str(&cfg.to_json()).expect("config is valid JSON");
    Ok(Outcome {
        document: json!({ "config": config, "result": result }),
        table: table.map(|t| t.render(cfg)),
    })
}

fn read_input(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let path = cfg.input.as_deref().expect("validated");
    std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("{path}: {e}")))
}

fn in_file(cfg: &ExperimentConfig, e: frechet_lab::Error) -> CliError {
    let path = cfg.input.as_deref().unwrap_or("input");
    match CliError::from(e) {
        CliError::Validation(msg) => CliError::Validation(format!("{path}: {msg}")),
        other => other,
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn mean(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let text = read_input(cfg)?;
    let parse = |e| in_file(cfg, e);
    match cfg.space.kind {
        SpaceName::Circle => {
            let mu = EmpiricalMeasure::uniform(io::parse_angles_csv(&text).map_err(parse)?).map_err(parse)?;
            Ok(json!({ "mean_set": to_value(&Circle.frechet_mean(&mu)?) }))
        }
        SpaceName::Sphere => {
            let points = io::parse_sphere_csv(&text).map_err(parse)?;
            let m = points.first().map_or(0, |p| p.dim());
            if cfg.space.m.is_some_and(|want| want != m) {
                return Err(CliError::validation(format!(
                    "input points lie on S^{m}, config says S^{}",
                    cfg.space.m.unwrap()
                )));
            }
            let mu = EmpiricalMeasure::uniform(points).map_err(parse)?;
            let set = match cfg.estimator.as_str() {
                "extrinsic" => extrinsic_mean(&mu),
                "mean_gd" => intrinsic_mean_gd(&mu, &extrinsic_mean(&mu).minimizers[0], IntrinsicOptions::default())?,
                _ => Sphere::new(m)?.frechet_mean(&mu)?,
            };
            Ok(json!({ "mean_set": to_value(&set) }))
        }
        SpaceName::Shapes => {
            let (m, k) = (cfg.space.m.unwrap_or(2), cfg.space.k.unwrap_or(3));
            let shapes = io::parse_landmarks_csv(&text, m, k, cfg.preprocess).map_err(parse)?;
            let mu = EmpiricalMeasure::uniform(shapes).map_err(parse)?;
            let set = match cfg.estimator.as_str() {
                "residual" => residual_mean(&mu)?,
                _ => procrustes_mean(&mu, ProcrustesOptions::default())?.mean,
            };
            Ok(json!({ "mean_set": to_value(&set) }))
        }
        SpaceName::Wasserstein => {
            let input = io::parse_barycenter_json(&text).map_err(parse)?;
            let set = barycenter_multimarginal(&input.measures, &input.resolved_weights())?;
            Ok(json!({ "mean_set": to_value(&set) }))
        }
    }
}

fn barycenter(cfg: &ExperimentConfig) -> Result<(Value, Option<Table>), CliError> {
    let text = read_input(cfg)?;
    let input = io::parse_barycenter_json(&text).map_err(|e| in_file(cfg, e))?;
    let weights = input.resolved_weights();
    let set = barycenter_multimarginal(&input.measures, &weights)?;
    let dim = input.measures[0].dim();
    let mut header = vec!["barycenter", "weight"];
    const COORDS: [&str; 8] = ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"];
    if dim > COORDS.len() {
        return Err(CliError::validation(format!("tables support up to {} coordinates", COORDS.len())));
    }
    header.extend_from_slice(&COORDS[..dim]);
    let mut table = Table::new(&header);
    for (b, measure) in set.minimizers.iter().enumerate() {
        for (atom, w) in measure.support().iter().zip(measure.weights()) {
            let mut row: Vec<Cell> = vec![b.into(), (*w).into()];
            row.extend(atom.iter().map(|&x| Cell::from(x)));
            table.push(row);
        }
    }
    let value = json!({ "mean_set": to_value(&set), "weights": weights });
    Ok((value, Some(table)))
}

fn region(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let r = feasible_region(cfg.gamma.expect("validated"))?;
    Ok(to_value(&r))
}

fn risk_table(risks: &[frechet_lab::harness::RiskReport], extra: Option<(&'static str, Vec<f64>)>) -> Table {
    let mut header = vec!["n", "risk", "stderr", "reps"];
    if let Some((name, _)) = &extra {
        header.push(name);
    }
    let mut table = Table::new(&header);
    for (i, r) in risks.iter().enumerate() {
        let mut row: Vec<Cell> = vec![r.n.into(), r.estimate.into(), r.std_error.into(), r.replications.into()];
        if let Some((_, values)) = &extra {
            row.push(values[i].into());
        }
        table.push(row);
    }
    table
}

fn run_model<D, S>(
    cfg: &ExperimentConfig,
    space: &D,
    model: Model<S>,
    estimator: &dyn Estimator<S::Point>,
) -> Result<(Value, Option<Table>), CliError>
where
    D: MetricSpace<Point = S::Point>,
    S: Sampler,
{
    let sampler_name = &cfg.sampler.as_ref().expect("validated").name;
    let truth = model.truth.ok_or_else(|| {
        CliError::validation(format!("sampler {sampler_name} has no unique mean, so its risk is undefined"))
    })?;
    match cfg.command {
        Command::Simulate => {
            let risks = cfg
                .n_grid
                .iter()
                .enumerate()
                .map(|(i, &n)| risk(space, estimator, &model.sampler, &truth, n, cfg.p(), cfg.reps, derive_seed(cfg.seed, i as u64)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((json!({ "risks": to_value(&risks) }), Some(risk_table(&risks, None))))
        }
        Command::Rate => {
            let fit = rate_estimate_with(space, estimator, &model.sampler, &truth, &cfg.n_grid, cfg.reps, cfg.seed)?;
            let table = risk_table(&fit.risks, None);
            Ok((to_value(&fit), Some(table)))
        }
        Command::Modulation => {
            let var = model.population_var.ok_or_else(|| {
                CliError::validation(format!("no population variance available for {sampler_name}"))
            })?;
            let curve =
                variance_modulation_with(space, estimator, &model.sampler, &truth, var, &cfg.n_grid, cfg.reps, cfg.seed)?;
            let risks: Vec<_> = curve.entries.iter().map(|e| e.risk).collect();
            let m_n = curve.entries.iter().map(|e| e.m_n).collect();
            Ok((to_value(&curve), Some(risk_table(&risks, Some(("m_n", m_n))))))
        }
        _ => unreachable!("not a sampler command"),
    }
}

fn simulation(cfg: &ExperimentConfig) -> Result<(Value, Option<Table>), CliError> {
    let sampler = cfg.sampler.as_ref().expect("validated");
    match cfg.space.kind {
        SpaceName::Circle => {
            let est = registry::circle_estimator(&cfg.estimator)?;
            run_model(cfg, &Circle, registry::circle_model(sampler)?, est.as_ref())
        }
        SpaceName::Sphere => {
            let m = cfg.space.m.unwrap_or(2);
            let est = registry::sphere_estimator(m, &cfg.estimator)?;
            run_model(cfg, &Sphere::new(m)?, registry::sphere_model(m, sampler)?, est.as_ref())
        }
        SpaceName::Shapes => {
            let (m, k) = (cfg.space.m.unwrap_or(2), cfg.space.k.unwrap_or(3));
            let est = registry::shapes_estimator(m, k, &cfg.estimator)?;
            run_model(cfg, &ShapeSpace::new(m, k)?, registry::shapes_model(m, k, sampler)?, est.as_ref())
        }
        SpaceName::Wasserstein => Err(CliError::validation("the wasserstein space has no samplers")),
    }
}

/// Two-point experiment on the uniform circle with `x = 0`, `y = -pi`.
fn lecam(cfg: &ExperimentConfig) -> Result<(Value, Option<Table>), CliError> {
    let sampler = cfg.sampler.as_ref().expect("validated");
    if sampler.name != "circle.uniform" {
        return Err(CliError::validation(format!(
            "lecam needs a base law with several means; use circle.uniform, not {}",
            sampler.name
        )));
    }
    let x = CirclePoint::new(0.0);
    let y = CirclePoint::new(-PI);
    let mean = MeanEstimator(&Circle);
    let at_x = ConstantEstimator(x);
    let at_y = ConstantEstimator(y);
    let shrunk = ShrunkEstimator { space: &Circle, inner: &mean, anchor: x, lambda: SHRINK_LAMBDA };
    let suite = [
        NamedEstimator::new("mean", &mean),
        NamedEstimator::new("constant_x", &at_x),
        NamedEstimator::new("constant_y", &at_y),
        NamedEstimator::new("shrunk", &shrunk),
    ];
    let plug_in = PlugInTest { space: &Circle, estimator: &mean, x, y };
    let mut table = Table::new(&[
        "n",
        "risk",
        "stderr",
        "reps",
        "t",
        "estimator",
        "risk_x",
        "risk_y",
        "finite_n_floor",
        "above_floor",
    ]);
    let mut points = Vec::new();
    for (ti, &t) in cfg.t.iter().enumerate() {
        let family = PerturbedFamily::new(UniformCircle, vec![x, y], t)?;
        for (ni, &n) in cfg.n_grid.iter().enumerate() {
            let seed = derive_seed(cfg.seed, (ti * cfg.n_grid.len() + ni) as u64);
            let report = lecam_experiment(&Circle, &family, &x, &y, &suite, n, cfg.p(), cfg.reps, seed)?;
            let coin = test_error_floor(&CoinFlip, &family, &x, &y, n, cfg.reps, seed)?;
            let plug = test_error_floor(&plug_in, &family, &x, &y, n, cfg.reps, seed)?;
            for e in &report.estimators {
                table.push(vec![
                    n.into(),
                    e.sup_risk.into(),
                    e.sup_stderr.into(),
                    cfg.reps.into(),
                    t.into(),
                    e.name.as_str().into(),
                    e.risk_at_x.estimate.into(),
                    e.risk_at_y.estimate.into(),
                    report.floors.finite_n_floor.into(),
                    e.above_floor.into(),
                ]);
            }
            points.push(json!({
                "t": t,
                "n": n,
                "report": to_value(&report),
                "coin_flip_error": coin,
                "plug_in_error": plug,
            }));
        }
    }
    let base = json!({ "x": x.angle(), "y": y.angle(), "shrink_lambda": SHRINK_LAMBDA });
    Ok((json!({ "base": base, "points": points }), Some(table)))
}
