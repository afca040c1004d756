//! Experiment configuration: a JSON document, optionally overridden by
//! command-line flags, validated before anything runs.

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Mean,
    Simulate,
    Rate,
    Modulation,
    Lecam,
    Barycenter,
    Region,
}

impl Command {
    /// Commands that run Monte Carlo replications over a sample-size grid.
    pub fn is_simulation(self) -> bool {
        matches!(self, Command::Simulate | Command::Rate | Command::Modulation | Command::Lecam)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceName {
    Circle,
    Sphere,
    Shapes,
    Wasserstein,
}

impl SpaceName {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "circle" => Ok(SpaceName::Circle),
            "sphere" => Ok(SpaceName::Sphere),
            "shapes" => Ok(SpaceName::Shapes),
            "wasserstein" => Ok(SpaceName::Wasserstein),
            other => Err(CliError::validation(format!(
                "unknown space '{other}' (expected circle, sphere, shapes or wasserstein)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub kind: SpaceName,
    /// Sphere `S^m` or landmark dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Number of landmarks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Scale of wrapped-normal, cap and landmark noise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    /// Density at the antipode for `circle.plateau`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_antipode: Option<f64>,
}

impl SamplerConfig {
    pub fn named(name: impl Into<String>) -> Self {
        Self { name: name.into(), r: None, alpha: None, spread: None, f_antipode: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub space: SpaceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerConfig>,
    #[serde(default = "default_estimator")]
    pub estimator: String,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Loss exponent; resolves to 1 for `rate` and 2 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Mixing weights of the perturbed family (`lecam`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// Raw landmark input is centered and scaled before use.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub preprocess: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

fn default_estimator() -> String {
    "mean".into()
}

fn default_reps() -> usize {
    1000
}


impl ExperimentConfig {
    pub fn new(command: Command, space: SpaceName) -> Self {
        Self {
            command,
            space: SpaceConfig { kind: space, m: None, k: None },
            sampler: None,
            estimator: default_estimator(),
            n_grid: Vec::new(),
            reps: default_reps(),
            p: None,
            seed: 0,
            t: Vec::new(),
            gamma: None,
            input: None,
            preprocess: false,
            output_path: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::validation(format!("config line {}: {e}", e.line())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn p(&self) -> f64 {
        self.p.unwrap_or(if self.command == Command::Rate { 1.0 } else { 2.0 })
    }

    /// Fill in defaults so that the emitted config is complete.
    pub fn resolve(mut self) -> Self {
        self.p = Some(self.p());
        match self.space.kind {
            SpaceName::Sphere => {
                self.space.m.get_or_insert(2);
            }
            SpaceName::Shapes => {
                self.space.m.get_or_insert(2);
                self.space.k.get_or_insert(3);
            }
            SpaceName::Circle | SpaceName::Wasserstein => {}
        }
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::validation(msg));
        if self.command.is_simulation() {
            if self.n_grid.is_empty() {
                return bad(format!("{:?} needs a nonempty --n-grid", self.command).to_lowercase());
            }
            if self.n_grid.contains(&0) {
                return bad("sample sizes must be positive".into());
            }
            if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
                return bad("--n-grid must be strictly increasing".into());
            }
            if self.reps < 2 {
                return bad(format!("--reps must be at least 2, got {}", self.reps));
            }
            if self.sampler.is_none() {
                return bad("simulation commands need a --sampler".into());
            }
        }
        if self.command == Command::Rate && self.n_grid.len() < 3 {
            return bad("rate needs at least 3 sample sizes".into());
        }
        let p = self.p();
        if !(p >= 1.0 && p.is_finite()) {
            return bad(format!("--p must be >= 1, got {p}"));
        }
        if self.command == Command::Rate && p != 1.0 {
            return bad(format!("rate regresses the first-moment risk; --p must be 1, got {p}"));
        }
        if self.command == Command::Lecam {
            if self.t.is_empty() {
                return bad("lecam needs at least one --t".into());
            }
            if let Some(t) = self.t.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
                return bad(format!("--t values must lie in (0, 1], got {t}"));
            }
        }
        if self.command == Command::Region && self.gamma.is_none() {
            return bad("region needs --gamma".into());
        }
        if matches!(self.command, Command::Mean | Command::Barycenter) && self.input.is_none() {
            return bad(format!("{:?} needs --input", self.command).to_lowercase());
        }
        if self.command == Command::Barycenter && self.space.kind != SpaceName::Wasserstein {
            return bad("barycenter runs on the wasserstein space".into());
        }
        match self.space.kind {
            SpaceName::Sphere if self.space.m.is_some_and(|m| m < 1) => return bad("sphere needs m >= 1".into()),
            SpaceName::Shapes => {
                let (m, k) = (self.space.m.unwrap_or(2), self.space.k.unwrap_or(3));
                if m < 2 || k < m + 1 {
                    return bad(format!("shape space needs m >= 2 and k >= m + 1, got m = {m}, k = {k}"));
                }
            }
            _ => {}
        }
        if let Some(s) = &self.sampler {
            registry::check_sampler(self.space.kind, s)?;
        }
        if self.command.is_simulation() || self.command == Command::Mean {
            registry::check_estimator(self.command, self.space.kind, &self.estimator)?;
        }
        Ok(())
    }
}
