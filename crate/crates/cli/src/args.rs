//! Command-line flags. Flags override values from `--config`.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::config::{Command, ExperimentConfig, SamplerConfig, SpaceName};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandArg {
    Mean,
    Simulate,
    Rate,
    Modulation,
    Lecam,
    Barycenter,
    Region,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Mean => Command::Mean,
            CommandArg::Simulate => Command::Simulate,
            CommandArg::Rate => Command::Rate,
            CommandArg::Modulation => Command::Modulation,
            CommandArg::Lecam => Command::Lecam,
            CommandArg::Barycenter => Command::Barycenter,
            CommandArg::Region => Command::Region,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "frechet-lab", version, about = "Fréchet means and Monte Carlo rate experiments")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: CommandArg,

    /// circle, sphere, shapes or wasserstein; inferred from the sampler prefix when omitted.
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long)]
    pub sampler: Option<String>,
    #[arg(long)]
    pub estimator: Option<String>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated mixing weights (lecam).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub spread: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub f_antipode: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub input: Option<String>,
    /// Center and scale raw landmark rows.
    #[arg(long)]
    pub preprocess: bool,
    /// Output stem; writes `<stem>.json` and, for tables, `<stem>.csv`.
    #[arg(long)]
    pub output: Option<String>,
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "FRECHET_LAB_THREADS")]
    pub threads: Option<usize>,
}

fn infer_space(command: Command, sampler: Option<&str>) -> Option<SpaceName> {
    if let Some(prefix) = sampler.and_then(|s| s.split('.').next()) {
        return SpaceName::parse(prefix).ok();
    }
    matches!(command, Command::Barycenter | Command::Region).then_some(SpaceName::Wasserstein)
}

impl Cli {
    /// The resolved experiment config: file values, then flags.
    pub fn to_config(&self) -> Result<ExperimentConfig, CliError> {
        let command = Command::from(self.command);
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
                let mut cfg = ExperimentConfig::from_json(&text)
                    .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
                cfg.command = command;
                cfg
            }
            None => {
                let space = match &self.space {
                    Some(s) => SpaceName::parse(s)?,
                    None => infer_space(command, self.sampler.as_deref())
                        .ok_or_else(|| CliError::validation("--space is required"))?,
                };
                ExperimentConfig::new(command, space)
            }
        };
        if let Some(s) = &self.space {
            let kind = SpaceName::parse(s)?;
            if kind != cfg.space.kind {
                cfg.space.kind = kind;
                cfg.space.m = None;
                cfg.space.k = None;
            }
        }
        if let Some(name) = &self.sampler {
            if cfg.sampler.as_ref().is_none_or(|s| &s.name != name) {
                cfg.sampler = Some(SamplerConfig::named(name.clone()));
            }
        }
        let params = [("r", self.r), ("alpha", self.alpha), ("spread", self.spread), ("f-antipode", self.f_antipode)];
        if params.iter().any(|(_, v)| v.is_some()) {
            let Some(s) = cfg.sampler.as_mut() else {
                let flag = params.iter().find(|(_, v)| v.is_some()).map(|(f, _)| *f).unwrap_or_default();
                return Err(CliError::validation(format!("--{flag} needs a --sampler")));
            };
            s.r = self.r.or(s.r);
            s.alpha = self.alpha.or(s.alpha);
            s.spread = self.spread.or(s.spread);
            s.f_antipode = self.f_antipode.or(s.f_antipode);
        }
        if let Some(e) = &self.estimator {
            cfg.estimator = e.clone();
        }
        if let Some(g) = &self.n_grid {
            cfg.n_grid = g.clone();
        }
        if let Some(r) = self.reps {
            cfg.reps = r;
        }
        if self.p.is_some() {
            cfg.p = self.p;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = &self.t {
            cfg.t = t.clone();
        }
        if self.gamma.is_some() {
            cfg.gamma = self.gamma;
        }
        if self.m.is_some() {
            cfg.space.m = self.m;
        }
        if self.k.is_some() {
            cfg.space.k = self.k;
        }
        if self.input.is_some() {
            cfg.input = self.input.clone();
        }
        cfg.preprocess |= self.preprocess;
        if self.output.is_some() {
            cfg.output_path = self.output.clone();
        }
        Ok(cfg.resolve())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("frechet-lab").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn space_is_inferred_from_sampler() {
        let cfg = parse(&["rate", "--sampler", "circle.pow", "--r", "1", "--n-grid", "10,100,1000"]).to_config().unwrap();
        assert_eq!(cfg.space.kind, SpaceName::Circle);
        assert_eq!(cfg.sampler.unwrap().r, Some(1.0));
        assert_eq!(cfg.n_grid, vec![10, 100, 1000]);
    }

    #[test]
    fn sphere_defaults_are_filled() {
        let cfg = parse(&["simulate", "--sampler", "sphere.halfmix", "--alpha", "0.3"]).to_config().unwrap();
        assert_eq!(cfg.space.m, Some(2));
    }

    #[test]
    fn parameter_without_sampler_is_rejected() {
        assert!(parse(&["rate", "--space", "circle", "--r", "1"]).to_config().is_err());
    }

    #[test]
    fn region_needs_no_space() {
        let cfg = parse(&["region", "--gamma", "2.5"]).to_config().unwrap();
        assert_eq!(cfg.space.kind, SpaceName::Wasserstein);
    }
}
