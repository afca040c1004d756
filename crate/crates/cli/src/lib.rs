//! Experiment runner behind the `frechet-lab` binary: configs, the
//! sampler and estimator registry, and command dispatch.

pub mod args;
pub mod config;
pub mod error;
pub mod registry;
pub mod run;
pub mod table;

use std::path::PathBuf;

pub use args::Cli;
pub use config::{Command, ExperimentConfig, SamplerConfig, SpaceConfig, SpaceName};
pub use error::CliError;
pub use run::{run, Outcome};

fn stem(path: &str) -> PathBuf {
    let p = PathBuf::from(path);
    match p.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("json") => p.with_extension(""),
        _ => p,
    }
}

fn with_suffix(stem: &std::path::Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn write(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

/// Write the run's artifacts next to `output_path` (if set) and return the
/// JSON document.
pub fn emit(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<String, CliError> {
    let doc = serde_json::to_string_pretty(&outcome.document).expect("document serializes") + "\n";
    if let Some(path) = &cfg.output_path {
        let stem = stem(path);
        if let Some(parent) = stem.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| CliError::validation(format!("{}: {e}", parent.display())))?;
        }
        write(&with_suffix(&stem, "json"), &doc)?;
        if let Some(table) = &outcome.table {
            write(&with_suffix(&stem, "csv"), table)?;
        }
    }
    Ok(doc)
}

/// Everything the binary does after argument parsing.
pub fn main_with(cli: &Cli) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::validation("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::validation(format!("thread pool: {e}")))?;
    }
    let cfg = cli.to_config()?;
    let outcome = run(&cfg)?;
    emit(&cfg, &outcome)
}
