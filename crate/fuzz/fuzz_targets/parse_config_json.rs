//! Experiment configs must parse, validate and re-serialize without panics;
//! a config that validates must survive a JSON round trip.

#![no_main]
use libfuzzer_sys::fuzz_target;

use frechet_lab_cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ExperimentConfig::from_json(text) else { return };
    let cfg = cfg.resolve();
    if cfg.validate().is_ok() {
        let back = ExperimentConfig::from_json(&cfg.to_json()).expect("emitted config parses");
        assert_eq!(back, cfg);
    }
});
