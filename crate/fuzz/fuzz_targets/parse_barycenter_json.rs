#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(input) = frechet_lab::io::parse_barycenter_json(text) {
            let _ = input.resolved_weights();
        }
    }
});
