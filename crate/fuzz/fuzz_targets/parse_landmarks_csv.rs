//! The first byte picks the dimensions and whether rows are raw landmarks.

#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&head, rest)) = data.split_first() else { return };
    let m = 2 + (head & 0x3) as usize;
    let k = m + 1 + ((head >> 2) & 0x3) as usize;
    let preprocess = head & 0x80 != 0;
    if let Ok(text) = std::str::from_utf8(rest) {
        let _ = frechet_lab::io::parse_landmarks_csv(text, m, k, preprocess);
    }
});
