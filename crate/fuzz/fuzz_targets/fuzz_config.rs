#![no_main]

use libfuzzer_sys::fuzz_target;

// Arbitrary bytes through the full config pipeline: JSON decoding, schema
// validation, coefficient-grammar parsing, and mode-parameter defaulting.
// Must reject garbage with a structured error and never panic.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = pide::config::parse_config(text);
    }
});
