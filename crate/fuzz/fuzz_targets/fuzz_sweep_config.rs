#![no_main]

use libfuzzer_sys::fuzz_target;
use ncmusic::harness::SweepConfig;

// Sweep configs (and re-played run manifests) are user-supplied JSON; the
// parser and validation must never panic.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = SweepConfig::from_json(text);
    }
});
