#![no_main]

use libfuzzer_sys::fuzz_target;
use ncmusic::harness::ScenarioConfig;

// Scenario files are user-supplied JSON; parsing plus template validation
// must never panic, whatever the bytes.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = serde_json::from_str::<ScenarioConfig>(text) {
            let _ = cfg.validate();
            let _ = cfg.to_scenario(0);
        }
    }
});
