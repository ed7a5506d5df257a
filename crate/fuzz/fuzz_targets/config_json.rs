#![no_main]

use gomp_doa::bench::SweepConfig;
use libfuzzer_sys::fuzz_target;

// Input: config JSON, optionally followed by a NUL and newline-separated
// `key=value` overrides.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let (json, overrides) = text.split_once('\0').unwrap_or((text, ""));
    let overrides: Vec<String> = overrides.lines().map(str::to_string).collect();
    if let Ok(cfg) = SweepConfig::from_json_str(json, &overrides) {
        // anything accepted must satisfy every invariant
        cfg.validate().expect("accepted config re-validates");
        assert!(cfg.k <= cfg.n && cfg.n <= cfg.m && cfg.m <= cfg.p);
    }
});
