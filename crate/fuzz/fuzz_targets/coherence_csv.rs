#![no_main]

use gomp_doa::bench::{coherence_csv, parse_coherence_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = parse_coherence_csv(text) {
        let once = coherence_csv(&rows);
        let twice = coherence_csv(&parse_coherence_csv(&once).expect("re-parse emitted rows"));
        assert_eq!(once, twice);
    }
});
