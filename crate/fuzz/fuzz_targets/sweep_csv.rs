#![no_main]

use gomp_doa::bench::{parse_sweep_csv, sweep_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(result) = parse_sweep_csv(text) {
        // emitting is a fixed point after one normalization pass
        let once = sweep_csv(&result);
        let twice = sweep_csv(&parse_sweep_csv(&once).expect("re-parse emitted sweep"));
        assert_eq!(once, twice);
    }
});
