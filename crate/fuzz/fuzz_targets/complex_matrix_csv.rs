#![no_main]

use gomp_doa::bench::{complex_matrix_csv, parse_complex_matrix, MAX_MATRIX_ENTRIES};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = parse_complex_matrix(text) {
        assert!(m.nrows() * m.ncols() <= MAX_MATRIX_ENTRIES);
        assert!(m.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        // the writer's 17 significant digits round-trip exactly
        let again = parse_complex_matrix(&complex_matrix_csv(&m)).expect("re-parse emitted matrix");
        assert_eq!(again, m);
    }
});
