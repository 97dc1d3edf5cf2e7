#![no_main]

use libfuzzer_sys::fuzz_target;
use mrlsr::data::parse_csv_features;

// Query-point CSV: every column is a feature. Accepted matrices must be
// rectangular and finite.
fuzz_target!(|data: &[u8]| {
    if let Ok(matrix) = parse_csv_features(data) {
        assert!(matrix.nrows() >= 1);
        assert!(matrix.ncols() >= 1);
        assert!(matrix.iter().all(|v| v.is_finite()));
    }
});
