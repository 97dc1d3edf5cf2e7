#![no_main]

use libfuzzer_sys::fuzz_target;
use mrlsr::data::{parse_csv, ColumnSelector};

// The first byte picks the target column (index or the header name "y");
// the rest is the CSV file. Parsing must never panic, and any accepted
// dataset must satisfy its invariants.
fuzz_target!(|data: &[u8]| {
    let Some((&selector_byte, file)) = data.split_first() else {
        return;
    };
    let selector = if selector_byte % 2 == 0 {
        ColumnSelector::Index((selector_byte / 2 % 8) as usize)
    } else {
        ColumnSelector::Name("y".to_string())
    };
    if let Ok(dataset) = parse_csv(file, &selector) {
        assert!(!dataset.is_empty());
        assert!(dataset.dim() >= 1);
        assert_eq!(dataset.targets().len(), dataset.len());
        assert!(dataset.features().iter().all(|v| v.is_finite()));
        assert!(dataset.targets().iter().all(|v| v.is_finite()));
    }
});
