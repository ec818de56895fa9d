#![no_main]
use blocktri_core::io::{matrix_to_json, parse_matrix, to_pretty};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = parse_matrix(text) else { return };
    // Whatever parses must survive a write and re-read unchanged.
    let again = parse_matrix(&to_pretty(&matrix_to_json(&m))).expect("re-parse");
    assert_eq!(m, again);
});
