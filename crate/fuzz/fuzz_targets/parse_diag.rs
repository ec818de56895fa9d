#![no_main]
use blocktri_core::io::{diag_to_json, parse_diag, to_pretty};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok((field, d)) = parse_diag(text) else { return };
    let again = parse_diag(&to_pretty(&diag_to_json(field, &d))).expect("re-parse");
    assert_eq!((field, d), again);
});
