#![no_main]
use blocktri_core::io::{factorization_to_json, parse_factorization, to_pretty};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(f) = parse_factorization(text) else { return };
    let again = parse_factorization(&to_pretty(&factorization_to_json(&f))).expect("re-parse");
    assert_eq!(f, again);
    if f.m + f.n <= 8 {
        let _ = f.evaluate();
    }
});
