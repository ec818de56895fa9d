#![no_main]
use blocktri_core::sl4gf2::ReachSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(reach) = ReachSet::from_bytes(data) {
        assert_eq!(reach.to_bytes(), data);
    }
});
