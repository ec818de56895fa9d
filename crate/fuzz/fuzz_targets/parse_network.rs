#![no_main]
use blocktri_core::io::parse_network;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(net) = parse_network(text) else { return };
    if net.split.0 + net.split.1 <= 16 {
        let _ = net.evaluate();
    }
});
