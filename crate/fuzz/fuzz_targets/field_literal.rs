#![no_main]
use blocktri_core::Field;
use libfuzzer_sys::fuzz_target;

// Input is "<field>\n<scalar literal>".
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (field_name, literal) = text.split_once('\n').unwrap_or((text, "0"));
    let Ok(field) = field_name.parse::<Field>() else { return };
    assert_eq!(field.to_string().parse::<Field>().ok(), Some(field));
    let Ok(e) = field.parse_elem(literal) else { return };
    if field.is_exact() {
        assert_eq!(field.parse_elem(&field.format_elem(&e)).ok(), Some(e));
    }
});
