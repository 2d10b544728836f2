#![no_main]

use libfuzzer_sys::fuzz_target;
use su2ladder::verify::parse_override;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((name, value)) = parse_override(text) {
        assert!(value.is_finite() && value > 0.0, "{name}={value}");
    }
});
