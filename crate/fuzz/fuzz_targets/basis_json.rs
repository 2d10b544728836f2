#![no_main]

use libfuzzer_sys::fuzz_target;
use su2ladder::io::parse_basis_json;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(states) = parse_basis_json(text) {
        for w in states.windows(2) {
            assert!(w[0].occupations() > w[1].occupations());
        }
    }
});
