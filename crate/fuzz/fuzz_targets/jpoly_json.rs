#![no_main]

use libfuzzer_sys::fuzz_target;
use su2ladder::ladder::JPoly;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = JPoly::parse_json(text) {
        let again = serde_json::to_string(&p).unwrap();
        assert_eq!(JPoly::parse_json(&again).unwrap(), p);
    }
});
