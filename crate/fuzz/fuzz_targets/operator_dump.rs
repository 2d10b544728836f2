#![no_main]

use libfuzzer_sys::fuzz_target;
use su2ladder::io::OperatorDump;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(dump) = OperatorDump::parse_json(text) {
        assert!(dump.entries.iter().all(|e| e.0 < dump.dim && e.1 < dump.dim));
        assert_eq!(OperatorDump::parse_json(&dump.to_json().unwrap()).unwrap(), dump);
    }
});
