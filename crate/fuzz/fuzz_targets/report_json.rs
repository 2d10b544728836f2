#![no_main]

use libfuzzer_sys::fuzz_target;
use su2ladder::verify::VerificationReport;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = VerificationReport::from_json(text) {
        let _ = report.to_csv();
        if let Ok(again) = report.to_json() {
            assert_eq!(VerificationReport::from_json(&again).unwrap(), report);
        }
    }
});
