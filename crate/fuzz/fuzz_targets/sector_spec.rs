#![no_main]

use libfuzzer_sys::fuzz_target;
use su2ladder::io::parse_sector;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((n, w)) = parse_sector(text) {
        assert_eq!(parse_sector(&format!("{n},{w}")).unwrap(), (n, w));
    }
});
