//! Replays the checked-in fuzz seeds through every parser on stable.

use std::fs;
use std::path::PathBuf;

use su2ladder::io::{parse_basis_json, parse_sector, OperatorDump};
use su2ladder::ladder::JPoly;
use su2ladder::verify::{parse_override, VerificationReport};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("seed-"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

/// Every seed parses or is rejected; seeds named `*-bad`, `*-nan`, ... are
/// the rejections.
fn replay<T>(target: &str, rejected: &[&str], parse: impl Fn(&str) -> Result<T, su2ladder::Error>) {
    for (name, text) in seeds(target) {
        let want_err = rejected.contains(&name.as_str());
        assert_eq!(parse(&text).is_err(), want_err, "{target}/{name}");
    }
}

#[test]
fn seeds_replay() {
    replay("jpoly_json", &["seed-bad"], JPoly::parse_json);
    replay("operator_dump", &["seed-unordered"], OperatorDump::parse_json);
    replay("basis_json", &["seed-even-modes"], parse_basis_json);
    replay("report_json", &[], VerificationReport::from_json);
    replay("sector_spec", &["seed-bad", "seed-overflow"], parse_sector);
    replay("override_spec", &["seed-bad", "seed-nan", "seed-zero"], parse_override);
}
