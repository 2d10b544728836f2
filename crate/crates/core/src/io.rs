//! JSON dumps of operators and bases, and the small text formats the
//! command line accepts.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::casimir::CanonicalVector;
use crate::schwinger::CasimirSpectrum;
use crate::error::{Error, Result};
use crate::fock::{FockState, SectorBasis};
use crate::operator::{SparseOperator, C64};

/// Coordinate-triplet form of an operator, entries row-major as
/// `[row, col, re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDump {
    pub rows: usize,
    pub cols: usize,
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64, f64)>,
}

impl OperatorDump {
    pub fn from_operator(op: &SparseOperator) -> Self {
        Self {
            rows: op.dim(),
            cols: op.dim(),
            dim: op.dim(),
            entries: op.entries().map(|(r, c, z)| (r, c, z.re, z.im)).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)? + "\n")
    }

    /// Parses and validates: square, indices in range, finite values,
    /// strictly row-major with no repeated coordinates.
    pub fn parse_json(text: &str) -> Result<Self> {
        let dump: Self = serde_json::from_str(text)?;
        if dump.rows != dump.dim || dump.cols != dump.dim {
            return Err(Error::DimensionMismatch {
                rows: dump.rows,
                cols: dump.cols,
                expected: dump.dim,
            });
        }
        for (k, &(r, c, re, im)) in dump.entries.iter().enumerate() {
            if r >= dump.dim || c >= dump.dim {
                return Err(Error::Parse(format!("entry {k}: ({r}, {c}) outside {0}x{0}", dump.dim)));
            }
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse(format!("entry {k}: non-finite value")));
            }
            if k > 0 {
                let (pr, pc, _, _) = dump.entries[k - 1];
                if (pr, pc) >= (r, c) {
                    return Err(Error::Parse(format!("entry {k}: ({r}, {c}) not in row-major order")));
                }
            }
        }
        Ok(dump)
    }

    pub fn to_operator(&self, basis: &Arc<SectorBasis>, budget: u32) -> Result<SparseOperator> {
        if self.dim != basis.len() {
            return Err(Error::DimensionMismatch {
                rows: self.rows,
                cols: self.cols,
                expected: basis.len(),
            });
        }
        Ok(SparseOperator::from_triplets(
            basis,
            self.entries.iter().map(|&(r, c, re, im)| (r, c, C64::new(re, im))),
            budget,
        ))
    }
}

/// The basis as a JSON array of occupation vectors, in basis order.
pub fn basis_to_json(basis: &SectorBasis) -> Result<String> {
    let states: Vec<&[u32]> = basis.states().iter().map(FockState::occupations).collect();
    Ok(serde_json::to_string(&states)? + "\n")
}

/// Parses a basis dump. Vectors must share one odd length `2s + 1` and
/// appear in strictly descending lexicographic order, as the library
/// enumerates them.
pub fn parse_basis_json(text: &str) -> Result<Vec<FockState>> {
    let raw: Vec<Vec<u32>> = serde_json::from_str(text)?;
    let Some(first) = raw.first() else {
        return Ok(Vec::new());
    };
    let modes = first.len();
    if modes % 2 == 0 {
        return Err(Error::Parse(format!("{modes} modes is not 2s + 1")));
    }
    for (k, v) in raw.iter().enumerate() {
        if v.len() != modes {
            return Err(Error::LengthMismatch {
                expected: modes,
                found: v.len(),
            });
        }
        if v.iter().try_fold(0u32, |acc, &x| acc.checked_add(x)).is_none() {
            return Err(Error::Parse(format!("state {k}: particle number overflows")));
        }
        if k > 0 && raw[k - 1] <= *v {
            return Err(Error::Parse(format!("state {k} breaks descending order")));
        }
    }
    Ok(raw.into_iter().map(FockState::new).collect())
}

/// One canonical vector as `(occupation vector, [re, im])` pairs, zero
/// amplitudes dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalDump {
    pub n: u32,
    pub j: u32,
    pub jz: i64,
    pub norm: f64,
    pub components: Vec<(Vec<u32>, [f64; 2])>,
}

pub fn canonical_dump(basis: &SectorBasis, vectors: &[CanonicalVector]) -> Vec<CanonicalDump> {
    vectors
        .iter()
        .map(|v| CanonicalDump {
            n: v.n,
            j: v.j,
            jz: v.jz,
            norm: v.norm,
            components: v
                .amplitudes
                .iter()
                .enumerate()
                .filter(|(_, z)| z.norm() > 1e-14)
                .map(|(i, z)| (basis.state(i).occupations().to_vec(), [z.re, z.im]))
                .collect(),
        })
        .collect()
}

/// Eigenvalues of `J²` in one `(n, w)` sector, grouped by their label `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub n: u32,
    pub weight: i64,
    /// Mean of the computed eigenvalues carrying this label.
    pub eigenvalue: f64,
    pub j: u32,
    pub multiplicity: usize,
}

/// Every sector, or just `sector`, in basis order; within a sector by `j`.
pub fn spectrum_rows(spectrum: &CasimirSpectrum, sector: Option<(u32, i64)>) -> Result<Vec<SpectrumRow>> {
    if let Some((n, w)) = sector {
        if spectrum.decomposition().sector(n, w).is_none() {
            return Err(Error::Parse(format!("no states in sector (n={n}, w={w})")));
        }
    }
    let mut rows = Vec::new();
    for (s, labels) in spectrum.labeled_sectors() {
        if sector.is_some_and(|x| x != (s.n, s.weight)) {
            continue;
        }
        let mut groups: std::collections::BTreeMap<u32, Vec<f64>> = Default::default();
        for (&x, &j) in s.eigenvalues.iter().zip(labels) {
            groups.entry(j).or_default().push(x);
        }
        for (j, xs) in groups {
            rows.push(SpectrumRow {
                n: s.n,
                weight: s.weight,
                eigenvalue: xs.iter().sum::<f64>() / xs.len() as f64,
                j,
                multiplicity: xs.len(),
            });
        }
    }
    Ok(rows)
}

/// CSV with columns `sector,eigenvalue,j,multiplicity`, sector as `n,w`.
pub fn spectrum_csv(rows: &[SpectrumRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sector", "eigenvalue", "j", "multiplicity"])?;
    for r in rows {
        w.write_record([
            format!("{},{}", r.n, r.weight),
            r.eigenvalue.to_string(),
            r.j.to_string(),
            r.multiplicity.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses `n,w` into a particle number and a `J_z` weight.
pub fn parse_sector(text: &str) -> Result<(u32, i64)> {
    let (n, w) = text
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected n,w, got {text:?}")))?;
    let n = n
        .trim()
        .parse::<u32>()
        .map_err(|e| Error::Parse(format!("particle number {n:?}: {e}")))?;
    let w = w
        .trim()
        .parse::<i64>()
        .map_err(|e| Error::Parse(format!("weight {w:?}: {e}")))?;
    Ok((n, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schwinger::su2_generators;

    #[test]
    fn operator_round_trip() {
        let b = Arc::new(SectorBasis::full(1, 2));
        let g = su2_generators(&b).unwrap();
        let dump = OperatorDump::from_operator(&g.jplus);
        let text = dump.to_json().unwrap();
        let back = OperatorDump::parse_json(&text).unwrap();
        assert_eq!(back, dump);
        let op = back.to_operator(&b, 0).unwrap();
        assert_eq!(OperatorDump::from_operator(&op), dump);
    }

    #[test]
    fn operator_dump_rejects_bad_input() {
        for bad in [
            r#"{"rows":2,"cols":3,"dim":2,"entries":[]}"#,
            r#"{"rows":2,"cols":2,"dim":2,"entries":[[2,0,1.0,0.0]]}"#,
            r#"{"rows":2,"cols":2,"dim":2,"entries":[[1,0,1.0,0.0],[0,1,1.0,0.0]]}"#,
            r#"{"rows":2,"cols":2,"dim":2,"entries":[[0,0,1.0,0.0],[0,0,1.0,0.0]]}"#,
            r#"{"rows":2,"cols":2,"dim":2}"#,
            "[",
        ] {
            assert!(OperatorDump::parse_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn basis_round_trip() {
        let b = SectorBasis::full(1, 2);
        let text = basis_to_json(&b).unwrap();
        assert!(text.starts_with("[[2,0,0],[1,1,0],[1,0,1],[1,0,0],[0,2,0]"));
        assert_eq!(parse_basis_json(&text).unwrap(), b.states());
    }

    #[test]
    fn basis_rejects_bad_input() {
        for bad in ["[[1,0]]", "[[1,0,0],[1,0]]", "[[0,0,0],[1,0,0]]", "[[1,0,0],[1,0,0]]", "[[-1,0,0]]", "{}"] {
            assert!(parse_basis_json(bad).is_err(), "{bad}");
        }
        assert!(parse_basis_json("[]").unwrap().is_empty());
    }

    #[test]
    fn spectrum_table() {
        let b = Arc::new(SectorBasis::full(1, 2));
        let g = su2_generators(&b).unwrap();
        let spectrum = CasimirSpectrum::new(&g).unwrap();
        let rows = spectrum_rows(&spectrum, Some((2, 0))).unwrap();
        let js: Vec<(u32, usize)> = rows.iter().map(|r| (r.j, r.multiplicity)).collect();
        assert_eq!(js, vec![(0, 1), (2, 1)]);
        assert!((rows[1].eigenvalue - 6.0).abs() < 1e-10);
        let csv = spectrum_csv(&rows).unwrap();
        assert!(csv.starts_with("sector,eigenvalue,j,multiplicity\n\"2,0\","));
        assert!(spectrum_rows(&spectrum, Some((3, 0))).is_err());
        let all = spectrum_rows(&spectrum, None).unwrap();
        assert_eq!(all.iter().map(|r| r.multiplicity).sum::<usize>(), b.len());
    }

    #[test]
    fn sectors() {
        assert_eq!(parse_sector("3,-2").unwrap(), (3, -2));
        assert_eq!(parse_sector(" 0 , 0 ").unwrap(), (0, 0));
        for bad in ["3", "3;1", "-1,0", "a,b", "3,"] {
            assert!(parse_sector(bad).is_err(), "{bad}");
        }
    }
}
