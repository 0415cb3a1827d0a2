//! JSON export and import of projected pairs.
//!
//! Two layouts are accepted:
//!
//! ```json
//! {"n": 3, "toeplitz": true, "first_row_H": [[re, im], ...], "first_row_S": [...], "meta": {...}}
//! {"n": 3, "toeplitz": false, "H": [[[re, im], ...], ...], "S": [...], "meta": {...}}
//! ```
//!
//! Floats are written in shortest round-trip form, so `load(save(x))` is
//! bit-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianMatrix, C64};
use crate::qsd::{DefinitePair, PairProvenance, QsdInstance};

type Entry = [f64; 2];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairFile {
    n: usize,
    toeplitz: bool,
    #[serde(rename = "first_row_H", default, skip_serializing_if = "Option::is_none")]
    first_row_h: Option<Vec<Entry>>,
    #[serde(rename = "first_row_S", default, skip_serializing_if = "Option::is_none")]
    first_row_s: Option<Vec<Entry>>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    h: Option<Vec<Vec<Entry>>>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    s: Option<Vec<Vec<Entry>>>,
    #[serde(default)]
    provenance: PairProvenance,
    #[serde(default)]
    meta: serde_json::Value,
}

fn entry(z: C64) -> Entry {
    [z.re, z.im]
}

fn complex(e: &Entry) -> C64 {
    C64::new(e[0], e[1])
}

fn full_rows(m: &HermitianMatrix) -> Vec<Vec<Entry>> {
    (0..m.dim()).map(|j| (0..m.dim()).map(|k| entry(m.get(j, k))).collect()).collect()
}

/// Serializes `pair` to JSON, using the first-row layout when the pair
/// carries Toeplitz rows.
pub fn pair_to_json(pair: &DefinitePair) -> Result<String> {
    if !pair.h.is_finite() || !pair.s.is_finite() {
        return Err(Error::ValidationError("pair has non-finite entries".into()));
    }
    let file = match &pair.toeplitz_rows {
        Some((h_row, s_row)) => PairFile {
            n: pair.n(),
            toeplitz: true,
            first_row_h: Some(h_row.iter().copied().map(entry).collect()),
            first_row_s: Some(s_row.iter().copied().map(entry).collect()),
            h: None,
            s: None,
            provenance: pair.provenance,
            meta: pair.meta.clone(),
        },
        None => PairFile {
            n: pair.n(),
            toeplitz: false,
            first_row_h: None,
            first_row_s: None,
            h: Some(full_rows(&pair.h)),
            s: Some(full_rows(&pair.s)),
            provenance: pair.provenance,
            meta: pair.meta.clone(),
        },
    };
    serde_json::to_string(&file).map_err(|e| Error::Io(e.to_string()))
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn missing(text: &str, field: &str) -> Error {
    Error::ParseError { offset: text.len(), message: format!("missing field `{field}`") }
}

fn check_row(name: &str, row: &[Entry], n: usize) -> Result<Vec<C64>> {
    if row.len() != n {
        return Err(Error::ValidationError(format!("{name} has {} entries, expected n = {n}", row.len())));
    }
    if row[0][1] != 0.0 {
        return Err(Error::ValidationError(format!("{name}[0] has imaginary part {}", row[0][1])));
    }
    if row.iter().any(|e| !e[0].is_finite() || !e[1].is_finite()) {
        return Err(Error::ValidationError(format!("{name} has non-finite entries")));
    }
    Ok(row.iter().map(complex).collect())
}

fn check_full(name: &str, rows: &[Vec<Entry>], n: usize) -> Result<HermitianMatrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::ValidationError(format!("{name} is not {n}x{n}")));
    }
    let m = CMatrix::from_fn(n, n, |j, k| complex(&rows[j][k]));
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::ValidationError(format!("{name} has non-finite entries")));
    }
    for j in 0..n {
        if m[(j, j)].im != 0.0 {
            return Err(Error::ValidationError(format!("{name}[{j}][{j}] is not real")));
        }
    }
    HermitianMatrix::try_new(m, 1e-12).map_err(|e| Error::ValidationError(format!("{name}: {e}")))
}

/// Parses a pair document. Malformed JSON and missing fields give
/// `ParseError`; well-formed but inconsistent content gives
/// `ValidationError`.
pub fn pair_from_json(text: &str) -> Result<DefinitePair> {
    let file: PairFile = serde_json::from_str(text).map_err(|e| Error::ParseError {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let n = file.n;
    if n == 0 {
        return Err(Error::ValidationError("n must be at least 1".into()));
    }
    let mut pair = if file.toeplitz {
        let h_row = check_row("first_row_H", file.first_row_h.as_deref().ok_or_else(|| missing(text, "first_row_H"))?, n)?;
        let s_row = check_row("first_row_S", file.first_row_s.as_deref().ok_or_else(|| missing(text, "first_row_S"))?, n)?;
        let pair = DefinitePair::from_toeplitz_rows(h_row, s_row, file.provenance)?;
        // Full matrices alongside the rows must agree with the imputation.
        for (name, full, imputed) in [("H", &file.h, &pair.h), ("S", &file.s, &pair.s)] {
            if let Some(rows) = full {
                let m = check_full(name, rows, n)?;
                if m != *imputed {
                    return Err(Error::ValidationError(format!("{name} disagrees with first_row_{name}")));
                }
            }
        }
        pair
    } else {
        if file.first_row_h.is_some() || file.first_row_s.is_some() {
            return Err(Error::ValidationError("first rows given but toeplitz is false".into()));
        }
        let h = check_full("H", file.h.as_deref().ok_or_else(|| missing(text, "H"))?, n)?;
        let s = check_full("S", file.s.as_deref().ok_or_else(|| missing(text, "S"))?, n)?;
        DefinitePair::new(h, s, file.provenance)?
    };
    pair.meta = file.meta;
    Ok(pair)
}

pub fn save_pair(pair: &DefinitePair, path: &Path) -> Result<()> {
    std::fs::write(path, pair_to_json(pair)?)?;
    Ok(())
}

pub fn load_pair(path: &Path) -> Result<DefinitePair> {
    pair_from_json(&std::fs::read_to_string(path)?)
}

/// Writes the projected pair of `instance`.
pub fn cache_pair(instance: &QsdInstance, path: &Path) -> Result<()> {
    save_pair(&instance.pair, path)
}
