//! File formats.
//!
//! Matrices are JSON objects `{"rows": R, "cols": C, "data": [[re, im], …]}`
//! with `data` in row-major order; every entry is a two-element array even
//! when its imaginary part is zero. Vectors use the same layout as `n × 1`
//! matrices. Scan tables are CSV with 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::distinguishability::ScanResult;
use crate::error::{BunchError, Result};
use crate::matcore::{CVector, ComplexMatrix};

#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

pub fn matrix_to_value(m: &ComplexMatrix) -> serde_json::Value {
    let file = MatrixFile {
        rows: m.rows(),
        cols: m.cols(),
        data: m.to_row_major().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_value(file).expect("plain data serializes")
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&matrix_to_value(m)).expect("plain data serializes")
}

pub fn matrix_from_value(value: serde_json::Value) -> Result<ComplexMatrix> {
    let file: MatrixFile = serde_json::from_value(value)
        .map_err(|e| BunchError::Parse(format!("matrix JSON: {e}")))?;
    let data: Vec<Complex64> = file.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    ComplexMatrix::from_row_major(file.rows, file.cols, &data)
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| BunchError::Parse(format!("matrix JSON: {e}")))?;
    matrix_from_value(value)
}

pub fn vector_to_matrix(v: &CVector) -> ComplexMatrix {
    ComplexMatrix::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path).map_err(|source| BunchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    matrix_from_json(&text)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source| BunchError::Io { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    write_atomic(path, &(matrix_to_json(m) + "\n"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| BunchError::Parse(format!("serializing {}: {e}", path.display())))?;
    write_atomic(path, &(text + "\n"))
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header, one row per grid point, then `#argmax_epsilon=<value>`.
pub fn scan_to_csv(scan: &ScanResult) -> String {
    let mut out = String::from("epsilon,p_bunch,ratio,indistinguishability\n");
    for r in &scan.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(r.epsilon),
            fmt17(r.p_bunch),
            fmt17(r.ratio),
            fmt17(r.indistinguishability)
        ));
    }
    out.push_str(&format!("#argmax_epsilon={}\n", fmt17(scan.argmax_epsilon())));
    out
}

pub(crate) fn serialize_cvector<S: Serializer>(v: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
    pairs.serialize(s)
}

pub(crate) fn serialize_opt_cvector<S: Serializer>(
    v: &Option<CVector>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => serialize_cvector(v, s),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_layout() {
        let m = ComplexMatrix::from_rows(&[vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, -2.0)]])
            .unwrap();
        let v = matrix_to_value(&m);
        assert_eq!(v["rows"], 1);
        assert_eq!(v["cols"], 2);
        assert_eq!(v["data"][0], serde_json::json!([1.0, 0.0]));
        assert_eq!(v["data"][1], serde_json::json!([0.5, -2.0]));
        assert_eq!(matrix_from_value(v).unwrap(), m);
    }

    #[test]
    fn malformed_json_rejected() {
        assert!(matches!(matrix_from_json("{\"rows\": 2}"), Err(BunchError::Parse(_))));
        let short = r#"{"rows": 2, "cols": 2, "data": [[1, 0]]}"#;
        assert!(matches!(matrix_from_json(short), Err(BunchError::Dimension(_))));
        assert!(matches!(matrix_from_json("not json"), Err(BunchError::Parse(_))));
    }

    #[test]
    fn atomic_write_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let m = ComplexMatrix::identity(3);
        write_matrix(&path, &m).unwrap();
        assert_eq!(read_matrix(&path).unwrap(), m);
        assert!(matches!(
            read_matrix(&dir.path().join("missing.json")),
            Err(BunchError::Io { .. })
        ));
    }
}
