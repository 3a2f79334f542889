use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::tensor::Tensor;
use crate::{Error, Result};

/// File name used for the attention matrix of encoder layer `layer`.
pub fn attention_file_name(layer: usize) -> String {
    format!("layer{layer}_W.csv")
}

/// Renders a 2-D tensor as comma-separated rows.
///
/// Values use the shortest representation that parses back to the same `f64`.
pub fn matrix_to_csv(m: &Tensor) -> Result<String> {
    if m.shape().len() != 2 {
        return Err(Error::Shape(format!("expected a matrix, got {:?}", m.shape())));
    }
    let mut out = String::new();
    for r in 0..m.rows() {
        for (c, v) in m.row(r).iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            write!(out, "{v}").expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn matrix_from_csv(text: &str) -> Result<Tensor> {
    let mut data = Vec::new();
    let (mut rows, mut cols) = (0, None);
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Parse { line: i + 1, msg: format!("expected {c} columns, found {}", row.len()) })
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    Tensor::new(vec![rows, cols.unwrap_or(0)], data)
}

/// Writes one `layer<i>_W.csv` per matrix into `dir` and returns the paths.
pub fn dump_attention_matrix(dir: &Path, matrices: &[&Tensor]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(matrices.len());
    for (i, m) in matrices.iter().enumerate() {
        let path = dir.join(attention_file_name(i));
        fs::write(&path, matrix_to_csv(m)?)?;
        paths.push(path);
    }
    Ok(paths)
}
