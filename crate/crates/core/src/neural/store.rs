//! Versioned text container for named parameter tensors.
//!
//! ```text
//! chordseq-tensors v1
//! meta <key> <value...>        (zero or more)
//! tensor <name> <rows> <cols>
//! <cols values per line, rows lines>
//! ...
//! ```
//!
//! Values are written with Rust's shortest round-trip float formatting, so a
//! save/load cycle reproduces every f64 bit for bit.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct TensorFile {
    pub meta: Vec<(String, String)>,
    pub tensors: Vec<(String, Matrix)>,
}

impl TensorFile {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn take_tensor(&mut self, name: &str) -> Option<Matrix> {
        let idx = self.tensors.iter().position(|(n, _)| n == name)?;
        Some(self.tensors.remove(idx).1)
    }
}

pub fn save_tensors(
    path: &Path,
    meta: &[(String, String)],
    tensors: &[(String, &Matrix)],
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "chordseq-tensors v1")?;
    for (k, v) in meta {
        writeln!(out, "meta {k} {v}")?;
    }
    for (name, m) in tensors {
        writeln!(out, "tensor {name} {} {}", m.rows(), m.cols())?;
        for r in 0..m.rows() {
            let row = m
                .row(r)
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            writeln!(out, "{row}")?;
        }
    }
    Ok(())
}

pub fn load_tensors(path: &Path) -> Result<TensorFile> {
    let file = std::fs::File::open(path)?;
    let bad = |line: usize, reason: String| Error::DataFormat {
        file: path.to_path_buf(),
        line,
        reason,
    };

    let mut lines = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .enumerate()
        .peekable();

    match lines.next() {
        Some((_, header)) if header.trim() == "chordseq-tensors v1" => {}
        Some((_, header)) => return Err(bad(1, format!("unrecognized header {header:?}"))),
        None => return Err(bad(1, "empty file".into())),
    }

    let mut out = TensorFile::default();
    while let Some((i, line)) = lines.next() {
        let line = line.trim().to_string();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("meta ") {
            match rest.split_once(' ') {
                Some((k, v)) => out.meta.push((k.to_string(), v.to_string())),
                None => out.meta.push((rest.to_string(), String::new())),
            }
            continue;
        }
        let Some(rest) = line.strip_prefix("tensor ") else {
            return Err(bad(i + 1, format!("expected tensor header, found {line:?}")));
        };
        let fields: Vec<&str> = rest.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(bad(i + 1, "tensor header needs <name> <rows> <cols>".into()));
        }
        let name = fields[0].to_string();
        let rows: usize = fields[1]
            .parse()
            .map_err(|_| bad(i + 1, format!("bad row count {:?}", fields[1])))?;
        let cols: usize = fields[2]
            .parse()
            .map_err(|_| bad(i + 1, format!("bad col count {:?}", fields[2])))?;

        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            let (j, row_line) = lines
                .next()
                .ok_or_else(|| bad(i + 1, format!("tensor {name} is truncated")))?;
            let values: Vec<f64> = row_line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(j + 1, format!("bad number: {e}")))?;
            if values.len() != cols {
                return Err(bad(j + 1, format!("expected {cols} values, found {}", values.len())));
            }
            m.data_mut()[r * cols..(r + 1) * cols].copy_from_slice(&values);
        }
        out.tensors.push((name, m));
    }
    Ok(out)
}
