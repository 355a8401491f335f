//! JSON matrix files: `{"dim": n, "re": [[...]], "im": [[...]]}`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, HermitianMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &HermitianMatrix) -> Self {
        let n = m.dim();
        let rows = |f: fn(Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| f(m.get(i, j))).collect()).collect()
        };
        Self {
            dim: n,
            re: rows(|z| z.re),
            im: Some(rows(|z| z.im)),
        }
    }

    pub fn to_matrix(&self) -> Result<HermitianMatrix> {
        let n = self.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !shape_ok(&self.re) || self.im.as_ref().is_some_and(|im| !shape_ok(im)) {
            return Err(Error::InvalidInput(format!("matrix entries do not form a {n}x{n} array")));
        }
        let m = CMatrix::from_fn(n, n, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |im| im[i][j]);
            Complex64::new(self.re[i][j], im)
        });
        HermitianMatrix::new(m)
    }
}

pub fn read_matrix(path: &Path) -> Result<HermitianMatrix> {
    let text = std::fs::read_to_string(path)?;
    let file: MatrixFile = serde_json::from_str(&text)?;
    file.to_matrix()
}

pub fn write_matrix(path: &Path, m: &HermitianMatrix) -> Result<()> {
    let text = serde_json::to_string_pretty(&MatrixFile::from_matrix(m))?;
    std::fs::write(path, text)?;
    Ok(())
}
