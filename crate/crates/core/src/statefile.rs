//! JSON file format for states and witnesses.
//!
//! ```json
//! { "kind": "state", "dims": [2, 2], "matrix": [[[0.5, 0.0], [0.0, 0.0], ...], ...] }
//! ```
//!
//! `matrix` is row-major, `D × D`, each entry a `[re, im]` pair. `kind` is
//! optional (`"state"` or `"witness"`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use crate::tensor::{ComplexMatrix, DensityMatrix, HermitianOperator};
use crate::witness::Witness;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// Nested `[re, im]` rows for any matrix.
pub fn encode_matrix<T: Real>(m: &ComplexMatrix<T>) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|r| {
            (0..m.cols())
                .map(|c| [m[(r, c)].re.as_f64(), m[(r, c)].im.as_f64()])
                .collect()
        })
        .collect()
}

pub fn decode_matrix<T: Real>(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix<T>> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != n_cols) {
        return Err(Error::Shape(format!(
            "row {r} has {} entries, expected {n_cols}",
            row.len()
        )));
    }
    let data = rows
        .iter()
        .flatten()
        .map(|[re, im]| C::new(T::lit(*re), T::lit(*im)))
        .collect();
    ComplexMatrix::new(n_rows, n_cols, data)
}

impl StateFile {
    pub fn from_matrix<T: Real>(kind: Option<&str>, dims: &[usize], m: &ComplexMatrix<T>) -> Self {
        Self {
            kind: kind.map(str::to_string),
            dims: dims.to_vec(),
            matrix: encode_matrix(m),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Argument(format!("malformed state file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state file serializes")
    }

    fn expect_kind(&self, wanted: &str) -> Result<()> {
        match self.kind.as_deref() {
            None => Ok(()),
            Some(k) if k == wanted => Ok(()),
            Some(k) => Err(Error::Argument(format!(
                "file kind is '{k}', expected '{wanted}'"
            ))),
        }
    }

    pub fn to_density<T: Real>(&self) -> Result<DensityMatrix<T>> {
        self.expect_kind("state")?;
        DensityMatrix::new(self.dims.clone(), decode_matrix(&self.matrix)?)
    }

    pub fn to_witness<T: Real>(&self) -> Result<Witness<T>> {
        self.expect_kind("witness")?;
        Witness::new(HermitianOperator::new(
            self.dims.clone(),
            decode_matrix(&self.matrix)?,
        )?)
    }
}
