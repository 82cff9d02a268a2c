//! Operator-spec files: JSON documents describing a homogeneous operator by
//! its coefficient maps, with rationals serialized as `"p/q"` or `"p"`.
//!
//! ```json
//! {
//!   "n": 2, "k": 1, "dimV": 1, "dimE": 2,
//!   "terms": [
//!     { "alpha": [1, 0], "matrix": [["1"], ["0"]] },
//!     { "alpha": [0, 1], "matrix": [["0"], ["1"]] }
//!   ]
//! }
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{format_rational, parse_rational, ExactMatrix};
use crate::multiindex::MultiIndex;
use crate::operator::HomOperator;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("JSON parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("term {index}: {message}")]
    Term { index: usize, message: String },
    #[error("invalid operator: {0}")]
    Operator(#[from] crate::operator::OperatorError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSpec {
    pub alpha: Vec<u32>,
    /// Row-major `dimE x dimV` matrix with entries `"p/q"` or `"p"`.
    pub matrix: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub n: usize,
    pub k: u32,
    #[serde(rename = "dimV")]
    pub dim_v: usize,
    #[serde(rename = "dimE")]
    pub dim_e: usize,
    pub terms: Vec<TermSpec>,
}

impl OperatorSpec {
    pub fn from_json(json: &str) -> Result<Self, SpecError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("operator spec serializes")
    }

    pub fn to_operator(&self) -> Result<HomOperator, SpecError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (index, t) in self.terms.iter().enumerate() {
            if t.matrix.len() != self.dim_e || t.matrix.iter().any(|r| r.len() != self.dim_v) {
                return Err(SpecError::Term {
                    index,
                    message: format!(
                        "matrix must be {}x{} (rows of equal length)",
                        self.dim_e, self.dim_v
                    ),
                });
            }
            let mut m = ExactMatrix::zeros(self.dim_e, self.dim_v);
            for (r, row) in t.matrix.iter().enumerate() {
                for (c, s) in row.iter().enumerate() {
                    m[(r, c)] = parse_rational(s).map_err(|message| SpecError::Term {
                        index,
                        message: format!("entry ({r},{c}): {message}"),
                    })?;
                }
            }
            terms.push((MultiIndex::new(t.alpha.clone()), m));
        }
        Ok(HomOperator::new(
            self.n, self.k, self.dim_v, self.dim_e, terms,
        )?)
    }

    pub fn from_operator(op: &HomOperator) -> Self {
        let terms = op
            .terms()
            .iter()
            .map(|(alpha, m)| TermSpec {
                alpha: alpha.entries().to_vec(),
                matrix: (0..m.rows())
                    .map(|r| (0..m.cols()).map(|c| format_rational(&m[(r, c)])).collect())
                    .collect(),
            })
            .collect();
        Self {
            n: op.n(),
            k: op.order(),
            dim_v: op.dim_v(),
            dim_e: op.dim_e(),
            terms,
        }
    }
}

/// Reads an operator from a JSON file.
pub fn read_operator(path: &std::path::Path) -> Result<HomOperator, SpecError> {
    let json = std::fs::read_to_string(path)?;
    parse_operator(&json)
}

/// Parses an operator from JSON text.
pub fn parse_operator(json: &str) -> Result<HomOperator, SpecError> {
    OperatorSpec::from_json(json)?.to_operator()
}

/// Serializes an operator to pretty JSON.
pub fn operator_to_json(op: &HomOperator) -> String {
    OperatorSpec::from_operator(op).to_json()
}

/// Direct-sum block description: projections and block operators, used by
/// the direct-sum decider. The block operator lives on coordinates of the
/// projection's range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectSumBlockSpec {
    /// `n x n` projection on the base space, row-major rational strings.
    pub p: Vec<Vec<String>>,
    /// `dimV x dimV` projection on the source space.
    pub q: Vec<Vec<String>>,
    /// Elliptic block operator in range coordinates.
    pub a: OperatorSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectSumSpecFile {
    pub blocks: Vec<DirectSumBlockSpec>,
}

pub fn parse_matrix(rows: &[Vec<String>]) -> Result<ExactMatrix, String> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err("ragged matrix".to_string());
    }
    let mut m = ExactMatrix::zeros(r, c);
    for (i, row) in rows.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            m[(i, j)] = parse_rational(s)?;
        }
    }
    Ok(m)
}

pub fn matrix_to_strings(m: &ExactMatrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| format_rational(&m[(r, c)])).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::stock;

    #[test]
    fn round_trip_gradient() {
        let grad = stock::gradient(3);
        let json = operator_to_json(&grad);
        let back = parse_operator(&json).unwrap();
        assert_eq!(back, grad);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(parse_operator("{").is_err());
        let bad_entry = r#"{"n":1,"k":1,"dimV":1,"dimE":1,
            "terms":[{"alpha":[1],"matrix":[["1/0"]]}]}"#;
        let err = parse_operator(bad_entry).unwrap_err();
        assert!(matches!(err, SpecError::Term { index: 0, .. }));
        let bad_shape = r#"{"n":1,"k":1,"dimV":2,"dimE":1,
            "terms":[{"alpha":[1],"matrix":[["1"]]}]}"#;
        assert!(parse_operator(bad_shape).is_err());
        let bad_order = r#"{"n":2,"k":2,"dimV":1,"dimE":1,
            "terms":[{"alpha":[1,0],"matrix":[["1"]]}]}"#;
        assert!(parse_operator(bad_order).is_err());
    }

    #[test]
    fn rationals_accept_both_forms() {
        let spec = r#"{"n":1,"k":1,"dimV":1,"dimE":1,
            "terms":[{"alpha":[1],"matrix":[["-3/6"]]}]}"#;
        let op = parse_operator(spec).unwrap();
        let s = op.symbol(&[crate::exact::rat_int(2)]);
        assert_eq!(s[(0, 0)], crate::exact::rat_int(-1));
    }
}
