//! The JSON problem format and CSV number formatting.
//!
//! A problem file looks like
//!
//! ```json
//! {
//!   "order": 2,
//!   "t0": 0.0,
//!   "operator": { "kind": "diagonal", "dimension": 1, "data": [[4.0, 0.0]] },
//!   "initial": [ [[1.0, 0.0]], [[0.0, 0.0]] ],
//!   "times": [0.0, 1.0]
//! }
//! ```
//!
//! Complex numbers are always two-element `[re, im]` arrays. Dense operator
//! data is row-major with `dimension²` entries; diagonal data has
//! `dimension` entries.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::solver::CauchyProblem;

#[derive(Debug, Clone, Deserialize)]
pub struct OperatorSpec {
    pub kind: String,
    pub dimension: usize,
    pub data: Vec<[f64; 2]>,
}

/// Deserialized problem file: the problem data plus the requested times.
#[derive(Debug, Clone, Deserialize)]
pub struct ProblemFile {
    pub order: usize,
    pub t0: f64,
    pub operator: OperatorSpec,
    pub initial: Vec<Vec<[f64; 2]>>,
    pub times: Vec<f64>,
}

fn to_complex(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

impl ProblemFile {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map_err(|e| Error::InvalidProblem(format!("JSON parse error: {e}")))
    }

    /// Validate the schema and build the solver-side problem.
    pub fn build(&self) -> Result<(CauchyProblem, Vec<f64>)> {
        let d = self.operator.dimension;
        let operator = match self.operator.kind.as_str() {
            "dense" => {
                if self.operator.data.len() != d * d {
                    return Err(Error::InvalidProblem(format!(
                        "operator.data: dense operator of dimension {d} needs {} entries, got {}",
                        d * d,
                        self.operator.data.len()
                    )));
                }
                let matrix = Array2::from_shape_vec(
                    (d, d),
                    self.operator.data.iter().copied().map(to_complex).collect(),
                )
                .map_err(|e| Error::InvalidProblem(format!("operator.data: {e}")))?;
                LinearOperator::dense(matrix)?
            }
            "diagonal" => {
                if self.operator.data.len() != d {
                    return Err(Error::InvalidProblem(format!(
                        "operator.data: diagonal operator of dimension {d} needs {d} entries, got {}",
                        self.operator.data.len()
                    )));
                }
                LinearOperator::diagonal(Array1::from_iter(
                    self.operator.data.iter().copied().map(to_complex),
                ))?
            }
            other => {
                return Err(Error::InvalidProblem(format!(
                    "operator.kind: expected \"dense\" or \"diagonal\", got \"{other}\""
                )));
            }
        };
        if self.initial.len() != self.order {
            return Err(Error::InvalidProblem(format!(
                "initial: order {} needs {} vectors, got {}",
                self.order,
                self.order,
                self.initial.len()
            )));
        }
        let mut initial = Vec::with_capacity(self.order);
        for (i, entries) in self.initial.iter().enumerate() {
            if entries.len() != d {
                return Err(Error::InvalidProblem(format!(
                    "initial[{i}]: expected {d} entries, got {}",
                    entries.len()
                )));
            }
            initial.push(Array1::from_iter(entries.iter().copied().map(to_complex)));
        }
        let problem = CauchyProblem::new(self.order, operator, self.t0, initial)?;
        Ok((problem, self.times.clone()))
    }
}

/// Parse and build in one step.
pub fn parse_problem(json: &str) -> Result<(CauchyProblem, Vec<f64>)> {
    ProblemFile::parse(json)?.build()
}

/// Format a float with 17 significant digits; parsing the result recovers
/// the exact f64, and identical values always print identically.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIAG_PROBLEM: &str = r#"{
        "order": 2,
        "t0": 0.0,
        "operator": { "kind": "diagonal", "dimension": 1, "data": [[4.0, 0.0]] },
        "initial": [ [[1.0, 0.0]], [[0.0, 0.0]] ],
        "times": [0.0, 1.0]
    }"#;

    #[test]
    fn diagonal_problem_round_trips() {
        let (problem, times) = parse_problem(DIAG_PROBLEM).unwrap();
        assert_eq!(problem.order(), 2);
        assert_eq!(problem.dimension(), 1);
        assert_eq!(times, vec![0.0, 1.0]);
        assert_eq!(problem.initial(0)[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn dense_problem_round_trips() {
        let json = r#"{
            "order": 1,
            "t0": 0.5,
            "operator": { "kind": "dense", "dimension": 2,
                          "data": [[0.0, 0.0], [1.0, -1.0], [0.0, 2.0], [0.0, 0.0]] },
            "initial": [ [[1.0, 0.0], [0.0, 0.0]] ],
            "times": [0.5]
        }"#;
        let (problem, _) = parse_problem(json).unwrap();
        assert_eq!(problem.dimension(), 2);
        match problem.operator() {
            LinearOperator::Dense(m) => {
                assert_eq!(m[[0, 1]], Complex64::new(1.0, -1.0));
                assert_eq!(m[[1, 0]], Complex64::new(0.0, 2.0));
            }
            _ => panic!("expected dense operator"),
        }
    }

    #[test]
    fn malformed_json_is_rejected() {
        assert!(matches!(
            parse_problem("{ not json"),
            Err(Error::InvalidProblem(_))
        ));
    }

    #[test]
    fn schema_violations_cite_the_field() {
        let bad_kind = DIAG_PROBLEM.replace("diagonal", "sparse");
        match parse_problem(&bad_kind) {
            Err(Error::InvalidProblem(msg)) => assert!(msg.contains("operator.kind"), "{msg}"),
            other => panic!("expected invalid problem, got {other:?}"),
        }

        let bad_data = DIAG_PROBLEM.replace("[[4.0, 0.0]]", "[[4.0, 0.0], [1.0, 0.0]]");
        match parse_problem(&bad_data) {
            Err(Error::InvalidProblem(msg)) => assert!(msg.contains("operator.data"), "{msg}"),
            other => panic!("expected invalid problem, got {other:?}"),
        }

        let bad_initial = DIAG_PROBLEM.replace("[ [[1.0, 0.0]], [[0.0, 0.0]] ]", "[ [[1.0, 0.0]] ]");
        match parse_problem(&bad_initial) {
            Err(Error::InvalidProblem(msg)) => assert!(msg.contains("initial"), "{msg}"),
            other => panic!("expected invalid problem, got {other:?}"),
        }
    }

    #[test]
    fn csv_floats_round_trip_exactly() {
        for &x in &[
            0.0,
            1.0,
            -0.5,
            1.5430806348152437,
            -3.7621956910836314e10,
            2.2250738585072014e-308,
            f64::MAX,
        ] {
            let printed = csv_float(x);
            let parsed: f64 = printed.parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits(), "{printed}");
        }
    }
}
