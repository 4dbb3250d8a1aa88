//! Finite-dimensional operators and matrix-valued propagator kernels.
//!
//! An operator is either a dense complex matrix or a diagonal spectral
//! symbol. The kernel `φ_j(τ, G)` is applied along two routes:
//!
//! - eigendecomposition, mapping the scalar kernel over the spectrum
//!   (`V · diag(φ_j(τ, g_i)) · V⁻¹`), and
//! - direct summation of the operator power series
//!   `τ^j Σ_m (τ^N G)^m / (Nm+j)!`, which needs no diagonalizability and
//!   serves as the method-independent reference.
//!
//! Defective or badly conditioned matrices are routed to the series
//! automatically.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Inverse, OperationNorm};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::roots::CoefficientTable;
use crate::series::{phi_kernel, KernelArgs, SeriesParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigendecompositions with a worse eigenvector condition estimate than this
/// are rejected in favour of the series route.
pub const CONDITION_LIMIT: f64 = 1e8;

/// A finite-dimensional realization of the evolution operator.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearOperator {
    /// Square complex matrix.
    Dense(Array2<Complex64>),
    /// Diagonal spectral symbol; entry i is the eigenvalue of mode i.
    Diagonal(Array1<Complex64>),
}

impl LinearOperator {
    pub fn dense(matrix: Array2<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "dense operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch("operator dimension is zero".into()));
        }
        Ok(LinearOperator::Dense(matrix))
    }

    pub fn diagonal(symbol: Array1<Complex64>) -> Result<Self> {
        if symbol.is_empty() {
            return Err(Error::DimensionMismatch("operator dimension is zero".into()));
        }
        Ok(LinearOperator::Diagonal(symbol))
    }

    pub fn dimension(&self) -> usize {
        match self {
            LinearOperator::Dense(m) => m.nrows(),
            LinearOperator::Diagonal(d) => d.len(),
        }
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        match self {
            LinearOperator::Dense(m) => m.clone(),
            LinearOperator::Diagonal(d) => Array2::from_diag(d),
        }
    }

    /// Apply the operator to a vector.
    pub fn apply(&self, v: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch(format!(
                "operator dimension {} vs vector length {}",
                self.dimension(),
                v.len()
            )));
        }
        Ok(match self {
            LinearOperator::Dense(m) => m.dot(v),
            LinearOperator::Diagonal(d) => d * v,
        })
    }

    /// Largest entry modulus (max norm of the dense representation).
    pub fn max_norm(&self) -> f64 {
        match self {
            LinearOperator::Dense(m) => max_norm(m),
            LinearOperator::Diagonal(d) => d.iter().map(|x| x.norm()).fold(0.0, f64::max),
        }
    }
}

/// Spectral data of an operator: `G = V · diag(values) · V⁻¹`.
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    pub values: Array1<Complex64>,
    pub vectors: Array2<Complex64>,
    pub inverse_vectors: Array2<Complex64>,
    /// Condition estimate `‖V‖₁ · ‖V⁻¹‖₁` of the eigenvector matrix.
    pub condition: f64,
}

/// Full complex eigendecomposition. Diagonal operators are returned as-is
/// with identity eigenvectors; dense ones go through LAPACK.
///
/// A condition estimate above [`CONDITION_LIMIT`] (or an outright singular
/// eigenvector matrix, as for defective inputs) is rejected — callers should
/// use [`series_kernel_matrix`] for such operators.
pub fn eigendecompose(operator: &LinearOperator) -> Result<Eigendecomposition> {
    let matrix = match operator {
        LinearOperator::Diagonal(d) => {
            let eye = Array2::eye(d.len());
            return Ok(Eigendecomposition {
                values: d.clone(),
                vectors: eye.clone(),
                inverse_vectors: eye,
                condition: 1.0,
            });
        }
        LinearOperator::Dense(m) => m,
    };
    let (values, vectors) = matrix
        .eig()
        .map_err(|e| Error::Lapack(format!("eig: {e}")))?;
    let inverse_vectors = vectors.inv().map_err(|_| Error::IllConditioned {
        condition: f64::INFINITY,
        limit: CONDITION_LIMIT,
    })?;
    let condition = vectors.opnorm_one().unwrap_or(f64::INFINITY)
        * inverse_vectors.opnorm_one().unwrap_or(f64::INFINITY);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            condition,
            limit: CONDITION_LIMIT,
        });
    }
    Ok(Eigendecomposition {
        values,
        vectors,
        inverse_vectors,
        condition,
    })
}

/// Evaluate `φ_j(τ, G)` as a d×d matrix.
///
/// Diagonal operators map the scalar kernel over the symbol; dense ones go
/// through the eigendecomposition, falling back to the power series when the
/// eigenvector matrix is too badly conditioned.
pub fn apply_kernel_matrix(
    operator: &LinearOperator,
    tau: Complex64,
    params: &SeriesParams,
    coeffs: &CoefficientTable,
) -> Result<Array2<Complex64>> {
    params.validate()?;
    if coeffs.order() != params.order {
        return Err(Error::OrderMismatch {
            table: coeffs.order(),
            expected: params.order,
        });
    }
    let d = operator.dimension();
    // φ_j(0, g) = δ_{j,0}; return the exact limit rather than a reassembled one.
    if tau == ZERO {
        return Ok(if params.residue == 0 {
            Array2::eye(d)
        } else {
            Array2::zeros((d, d))
        });
    }
    match operator {
        LinearOperator::Diagonal(symbol) => {
            let mut result = Array2::zeros((d, d));
            for (i, &g) in symbol.iter().enumerate() {
                result[[i, i]] = phi_kernel(KernelArgs { tau, g }, params, coeffs)?;
            }
            Ok(result)
        }
        LinearOperator::Dense(_) => match eigendecompose(operator) {
            Ok(eigen) => {
                let mut scaled = eigen.vectors.clone();
                for (i, &g) in eigen.values.iter().enumerate() {
                    let phi = phi_kernel(KernelArgs { tau, g }, params, coeffs)?;
                    scaled.column_mut(i).mapv_inplace(|x| x * phi);
                }
                Ok(scaled.dot(&eigen.inverse_vectors))
            }
            Err(Error::IllConditioned { condition, .. }) => {
                log::warn!(
                    "eigenvector condition {condition:.3e} exceeds {CONDITION_LIMIT:.1e}; \
                     falling back to the series kernel"
                );
                series_kernel_matrix(operator, tau, params)
            }
            Err(e) => Err(e),
        },
    }
}

/// Evaluate `φ_j(τ, G)` by direct matrix power series,
/// `τ^j Σ_m (τ^N G)^m / (Nm+j)!`.
///
/// Valid for every square matrix, including defective and nilpotent ones;
/// truncation follows the scalar stopping rule applied to the term max-norm.
pub fn series_kernel_matrix(
    operator: &LinearOperator,
    tau: Complex64,
    params: &SeriesParams,
) -> Result<Array2<Complex64>> {
    params.validate()?;
    let n = params.order;
    let j = params.residue;
    let d = operator.dimension();
    let scaled: Array2<Complex64> = operator.to_dense() * tau.powu(n as u32);

    let mut term: Array2<Complex64> = Array2::eye(d) * crate::series::power_over_factorial(tau, j);
    let mut sum: Array2<Complex64> = Array2::zeros((d, d));
    let mut small_run = 0;
    for m in 0..params.max_terms {
        sum += &term;
        if max_norm(&term) <= params.tolerance * (1.0 + max_norm(&sum)) {
            small_run += 1;
            if small_run >= 3 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
        let k = n * m + j;
        let mut denom = 1.0;
        for i in 1..=n {
            denom *= (k + i) as f64;
        }
        term = term.dot(&scaled);
        term.mapv_inplace(|x| x / denom);
    }
    Err(Error::MatrixNonConvergence {
        terms: params.max_terms,
        last_term: max_norm(&term),
        partial_norm: max_norm(&sum),
    })
}

/// Largest entry modulus.
pub fn max_norm(matrix: &Array2<Complex64>) -> f64 {
    matrix.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Largest entry modulus of a vector.
pub fn max_norm_vec(vector: &Array1<Complex64>) -> f64 {
    vector.iter().map(|x| x.norm()).fold(0.0, f64::max)
}
