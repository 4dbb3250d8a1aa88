//! The sparse exponential series and the scalar propagator kernel.
//!
//! For order N and residue j in 0..N the series keeps every N-th power of the
//! exponential series,
//!
//! ```text
//! y_j(z) = Σ_{k = j, N+j, 2N+j, ..} z^k / k!,
//! ```
//!
//! and is also a linear combination of N ordinary exponentials along the
//! roots of unity, `y_j(z) = Σ_n C_{n,j} exp(λ_n z)` (N = 2 gives cosh and
//! sinh). The propagator kernel
//!
//! ```text
//! φ_j(τ, g) = Σ_{m ≥ 0} g^m τ^{Nm+j} / (Nm+j)!
//! ```
//!
//! is entire in both arguments; evaluated at an operator eigenvalue g it
//! advances the j-th initial vector of an order-N problem by time τ. Small
//! `|g·τ^N|` is summed directly, large values go through the exponential
//! combination with an N-th root of g — any root branch gives the same value
//! because the combination cycles through all of them.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result};
use crate::roots::{roots_of_unity, solve_coeffs, CoefficientTable};

/// Relative term tolerance used when none is specified.
pub const DEFAULT_TOLERANCE: f64 = 1e-15;
/// Term cap used when none is specified.
pub const DEFAULT_MAX_TERMS: usize = 1000;
/// Kernel evaluation switches from direct summation to the exponential
/// combination once `|g·τ^N|` exceeds this.
pub const SERIES_CLOSED_SWITCH: f64 = 1.0;
/// Largest exponent real part that `exp` can represent in f64.
pub const MAX_EXP_ARG: f64 = 709.782712893384;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Order, residue, and truncation controls for series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesParams {
    pub order: usize,
    pub residue: usize,
    pub tolerance: f64,
    pub max_terms: usize,
}

impl SeriesParams {
    /// Parameters with the default tolerance and term cap.
    pub fn new(order: usize, residue: usize) -> Result<Self> {
        let params = SeriesParams {
            order,
            residue,
            tolerance: DEFAULT_TOLERANCE,
            max_terms: DEFAULT_MAX_TERMS,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        self.tolerance = tolerance;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Result<Self> {
        self.max_terms = max_terms;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidOrder);
        }
        if self.residue >= self.order {
            return Err(Error::InvalidResidue {
                residue: self.residue,
                order: self.order,
            });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_terms == 0 {
            return Err(Error::InvalidArgument(
                "max_terms must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Arguments of the propagator kernel: elapsed time τ and scalar symbol g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelArgs {
    pub tau: Complex64,
    pub g: Complex64,
}

/// Which evaluation route produced a kernel or series value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPath {
    Series,
    Closed,
}

impl fmt::Display for EvalPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalPath::Series => write!(f, "series"),
            EvalPath::Closed => write!(f, "closed"),
        }
    }
}

/// Compensated (Kahan) accumulator; the series sums stay accurate even when
/// individual terms dwarf the final value.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: Complex64,
    carry: Complex64,
}

impl KahanSum {
    fn add(&mut self, term: Complex64) {
        let y = term - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> Complex64 {
        self.sum
    }
}

/// `z^j / j!` built multiplicatively; well-defined as 1 for z = 0, j = 0.
pub(crate) fn power_over_factorial(z: Complex64, j: usize) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    for i in 1..=j {
        term *= z / i as f64;
    }
    term
}

/// Shared truncated-summation driver: first term plus a per-step ratio
/// producing `term_{m+1} = term_m · numerator / Π_{i=1..N}(Nm + j + i)`.
///
/// Stops once three consecutive terms fall below the relative tolerance.
fn sum_sparse_terms(
    first: Complex64,
    numerator: Complex64,
    params: &SeriesParams,
) -> Result<Complex64> {
    let n = params.order;
    let j = params.residue;
    let mut term = first;
    let mut acc = KahanSum::default();
    let mut small_run = 0;
    for m in 0..params.max_terms {
        acc.add(term);
        if term.norm() <= params.tolerance * (1.0 + acc.value().norm()) {
            small_run += 1;
            if small_run >= 3 {
                return Ok(acc.value());
            }
        } else {
            small_run = 0;
        }
        let k = n * m + j;
        let mut ratio = numerator;
        for i in 1..=n {
            ratio /= (k + i) as f64;
        }
        term *= ratio;
    }
    Err(Error::NonConvergence {
        terms: params.max_terms,
        last_term: term.norm(),
        partial: acc.value(),
    })
}

/// Evaluate `y_j(z)` by truncated summation of the sparse series.
pub fn yj_series(z: Complex64, params: &SeriesParams) -> Result<Complex64> {
    params.validate()?;
    let first = power_over_factorial(z, params.residue);
    sum_sparse_terms(first, z.powu(params.order as u32), params)
}

/// Evaluate `y_j(z) = Σ_n C_{n,j} exp(λ_n z)` from a coefficient table.
pub fn yj_closed(
    z: Complex64,
    params: &SeriesParams,
    coeffs: &CoefficientTable,
) -> Result<Complex64> {
    params.validate()?;
    if coeffs.order() != params.order {
        return Err(Error::OrderMismatch {
            table: coeffs.order(),
            expected: params.order,
        });
    }
    let roots = roots_of_unity(params.order)?;
    let mut acc = KahanSum::default();
    for (c, lam) in coeffs
        .residue_coeffs(params.residue)
        .iter()
        .zip(roots.roots())
    {
        acc.add(c * (lam * z).exp());
    }
    Ok(acc.value())
}

/// The d-th derivative of `y_j` at z.
///
/// Differentiation shifts the residue cyclically (`y_j' = y_{j-1}`, with
/// `y_0' = y_{N-1}`), so the value is a single closed-form evaluation at the
/// shifted residue; d = N returns `y_j` itself.
pub fn yj_derivative(z: Complex64, params: &SeriesParams, d: usize) -> Result<Complex64> {
    params.validate()?;
    let order = params.order as i64;
    let shifted = (params.residue as i64 - d as i64).rem_euclid(order) as usize;
    let coeffs = solve_coeffs(params.order)?;
    let shifted_params = SeriesParams {
        residue: shifted,
        ..*params
    };
    yj_closed(z, &shifted_params, &coeffs)
}

/// Hybrid evaluation of `y_j(z)`: direct summation for `|z|^N ≤ 1`, the
/// exponential combination otherwise. Reports which route ran.
pub fn yj_auto(
    z: Complex64,
    params: &SeriesParams,
    coeffs: &CoefficientTable,
) -> Result<(Complex64, EvalPath)> {
    params.validate()?;
    if coeffs.order() != params.order {
        return Err(Error::OrderMismatch {
            table: coeffs.order(),
            expected: params.order,
        });
    }
    if z.norm().powi(params.order as i32) <= SERIES_CLOSED_SWITCH {
        Ok((yj_series(z, params)?, EvalPath::Series))
    } else {
        Ok((yj_closed(z, params, coeffs)?, EvalPath::Closed))
    }
}

/// Evaluate the kernel `φ_j(τ, g)` with the default series/closed switch.
pub fn phi_kernel(
    args: KernelArgs,
    params: &SeriesParams,
    coeffs: &CoefficientTable,
) -> Result<Complex64> {
    phi_kernel_detailed(args, params, coeffs).map(|(value, _)| value)
}

/// Like [`phi_kernel`] but also reports the route taken.
pub fn phi_kernel_detailed(
    args: KernelArgs,
    params: &SeriesParams,
    coeffs: &CoefficientTable,
) -> Result<(Complex64, EvalPath)> {
    phi_kernel_with_switch(args, params, coeffs, SERIES_CLOSED_SWITCH)
}

/// Kernel evaluation with an explicit series/closed switch threshold on
/// `|g·τ^N|`.
pub fn phi_kernel_with_switch(
    args: KernelArgs,
    params: &SeriesParams,
    coeffs: &CoefficientTable,
    switch: f64,
) -> Result<(Complex64, EvalPath)> {
    params.validate()?;
    if coeffs.order() != params.order {
        return Err(Error::OrderMismatch {
            table: coeffs.order(),
            expected: params.order,
        });
    }
    let drive = args.g.norm() * args.tau.norm().powi(params.order as i32);
    if args.g == ZERO || drive <= switch {
        return Ok((phi_series(args, params)?, EvalPath::Series));
    }
    let value = phi_closed_branch(args, params, coeffs, 0)?;
    #[cfg(debug_assertions)]
    if params.order > 1 && value.is_finite() {
        if let Ok(other) = phi_closed_branch(args, params, coeffs, 1) {
            debug_assert!(
                (value - other).norm() <= 1e-11 * (1.0 + value.norm()),
                "kernel branches disagree: {value} vs {other} at tau = {}, g = {}",
                args.tau,
                args.g
            );
        }
    }
    Ok((value, EvalPath::Closed))
}

/// Direct summation of `φ_j(τ, g) = Σ_m g^m τ^{Nm+j} / (Nm+j)!`.
///
/// Only integer powers of g appear, so this route is defined for every g
/// including 0 and singular operators.
pub fn phi_series(args: KernelArgs, params: &SeriesParams) -> Result<Complex64> {
    params.validate()?;
    let first = power_over_factorial(args.tau, params.residue);
    sum_sparse_terms(first, args.g * args.tau.powu(params.order as u32), params)
}

/// Closed-form kernel using the root branch `g^{1/N}·e^{2πik/N}`:
///
/// ```text
/// φ_j(τ, g) = w^{-j} Σ_n C_{n,j} exp(λ_n τ w),   w the chosen N-th root of g.
/// ```
///
/// The value is independent of `branch` because the sum cycles through every
/// root of g. Requires g ≠ 0 for j ≥ 1 (the prefactor is singular there; use
/// [`phi_series`] instead).
pub fn phi_closed_branch(
    args: KernelArgs,
    params: &SeriesParams,
    coeffs: &CoefficientTable,
    branch: usize,
) -> Result<Complex64> {
    params.validate()?;
    if coeffs.order() != params.order {
        return Err(Error::OrderMismatch {
            table: coeffs.order(),
            expected: params.order,
        });
    }
    let order = params.order;
    let j = params.residue;
    if branch >= order {
        return Err(Error::InvalidArgument(format!(
            "root branch {branch} out of range for order {order}"
        )));
    }
    if args.g == ZERO && j > 0 {
        return Err(Error::ClosedFormSingular { residue: j });
    }
    // Principal N-th root rotated to the requested branch; arg(g) ∈ (-π, π].
    let root_mag = args.g.norm().powf(1.0 / order as f64);
    let root_arg = args.g.arg() / order as f64 + TAU * branch as f64 / order as f64;
    let w = Complex64::from_polar(root_mag, root_arg);
    let prefactor = Complex64::from_polar(root_mag.powi(-(j as i32)), -(j as f64) * root_arg);

    let roots = roots_of_unity(order)?;
    let exponents: Vec<Complex64> = roots.roots().iter().map(|lam| lam * args.tau * w).collect();
    if let Some((idx, e)) = exponents
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.re.total_cmp(&b.re))
    {
        if e.re > MAX_EXP_ARG {
            return Err(Error::Overflow {
                branch: idx + 1,
                exponent: e.re,
            });
        }
    }
    let mut acc = KahanSum::default();
    for (c, e) in coeffs.residue_coeffs(j).iter().zip(&exponents) {
        acc.add(c * e.exp());
    }
    Ok(prefactor * acc.value())
}
