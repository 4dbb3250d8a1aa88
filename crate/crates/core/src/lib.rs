//! Closed-form propagator solvers for arbitrary-order linear initial value
//! problems.
//!
//! An order-N problem `d^N u/dt^N = G u` with initial data `u_0 .. u_{N-1}`
//! is solved by a linear combination of N exponential propagators per initial
//! vector. The building blocks are:
//!
//! - [`roots`]: roots of unity and the coefficient tables `C_{n,j}`,
//! - [`series`]: the sparse exponential series `y_j(z)` and the scalar
//!   propagator kernel `φ_j(τ, g)`,
//! - [`operator`]: finite-dimensional operators and matrix kernels,
//! - [`solver`]: assembly of the full solution plus residual checks,
//! - [`wave`]: the order-N wave equation on a periodic grid,
//! - [`io`]: the JSON problem format and CSV field formatting.

pub mod error;
pub mod fdiff;
pub mod io;
pub mod operator;
pub mod roots;
pub mod series;
pub mod solver;
pub mod wave;

pub use error::{Error, Result};
pub use num_complex::Complex64;
