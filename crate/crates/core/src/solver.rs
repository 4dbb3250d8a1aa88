//! Assembly of the full order-N solution
//! `u(t) = Σ_{j=0}^{N-1} φ_j(t - t0, G) u_j` and finite-difference checks
//! that the assembled solution actually satisfies the defining equation and
//! its initial conditions.

use ndarray::Array1;
use num_complex::Complex64;
use std::fmt;

use crate::error::{Error, Result};
use crate::fdiff::{central_nodes, fd_weights, forward_nodes};
use crate::operator::{
    apply_kernel_matrix, max_norm_vec, series_kernel_matrix, LinearOperator,
};
use crate::roots::solve_coeffs;
use crate::series::{
    phi_kernel, phi_series, KernelArgs, SeriesParams, DEFAULT_MAX_TERMS, DEFAULT_TOLERANCE,
};

/// Default step for the initial-condition probe.
pub const DEFAULT_INIT_STEP: f64 = 1e-4;
/// Default step for the equation-residual probe.
pub const DEFAULT_PDE_STEP: f64 = 1e-3;
/// Initial-condition residuals above this indicate a broken solution.
pub const DEFAULT_INIT_THRESHOLD: f64 = 1e-5;
/// Equation residuals above this indicate a broken solution.
pub const DEFAULT_PDE_THRESHOLD: f64 = 1e-4;

/// Sample-noise allowance (in units of machine epsilon) used when widening
/// finite-difference steps; covers rounding amplified by eigenvector
/// conditioning in the solved samples.
const FD_NOISE_FACTOR: f64 = 1e4;



/// An order-N initial value problem `d^N u/dt^N = G u` with data
/// `u_0 .. u_{N-1}` prescribed at `t0`.
#[derive(Debug, Clone)]
pub struct CauchyProblem {
    order: usize,
    operator: LinearOperator,
    t0: f64,
    initial: Vec<Array1<Complex64>>,
}

impl CauchyProblem {
    pub fn new(
        order: usize,
        operator: LinearOperator,
        t0: f64,
        initial: Vec<Array1<Complex64>>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder);
        }
        if initial.len() != order {
            return Err(Error::DimensionMismatch(format!(
                "order {} problem needs {} initial vectors, got {}",
                order,
                order,
                initial.len()
            )));
        }
        let d = operator.dimension();
        for (i, u) in initial.iter().enumerate() {
            if u.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "initial vector {} has length {}, operator dimension is {}",
                    i,
                    u.len(),
                    d
                )));
            }
        }
        Ok(CauchyProblem {
            order,
            operator,
            t0,
            initial,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn operator(&self) -> &LinearOperator {
        &self.operator
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dimension(&self) -> usize {
        self.operator.dimension()
    }

    pub fn initial(&self, i: usize) -> &Array1<Complex64> {
        &self.initial[i]
    }
}

/// Which solver produced a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Closed,
    Series,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveMethod::Closed => write!(f, "closed"),
            SolveMethod::Series => write!(f, "series"),
        }
    }
}

/// The state vector at one evaluation time.
#[derive(Debug, Clone)]
pub struct SolutionSample {
    pub time: f64,
    pub state: Array1<Complex64>,
    pub method: SolveMethod,
}

/// Evaluation controls shared by both solver routes.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_terms: usize,
    /// Evaluation at t < t0 is rejected unless this is set; the formulas are
    /// entire in t - t0 but nothing guarantees backward well-posedness.
    pub allow_backward: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_terms: DEFAULT_MAX_TERMS,
            allow_backward: false,
        }
    }
}

impl SolveOptions {
    fn params(&self, order: usize, residue: usize) -> SeriesParams {
        SeriesParams {
            order,
            residue,
            tolerance: self.tolerance,
            max_terms: self.max_terms,
        }
    }
}

fn elapsed(problem: &CauchyProblem, t: f64, options: &SolveOptions) -> Result<Complex64> {
    let tau = t - problem.t0;
    if tau < 0.0 && !options.allow_backward {
        return Err(Error::BackwardTime { t, t0: problem.t0 });
    }
    Ok(Complex64::new(tau, 0.0))
}

/// Solve via the closed propagator form,
/// `u(t) = Σ_j φ_j(t - t0, G) u_j` with coefficients from [`solve_coeffs`].
///
/// Diagonal operators apply the scalar kernel mode by mode; dense ones use
/// the eigendecomposition route of [`apply_kernel_matrix`] (series fallback
/// included). At t = t0 the result is exactly `u_0`.
pub fn solve_closed(
    problem: &CauchyProblem,
    t: f64,
    options: &SolveOptions,
) -> Result<SolutionSample> {
    let tau = elapsed(problem, t, options)?;
    let coeffs = solve_coeffs(problem.order)?;
    let mut state: Array1<Complex64> = Array1::zeros(problem.dimension());
    for j in 0..problem.order {
        let params = options.params(problem.order, j);
        match &problem.operator {
            LinearOperator::Diagonal(symbol) => {
                for (i, (&g, &u)) in symbol.iter().zip(problem.initial[j].iter()).enumerate() {
                    state[i] += phi_kernel(KernelArgs { tau, g }, &params, &coeffs)? * u;
                }
            }
            LinearOperator::Dense(_) => {
                let kernel = apply_kernel_matrix(&problem.operator, tau, &params, &coeffs)?;
                state += &kernel.dot(&problem.initial[j]);
            }
        }
    }
    Ok(SolutionSample {
        time: t,
        state,
        method: SolveMethod::Closed,
    })
}

/// Solve via truncated power series in the operator; the method-independent
/// reference for [`solve_closed`].
pub fn solve_series(
    problem: &CauchyProblem,
    t: f64,
    options: &SolveOptions,
) -> Result<SolutionSample> {
    let tau = elapsed(problem, t, options)?;
    let mut state: Array1<Complex64> = Array1::zeros(problem.dimension());
    for j in 0..problem.order {
        let params = options.params(problem.order, j);
        match &problem.operator {
            LinearOperator::Diagonal(symbol) => {
                for (i, (&g, &u)) in symbol.iter().zip(problem.initial[j].iter()).enumerate() {
                    state[i] += phi_series(KernelArgs { tau, g }, &params)? * u;
                }
            }
            LinearOperator::Dense(_) => {
                let kernel = series_kernel_matrix(&problem.operator, tau, &params)?;
                state += &kernel.dot(&problem.initial[j]);
            }
        }
    }
    Ok(SolutionSample {
        time: t,
        state,
        method: SolveMethod::Series,
    })
}

/// Residuals of the initial-condition check, one per derivative order
/// i = 0..N.
#[derive(Debug, Clone)]
pub struct InitialConditionReport {
    residuals: Vec<f64>,
    steps: Vec<f64>,
}

impl InitialConditionReport {
    /// Max-norm deviation of the estimated i-th derivative at t0 from `u_i`.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// The finite-difference step actually used per derivative order
    /// (0 for the direct i = 0 evaluation).
    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Widen a finite-difference step so the f64 rounding floor `noise / h^order`
/// stays well below the truncation target; `h` acts as a lower bound.
fn fd_step_floor(h: f64, order: usize, scale: f64) -> f64 {
    let noise = FD_NOISE_FACTOR * f64::EPSILON * scale;
    h.max(noise.powf(1.0 / (order + 4) as f64))
}

/// Estimate `d^i u/dt^i` at t0 for i = 0..N by one-sided finite differences
/// over [`solve_closed`] samples and report the deviation from each `u_i`.
///
/// `h` is the base step. Higher derivatives amplify sample rounding by
/// `1/h^i`, so the probe widens the step per order (see the reported
/// [`InitialConditionReport::steps`]); stencils carry four guard points for
/// fourth-order accuracy.
pub fn verify_initial_conditions(
    problem: &CauchyProblem,
    h: f64,
) -> Result<InitialConditionReport> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let options = SolveOptions::default();
    let scale = problem
        .initial
        .iter()
        .map(max_norm_vec)
        .fold(1.0, f64::max);
    let mut residuals = Vec::with_capacity(problem.order);
    let mut steps = Vec::with_capacity(problem.order);
    for i in 0..problem.order {
        if i == 0 {
            let sample = solve_closed(problem, problem.t0, &options)?;
            residuals.push(max_norm_vec(&(&sample.state - &problem.initial[0])));
            steps.push(0.0);
            continue;
        }
        let step = fd_step_floor(h, i, scale);
        let nodes = forward_nodes(problem.t0, step, i + 4);
        let weights = fd_weights(&nodes, problem.t0, i);
        let mut estimate: Array1<Complex64> = Array1::zeros(problem.dimension());
        for (&node, &w) in nodes.iter().zip(&weights) {
            let sample = solve_closed(problem, node, &options)?;
            estimate += &(sample.state * Complex64::new(w, 0.0));
        }
        residuals.push(max_norm_vec(&(&estimate - &problem.initial[i])));
        steps.push(step);
    }
    Ok(InitialConditionReport { residuals, steps })
}

/// Residual of the defining equation at time t: a central finite-difference
/// N-th time derivative of [`solve_closed`] compared against `G·u(t)`,
/// max-norm scaled by `1 + ‖G·u(t)‖`.
///
/// Requires `t - t0 > N·h` so the stencil keeps clear of t0; the step is
/// widened like in [`verify_initial_conditions`] (and shrunk back if the
/// widened stencil would cross t0).
pub fn verify_pde_residual(problem: &CauchyProblem, t: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let n = problem.order;
    let tau = t - problem.t0;
    if tau <= n as f64 * h {
        return Err(Error::InvalidArgument(format!(
            "time {t} is within {n}·h of t0 = {}; the order-{n} stencil needs more room",
            problem.t0
        )));
    }
    let options = SolveOptions::default();
    let u_t = solve_closed(problem, t, &options)?.state;
    let target = problem.operator.apply(&u_t)?;
    let scale = max_norm_vec(&u_t).max(1.0);

    let half = (n + 4) / 2;
    let step = fd_step_floor(h, n, scale).min(tau / (half as f64 + 1.0));
    let nodes = central_nodes(t, step, half);
    let weights = fd_weights(&nodes, t, n);
    let mut derivative: Array1<Complex64> = Array1::zeros(problem.dimension());
    for (&node, &w) in nodes.iter().zip(&weights) {
        let sample = solve_closed(problem, node, &options)?;
        derivative += &(sample.state * Complex64::new(w, 0.0));
    }
    Ok(max_norm_vec(&(&derivative - &target)) / (1.0 + max_norm_vec(&target)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
    const COSH_2: f64 = 3.7621956910836314;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn diag_problem(
        order: usize,
        symbol: Vec<Complex64>,
        t0: f64,
        initial: Vec<Vec<Complex64>>,
    ) -> CauchyProblem {
        let operator = LinearOperator::diagonal(Array1::from(symbol)).unwrap();
        let initial = initial.into_iter().map(Array1::from).collect();
        CauchyProblem::new(order, operator, t0, initial).unwrap()
    }

    #[test]
    fn construction_validates_shapes() {
        let op = LinearOperator::diagonal(array![re(1.0), re(2.0)]).unwrap();
        // Wrong number of initial vectors.
        assert!(matches!(
            CauchyProblem::new(2, op.clone(), 0.0, vec![array![re(1.0), re(0.0)]]),
            Err(Error::DimensionMismatch(_))
        ));
        // Wrong vector length.
        assert!(matches!(
            CauchyProblem::new(1, op, 0.0, vec![array![re(1.0)]]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn initial_state_is_reproduced_exactly() {
        let problem = diag_problem(
            2,
            vec![re(4.0), Complex64::new(-1.0, 0.5)],
            0.25,
            vec![
                vec![re(1.0), Complex64::new(0.5, -2.0)],
                vec![re(0.0), re(3.0)],
            ],
        );
        let opts = SolveOptions::default();
        let closed = solve_closed(&problem, 0.25, &opts).unwrap();
        assert_eq!(closed.state, *problem.initial(0));
        assert_eq!(closed.method, SolveMethod::Closed);
        let series = solve_series(&problem, 0.25, &opts).unwrap();
        assert_eq!(series.state, *problem.initial(0));
    }

    #[test]
    fn first_order_solution_is_the_exponential() {
        let a = Complex64::new(0.8, -0.3);
        let u0 = vec![re(2.0), Complex64::new(-1.0, 1.0)];
        let problem = diag_problem(1, vec![a, a], 0.0, vec![u0.clone()]);
        let sample = solve_closed(&problem, 1.0, &SolveOptions::default()).unwrap();
        for (got, u) in sample.state.iter().zip(&u0) {
            let expected = a.exp() * u;
            assert!((got - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn second_order_scalar_problem_gives_cosh() {
        let problem = diag_problem(2, vec![re(4.0)], 0.0, vec![vec![re(1.0)], vec![re(0.0)]]);
        let sample = solve_closed(&problem, 1.0, &SolveOptions::default()).unwrap();
        assert!((sample.state[0] - re(COSH_2)).norm() < 1e-12);
    }

    #[test]
    fn nilpotent_series_annihilates_the_first_vector() {
        let g = LinearOperator::dense(array![
            [C_ZERO, re(1.0)],
            [C_ZERO, C_ZERO]
        ])
        .unwrap();
        let problem = CauchyProblem::new(
            2,
            g,
            0.0,
            vec![array![re(1.0), C_ZERO], array![C_ZERO, C_ZERO]],
        )
        .unwrap();
        let sample = solve_series(&problem, 1.0, &SolveOptions::default()).unwrap();
        assert!((sample.state[0] - re(1.0)).norm() < 1e-15);
        assert!(sample.state[1].norm() < 1e-15);
        assert_eq!(sample.method, SolveMethod::Series);
    }

    #[test]
    fn backward_times_need_the_explicit_flag() {
        let problem = diag_problem(1, vec![re(1.0)], 0.0, vec![vec![re(1.0)]]);
        assert!(matches!(
            solve_closed(&problem, -0.5, &SolveOptions::default()),
            Err(Error::BackwardTime { .. })
        ));
        let opts = SolveOptions {
            allow_backward: true,
            ..Default::default()
        };
        let sample = solve_closed(&problem, -0.5, &opts).unwrap();
        assert!((sample.state[0] - re((-0.5f64).exp())).norm() < 1e-14);
    }

    #[test]
    fn closed_and_series_agree_on_a_dense_problem() {
        let g = LinearOperator::dense(array![
            [re(0.3), Complex64::new(0.0, 0.8), C_ZERO],
            [Complex64::new(-0.2, 0.1), re(-0.5), re(0.4)],
            [C_ZERO, re(0.6), Complex64::new(0.1, -0.7)]
        ])
        .unwrap();
        for order in 1..=3 {
            let initial: Vec<Array1<Complex64>> = (0..order)
                .map(|j| {
                    Array1::from_iter(
                        (0..3).map(|i| Complex64::new(0.3 * (i + j) as f64 - 0.4, 0.2 * i as f64)),
                    )
                })
                .collect();
            let problem = CauchyProblem::new(order, g.clone(), 0.0, initial).unwrap();
            let opts = SolveOptions::default();
            let closed = solve_closed(&problem, 1.0, &opts).unwrap();
            let series = solve_series(&problem, 1.0, &opts).unwrap();
            let diff = max_norm_vec(&(&closed.state - &series.state));
            assert!(diff < 1e-11, "order {order}: {diff:.3e}");
        }
    }

    #[test]
    fn solutions_are_linear_in_the_initial_data() {
        let symbol = vec![Complex64::new(-1.0, 0.4), re(0.9), Complex64::new(0.2, -1.1)];
        let u: Vec<Vec<Complex64>> = vec![
            vec![re(1.0), re(-0.5), Complex64::new(0.0, 0.7)],
            vec![re(0.2), Complex64::new(0.3, -0.3), re(1.1)],
        ];
        let w: Vec<Vec<Complex64>> = vec![
            vec![Complex64::new(0.5, 0.5), re(0.1), re(-0.8)],
            vec![re(-0.4), re(0.6), Complex64::new(-0.2, 0.2)],
        ];
        let alpha = Complex64::new(1.3, -0.2);
        let beta = Complex64::new(-0.7, 0.9);
        let combo: Vec<Vec<Complex64>> = u
            .iter()
            .zip(&w)
            .map(|(uj, wj)| {
                uj.iter()
                    .zip(wj)
                    .map(|(a, b)| alpha * a + beta * b)
                    .collect()
            })
            .collect();

        let opts = SolveOptions::default();
        let solve = |init: Vec<Vec<Complex64>>| {
            let problem = diag_problem(2, symbol.clone(), 0.0, init);
            solve_closed(&problem, 1.2, &opts).unwrap().state
        };
        let direct = solve(combo);
        let combined = solve(u).mapv(|x| x * alpha) + solve(w).mapv(|x| x * beta);
        let diff = max_norm_vec(&(&direct - &combined));
        let scale = max_norm_vec(&combined);
        assert!(diff <= 1e-11 * (1.0 + scale), "linearity defect {diff:.3e}");
    }

    #[test]
    fn initial_condition_probe_is_tight_for_low_orders() {
        let problem = diag_problem(2, vec![re(4.0)], 0.0, vec![vec![re(1.0)], vec![re(0.0)]]);
        let report = verify_initial_conditions(&problem, 1e-4).unwrap();
        assert_eq!(report.residuals().len(), 2);
        assert_eq!(report.residuals()[0], 0.0);
        assert!(report.residuals()[1] < 1e-6, "{:?}", report.residuals());

        let single = diag_problem(1, vec![re(1.0)], 0.0, vec![vec![re(1.0)]]);
        let report = verify_initial_conditions(&single, 1e-4).unwrap();
        assert_eq!(report.residuals().len(), 1);
    }

    #[test]
    fn equation_residual_is_small_for_the_exponential() {
        let problem = diag_problem(1, vec![re(1.0)], 0.0, vec![vec![re(1.0)]]);
        let residual = verify_pde_residual(&problem, 1.0, 1e-4).unwrap();
        assert!(residual < 1e-6, "residual {residual:.3e}");
    }

    #[test]
    fn zero_operator_with_polynomial_data_is_exact() {
        // With G = 0 the solution is the degree-(N-1) Taylor polynomial of the
        // initial data; both sides of the equation vanish.
        let zero_op = LinearOperator::dense(Array2::zeros((2, 2))).unwrap();
        let initial = vec![
            array![re(1.0), re(-2.0)],
            array![re(0.5), re(0.3)],
            array![re(-0.1), re(0.8)],
        ];
        let problem = CauchyProblem::new(3, zero_op, 0.0, initial).unwrap();
        let residual = verify_pde_residual(&problem, 1.0, 1e-3).unwrap();
        assert!(residual < 1e-9, "residual {residual:.3e}");
    }

    #[test]
    fn wave_like_symbol_keeps_a_small_equation_residual() {
        let symbol: Vec<Complex64> = [1i64, 2, 4, 8]
            .iter()
            .map(|&k| re(-((k * k) as f64)))
            .collect();
        let initial = vec![
            vec![re(1.0), re(0.5), re(0.25), re(0.125)],
            vec![re(0.0), re(0.3), re(-0.2), re(0.1)],
        ];
        let problem = diag_problem(2, symbol, 0.0, initial);
        let residual = verify_pde_residual(&problem, 1.0, 1e-3).unwrap();
        assert!(residual < 1e-5, "residual {residual:.3e}");
    }

    #[test]
    fn stencil_room_is_enforced() {
        let problem = diag_problem(1, vec![re(1.0)], 0.0, vec![vec![re(1.0)]]);
        assert!(matches!(
            verify_pde_residual(&problem, 5e-5, 1e-4),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            verify_initial_conditions(&problem, 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }
}
