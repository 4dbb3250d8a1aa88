//! Roots of unity and the coefficient tables that combine exponentials into
//! the sparse series.
//!
//! The order-N series `y_j` solves the ODE `y^(N) = y`, whose characteristic
//! roots are the N-th roots of unity `λ_n = exp(2πin/N)`, n = 1..N. Matching
//! Kronecker-delta initial data at z = 0 yields one Vandermonde system per
//! residue j; its solution is the table `C_{n,j}` with
//!
//! ```text
//! y_j(z) = Σ_{n=1..N} C_{n,j} exp(λ_n z),   Σ_n C_{n,j} λ_n^i = δ_{j,i}.
//! ```

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Pivot magnitudes below this are treated as singular in the dense solve.
const SINGULAR_PIVOT: f64 = 1e-300;

/// The N complex N-th roots of unity, indexed n = 1..N.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    order: usize,
    roots: Vec<Complex64>,
}

impl RootSet {
    pub fn order(&self) -> usize {
        self.order
    }

    /// All roots in index order; `roots()[n-1]` is `λ_n`.
    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    /// The root `λ_n` for 1-based branch index n.
    pub fn root(&self, n: usize) -> Complex64 {
        self.roots[n - 1]
    }
}

/// Compute `λ_n = exp(2πin/N)` for n = 1..N from the angle formula.
///
/// The final root `λ_N` is pinned to exactly 1. The others are built from a
/// residual angle in `[-π/4, π/4]` plus exact quarter-turn rotations, then
/// Newton-polished against `λ^N - 1` so the computed N-th power stays within
/// ~1e-14 of 1 even at N = 64.
pub fn roots_of_unity(order: usize) -> Result<RootSet> {
    if order == 0 {
        return Err(Error::InvalidOrder);
    }
    let roots = (1..=order)
        .map(|n| {
            if n == order {
                Complex64::new(1.0, 0.0)
            } else {
                polish_root(unit_angle_root(n, order), order)
            }
        })
        .collect();
    Ok(RootSet { order, roots })
}

/// `exp(2πin/N)` with the angle reduced to `[-π/4, π/4]`; the quarter-turn
/// rotations are exact component swaps, so the only rounding left is the
/// small-angle sin/cos.
fn unit_angle_root(n: usize, order: usize) -> Complex64 {
    let frac = n as f64 / order as f64;
    let quarter_turns = (4.0 * frac).round() as i64;
    let residual = frac - quarter_turns as f64 / 4.0;
    let base = Complex64::from_polar(1.0, TAU * residual);
    match quarter_turns.rem_euclid(4) {
        0 => base,
        1 => Complex64::new(-base.im, base.re),
        2 => Complex64::new(-base.re, -base.im),
        _ => Complex64::new(base.im, -base.re),
    }
}

/// Two Newton steps on `λ^N - 1`, keeping the iterate whose computed power
/// lands nearest 1. Corrections are at the last-ulp scale; without them the
/// power drifts to a few 1e-14 for N near 64.
fn polish_root(initial: Complex64, order: usize) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let mut z = initial;
    let mut best = z;
    let mut best_defect = (z.powu(order as u32) - one).norm();
    for _ in 0..2 {
        let p = z.powu(order as u32);
        z *= one + (one - p) / (order as f64 * p);
        let defect = (z.powu(order as u32) - one).norm();
        if defect < best_defect {
            best_defect = defect;
            best = z;
        }
    }
    best
}

/// Weights `C_{n,j}` combining the N exponentials, n = 1..N, j = 0..N-1.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    order: usize,
    /// Stored residue-major: `entries[j * order + (n - 1)]`.
    entries: Vec<Complex64>,
}

impl CoefficientTable {
    pub fn order(&self) -> usize {
        self.order
    }

    /// The entry `C_{n,j}` for 1-based branch n and residue j.
    pub fn entry(&self, n: usize, j: usize) -> Complex64 {
        self.entries[j * self.order + (n - 1)]
    }

    /// All branch coefficients for residue j, ordered by n.
    pub fn residue_coeffs(&self, j: usize) -> &[Complex64] {
        &self.entries[j * self.order..(j + 1) * self.order]
    }
}

/// One initial-condition system: Vandermonde matrix in the roots against a
/// Kronecker-delta right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct InitSystem {
    order: usize,
    residue: usize,
    /// Row-major N×N; entry (i, n) = `λ_n^i`.
    matrix: Vec<Complex64>,
    /// Entry i = `δ_{j,i}`.
    rhs: Vec<Complex64>,
}

impl InitSystem {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn residue(&self) -> usize {
        self.residue
    }

    /// Matrix entry at derivative row i and 1-based branch column n.
    pub fn matrix_entry(&self, i: usize, n: usize) -> Complex64 {
        self.matrix[i * self.order + (n - 1)]
    }

    pub fn rhs(&self) -> &[Complex64] {
        &self.rhs
    }
}

/// Build the linear system fixing the residue-j coefficients: row i states
/// `Σ_n C_{n,j} λ_n^i = δ_{j,i}`.
pub fn build_init_system(roots: &RootSet, residue: usize) -> Result<InitSystem> {
    let order = roots.order();
    if residue >= order {
        return Err(Error::InvalidResidue { residue, order });
    }
    let mut matrix = vec![Complex64::new(0.0, 0.0); order * order];
    let mut power = vec![Complex64::new(1.0, 0.0); order];
    for i in 0..order {
        for (col, p) in power.iter().enumerate() {
            matrix[i * order + col] = *p;
        }
        if i + 1 < order {
            for (p, lam) in power.iter_mut().zip(roots.roots()) {
                *p *= lam;
            }
        }
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); order];
    rhs[residue] = Complex64::new(1.0, 0.0);
    Ok(InitSystem {
        order,
        residue,
        matrix,
        rhs,
    })
}

/// Solve all N initial-condition systems by partial-pivoted dense elimination.
pub fn solve_coeffs(order: usize) -> Result<CoefficientTable> {
    let roots = roots_of_unity(order)?;
    let mut entries = Vec::with_capacity(order * order);
    for residue in 0..order {
        let system = build_init_system(&roots, residue)?;
        let mut matrix = system.matrix;
        let mut rhs = system.rhs;
        solve_dense(order, &mut matrix, &mut rhs)
            .map_err(|_| Error::DegenerateSystem { order })?;
        entries.extend(rhs);
    }
    Ok(CoefficientTable { order, entries })
}

/// Closed-form table `C_{n,j} = λ_n^{-j} / N`, the discrete-Fourier inversion
/// of the Vandermonde system. Kept as an independent cross-check for
/// [`solve_coeffs`].
pub fn coeffs_analytic(order: usize) -> Result<CoefficientTable> {
    if order == 0 {
        return Err(Error::InvalidOrder);
    }
    let scale = 1.0 / order as f64;
    let mut entries = Vec::with_capacity(order * order);
    for j in 0..order {
        for n in 1..=order {
            // Reduce n*j mod N before forming the angle to keep it in [0, 2π).
            let phase = (n * j) % order;
            let value = if phase == 0 {
                Complex64::new(scale, 0.0)
            } else {
                Complex64::from_polar(scale, -TAU * phase as f64 / order as f64)
            };
            entries.push(value);
        }
    }
    Ok(CoefficientTable { order, entries })
}

/// In-place Gaussian elimination with partial pivoting on a row-major n×n
/// system; `rhs` is overwritten with the solution.
fn solve_dense(n: usize, a: &mut [Complex64], rhs: &mut [Complex64]) -> std::result::Result<(), ()> {
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                a[r * n + col]
                    .norm()
                    .total_cmp(&a[s * n + col].norm())
            })
            .ok_or(())?;
        if a[pivot_row * n + col].norm() < SINGULAR_PIVOT {
            return Err(());
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let sub = factor * a[col * n + k];
                a[row * n + k] -= sub;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * rhs[k];
        }
        rhs[row] = acc / a[row * n + row];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);
    const ONE: Complex64 = Complex64::new(1.0, 0.0);

    fn assert_close(actual: Complex64, expected: Complex64, tol: f64) {
        assert!(
            (actual - expected).norm() <= tol,
            "expected {expected}, got {actual} (tol {tol:.1e})"
        );
    }

    #[test]
    fn first_orders_match_known_roots() {
        let r1 = roots_of_unity(1).unwrap();
        assert_eq!(r1.roots(), &[ONE]);

        let r2 = roots_of_unity(2).unwrap();
        assert_close(r2.root(1), -ONE, 1e-15);
        assert_eq!(r2.root(2), ONE);

        let r4 = roots_of_unity(4).unwrap();
        assert_close(r4.root(1), Complex64::new(0.0, 1.0), 1e-15);
        assert_close(r4.root(2), -ONE, 1e-15);
        assert_close(r4.root(3), Complex64::new(0.0, -1.0), 1e-15);
        assert_eq!(r4.root(4), ONE);
    }

    #[test]
    fn zero_order_is_rejected() {
        assert!(matches!(roots_of_unity(0), Err(Error::InvalidOrder)));
        assert!(matches!(solve_coeffs(0), Err(Error::InvalidOrder)));
        assert!(matches!(coeffs_analytic(0), Err(Error::InvalidOrder)));
    }

    #[test]
    fn roots_stay_on_unit_circle_up_to_order_64() {
        for order in 1..=64 {
            let set = roots_of_unity(order).unwrap();
            assert_eq!(set.root(order), ONE);
            for (idx, lam) in set.roots().iter().enumerate() {
                let pow = lam.powu(order as u32);
                assert!(
                    (pow - ONE).norm() < 1e-14,
                    "order {order}, root {}: λ^N = {pow}",
                    idx + 1
                );
                for other in &set.roots()[..idx] {
                    assert!((lam - other).norm() > 1e-12, "repeated root at order {order}");
                }
            }
        }
    }

    #[test]
    fn init_system_is_vandermonde_with_delta_rhs() {
        let roots = roots_of_unity(2).unwrap();
        let sys0 = build_init_system(&roots, 0).unwrap();
        assert_eq!(sys0.matrix_entry(0, 1), ONE);
        assert_eq!(sys0.matrix_entry(0, 2), ONE);
        assert_close(sys0.matrix_entry(1, 1), -ONE, 1e-15);
        assert_eq!(sys0.matrix_entry(1, 2), ONE);
        assert_eq!(sys0.rhs(), &[ONE, ZERO]);

        let sys1 = build_init_system(&roots, 1).unwrap();
        assert_eq!(sys1.rhs(), &[ZERO, ONE]);
        assert_eq!(sys1.matrix_entry(1, 2), sys0.matrix_entry(1, 2));

        let single = build_init_system(&roots_of_unity(1).unwrap(), 0).unwrap();
        assert_eq!(single.matrix_entry(0, 1), ONE);
        assert_eq!(single.rhs(), &[ONE]);
    }

    #[test]
    fn out_of_range_residue_is_rejected() {
        let roots = roots_of_unity(3).unwrap();
        assert!(matches!(
            build_init_system(&roots, 3),
            Err(Error::InvalidResidue { residue: 3, order: 3 })
        ));
    }

    #[test]
    fn low_order_tables_match_printed_values() {
        let t1 = solve_coeffs(1).unwrap();
        assert_close(t1.entry(1, 0), ONE, 1e-14);

        // Order 2 produces the cosh/sinh weights ±1/2.
        let t2 = solve_coeffs(2).unwrap();
        let half = Complex64::new(0.5, 0.0);
        assert_close(t2.entry(1, 0), half, 1e-14);
        assert_close(t2.entry(2, 0), half, 1e-14);
        assert_close(t2.entry(1, 1), -half, 1e-14);
        assert_close(t2.entry(2, 1), half, 1e-14);
    }

    #[test]
    fn analytic_table_matches_known_entries() {
        let t2 = coeffs_analytic(2).unwrap();
        assert_close(t2.entry(1, 1), Complex64::new(-0.5, 0.0), 1e-15);
        let t1 = coeffs_analytic(1).unwrap();
        assert_close(t1.entry(1, 0), ONE, 1e-15);
    }

    /// Oracle: multiply a solved table back through the Vandermonde rows and
    /// compare with the Kronecker delta.
    fn max_delta_defect(table: &CoefficientTable) -> f64 {
        let order = table.order();
        let roots = roots_of_unity(order).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..order {
            for i in 0..order {
                let mut acc = ZERO;
                for n in 1..=order {
                    acc += table.entry(n, j) * roots.root(n).powu(i as u32);
                }
                let expected = if i == j { ONE } else { ZERO };
                worst = worst.max((acc - expected).norm());
            }
        }
        worst
    }

    #[test]
    fn solved_tables_satisfy_the_delta_identity() {
        for order in 1..=12 {
            let defect = max_delta_defect(&solve_coeffs(order).unwrap());
            assert!(defect < 1e-12, "order {order}: defect {defect:.3e}");
        }
    }

    #[test]
    fn residue_zero_weights_sum_to_one() {
        for order in 1..=12 {
            let table = solve_coeffs(order).unwrap();
            let sum: Complex64 = table.residue_coeffs(0).iter().sum();
            assert_close(sum, ONE, 1e-12);
        }
    }

    #[test]
    fn solver_and_analytic_tables_agree() {
        for order in 1..=12 {
            let solved = solve_coeffs(order).unwrap();
            let analytic = coeffs_analytic(order).unwrap();
            for j in 0..order {
                for n in 1..=order {
                    let diff = (solved.entry(n, j) - analytic.entry(n, j)).norm();
                    assert!(
                        diff < 1e-12,
                        "order {order}, entry ({n}, {j}) differs by {diff:.3e}"
                    );
                }
            }
        }
    }

    #[test]
    fn analytic_agreement_holds_tightly_at_order_5() {
        let solved = solve_coeffs(5).unwrap();
        let analytic = coeffs_analytic(5).unwrap();
        for j in 0..5 {
            for n in 1..=5 {
                assert!((solved.entry(n, j) - analytic.entry(n, j)).norm() < 1e-13);
            }
        }
    }
}
