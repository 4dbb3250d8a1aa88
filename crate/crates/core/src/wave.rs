//! The order-N wave equation `d^N u/dt^N = v^N d^N u/dx^N` on the periodic
//! grid `x_m = 2πm/M`, solved two ways:
//!
//! - **spectral**: the operator becomes the diagonal symbol
//!   `g_k = v^N (ik)^N` in the discrete Fourier basis and the general solver
//!   does the rest;
//! - **shift**: the propagators literally translate the initial profiles by
//!   the complex offsets `v(t-t0)λ_n`, realized as Fourier multipliers
//!   `exp(ikv(t-t0)λ_n)`, followed by the integration multiplier
//!   `(ivk)^{-j}` (the fractional power of the operator on the translation
//!   branch).
//!
//! The shift route sums N² propagated terms — N directions for each of the
//! N initial profiles. Fractional integration is singular at the k = 0 mode,
//! so profiles attached to residues j ≥ 1 must have zero mean there; the
//! spectral route has no such restriction (its kernel is entire in g).

use ndarray::Array1;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::roots::{roots_of_unity, solve_coeffs};
use crate::series::MAX_EXP_ARG;
use crate::solver::{solve_closed, CauchyProblem, SolveOptions};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative tolerance for the zero-mean requirement on shifted profiles.
const MEAN_MODE_TOLERANCE: f64 = 1e-12;

/// Integer wavenumbers in FFT ordering: 0, 1, .., M/2, -M/2+1, .., -1.
pub fn wavenumbers(grid_size: usize) -> Vec<i64> {
    (0..grid_size)
        .map(|i| {
            if i <= grid_size / 2 {
                i as i64
            } else {
                i as i64 - grid_size as i64
            }
        })
        .collect()
}

fn fft_forward(samples: &Array1<Complex64>) -> Array1<Complex64> {
    let m = samples.len();
    let mut buffer: Vec<Complex64> = samples.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buffer);
    let scale = 1.0 / m as f64;
    Array1::from_iter(buffer.into_iter().map(|x| x * scale))
}

fn fft_inverse(modes: &Array1<Complex64>) -> Array1<Complex64> {
    let m = modes.len();
    let mut buffer: Vec<Complex64> = modes.to_vec();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buffer);
    Array1::from(buffer)
}

/// Grid values and Fourier coefficients of one periodic profile.
///
/// Both representations are kept in sync: `samples[m] = Σ_k modes[k]·e^{ikx_m}`
/// with the wavenumber ordering of [`wavenumbers`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    samples: Array1<Complex64>,
    modes: Array1<Complex64>,
}

impl PeriodicProfile {
    pub fn from_samples(samples: Array1<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::DimensionMismatch("empty profile".into()));
        }
        let modes = fft_forward(&samples);
        Ok(PeriodicProfile { samples, modes })
    }

    pub fn from_modes(modes: Array1<Complex64>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::DimensionMismatch("empty profile".into()));
        }
        let samples = fft_inverse(&modes);
        Ok(PeriodicProfile { samples, modes })
    }

    pub fn samples(&self) -> &Array1<Complex64> {
        &self.samples
    }

    pub fn modes(&self) -> &Array1<Complex64> {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The grid points `x_m = 2πm/M`.
    pub fn grid(grid_size: usize) -> Vec<f64> {
        (0..grid_size)
            .map(|m| TAU * m as f64 / grid_size as f64)
            .collect()
    }

    /// `sin(kx)` as the exact mode pair `û_{±k} = ∓i/2`.
    ///
    /// Building modes directly (instead of transforming samples) keeps the
    /// profile exactly band-limited; transform rounding in high-|k| modes
    /// would otherwise be amplified exponentially by order ≥ 3 evolution.
    pub fn sine(grid_size: usize, k: i64) -> Result<Self> {
        Self::mode_pair(grid_size, k, Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5))
    }

    /// `cos(kx)` as the exact mode pair `û_{±k} = 1/2`.
    pub fn cosine(grid_size: usize, k: i64) -> Result<Self> {
        Self::mode_pair(grid_size, k, Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0))
    }

    fn mode_pair(
        grid_size: usize,
        k: i64,
        positive: Complex64,
        negative: Complex64,
    ) -> Result<Self> {
        let limit = (grid_size / 2) as i64;
        if k == 0 || k.abs() >= limit {
            return Err(Error::InvalidArgument(format!(
                "wavenumber must satisfy 1 <= |k| < M/2, got k = {k}, M = {grid_size}"
            )));
        }
        let mut modes: Array1<Complex64> = Array1::zeros(grid_size);
        let pos_index = k.rem_euclid(grid_size as i64) as usize;
        let neg_index = (-k).rem_euclid(grid_size as i64) as usize;
        modes[pos_index] = positive;
        modes[neg_index] = negative;
        Self::from_modes(modes)
    }

    /// Real, even, zero-mean profile with Gaussian mode weights
    /// `exp(-2(k/kmax)²)` for 1 ≤ |k| ≤ kmax. Band-limited by construction,
    /// so complex shifts of it are exact.
    pub fn gaussian_band(grid_size: usize, kmax: usize) -> Result<Self> {
        if kmax == 0 || kmax >= grid_size / 2 {
            return Err(Error::InvalidArgument(format!(
                "band limit must satisfy 1 <= kmax < M/2, got kmax = {kmax}, M = {grid_size}"
            )));
        }
        let mut modes = Array1::zeros(grid_size);
        for (i, k) in wavenumbers(grid_size).into_iter().enumerate() {
            let k_abs = k.unsigned_abs() as usize;
            if k != 0 && k_abs <= kmax {
                let weight = (-2.0 * (k as f64 / kmax as f64).powi(2)).exp();
                modes[i] = Complex64::new(weight, 0.0);
            }
        }
        Self::from_modes(modes)
    }

    /// `|mode 0|` relative to the largest mode; the zero-mean check.
    fn mean_mode_excess(&self) -> Option<f64> {
        let peak = self.modes.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let mean = self.modes[0].norm();
        (mean > MEAN_MODE_TOLERANCE * (1.0 + peak)).then_some(mean)
    }
}

/// The order-N periodic wave problem.
#[derive(Debug, Clone)]
pub struct WaveProblem {
    order: usize,
    speed: f64,
    grid_size: usize,
    t0: f64,
    initial: Vec<PeriodicProfile>,
}

impl WaveProblem {
    pub fn new(
        order: usize,
        speed: f64,
        grid_size: usize,
        initial: Vec<PeriodicProfile>,
        t0: f64,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder);
        }
        if !grid_size.is_power_of_two() || grid_size < 8 {
            return Err(Error::InvalidProblem(format!(
                "grid size must be a power of two >= 8, got {grid_size}"
            )));
        }
        if speed == 0.0 || !speed.is_finite() {
            // Zero speed degenerates the propagators to the identity shift and
            // the shift form no longer represents the polynomial-in-t solution.
            return Err(Error::InvalidProblem(format!(
                "wave speed must be finite and nonzero, got {speed}"
            )));
        }
        if initial.len() != order {
            return Err(Error::InvalidProblem(format!(
                "order {order} needs {order} initial profiles, got {}",
                initial.len()
            )));
        }
        for (j, profile) in initial.iter().enumerate() {
            if profile.len() != grid_size {
                return Err(Error::DimensionMismatch(format!(
                    "initial profile {j} has {} samples, grid size is {grid_size}",
                    profile.len()
                )));
            }
        }
        Ok(WaveProblem {
            order,
            speed,
            grid_size,
            t0,
            initial,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn initial(&self, j: usize) -> &PeriodicProfile {
        &self.initial[j]
    }
}

/// The diagonal symbol `g_k = v^N (ik)^N = (ivk)^N` in FFT mode ordering.
pub fn spectral_symbol(problem: &WaveProblem) -> LinearOperator {
    let n = problem.order as u32;
    let symbol = Array1::from_iter(wavenumbers(problem.grid_size).into_iter().map(|k| {
        Complex64::new(0.0, problem.speed * k as f64).powu(n)
    }));
    LinearOperator::Diagonal(symbol)
}

/// Solve in mode space with the general closed-form solver and transform
/// back. The k = 0 mode has symbol 0 and automatically takes the series
/// kernel.
pub fn wave_solve_spectral(problem: &WaveProblem, t: f64) -> Result<PeriodicProfile> {
    let operator = spectral_symbol(problem);
    let initial = problem
        .initial
        .iter()
        .map(|p| p.modes().clone())
        .collect();
    let cauchy = CauchyProblem::new(problem.order, operator, problem.t0, initial)?;
    let sample = solve_closed(&cauchy, t, &SolveOptions::default())?;
    PeriodicProfile::from_modes(sample.state)
}

/// Result of the shift route, keeping the number of propagated terms that
/// were summed (N directions × N profiles).
#[derive(Debug, Clone)]
pub struct ShiftSolve {
    pub profile: PeriodicProfile,
    pub propagated_terms: usize,
}

/// Solve by propagating each profile along every root direction:
///
/// ```text
/// u = Σ_j G^{-j/N} Σ_n C_{n,j} u_j(x + v(t-t0)λ_n)
/// ```
///
/// The complex shift acts on mode k as the multiplier `exp(ikv(t-t0)λ_n)`.
/// On the root branch that turns propagators into literal translations,
/// `G^{1/N}` is `v·d/dx`, so the fractional integration in front is the
/// integer-order multiplier `(ivk)^{-j}` — consistent with the kernel's
/// branch invariance and with the d'Alembert reference. It is singular at
/// k = 0, so the k = 0 mode passes through the j = 0 term unchanged and must
/// vanish for j ≥ 1.
pub fn wave_solve_shift_detailed(problem: &WaveProblem, t: f64) -> Result<ShiftSolve> {
    let tau = t - problem.t0;
    if tau < 0.0 {
        return Err(Error::BackwardTime { t, t0: problem.t0 });
    }
    let n = problem.order;
    for (j, profile) in problem.initial.iter().enumerate().skip(1) {
        if let Some(magnitude) = profile.mean_mode_excess() {
            return Err(Error::MeanMode {
                residue: j,
                magnitude,
            });
        }
    }
    let coeffs = solve_coeffs(n)?;
    let roots = roots_of_unity(n)?;
    let ks = wavenumbers(problem.grid_size);
    let mut result: Array1<Complex64> = Array1::zeros(problem.grid_size);
    let mut propagated_terms = 0;
    for j in 0..n {
        let mut shifted: Array1<Complex64> = Array1::zeros(problem.grid_size);
        for (branch, &lambda) in roots.roots().iter().enumerate() {
            let weight = coeffs.entry(branch + 1, j);
            for (i, &k) in ks.iter().enumerate() {
                let exponent = Complex64::new(0.0, k as f64 * problem.speed * tau) * lambda;
                if exponent.re > MAX_EXP_ARG {
                    return Err(Error::Overflow {
                        branch: branch + 1,
                        exponent: exponent.re,
                    });
                }
                shifted[i] += weight * problem.initial[j].modes()[i] * exponent.exp();
            }
            propagated_terms += 1;
        }
        for (i, &k) in ks.iter().enumerate() {
            if k == 0 {
                // Residue 0 keeps its mean; higher residues verified zero-mean.
                if j > 0 {
                    shifted[i] = ZERO;
                }
            } else if j > 0 {
                shifted[i] *= Complex64::new(0.0, problem.speed * k as f64).powi(-(j as i32));
            }
        }
        result += &shifted;
    }
    Ok(ShiftSolve {
        profile: PeriodicProfile::from_modes(result)?,
        propagated_terms,
    })
}

/// [`wave_solve_shift_detailed`] without the term accounting.
pub fn wave_solve_shift(problem: &WaveProblem, t: f64) -> Result<PeriodicProfile> {
    wave_solve_shift_detailed(problem, t).map(|s| s.profile)
}

/// Classical second-order reference
/// `u = ½[u0(x+vt) + u0(x-vt)] + (1/2v)∫_{x-vt}^{x+vt} u1`,
/// with shifts and the integral realized in Fourier space (mode k of the
/// integrand divided by ik). `t` is the elapsed time.
pub fn dalembert_reference(
    u0: &PeriodicProfile,
    u1: &PeriodicProfile,
    speed: f64,
    t: f64,
) -> Result<PeriodicProfile> {
    if u0.len() != u1.len() {
        return Err(Error::DimensionMismatch(format!(
            "profile lengths differ: {} vs {}",
            u0.len(),
            u1.len()
        )));
    }
    if speed == 0.0 || !speed.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "wave speed must be finite and nonzero, got {speed}"
        )));
    }
    if let Some(magnitude) = u1.mean_mode_excess() {
        return Err(Error::MeanMode {
            residue: 1,
            magnitude,
        });
    }
    let m = u0.len();
    let mut modes = Array1::zeros(m);
    for (i, k) in wavenumbers(m).into_iter().enumerate() {
        if k == 0 {
            modes[i] = u0.modes()[i];
            continue;
        }
        let phase = Complex64::new(0.0, k as f64 * speed * t);
        let forward = phase.exp();
        let backward = (-phase).exp();
        let average = (forward + backward) * 0.5;
        let integral = (forward - backward) / (2.0 * speed * Complex64::new(0.0, k as f64));
        modes[i] = u0.modes()[i] * average + u1.modes()[i] * integral;
    }
    PeriodicProfile::from_modes(modes)
}
