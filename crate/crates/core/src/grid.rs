//! Periodic grid, discrete Fourier transforms and spectral calculus.
//!
//! The domain is `[-L, L)` sampled at `N` equispaced nodes. The forward
//! transform is the plain DFT sum `c_j = sum_n f_n e^{-i k_j x'_n}` and the
//! inverse carries the `1/N` factor, so integrals are always formed from
//! physical samples times `dx`. Under this kernel `d/dx` is multiplication
//! by `+i k`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative conjugate-symmetry defect above which [`Spectral::inverse`] refuses
/// to discard the imaginary part.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_length: f64,
    points: usize,
}

impl GridSpec {
    pub fn new(half_length: f64, points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::config(
                "grid.half_length",
                format!("L must be positive and finite, got {half_length}"),
            ));
        }
        if points % 2 != 0 {
            return Err(Error::config(
                "grid.points",
                format!("N must be even, got {points}"),
            ));
        }
        if points < 8 {
            return Err(Error::config(
                "grid.points",
                format!("N must be at least 8, got {points}"),
            ));
        }
        Ok(GridSpec {
            half_length,
            points,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.node(j)).collect()
    }

    /// Spacing of the wavenumber ladder, `pi / L`.
    pub fn dk(&self) -> f64 {
        PI / self.half_length
    }

    /// Nyquist wavenumber `(pi / L) * N / 2`.
    pub fn k_max(&self) -> f64 {
        self.dk() * (self.points / 2) as f64
    }

    /// Signed mode index of DFT slot `j`; the Nyquist slot is `+N/2`.
    pub fn mode_index(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Wavenumbers in standard DFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = self.dk();
        (0..self.points)
            .map(|j| dk * self.mode_index(j) as f64)
            .collect()
    }

    /// Nearest ladder wavenumber to `k`, keeping the sign of `k`.
    pub fn snap_wavenumber(&self, k: f64) -> f64 {
        let m = (k / self.dk()).round();
        let m = m.clamp(-((self.points / 2) as f64), (self.points / 2) as f64);
        m * self.dk()
    }

    /// Whether slot `j` survives the 2/3 rule, `|k| <= (2/3) k_max`.
    pub fn retained_by_two_thirds(&self, j: usize) -> bool {
        // |m| dk <= (2/3)(N/2) dk  <=>  3|m| <= N
        3 * self.mode_index(j).unsigned_abs() as usize <= self.points
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[-{}, {}) x {}", self.half_length, self.half_length, self.points)
    }
}

/// Transform engine bound to one grid. Plans are immutable and shared; every
/// call allocates its own buffers, so one engine may serve concurrent callers.
#[derive(Clone)]
pub struct Spectral {
    grid: GridSpec,
    k: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            grid,
            k: grid.wavenumbers(),
            forward: planner.plan_fft_forward(grid.len()),
            inverse: planner.plan_fft_inverse(grid.len()),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    fn check_len(&self, what: &str, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::Contract(format!(
                "{what} has length {got}, grid has {} points",
                self.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, samples: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len("samples", samples.len())?;
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NumericalState {
                context: "forward transform input",
                index,
            });
        }
        Ok(self.forward_unchecked(samples))
    }

    pub(crate) fn forward_unchecked(&self, samples: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform of conjugate-symmetric coefficients.
    pub fn inverse(&self, coefficients: &[Complex64]) -> Result<Vec<f64>> {
        self.check_len("coefficients", coefficients.len())?;
        let defect = symmetry_defect(coefficients);
        if defect > SYMMETRY_TOLERANCE {
            return Err(Error::Contract(format!(
                "coefficients are not conjugate-symmetric (relative defect {defect:.3e})"
            )));
        }
        Ok(self.inverse_unchecked(coefficients))
    }

    pub(crate) fn inverse_unchecked(&self, coefficients: &[Complex64]) -> Vec<f64> {
        let mut buf = coefficients.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Multiplies by `(i k)^order`. Odd orders drop the Nyquist mode.
    pub fn derivative(&self, coefficients: &[Complex64], order: u32) -> Result<Vec<Complex64>> {
        if order < 1 {
            return Err(Error::config("order", "derivative order must be at least 1"));
        }
        self.check_len("coefficients", coefficients.len())?;
        Ok(self.derivative_unchecked(coefficients, order))
    }

    pub(crate) fn derivative_unchecked(&self, coefficients: &[Complex64], order: u32) -> Vec<Complex64> {
        let nyquist = self.len() / 2;
        // i^order cycles through 1, i, -1, -i
        let unit = match order % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        coefficients
            .iter()
            .zip(&self.k)
            .enumerate()
            .map(|(j, (c, &k))| {
                if order % 2 == 1 && j == nyquist {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * unit * k.powi(order as i32)
                }
            })
            .collect()
    }

    /// 2/3-rule mask: zeroes every mode with `|k| > (2/3) k_max`.
    pub fn dealias(&self, coefficients: &[Complex64]) -> Vec<Complex64> {
        let mut out = coefficients.to_vec();
        self.dealias_in_place(&mut out);
        out
    }

    pub(crate) fn dealias_in_place(&self, coefficients: &mut [Complex64]) {
        for (j, c) in coefficients.iter_mut().enumerate() {
            if !self.grid.retained_by_two_thirds(j) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Physical derivative of real samples, `d^order f / dx^order`.
    pub fn differentiate(&self, samples: &[f64], order: u32) -> Result<Vec<f64>> {
        let hat = self.forward(samples)?;
        let d = self.derivative(&hat, order)?;
        Ok(self.inverse_unchecked(&d))
    }
}

/// `max_j |c_j - conj(c_{-j})| / max_j |c_j|`, zero for an all-zero array.
pub fn symmetry_defect(coefficients: &[Complex64]) -> f64 {
    let n = coefficients.len();
    let scale = coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let worst = (0..n)
        .map(|j| (coefficients[j] - coefficients[(n - j) % n].conj()).norm())
        .fold(0.0, f64::max);
    worst / scale
}
