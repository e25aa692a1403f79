//! Physics of `psi_tt - (a1 + 3 a2 psi_x^2) psi_xx + a3 psi^sigma = 0`.
//!
//! The acceleration is evaluated in flux form,
//! `psi_tt = d/dx (a1 psi_x + a2 psi_x^3) - a3 psi^sigma`, which is the same
//! operator for smooth fields. The discrete energy is an exact invariant of
//! the resulting semi-discrete system.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Spectral};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub sigma: u32,
}

impl ModelParams {
    pub fn new(alpha1: f64, alpha2: f64, alpha3: f64, sigma: u32) -> Result<Self> {
        let p = ModelParams {
            alpha1,
            alpha2,
            alpha3,
            sigma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("params.alpha1", self.alpha1),
            ("params.alpha2", self.alpha2),
            ("params.alpha3", self.alpha3),
        ] {
            if !v.is_finite() {
                return Err(Error::config(name, format!("must be finite, got {v}")));
            }
        }
        if self.sigma < 1 {
            return Err(Error::config("params.sigma", "sigma ≥ 1 required"));
        }
        Ok(())
    }

    /// Exponents below 2 are outside the regime the model is usually studied in.
    pub fn is_exploratory(&self) -> bool {
        self.sigma < 2
    }
}

/// Physical samples of `psi` and `psi_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub psi: Vec<f64>,
    pub psi_t: Vec<f64>,
}

impl FieldPair {
    pub fn new(psi: Vec<f64>, psi_t: Vec<f64>) -> Result<Self> {
        if psi.len() != psi_t.len() {
            return Err(Error::Contract(format!(
                "psi has {} samples but psi_t has {}",
                psi.len(),
                psi_t.len()
            )));
        }
        for (context, v) in [("psi", &psi), ("psi_t", &psi_t)] {
            if let Some(index) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NumericalState { context, index });
            }
        }
        Ok(FieldPair { psi, psi_t })
    }

    pub fn at_rest(psi: Vec<f64>) -> Result<Self> {
        let n = psi.len();
        FieldPair::new(psi, vec![0.0; n])
    }
}

fn first_non_finite(values: &[f64], context: &'static str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NumericalState { context, index }),
        None => Ok(()),
    }
}

/// Transform of the acceleration from the transform of `psi`.
pub(crate) fn acceleration_hat(
    params: &ModelParams,
    spectral: &Spectral,
    psi_hat: &[Complex64],
    dealias_on: bool,
) -> Result<Vec<Complex64>> {
    let k = spectral.wavenumbers();
    let mut acc: Vec<Complex64> = psi_hat
        .iter()
        .zip(k)
        .map(|(c, &k)| c * (-params.alpha1 * k * k))
        .collect();

    if params.alpha2 != 0.0 {
        let psi_x = spectral.inverse_unchecked(&spectral.derivative_unchecked(psi_hat, 1));
        let flux: Vec<f64> = psi_x.iter().map(|&u| params.alpha2 * u * u * u).collect();
        first_non_finite(&flux, "dispersive flux")?;
        let mut flux_hat = spectral.forward_unchecked(&flux);
        if dealias_on {
            spectral.dealias_in_place(&mut flux_hat);
        }
        for (a, d) in acc.iter_mut().zip(spectral.derivative_unchecked(&flux_hat, 1)) {
            *a += d;
        }
    }

    if params.alpha3 != 0.0 {
        let psi = spectral.inverse_unchecked(psi_hat);
        let power: Vec<f64> = psi.iter().map(|&v| v.powi(params.sigma as i32)).collect();
        first_non_finite(&power, "power nonlinearity")?;
        let mut power_hat = spectral.forward_unchecked(&power);
        if dealias_on {
            spectral.dealias_in_place(&mut power_hat);
        }
        for (a, p) in acc.iter_mut().zip(power_hat) {
            *a -= p * params.alpha3;
        }
    }

    Ok(acc)
}

/// `psi_tt` for the given field: `(a1 + 3 a2 psi_x^2) psi_xx - a3 psi^sigma`.
pub fn acceleration(
    params: &ModelParams,
    spectral: &Spectral,
    psi: &[f64],
    dealias_on: bool,
) -> Result<Vec<f64>> {
    let psi_hat = spectral.forward(psi)?;
    let acc_hat = acceleration_hat(params, spectral, &psi_hat, dealias_on)?;
    let acc = spectral.inverse_unchecked(&acc_hat);
    first_non_finite(&acc, "acceleration")?;
    Ok(acc)
}

/// Pointwise Hamiltonian density
/// `1/2 [psi_t^2 + (a1 + a2/2 psi_x^2) psi_x^2 + 2 a3/(sigma+1) psi^(sigma+1)]`.
pub fn hamiltonian_density(params: &ModelParams, psi: f64, psi_x: f64, psi_t: f64) -> f64 {
    let sp1 = params.sigma as i32 + 1;
    let ux2 = psi_x * psi_x;
    0.5 * (psi_t * psi_t
        + (params.alpha1 + 0.5 * params.alpha2 * ux2) * ux2
        + 2.0 * params.alpha3 / sp1 as f64 * psi.powi(sp1))
}

/// Density with the opposite sign on the gradient term. It is not conserved by
/// the flow.
pub fn hamiltonian_density_flipped(params: &ModelParams, psi: f64, psi_x: f64, psi_t: f64) -> f64 {
    let sp1 = params.sigma as i32 + 1;
    let ux2 = psi_x * psi_x;
    0.5 * (psi_t * psi_t - (params.alpha1 + 0.5 * params.alpha2 * ux2) * ux2
        + 2.0 * params.alpha3 / sp1 as f64 * psi.powi(sp1))
}

fn check_state(spectral: &Spectral, state: &FieldPair) -> Result<()> {
    let n = spectral.len();
    if state.psi.len() != n || state.psi_t.len() != n {
        return Err(Error::Contract(format!(
            "state has {}/{} samples, grid has {n}",
            state.psi.len(),
            state.psi_t.len()
        )));
    }
    Ok(())
}

fn integrate_density(
    params: &ModelParams,
    spectral: &Spectral,
    state: &FieldPair,
    density: fn(&ModelParams, f64, f64, f64) -> f64,
) -> Result<f64> {
    check_state(spectral, state)?;
    first_non_finite(&state.psi_t, "psi_t")?;
    let psi_x = spectral.differentiate(&state.psi, 1)?;
    let sum: f64 = state
        .psi
        .iter()
        .zip(&psi_x)
        .zip(&state.psi_t)
        .map(|((&p, &px), &pt)| density(params, p, px, pt))
        .sum();
    Ok(sum * spectral.grid().dx())
}

/// Conserved energy, the rectangle-rule integral of [`hamiltonian_density`].
pub fn energy(params: &ModelParams, spectral: &Spectral, state: &FieldPair) -> Result<f64> {
    integrate_density(params, spectral, state, hamiltonian_density)
}

/// Energy with the flipped gradient sign; see [`hamiltonian_density_flipped`].
pub fn energy_flipped(params: &ModelParams, spectral: &Spectral, state: &FieldPair) -> Result<f64> {
    integrate_density(params, spectral, state, hamiltonian_density_flipped)
}

pub fn mass(grid: &GridSpec, psi: &[f64]) -> f64 {
    psi.iter().sum::<f64>() * grid.dx()
}

/// `dM/dt`.
pub fn momentum(grid: &GridSpec, psi_t: &[f64]) -> f64 {
    psi_t.iter().sum::<f64>() * grid.dx()
}

/// Small-amplitude dispersion relation `a1 k^2 - 3 a2 k^4`; may be negative.
pub fn omega_squared(params: &ModelParams, k: f64) -> f64 {
    let k2 = k * k;
    params.alpha1 * k2 - 3.0 * params.alpha2 * k2 * k2
}

/// Positive `|k|` where the real band closes, `sqrt(a1 / (3 a2))`, when it exists.
pub fn band_edge(params: &ModelParams) -> Option<f64> {
    let ratio = params.alpha1 / (3.0 * params.alpha2);
    (params.alpha2 != 0.0 && ratio > 0.0).then(|| ratio.sqrt())
}

fn real_band_omega(params: &ModelParams, k: f64) -> Result<f64> {
    let w2 = omega_squared(params, k);
    if !(w2 > 0.0) {
        return Err(Error::Evanescent {
            k,
            omega_sq: w2,
            band_edge: band_edge(params),
        });
    }
    Ok(w2.sqrt())
}

/// Positive branch of `d omega / dk`.
pub fn group_velocity(params: &ModelParams, k: f64) -> Result<f64> {
    let omega = real_band_omega(params, k)?;
    Ok((params.alpha1 * k - 6.0 * params.alpha2 * k * k * k) / omega)
}

pub fn phase_velocity(params: &ModelParams, k: f64) -> Result<f64> {
    if k == 0.0 {
        return Err(Error::Domain("phase velocity is undefined at k = 0".into()));
    }
    Ok(real_band_omega(params, k)? / k)
}

/// KdV comparison curve `omega = alpha k - beta k^3`.
pub fn kdv_omega(alpha: f64, beta: f64, k: f64) -> f64 {
    alpha * k - beta * k * k * k
}
