//! Measurements on runs: diagnostics rows, traveling-wave slopes, the
//! perturbation harness and growth rate, spectral resolution, conservation
//! drift and convergence studies.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Spectral};
use crate::integrator::{linear_exact, simulate, EvolutionState, RunOptions};
use crate::model::{energy, energy_flipped, mass, momentum, FieldPair, ModelParams};

/// Floor applied to the growth rate so that identical fields give a finite value.
pub const GROWTH_RATE_FLOOR: f64 = -16.0;

/// Default height floor for counting wave packets.
pub const PEAK_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub energy_eq4: f64,
    pub max_abs: f64,
    pub l2_norm: f64,
    pub spectrum_tail: f64,
}

impl DiagnosticsRow {
    /// Terminal row for a state that is no longer finite.
    pub fn blown_up(t: f64) -> Self {
        DiagnosticsRow {
            t,
            mass: f64::NAN,
            momentum: f64::NAN,
            energy: f64::NAN,
            energy_eq4: f64::NAN,
            max_abs: f64::INFINITY,
            l2_norm: f64::NAN,
            spectrum_tail: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsSeries {
    pub rows: Vec<DiagnosticsRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Mass,
    Energy,
}

impl DiagnosticsSeries {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn column(&self, q: Quantity) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match q {
                Quantity::Mass => r.mass,
                Quantity::Energy => r.energy,
            })
            .collect()
    }
}

pub fn l2_norm(grid: &GridSpec, psi: &[f64]) -> f64 {
    (psi.iter().map(|v| v * v).sum::<f64>() * grid.dx()).sqrt()
}

fn in_tail(grid: &GridSpec, j: usize) -> bool {
    // top tenth of the |k| range: |m| >= 0.9 N/2
    10 * grid.mode_index(j).unsigned_abs() as usize >= 9 * (grid.len() / 2)
}

/// Largest tail coefficient relative to the largest coefficient overall.
pub fn spectrum_tail(spectral: &Spectral, psi: &[f64]) -> Result<f64> {
    let hat = spectral.forward(psi)?;
    let grid = spectral.grid();
    let peak = hat.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::UndefinedReference("spectrum of a zero field".into()));
    }
    let tail = hat
        .iter()
        .enumerate()
        .filter(|(j, _)| in_tail(grid, *j))
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max);
    Ok(tail / peak)
}

pub fn diagnostics_row(
    params: &ModelParams,
    spectral: &Spectral,
    state: &EvolutionState,
) -> Result<DiagnosticsRow> {
    let grid = spectral.grid();
    let fields = FieldPair {
        psi: state.psi(spectral),
        psi_t: state.psi_t(spectral),
    };
    let max_abs = fields.psi.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tail = match spectrum_tail(spectral, &fields.psi) {
        Ok(v) => v,
        Err(Error::UndefinedReference(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(DiagnosticsRow {
        t: state.t,
        mass: mass(grid, &fields.psi),
        momentum: momentum(grid, &fields.psi_t),
        energy: energy(params, spectral, &fields)?,
        energy_eq4: energy_flipped(params, spectral, &fields)?,
        max_abs,
        l2_norm: l2_norm(grid, &fields.psi),
        spectrum_tail: tail,
    })
}

/// `max_t |q(t) - q(0)| / max(1, |q(0)|)`.
pub fn conservation_drift(series: &DiagnosticsSeries, quantity: Quantity) -> Result<f64> {
    if series.rows.len() < 2 {
        return Err(Error::config(
            "series",
            format!("need at least 2 rows, got {}", series.rows.len()),
        ));
    }
    let column = series.column(quantity);
    let q0 = column[0];
    let scale = q0.abs().max(1.0);
    Ok(column
        .iter()
        .map(|q| (q - q0).abs() / scale)
        .fold(0.0, f64::max))
}

/// Slopes `phi_xi` of traveling waves `psi = phi(x - c t)` of the
/// power-free equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TravelingWaveSlopes {
    pub c: f64,
    /// Ascending; always contains 0.
    pub slopes: Vec<f64>,
    /// `3 (c^2 - a1) / a2`, absent when `a2 = 0`.
    pub radicand: Option<f64>,
    /// Nonzero slopes are linear ramps: outside Schwartz space, inside its
    /// weighted (Beurling) extension.
    pub extended_schwartz: bool,
    pub note: Option<String>,
}

pub fn traveling_wave_slopes(params: &ModelParams, c: f64) -> TravelingWaveSlopes {
    if params.alpha2 == 0.0 {
        return TravelingWaveSlopes {
            c,
            slopes: vec![0.0],
            radicand: None,
            extended_schwartz: false,
            note: Some("degenerate: alpha2 = 0 leaves only the constant-slope branch".into()),
        };
    }
    let radicand = 3.0 * (c * c - params.alpha1) / params.alpha2;
    let (slopes, note) = if radicand > 0.0 {
        let s = radicand.sqrt();
        (vec![-s, 0.0, s], None)
    } else if radicand == 0.0 {
        (vec![0.0], Some("triple root at zero slope (c^2 = alpha1)".to_string()))
    } else {
        (vec![0.0], None)
    };
    TravelingWaveSlopes {
        c,
        extended_schwartz: slopes.len() > 1,
        slopes,
        radicand: Some(radicand),
        note,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub eps: f64,
    pub k_p: f64,
}

impl PerturbationSpec {
    pub fn new(eps: f64, k_p: f64) -> Result<Self> {
        let spec = PerturbationSpec { eps, k_p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::config("perturbation.eps", "eps must be positive"));
        }
        if !self.k_p.is_finite() {
            return Err(Error::config("perturbation.k_p", "k_p must be finite"));
        }
        Ok(())
    }
}

/// `psi0 + eps cos(k x)` with `k` snapped to the grid ladder. Returns the
/// perturbed samples and the snapped wavenumber.
pub fn perturbed_ic(psi0: &[f64], grid: &GridSpec, spec: &PerturbationSpec) -> Result<(Vec<f64>, f64)> {
    spec.validate()?;
    if psi0.len() != grid.len() {
        return Err(Error::Contract(format!(
            "base field has {} samples, grid has {}",
            psi0.len(),
            grid.len()
        )));
    }
    let k = grid.snap_wavenumber(spec.k_p);
    let out = psi0
        .iter()
        .enumerate()
        .map(|(j, &v)| v + spec.eps * (k * grid.node(j)).cos())
        .collect();
    Ok((out, k))
}

/// `log10(||psi_pert - psi|| / ||psi||)` in the discrete L2 norm, floored at -16.
pub fn growth_rate(psi_pert: &[f64], psi: &[f64], grid: &GridSpec) -> Result<f64> {
    if psi_pert.len() != psi.len() {
        return Err(Error::Contract("fields differ in length".into()));
    }
    let reference = l2_norm(grid, psi);
    if reference == 0.0 {
        return Err(Error::UndefinedReference("unperturbed field has zero norm".into()));
    }
    let diff: Vec<f64> = psi_pert.iter().zip(psi).map(|(a, b)| a - b).collect();
    let gamma = (l2_norm(grid, &diff) / reference).log10();
    Ok(if gamma.is_nan() { gamma } else { gamma.max(GROWTH_RATE_FLOOR) })
}

/// Strict interior local maxima above `floor`, as `(x, height)`.
pub fn local_maxima(grid: &GridSpec, psi: &[f64], floor: f64) -> Vec<(f64, f64)> {
    let n = psi.len();
    (0..n)
        .filter(|&j| {
            let left = psi[(j + n - 1) % n];
            let right = psi[(j + 1) % n];
            psi[j] >= floor && psi[j] > left && psi[j] > right
        })
        .map(|j| (grid.node(j), psi[j]))
        .collect()
}

/// `max_j |psi(x_j) - psi(-x_j)|`; node `j` mirrors to node `N - j`.
pub fn mirror_error(psi: &[f64]) -> f64 {
    let n = psi.len();
    (0..n)
        .map(|j| (psi[j] - psi[(n - j) % n]).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemporalLevel {
    pub dt: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpatialLevel {
    pub points: usize,
    pub spectrum_tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TemporalReference {
    /// Mode-by-mode exact solution, available when the model is linear.
    ExactLinear,
    /// Run at the smallest requested step.
    FinestStep { dt: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub reference: TemporalReference,
    pub temporal: Vec<TemporalLevel>,
    pub order: f64,
    pub spatial: Vec<SpatialLevel>,
}

/// Least-squares slope of `ln(error)` against `ln(dt)`.
pub fn fit_order(levels: &[TemporalLevel]) -> Result<f64> {
    if levels.len() < 2 {
        return Err(Error::config("dt_levels", "need at least two levels to fit an order"));
    }
    if let Some(bad) = levels.iter().find(|l| !(l.error > 0.0 && l.error.is_finite())) {
        return Err(Error::Domain(format!(
            "error at dt = {} is {}, cannot take a logarithm",
            bad.dt, bad.error
        )));
    }
    let pts: Vec<(f64, f64)> = levels.iter().map(|l| (l.dt.ln(), l.error.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Final `psi` of `config` run at step `dt` (or the configured step) on `points` nodes.
fn final_field(config: &RunConfig, dt: Option<f64>, points: Option<usize>, level: String) -> Result<(Vec<f64>, Spectral)> {
    let mut cfg = config.clone();
    if let Some(dt) = dt {
        cfg.control.dt = Some(dt);
    }
    if let Some(n) = points {
        cfg.grid.points = n;
    }
    let prepared = cfg.prepare()?;
    let options = RunOptions {
        snapshot_times: Vec::new(),
        ..prepared.options.clone()
    };
    let run = simulate(
        &prepared.params,
        &prepared.spectral,
        &prepared.ic,
        &prepared.control,
        &options,
    )?;
    if let Some(b) = run.blowup {
        return Err(Error::ConvergenceAborted { level, t_blow: b.t_blow });
    }
    Ok((run.final_state.psi(&prepared.spectral), prepared.spectral))
}

/// Temporal order from `dt_levels` and spectral-tail table over `n_levels`.
///
/// Linear models are measured against their exact solution; otherwise the
/// smallest step serves as reference and is excluded from the fit. Levels run
/// concurrently, each with its own transform engine.
pub fn convergence_study(config: &RunConfig, dt_levels: &[f64], n_levels: &[usize]) -> Result<ConvergenceReport> {
    if dt_levels.len() < 3 {
        return Err(Error::config("dt_levels", "at least 3 step sizes are required"));
    }
    if let Some(bad) = dt_levels.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(Error::config("dt_levels", format!("invalid step {bad}")));
    }
    let mut dts = dt_levels.to_vec();
    dts.sort_by(|a, b| b.total_cmp(a));
    dts.dedup();
    let linear = config.params.alpha2 == 0.0 && config.params.alpha3 == 0.0;

    let runs: Vec<Result<(Vec<f64>, Spectral)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = dts
            .iter()
            .map(|&dt| scope.spawn(move || final_field(config, Some(dt), None, format!("dt = {dt}"))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("level thread panicked")).collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let (reference, temporal) = if linear {
        let prepared = config.prepare()?;
        let initial = EvolutionState::from_fields(&prepared.spectral, &prepared.ic, 0.0)?;
        let exact = linear_exact(&prepared.params, &prepared.spectral, &initial, prepared.control.t_max)
            .psi(&prepared.spectral);
        let levels: Vec<TemporalLevel> = dts
            .iter()
            .zip(&runs)
            .map(|(&dt, (psi, _))| TemporalLevel {
                dt,
                error: max_abs_diff(psi, &exact),
            })
            .collect();
        (TemporalReference::ExactLinear, levels)
    } else {
        let (finest, coarse) = runs.split_last().expect("at least three levels");
        let levels: Vec<TemporalLevel> = dts
            .iter()
            .zip(coarse)
            .map(|(&dt, (psi, _))| TemporalLevel {
                dt,
                error: max_abs_diff(psi, &finest.0),
            })
            .collect();
        (
            TemporalReference::FinestStep {
                dt: *dts.last().unwrap(),
            },
            levels,
        )
    };
    let order = fit_order(&temporal)?;

    let spatial_runs: Vec<Result<SpatialLevel>> = std::thread::scope(|scope| {
        let handles: Vec<_> = n_levels
            .iter()
            .map(|&n| {
                scope.spawn(move || {
                    let (psi, spectral) = final_field(config, None, Some(n), format!("N = {n}"))?;
                    Ok(SpatialLevel {
                        points: n,
                        spectrum_tail: spectrum_tail(&spectral, &psi)?,
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("level thread panicked")).collect()
    });
    let spatial = spatial_runs.into_iter().collect::<Result<Vec<_>>>()?;

    Ok(ConvergenceReport {
        reference,
        temporal,
        order,
        spatial,
    })
}
