//! First-order spectral system `psi_hat_t = v_hat`, `v_hat_t = F[psi_tt]`,
//! advanced with four-stage Runge-Kutta.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{diagnostics_row, DiagnosticsRow, DiagnosticsSeries};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Spectral};
use crate::model::{acceleration_hat, FieldPair, ModelParams};

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;

/// Time plus transforms of `psi` and `psi_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub t: f64,
    pub psi_hat: Vec<Complex64>,
    pub v_hat: Vec<Complex64>,
}

impl EvolutionState {
    pub fn from_fields(spectral: &Spectral, fields: &FieldPair, t: f64) -> Result<Self> {
        Ok(EvolutionState {
            t,
            psi_hat: spectral.forward(&fields.psi)?,
            v_hat: spectral.forward(&fields.psi_t)?,
        })
    }

    pub fn zero(n: usize) -> Self {
        EvolutionState {
            t: 0.0,
            psi_hat: vec![Complex64::new(0.0, 0.0); n],
            v_hat: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn psi(&self, spectral: &Spectral) -> Vec<f64> {
        spectral.inverse_unchecked(&self.psi_hat)
    }

    pub fn psi_t(&self, spectral: &Spectral) -> Vec<f64> {
        spectral.inverse_unchecked(&self.v_hat)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self
                .psi_hat
                .iter()
                .chain(&self.v_hat)
                .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub dt: f64,
    pub t_max: f64,
    pub snapshot_stride: usize,
    pub blowup_threshold: f64,
}

impl StepControl {
    pub fn new(dt: f64, t_max: f64, snapshot_stride: usize, blowup_threshold: f64) -> Result<Self> {
        let c = StepControl {
            dt,
            t_max,
            snapshot_stride,
            blowup_threshold,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("control.dt", format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(Error::config(
                "control.t_max",
                format!("t_max must be non-negative, got {}", self.t_max),
            ));
        }
        if self.t_max > 0.0 && self.dt > self.t_max {
            return Err(Error::config(
                "control.dt",
                format!("dt = {} exceeds t_max = {}", self.dt, self.t_max),
            ));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::config("control.snapshot_stride", "stride must be at least 1"));
        }
        if !(self.blowup_threshold.is_finite() && self.blowup_threshold > 0.0) {
            return Err(Error::config(
                "control.blowup_threshold",
                "threshold must be positive and finite",
            ));
        }
        Ok(())
    }
}

/// Fastest frequency of the dispersion relation on the grid,
/// `sqrt(|a1| k_max^2 + 3 |a2| k_max^4)`.
pub fn omega_cap(params: &ModelParams, grid: &GridSpec) -> f64 {
    let k = grid.k_max();
    (params.alpha1.abs() * k * k + 3.0 * params.alpha2.abs() * k.powi(4)).sqrt()
}

/// `0.25 / omega_cap`; falls back to `0.25 dx` when both linear coefficients vanish.
pub fn default_dt(params: &ModelParams, grid: &GridSpec) -> f64 {
    let cap = omega_cap(params, grid);
    if cap > 0.0 {
        0.25 / cap
    } else {
        0.25 * grid.dx()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stepper {
    /// Classical RK4.
    #[default]
    Classical,
    /// Variant whose fourth stage re-uses half increments. Only first-order
    /// accurate.
    HalfIncrement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowupTrigger {
    Overflow,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blowup {
    pub t_blow: f64,
    pub trigger: BlowupTrigger,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub psi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub dealias: bool,
    pub stepper: Stepper,
    /// Times at which `psi` is captured; the step schedule lands on each exactly.
    pub snapshot_times: Vec<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            dealias: true,
            stepper: Stepper::Classical,
            snapshot_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_state: EvolutionState,
    pub diagnostics: DiagnosticsSeries,
    pub snapshots: Vec<Snapshot>,
    pub blowup: Option<Blowup>,
    pub steps: usize,
}

/// Time derivative of the spectral system.
pub fn rhs(
    params: &ModelParams,
    spectral: &Spectral,
    state: &EvolutionState,
    dealias_on: bool,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let d_v_hat = acceleration_hat(params, spectral, &state.psi_hat, dealias_on)?;
    Ok((state.v_hat.clone(), d_v_hat))
}

fn axpy(base: &[Complex64], scale: f64, incr: &[Complex64]) -> Vec<Complex64> {
    base.iter().zip(incr).map(|(b, d)| b + d * scale).collect()
}

fn runge_kutta(
    params: &ModelParams,
    spectral: &Spectral,
    state: &EvolutionState,
    dt: f64,
    dealias_on: bool,
    last_stage: f64,
) -> Result<EvolutionState> {
    let accel = |psi_hat: &[Complex64]| acceleration_hat(params, spectral, psi_hat, dealias_on);
    let psi = &state.psi_hat;
    let v = &state.v_hat;

    let k1 = v.clone();
    let l1 = accel(psi)?;
    let k2 = axpy(v, 0.5 * dt, &l1);
    let l2 = accel(&axpy(psi, 0.5 * dt, &k1))?;
    let k3 = axpy(v, 0.5 * dt, &l2);
    let l3 = accel(&axpy(psi, 0.5 * dt, &k2))?;
    let k4 = axpy(v, last_stage * dt, &l3);
    let l4 = accel(&axpy(psi, last_stage * dt, &k3))?;

    let combine = |base: &[Complex64], a: &[Complex64], b: &[Complex64], c: &[Complex64], d: &[Complex64]| {
        (0..base.len())
            .map(|j| base[j] + (a[j] + (b[j] + c[j]) * 2.0 + d[j]) * (dt / 6.0))
            .collect::<Vec<_>>()
    };
    let next = EvolutionState {
        t: state.t + dt,
        psi_hat: combine(psi, &k1, &k2, &k3, &k4),
        v_hat: combine(v, &l1, &l2, &l3, &l4),
    };
    if let Some(index) = next
        .psi_hat
        .iter()
        .chain(&next.v_hat)
        .position(|c| !(c.re.is_finite() && c.im.is_finite()))
    {
        return Err(Error::NumericalState {
            context: "runge-kutta update",
            index: index % spectral.len(),
        });
    }
    Ok(next)
}

/// One classical RK4 step.
pub fn rk4_step(
    params: &ModelParams,
    spectral: &Spectral,
    state: &EvolutionState,
    dt: f64,
    dealias_on: bool,
) -> Result<EvolutionState> {
    if !(dt > 0.0) {
        return Err(Error::config("dt", "step must be positive"));
    }
    runge_kutta(params, spectral, state, dt, dealias_on, 1.0)
}

/// One step of the half-increment fourth-stage variant.
pub fn half_increment_step(
    params: &ModelParams,
    spectral: &Spectral,
    state: &EvolutionState,
    dt: f64,
    dealias_on: bool,
) -> Result<EvolutionState> {
    if !(dt > 0.0) {
        return Err(Error::config("dt", "step must be positive"));
    }
    runge_kutta(params, spectral, state, dt, dealias_on, 0.5)
}

pub fn detect_blowup(state: &EvolutionState, spectral: &Spectral, threshold: f64) -> Option<BlowupTrigger> {
    if !state.is_finite() {
        return Some(BlowupTrigger::NonFinite);
    }
    let psi = state.psi(spectral);
    let mut peak = 0.0f64;
    for v in &psi {
        if !v.is_finite() {
            return Some(BlowupTrigger::NonFinite);
        }
        peak = peak.max(v.abs());
    }
    (peak > threshold).then_some(BlowupTrigger::Overflow)
}

pub fn simulate(
    params: &ModelParams,
    spectral: &Spectral,
    ic: &FieldPair,
    control: &StepControl,
    options: &RunOptions,
) -> Result<RunResult> {
    simulate_observed(params, spectral, ic, control, options, |_, _| {})
}

/// [`simulate`], calling `observer(state, psi)` at every diagnostics record.
pub fn simulate_observed<F>(
    params: &ModelParams,
    spectral: &Spectral,
    ic: &FieldPair,
    control: &StepControl,
    options: &RunOptions,
    mut observer: F,
) -> Result<RunResult>
where
    F: FnMut(&EvolutionState, &[f64]),
{
    params.validate()?;
    control.validate()?;
    if ic.psi.len() != spectral.len() || ic.psi_t.len() != spectral.len() {
        return Err(Error::Contract(format!(
            "initial data has {} samples, grid has {}",
            ic.psi.len(),
            spectral.len()
        )));
    }
    let mut wanted: Vec<f64> = Vec::with_capacity(options.snapshot_times.len());
    for &t in &options.snapshot_times {
        if !(t.is_finite() && (0.0..=control.t_max).contains(&t)) {
            return Err(Error::config(
                "outputs.snapshot_times",
                format!("snapshot time {t} outside [0, {}]", control.t_max),
            ));
        }
        wanted.push(t);
    }
    wanted.sort_by(f64::total_cmp);
    wanted.dedup();

    // Times the schedule must hit exactly.
    let mut events: Vec<f64> = wanted.iter().copied().filter(|&t| t > 0.0).collect();
    if control.t_max > 0.0 && events.last() != Some(&control.t_max) {
        events.push(control.t_max);
    }

    let mut state = EvolutionState::from_fields(spectral, ic, 0.0)?;
    let mut rows: Vec<DiagnosticsRow> = Vec::new();
    let mut snapshots = Vec::new();

    let mut record = |state: &EvolutionState, rows: &mut Vec<DiagnosticsRow>| -> Result<Vec<f64>> {
        let psi = state.psi(spectral);
        rows.push(diagnostics_row(params, spectral, state)?);
        observer(state, &psi);
        Ok(psi)
    };

    let psi0 = record(&state, &mut rows)?;
    if wanted.first() == Some(&0.0) {
        snapshots.push(Snapshot { t: 0.0, psi: psi0 });
    }
    if let Some(trigger) = detect_blowup(&state, spectral, control.blowup_threshold) {
        return Ok(RunResult {
            final_state: state,
            diagnostics: DiagnosticsSeries { rows },
            snapshots,
            blowup: Some(Blowup { t_blow: 0.0, trigger }),
            steps: 0,
        });
    }

    let mut steps = 0usize;
    let mut blowup = None;
    let mut last_recorded_step = 0usize;
    for target in events {
        while state.t < target {
            let remaining = target - state.t;
            let lands = remaining <= control.dt * (1.0 + 1e-9);
            let h = if lands { remaining } else { control.dt };
            let stepped = match options.stepper {
                Stepper::Classical => rk4_step(params, spectral, &state, h, options.dealias),
                Stepper::HalfIncrement => half_increment_step(params, spectral, &state, h, options.dealias),
            };
            steps += 1;
            let mut next = match stepped {
                Ok(next) => next,
                Err(Error::NumericalState { .. }) => {
                    let t_blow = if lands { target } else { state.t + h };
                    rows.push(DiagnosticsRow::blown_up(t_blow));
                    blowup = Some(Blowup {
                        t_blow,
                        trigger: BlowupTrigger::NonFinite,
                    });
                    break;
                }
                Err(e) => return Err(e),
            };
            if lands {
                next.t = target;
            }
            state = next;

            if let Some(trigger) = detect_blowup(&state, spectral, control.blowup_threshold) {
                match trigger {
                    BlowupTrigger::Overflow => {
                        rows.push(diagnostics_row(params, spectral, &state)?);
                    }
                    BlowupTrigger::NonFinite => rows.push(DiagnosticsRow::blown_up(state.t)),
                }
                blowup = Some(Blowup {
                    t_blow: state.t,
                    trigger,
                });
                break;
            }

            let is_final = lands && target == control.t_max;
            if steps % control.snapshot_stride == 0 || is_final {
                record(&state, &mut rows)?;
                last_recorded_step = steps;
            }
            if lands && wanted.contains(&target) {
                snapshots.push(Snapshot {
                    t: target,
                    psi: state.psi(spectral),
                });
            }
        }
        if blowup.is_some() {
            break;
        }
    }
    debug_assert!(blowup.is_some() || last_recorded_step == steps);

    Ok(RunResult {
        final_state: state,
        diagnostics: DiagnosticsSeries { rows },
        snapshots,
        blowup,
        steps,
    })
}

/// Exact solution of the semi-discrete linear system (`a2 = a3 = 0`), mode by mode.
pub fn linear_exact(
    params: &ModelParams,
    spectral: &Spectral,
    initial: &EvolutionState,
    t: f64,
) -> EvolutionState {
    let k = spectral.wavenumbers();
    let mut psi_hat = Vec::with_capacity(k.len());
    let mut v_hat = Vec::with_capacity(k.len());
    for ((p, v), &k) in initial.psi_hat.iter().zip(&initial.v_hat).zip(k) {
        let w2 = params.alpha1 * k * k;
        let (c, s_over_w, w_s) = if w2 > 0.0 {
            let w = w2.sqrt();
            ((w * t).cos(), (w * t).sin() / w, -w * (w * t).sin())
        } else if w2 < 0.0 {
            let g = (-w2).sqrt();
            ((g * t).cosh(), (g * t).sinh() / g, g * (g * t).sinh())
        } else {
            (1.0, t, 0.0)
        };
        psi_hat.push(p * c + v * s_over_w);
        v_hat.push(p * w_s + v * c);
    }
    EvolutionState {
        t: initial.t + t,
        psi_hat,
        v_hat,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::symmetry_defect;
    use std::f64::consts::PI;

    fn engine(l: f64, n: usize) -> Spectral {
        Spectral::new(GridSpec::new(l, n).unwrap())
    }

    fn focusing() -> ModelParams {
        ModelParams::new(1.0, 1.0, 1.0, 2).unwrap()
    }

    fn gaussian(s: &Spectral) -> FieldPair {
        FieldPair::at_rest(s.grid().nodes().iter().map(|x| (-x * x).exp()).collect()).unwrap()
    }

    #[test]
    fn zero_state_rhs_and_step() {
        let s = engine(PI, 16);
        let z = EvolutionState::zero(16);
        let (a, b) = rhs(&focusing(), &s, &z, true).unwrap();
        assert!(a.iter().chain(&b).all(|c| c.norm() == 0.0));
        let next = rk4_step(&focusing(), &s, &z, 0.1, true).unwrap();
        assert_eq!(next.t, 0.1);
        assert_eq!(next.psi_hat, z.psi_hat);
        assert_eq!(next.v_hat, z.v_hat);
    }

    #[test]
    fn rhs_on_single_cosine() {
        let s = engine(PI, 16);
        let x = s.grid().nodes();
        let cos: Vec<f64> = x.iter().map(|x| x.cos()).collect();
        let state = EvolutionState::from_fields(&s, &FieldPair::at_rest(cos.clone()).unwrap(), 0.0).unwrap();
        let (dp, dv) = rhs(&ModelParams::new(1.0, 0.0, 0.0, 2).unwrap(), &s, &state, true).unwrap();
        assert_eq!(dp, state.v_hat);
        let minus: Vec<f64> = cos.iter().map(|v| -v).collect();
        let expect = s.forward(&minus).unwrap();
        for (a, b) in dv.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn rhs_linear_is_diagonal() {
        let s = engine(3.0, 32);
        let x = s.grid().nodes();
        let psi: Vec<f64> = x.iter().map(|x| (-x * x).exp() * (1.0 + 0.3 * x)).collect();
        let state = EvolutionState::from_fields(&s, &FieldPair::at_rest(psi).unwrap(), 0.0).unwrap();
        let params = ModelParams::new(2.5, 0.0, 0.0, 3).unwrap();
        let (_, dv) = rhs(&params, &s, &state, false).unwrap();
        for ((d, p), k) in dv.iter().zip(&state.psi_hat).zip(s.wavenumbers()) {
            assert_eq!(*d, p * (-2.5 * k * k));
        }
    }

    #[test]
    fn linear_single_step_error_scales_like_dt5() {
        let s = engine(PI, 16);
        let params = ModelParams::new(1.0, 0.0, 0.0, 2).unwrap();
        let x = s.grid().nodes();
        let ic = FieldPair::at_rest(x.iter().map(|x| x.cos()).collect()).unwrap();
        let state = EvolutionState::from_fields(&s, &ic, 0.0).unwrap();
        let err_for = |dt: f64| {
            let next = rk4_step(&params, &s, &state, dt, true).unwrap();
            next.psi(&s)
                .iter()
                .zip(&x)
                .map(|(v, x)| (v - dt.cos() * x.cos()).abs())
                .fold(0.0, f64::max)
        };
        let e1 = err_for(0.1);
        let e2 = err_for(0.05);
        // local error of RK4 on cos(t): t^5/120
        assert!(e1 <= 1e-5 / 120.0 * 1.01, "{e1}");
        assert!((e1 / e2).log2() > 4.8, "{e1} {e2}");
    }

    #[test]
    fn blowup_predicate() {
        let s = engine(PI, 16);
        let mut z = EvolutionState::zero(16);
        assert_eq!(detect_blowup(&z, &s, 1e6), None);
        z.v_hat[3] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(detect_blowup(&z, &s, 1e6), Some(BlowupTrigger::NonFinite));
        let big = FieldPair::at_rest(s.grid().nodes().iter().map(|x| 2e6 * x.cos()).collect()).unwrap();
        let st = EvolutionState::from_fields(&s, &big, 0.0).unwrap();
        assert_eq!(detect_blowup(&st, &s, 1e6), Some(BlowupTrigger::Overflow));
    }

    #[test]
    fn zero_horizon_is_one_evaluation() {
        let s = engine(30.0, 256);
        let control = StepControl::new(1e-3, 0.0, 10, 1e6).unwrap();
        let run = simulate(&focusing(), &s, &gaussian(&s), &control, &RunOptions::default()).unwrap();
        assert_eq!(run.steps, 0);
        assert_eq!(run.diagnostics.rows.len(), 1);
        assert!(run.blowup.is_none());
    }

    #[test]
    fn schedule_lands_on_events() {
        let s = engine(30.0, 256);
        let control = StepControl::new(0.03, 0.1, 2, 1e6).unwrap();
        let opts = RunOptions {
            snapshot_times: vec![0.0, 0.05, 0.1],
            ..RunOptions::default()
        };
        let run = simulate(&focusing(), &s, &gaussian(&s), &control, &opts).unwrap();
        let t: Vec<f64> = run.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(t, vec![0.0, 0.05, 0.1]);
        assert_eq!(run.final_state.t, 0.1);
        let rows = &run.diagnostics.rows;
        assert_eq!(rows.last().unwrap().t, 0.1);
        assert!(rows.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn snapshot_outside_horizon_rejected() {
        let s = engine(30.0, 64);
        let control = StepControl::new(0.01, 0.1, 2, 1e6).unwrap();
        let opts = RunOptions {
            snapshot_times: vec![0.2],
            ..RunOptions::default()
        };
        assert!(matches!(
            simulate(&focusing(), &s, &gaussian(&s), &control, &opts),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn control_validation() {
        assert!(StepControl::new(0.0, 1.0, 1, 1e6).is_err());
        assert!(StepControl::new(2.0, 1.0, 1, 1e6).is_err());
        assert!(StepControl::new(0.1, 1.0, 0, 1e6).is_err());
        assert!(StepControl::new(0.1, 1.0, 1, -1.0).is_err());
    }

    #[test]
    fn reality_is_preserved_each_step() {
        let s = engine(30.0, 256);
        let mut state = EvolutionState::from_fields(&s, &gaussian(&s), 0.0).unwrap();
        for _ in 0..200 {
            state = rk4_step(&focusing(), &s, &state, 5e-3, true).unwrap();
            assert!(symmetry_defect(&state.psi_hat) < 1e-8);
            assert!(symmetry_defect(&state.v_hat) < 1e-8);
        }
    }

    #[test]
    fn exact_linear_solution_of_cosine() {
        let s = engine(PI, 16);
        let params = ModelParams::new(4.0, 0.0, 0.0, 2).unwrap();
        let ic = FieldPair::at_rest(s.grid().nodes().iter().map(|x| x.cos()).collect()).unwrap();
        let st = EvolutionState::from_fields(&s, &ic, 0.0).unwrap();
        let later = linear_exact(&params, &s, &st, 0.7);
        for (v, x) in later.psi(&s).iter().zip(s.grid().nodes()) {
            assert!((v - (1.4f64).cos() * x.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn default_step_from_frequency_cap() {
        let g = GridSpec::new(30.0, 1024).unwrap();
        let cap = omega_cap(&focusing(), &g);
        let k = g.k_max();
        assert!((cap - (k * k + 3.0 * k.powi(4)).sqrt()).abs() < 1e-9);
        assert!((default_dt(&focusing(), &g) * cap - 0.25).abs() < 1e-15);
    }
}
