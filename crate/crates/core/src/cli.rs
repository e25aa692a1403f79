//! Command-line surface. Exit codes: 0 success, 1 I/O or internal failure,
//! 2 configuration error, 3 blow-up (outputs and manifest still written).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{convergence_study, growth_rate, perturbed_ic, traveling_wave_slopes, PerturbationSpec};
use crate::config::{Preset, PreparedRun, RunConfig, RunManifest};
use crate::error::{Error, Result};
use crate::integrator::{simulate, simulate_observed, RunResult, Stepper};
use crate::model::{band_edge, group_velocity, kdv_omega, omega_squared, phase_velocity, FieldPair};
use crate::output::{
    fmt_num, twave_row, write_diagnostics, write_gamma, write_snapshots, write_table, DISPERSION_HEADER,
    SPATIAL_HEADER, SPECTRUM_HEADER, TEMPORAL_HEADER, TWAVE_HEADER,
};
use crate::plot::{render_plot, PlotInput, PlotKind, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dispwave", version, about = "Pseudospectral laboratory for a nonlinear dispersive wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full run: diagnostics, snapshots, manifest and optional plots.
    Simulate(RunArgs),
    /// Base and perturbed runs side by side with the growth-rate series.
    Perturb(RunArgs),
    /// Dispersion relation, group/phase velocity and KdV comparison over a k range.
    Dispersion(DispersionArgs),
    /// Traveling-wave slope catalog over a range of speeds.
    Twave(TwaveArgs),
    /// Final-time Fourier spectrum of a run.
    Spectrum(RunArgs),
    /// Temporal order and spectral-resolution report.
    Converge(ConvergeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Fig1,
    Fig2,
    Fig5,
    Fig5Text,
    Blowup,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Fig1 => Preset::Fig1,
            PresetArg::Fig2 => Preset::Fig2,
            PresetArg::Fig5 => Preset::Fig5,
            PresetArg::Fig5Text => Preset::Fig5Text,
            PresetArg::Blowup => Preset::Blowup,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct RunArgs {
    /// TOML run configuration, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    #[arg(long, allow_negative_numbers = true)]
    alpha1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha3: Option<f64>,
    #[arg(long)]
    sigma: Option<u32>,
    /// Half-length of the periodic domain [-L, L).
    #[arg(long = "L")]
    half_length: Option<f64>,
    /// Number of grid points.
    #[arg(long = "N")]
    points: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    no_dealias: bool,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kp: Option<f64>,
    /// Use the half-increment fourth-stage Runge-Kutta variant.
    #[arg(long)]
    half_increment_stepper: bool,
    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,
}

#[derive(Debug, Args)]
struct DispersionArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 0.0)]
    k_min: f64,
    /// Upper end of the k range; defaults to just inside the band edge (or 2).
    #[arg(long)]
    k_max: Option<f64>,
    #[arg(long, default_value_t = 101)]
    k_count: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    kdv_alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    kdv_beta: f64,
}

#[derive(Debug, Args)]
struct TwaveArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Single wave speed; overrides the range.
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c_min: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    c_max: f64,
    #[arg(long, default_value_t = 31)]
    c_count: usize,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated step sizes (at least three).
    #[arg(long, value_delimiter = ',', default_values_t = [2e-2, 1e-2, 5e-3, 2.5e-3, 1e-4])]
    dt_levels: Vec<f64>,
    /// Comma-separated grid sizes for the spectral-tail table.
    #[arg(long, value_delimiter = ',', default_values_t = [256usize, 512, 1024])]
    n_levels: Vec<usize>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(p)) => Preset::from(p).config(),
            (None, None) => Preset::Fig1.config(),
        };
        let p = &mut cfg.params;
        if let Some(v) = self.alpha1 {
            p.alpha1 = v;
        }
        if let Some(v) = self.alpha2 {
            p.alpha2 = v;
        }
        if let Some(v) = self.alpha3 {
            p.alpha3 = v;
        }
        if let Some(v) = self.sigma {
            p.sigma = v;
        }
        if let Some(v) = self.half_length {
            cfg.grid.half_length = v;
        }
        if let Some(v) = self.points {
            cfg.grid.points = v;
        }
        if let Some(v) = self.dt {
            cfg.control.dt = Some(v);
        }
        if let Some(v) = self.tmax {
            cfg.control.t_max = v;
            cfg.outputs.snapshot_times.retain(|&t| t <= v);
        }
        if self.no_dealias {
            cfg.dealias = false;
        }
        if self.half_increment_stepper {
            cfg.control.stepper = Stepper::HalfIncrement;
        }
        if self.eps.is_some() || self.kp.is_some() {
            let base = cfg.perturbation.unwrap_or(PerturbationSpec { eps: 1e-3, k_p: 2.0 });
            cfg.perturbation = Some(PerturbationSpec {
                eps: self.eps.unwrap_or(base.eps),
                k_p: self.kp.unwrap_or(base.k_p),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Perturb(a) => cmd_perturb(a),
        Command::Dispersion(a) => cmd_dispersion(a),
        Command::Twave(a) => cmd_twave(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Converge(a) => cmd_converge(a),
    };
    match outcome {
        Ok(Outcome::Completed) => EXIT_OK,
        Ok(Outcome::BlowUp(t)) => {
            eprintln!("blow-up detected at t = {t}");
            EXIT_BLOWUP
        }
        Err(e @ Error::Config { .. }) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

enum Outcome {
    Completed,
    BlowUp(f64),
}

fn outcome_of(run: &RunResult) -> Outcome {
    match run.blowup {
        Some(b) => Outcome::BlowUp(b.t_blow),
        None => Outcome::Completed,
    }
}

fn write_manifest(out: &Path, command: &str, cfg: &RunConfig, prepared: &PreparedRun, run: &RunResult) -> Result<()> {
    let manifest = RunManifest::new(command, cfg, prepared.derived, run.blowup);
    let path = out.join("manifest.json");
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    std::fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))
}

fn run_prepared(prepared: &PreparedRun) -> Result<RunResult> {
    simulate(
        &prepared.params,
        &prepared.spectral,
        &prepared.ic,
        &prepared.control,
        &prepared.options,
    )
}

fn conserved_plot(run: &RunResult) -> PlotInput {
    let rows = &run.diagnostics.rows;
    PlotInput::Curves {
        title: "Mass and energy".into(),
        x_label: "t".into(),
        y_label: "value".into(),
        series: vec![
            Series {
                label: "mass".into(),
                points: rows.iter().map(|r| (r.t, r.mass)).collect(),
            },
            Series {
                label: "energy".into(),
                points: rows.iter().map(|r| (r.t, r.energy)).collect(),
            },
        ],
    }
}

/// Final-time `(k, |psi_hat| dx)` sorted by `k`.
fn spectrum_table(prepared: &PreparedRun, run: &RunResult) -> Vec<(f64, f64)> {
    let dx = prepared.spectral.grid().dx();
    let mut rows: Vec<(f64, f64)> = prepared
        .spectral
        .wavenumbers()
        .iter()
        .zip(&run.final_state.psi_hat)
        .map(|(&k, c)| (k, c.norm() * dx))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    rows
}

fn cmd_simulate(args: &RunArgs) -> Result<Outcome> {
    let cfg = args.config()?;
    let prepared = cfg.prepare()?;
    let run = run_prepared(&prepared)?;
    let out = &args.out;
    write_diagnostics(&run.diagnostics, &out.join(&cfg.outputs.diagnostics))?;
    write_snapshots(&run.snapshots, prepared.spectral.grid(), &out.join(&cfg.outputs.snapshots))?;
    if args.plots {
        let plots = out.join(&cfg.outputs.plots);
        if !run.snapshots.is_empty() {
            let field = PlotInput::Field {
                title: "psi(t, x)".into(),
                x: prepared.spectral.grid().nodes(),
                times: run.snapshots.iter().map(|s| s.t).collect(),
                values: run.snapshots.iter().map(|s| s.psi.clone()).collect(),
            };
            render_plot(PlotKind::Heatmap, &field, &plots.join("heatmap.svg"))?;
            let lines = PlotInput::Curves {
                title: "Snapshots".into(),
                x_label: "x".into(),
                y_label: "psi".into(),
                series: run
                    .snapshots
                    .iter()
                    .map(|s| Series {
                        label: format!("t = {:.3}", s.t),
                        points: prepared.spectral.grid().nodes().into_iter().zip(s.psi.iter().copied()).collect(),
                    })
                    .collect(),
            };
            render_plot(PlotKind::Lines, &lines, &plots.join("snapshots.svg"))?;
        }
        render_plot(PlotKind::Lines, &conserved_plot(&run), &plots.join("conserved.svg"))?;
        if run.blowup.is_none() {
            let spec = PlotInput::Curves {
                title: "Final-time spectrum".into(),
                x_label: "k".into(),
                y_label: "|psi_hat|".into(),
                series: vec![Series {
                    label: "|psi_hat|".into(),
                    points: spectrum_table(&prepared, &run),
                }],
            };
            render_plot(PlotKind::Spectrum, &spec, &plots.join("spectrum.svg"))?;
        }
    }
    write_manifest(out, "simulate", &cfg, &prepared, &run)?;
    let last = run.diagnostics.rows.last().expect("at least the initial row");
    println!(
        "steps {} t {} energy {} mass {} max|psi| {}",
        run.steps,
        last.t,
        fmt_num(last.energy),
        fmt_num(last.mass),
        fmt_num(last.max_abs)
    );
    Ok(outcome_of(&run))
}

fn cmd_perturb(args: &RunArgs) -> Result<Outcome> {
    let mut cfg = args.config()?;
    let spec = *cfg.perturbation.get_or_insert(PerturbationSpec { eps: 1e-3, k_p: 2.0 });
    let prepared = cfg.prepare()?;
    let (psi_pert, _) = perturbed_ic(&prepared.ic.psi, prepared.spectral.grid(), &spec)?;
    let perturbed_ic = FieldPair::new(psi_pert, prepared.ic.psi_t.clone())?;

    let observe = |ic: &FieldPair| {
        let mut fields: Vec<(f64, Vec<f64>)> = Vec::new();
        let run = simulate_observed(
            &prepared.params,
            &prepared.spectral,
            ic,
            &prepared.control,
            &prepared.options,
            |state, psi| fields.push((state.t, psi.to_vec())),
        );
        run.map(|r| (r, fields))
    };
    let (base, pert) = std::thread::scope(|s| {
        let b = s.spawn(|| observe(&prepared.ic));
        let p = s.spawn(|| observe(&perturbed_ic));
        (b.join().expect("base run panicked"), p.join().expect("perturbed run panicked"))
    });
    let (base_run, base_fields) = base?;
    let (pert_run, pert_fields) = pert?;

    let grid = prepared.spectral.grid();
    let gamma = base_fields
        .iter()
        .zip(&pert_fields)
        .map(|((t, b), (_, p))| Ok((*t, growth_rate(p, b, grid)?)))
        .collect::<Result<Vec<_>>>()?;

    let out = &args.out;
    write_diagnostics(&base_run.diagnostics, &out.join(&cfg.outputs.diagnostics))?;
    write_diagnostics(&pert_run.diagnostics, &out.join("diagnostics_perturbed.csv"))?;
    write_gamma(&gamma, &out.join("gamma.csv"))?;
    write_snapshots(&pert_run.snapshots, grid, &out.join(&cfg.outputs.snapshots))?;
    if args.plots {
        let input = PlotInput::Curves {
            title: "Growth rate".into(),
            x_label: "t".into(),
            y_label: "gamma".into(),
            series: vec![Series {
                label: "gamma".into(),
                points: gamma.clone(),
            }],
        };
        render_plot(PlotKind::Gamma, &input, &out.join(&cfg.outputs.plots).join("gamma.svg"))?;
    }
    // the perturbed run defines the reported outcome when only it blows up
    let reported = if base_run.blowup.is_some() { &base_run } else { &pert_run };
    write_manifest(out, "perturb", &cfg, &prepared, reported)?;
    if let Some((g0, gmax)) = gamma.first().map(|g| (g.1, gamma.iter().map(|g| g.1).fold(f64::MIN, f64::max))) {
        println!(
            "snapped k_p {} gamma(0) {} max gamma {}",
            fmt_num(prepared.derived.snapped_k_p.unwrap_or(spec.k_p)),
            fmt_num(g0),
            fmt_num(gmax)
        );
    }
    Ok(outcome_of(reported))
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| if i + 1 == count { hi } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 })
            .collect(),
    }
}

fn cmd_dispersion(args: &DispersionArgs) -> Result<Outcome> {
    let cfg = args.run.config()?;
    let params = cfg.params;
    let k_max = args
        .k_max
        .unwrap_or_else(|| band_edge(&params).map(|e| 0.99 * e).unwrap_or(2.0));
    if !(k_max > args.k_min) || args.k_count < 2 {
        return Err(Error::config("k range", "need k_max > k_min and at least 2 points"));
    }
    let ks = linspace(args.k_min, k_max, args.k_count);
    let rows: Vec<String> = ks
        .iter()
        .map(|&k| {
            let opt = |r: Result<f64>| r.ok().map(fmt_num).unwrap_or_default();
            format!(
                "{},{},{},{},{}",
                fmt_num(k),
                fmt_num(omega_squared(&params, k)),
                opt(group_velocity(&params, k)),
                opt(phase_velocity(&params, k)),
                fmt_num(kdv_omega(args.kdv_alpha, args.kdv_beta, k))
            )
        })
        .collect();
    write_table(&args.run.out.join("dispersion.csv"), DISPERSION_HEADER, rows)?;
    if args.run.plots {
        let input = PlotInput::Curves {
            title: "Dispersion relation".into(),
            x_label: "k".into(),
            y_label: "omega".into(),
            series: vec![
                Series {
                    label: "model".into(),
                    points: ks
                        .iter()
                        .filter(|&&k| omega_squared(&params, k) >= 0.0)
                        .map(|&k| (k, omega_squared(&params, k).sqrt()))
                        .collect(),
                },
                Series {
                    label: "KdV".into(),
                    points: ks.iter().map(|&k| (k, kdv_omega(args.kdv_alpha, args.kdv_beta, k))).collect(),
                },
            ],
        };
        render_plot(
            PlotKind::Dispersion,
            &input,
            &args.run.out.join(&cfg.outputs.plots).join("dispersion.svg"),
        )?;
    }
    println!("band edge {}", band_edge(&params).map(fmt_num).unwrap_or_else(|| "none".into()));
    Ok(Outcome::Completed)
}

fn cmd_twave(args: &TwaveArgs) -> Result<Outcome> {
    let cfg = args.run.config()?;
    let speeds = match args.c {
        Some(c) => vec![c],
        None => linspace(args.c_min, args.c_max, args.c_count),
    };
    if speeds.is_empty() {
        return Err(Error::config("c_count", "need at least one wave speed"));
    }
    let rows: Vec<String> = speeds
        .iter()
        .map(|&c| twave_row(&traveling_wave_slopes(&cfg.params, c)))
        .collect();
    for r in &rows {
        println!("{r}");
    }
    write_table(&args.run.out.join("twave.csv"), TWAVE_HEADER, rows)?;
    Ok(Outcome::Completed)
}

fn cmd_spectrum(args: &RunArgs) -> Result<Outcome> {
    let cfg = args.config()?;
    let prepared = cfg.prepare()?;
    let run = run_prepared(&prepared)?;
    let table = spectrum_table(&prepared, &run);
    write_table(
        &args.out.join("spectrum.csv"),
        SPECTRUM_HEADER,
        table.iter().map(|(k, a)| format!("{},{}", fmt_num(*k), fmt_num(*a))),
    )?;
    if args.plots {
        let input = PlotInput::Curves {
            title: format!("Fourier modes at t = {}", run.final_state.t),
            x_label: "k".into(),
            y_label: "|psi_hat|".into(),
            series: vec![Series {
                label: "|psi_hat|".into(),
                points: table,
            }],
        };
        render_plot(PlotKind::Spectrum, &input, &args.out.join(&cfg.outputs.plots).join("spectrum.svg"))?;
    }
    write_manifest(&args.out, "spectrum", &cfg, &prepared, &run)?;
    if let Some(last) = run.diagnostics.rows.last() {
        println!("spectrum tail at t = {}: {}", last.t, fmt_num(last.spectrum_tail));
    }
    Ok(outcome_of(&run))
}

fn cmd_converge(args: &ConvergeArgs) -> Result<Outcome> {
    let cfg = args.run.config()?;
    let report = convergence_study(&cfg, &args.dt_levels, &args.n_levels)?;
    let out = &args.run.out;
    write_table(
        &out.join("convergence.csv"),
        TEMPORAL_HEADER,
        report.temporal.iter().map(|l| format!("{},{}", fmt_num(l.dt), fmt_num(l.error))),
    )?;
    write_table(
        &out.join("spatial.csv"),
        SPATIAL_HEADER,
        report.spatial.iter().map(|l| format!("{},{}", l.points, fmt_num(l.spectrum_tail))),
    )?;
    let path = out.join("convergence.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    println!("temporal order {:.4}", report.order);
    Ok(Outcome::Completed)
}
