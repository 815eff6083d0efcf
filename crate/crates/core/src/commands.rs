//! `run`, `sweep` and `verify` subcommands. Each returns a process exit code.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{FieldMode, InitialShape, SimConfig};
use crate::diagnostics::{conserved_quantities, TheoremReport, SV_TOLERANCE};
use crate::dynamics::{RunSummary, Simulation};
use crate::error::{Error, Result};
use crate::geometry::{make_disk, make_ellipse, make_perturbed_disk, symmetric_difference_area, DiskSpec, PatchBoundary};
use crate::output::{report_json, series_csv, tracer_csv, write_atomic, SnapshotWriter};
use crate::point::Vec2;
use crate::tracers::halton_points;
use crate::velocity::{contour_velocity, exact_disk_velocity, radial_probes, AreaQuadrature};

/// Exit code for a numerical blow-up.
pub const EXIT_DIVERGENCE: i32 = 2;
/// Exit code for configuration, input and other failures.
pub const EXIT_FAILURE: i32 = 1;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        _ => EXIT_FAILURE,
    }
}

/// Reads a config file and applies `key=value` overrides.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<SimConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let mut cfg = SimConfig::parse(&text)?;
    for o in overrides {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one experiment and writes `config.txt`, `snapshots.csv`, `series.csv`, `tracers.csv`
/// and `report.json` into the configured output directory.
pub fn execute_run(cfg: &SimConfig) -> Result<RunSummary> {
    let sim = Simulation::new(cfg)?;
    let mut snapshots = SnapshotWriter::default();
    let summary = sim.run(&mut |state, _| {
        snapshots.push(state);
        Ok(())
    })?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    write_atomic(&dir.join("config.txt"), cfg.to_text().as_bytes())?;
    write_atomic(&dir.join("snapshots.csv"), snapshots.as_str().as_bytes())?;
    write_atomic(&dir.join("series.csv"), series_csv(&summary.series).as_bytes())?;
    if summary.final_state.t > 0.0 {
        let csv = tracer_csv(&summary.final_state.tracers, summary.final_state.t)?;
        write_atomic(&dir.join("tracers.csv"), csv.as_bytes())?;
    }
    if let Some(report) = &summary.report {
        write_atomic(&dir.join("report.json"), report_json(report)?.as_bytes())?;
    }
    Ok(summary)
}

fn print_summary(cfg: &SimConfig, s: &RunSummary) {
    println!(
        "{}: δ = {:.6e}, ε = {:.4}, {} steps of dt = {:.6}, T = {}",
        cfg.initial_shape, s.delta, s.epsilon, s.steps, s.dt, s.final_state.t
    );
    if let Some(st) = &s.stats {
        println!(
            "good set {:.4}, |N/T − 1/4π| q50 {:.3e} q90 {:.3e} q99 {:.3e}, flagged {}, SV ratio {:.4}",
            st.good_set_fraction, st.dev_q50, st.dev_q90, st.dev_q99, st.flagged, s.sv.max_ratio
        );
    }
    println!("wrote {}", cfg.output_dir.display());
}

pub fn cmd_run(path: &Path, overrides: &[String]) -> i32 {
    let result = load_config(path, overrides).and_then(|cfg| execute_run(&cfg).map(|s| (cfg, s)));
    match result {
        Ok((cfg, s)) => {
            print_summary(&cfg, &s);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Amplitude `η` of `perturbed(mode, η)` whose discretized `|Ω_0 △ D|` equals `delta`.
pub fn eta_for_delta(mode: u32, delta: f64, nodes: usize) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::ConfigValidation { field: "deltas".into(), message: format!("δ must be nonnegative, got {delta}") });
    }
    if delta == 0.0 {
        return Ok(0.0);
    }
    let sd = |eta: f64| -> Result<f64> { Ok(symmetric_difference_area(&make_perturbed_disk(mode, eta, nodes)?, DiskSpec::unit())) };
    let (mut lo, mut hi) = (0.0, 0.49);
    if sd(hi)? < delta {
        return Err(Error::ConfigValidation {
            field: "deltas".into(),
            message: format!("δ = {delta} is beyond the largest admissible perturbation"),
        });
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if sd(mid)? < delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Deviations at or below this count as zero in the sweep verdict.
pub const DEGENERATE_DEVIATION: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub eta: f64,
    pub output_dir: PathBuf,
    pub report: TheoremReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    /// Points ordered by increasing measured δ.
    pub points: Vec<SweepPoint>,
    pub verdict: String,
    /// `dev_q90` strictly decreases as `δ` decreases; `None` when degenerate.
    pub dev_q90_monotone: Option<bool>,
    pub delta_strictly_increasing: bool,
    pub good_set_fraction_at_smallest_delta: f64,
    pub max_sv_ratio: f64,
    pub c_sqrt_delta_max: Option<f64>,
    pub c_quarter_max: Option<f64>,
    pub c_twelfth_max: Option<f64>,
}

/// Sweep amplitudes from an explicit `η` list or by inverting a `δ` list.
pub enum SweepAxis {
    Deltas(Vec<f64>),
    Etas(Vec<f64>),
}

fn sweep_mode(base: &SimConfig) -> u32 {
    match base.initial_shape {
        InitialShape::Perturbed { mode, .. } => mode,
        _ => 2,
    }
}

/// Runs one `perturbed(m, η)` experiment per sweep point, each in `output_dir/point_k`, and
/// writes `sweep.json` next to them.
pub fn execute_sweep(base: &SimConfig, axis: &SweepAxis) -> Result<SweepSummary> {
    let mode = sweep_mode(base);
    let etas = match axis {
        SweepAxis::Etas(e) => e.clone(),
        SweepAxis::Deltas(d) => d.iter().map(|&d| eta_for_delta(mode, d, base.nodes)).collect::<Result<_>>()?,
    };
    if etas.len() < 2 {
        return Err(Error::ConfigValidation {
            field: "deltas".into(),
            message: format!("a sweep needs at least 2 points, got {}", etas.len()),
        });
    }
    let mut points = Vec::with_capacity(etas.len());
    for (k, &eta) in etas.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.initial_shape = InitialShape::Perturbed { mode, amplitude: eta };
        cfg.output_dir = base.output_dir.join(format!("point_{k}"));
        let s = execute_run(&cfg)?;
        let report = s.report.ok_or_else(|| Error::ConfigValidation {
            field: "t_end".into(),
            message: "a sweep needs t_end > 0".into(),
        })?;
        points.push(SweepPoint { eta, output_dir: cfg.output_dir, report });
    }
    let summary = summarize_sweep(points);
    fs::create_dir_all(&base.output_dir)?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    write_atomic(&base.output_dir.join("sweep.json"), json.as_bytes())?;
    Ok(summary)
}

/// Orders points by `δ` and forms the verdicts.
pub fn summarize_sweep(mut points: Vec<SweepPoint>) -> SweepSummary {
    points.sort_by(|a, b| a.report.delta.total_cmp(&b.report.delta));
    let degenerate = points.iter().all(|p| p.report.dev_q90 <= DEGENERATE_DEVIATION);
    let delta_strictly_increasing = points.windows(2).all(|w| w[0].report.delta < w[1].report.delta);
    let monotone = points.windows(2).all(|w| w[0].report.dev_q90 < w[1].report.dev_q90);
    let verdict = if degenerate {
        "degenerate: all deviations ≈ 0".to_string()
    } else if monotone && delta_strictly_increasing {
        "dev_q90 strictly decreasing as δ decreases".to_string()
    } else {
        "not monotone: dev_q90 does not strictly decrease with δ".to_string()
    };
    let max_opt = |f: fn(&TheoremReport) -> Option<f64>| {
        points.iter().filter_map(|p| f(&p.report)).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    };
    SweepSummary {
        verdict,
        dev_q90_monotone: (!degenerate).then_some(monotone),
        delta_strictly_increasing,
        good_set_fraction_at_smallest_delta: points[0].report.good_set_fraction,
        max_sv_ratio: points.iter().map(|p| p.report.sv_max_ratio).fold(0.0, f64::max),
        c_sqrt_delta_max: max_opt(|r| r.c_sqrt_delta),
        c_quarter_max: max_opt(|r| r.c_quarter),
        c_twelfth_max: max_opt(|r| r.c_twelfth),
        points,
    }
}

pub fn cmd_sweep(path: &Path, axis: &SweepAxis, overrides: &[String]) -> i32 {
    let result = load_config(path, overrides).and_then(|cfg| execute_sweep(&cfg, axis));
    match result {
        Ok(s) => {
            for p in &s.points {
                println!(
                    "η = {:.5}  δ = {:.5e}  ε = {:.4}  good set {:.4}  dev_q90 {:.4e}  SV ratio {:.4}",
                    p.eta, p.report.delta, p.report.epsilon, p.report.good_set_fraction, p.report.dev_q90, p.report.sv_max_ratio
                );
            }
            println!("verdict: {}", s.verdict);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Velocity field under test in `verify`.
pub type VelocityKernel = fn(&PatchBoundary, Vec2) -> Vec2;

#[derive(Clone, Copy)]
pub struct VerifyOptions {
    /// Lower resolutions with widened tolerances.
    pub fast: bool,
    pub kernel: VelocityKernel,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { fast: false, kernel: contour_velocity }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    /// `value ≤ tolerance` for upper bounds, `value ≥ tolerance` otherwise.
    pub lower_bound: bool,
    pub passed: bool,
}

fn upper(name: &'static str, value: f64, tolerance: f64) -> CheckResult {
    CheckResult { name, value, tolerance, lower_bound: false, passed: value <= tolerance }
}

fn lower(name: &'static str, value: f64, tolerance: f64) -> CheckResult {
    CheckResult { name, value, tolerance, lower_bound: true, passed: value >= tolerance }
}

fn disk_probes(count: usize, radius: f64) -> Vec<Vec2> {
    halton_points(4 * count, 17)
        .into_iter()
        .map(|[u, v]| Vec2::new(radius * (2.0 * u - 1.0), radius * (2.0 * v - 1.0)))
        .filter(|p| p.norm() < radius)
        .take(count)
        .collect()
}

fn max_error(b: &PatchBoundary, probes: &[Vec2], kernel: VelocityKernel, exact: impl Fn(Vec2) -> Vec2) -> f64 {
    probes.iter().map(|&x| (kernel(b, x) - exact(x)).norm()).fold(0.0, f64::max)
}

/// The built-in oracle suite, stopping at the first failure.
pub fn run_checks(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let fast = opts.fast;
    let kernel = opts.kernel;
    let mut out: Vec<CheckResult> = Vec::new();
    macro_rules! push {
        ($c:expr) => {{
            let c = $c;
            let failed = !c.passed;
            out.push(c);
            if failed {
                return Ok(out);
            }
        }};
    }

    let n = if fast { 256 } else { 1024 };
    let probes = disk_probes(if fast { 40 } else { 100 }, 1.8);
    let disk = make_disk(1.0, n)?;
    let disk_exact = |x| exact_disk_velocity(x, 1.0);
    push!(upper("disk-rotation", max_error(&disk, &probes, kernel, disk_exact), if fast { 1e-3 } else { 1e-4 }));

    let radial = radial_probes();
    let coarse = max_error(&make_disk(1.0, n / 2)?, &radial, kernel, disk_exact);
    let fine = max_error(&disk, &radial, kernel, disk_exact);
    push!(lower("quadrature-order", coarse / fine, 3.5));

    let resolution = if fast { 512 } else { 1024 };
    let oracle_probes = disk_probes(if fast { 10 } else { 30 }, 1.5);
    let mut worst: f64 = 0.0;
    for b in [make_ellipse(1.05, 1.0 / 1.05, n)?, make_perturbed_disk(2, 0.05, n)?] {
        let q = AreaQuadrature::new(&b, resolution)?;
        for &x in &oracle_probes {
            let o = q.velocity(x);
            worst = worst.max((kernel(&b, x) - o.velocity).norm());
        }
    }
    push!(upper("contour-vs-quadrature", worst, if fast { 1e-2 } else { 2e-3 }));

    let steps = if fast { 252 } else { 1257 };
    let cfg = SimConfig {
        initial_shape: InitialShape::Disk { radius: 1.0 },
        nodes: 64,
        dt: 4.0 * PI / steps as f64,
        t_end: 4.0 * PI,
        snapshot_dt: 4.0 * PI,
        field_mode: FieldMode::ExactDisk,
        probes: 8,
        ..SimConfig::default()
    };
    let s = Simulation::with_tracer_points(&cfg, vec![Vec2::new(0.5, 0.0)])?.run(&mut |_, _| Ok(()))?;
    push!(upper("exact-disk-winding", (s.final_state.tracers[0].winding - 1.0).abs(), if fast { 1e-4 } else { 1e-5 }));

    let t_end = if fast { 2.0 } else { 5.0 };
    let cfg = SimConfig {
        initial_shape: InitialShape::Perturbed { mode: 2, amplitude: 0.05 },
        nodes: if fast { 256 } else { 512 },
        tracers: if fast { 200 } else { 1000 },
        dt: if fast { 0.05 } else { 0.025 },
        t_end,
        snapshot_dt: 1.0,
        probes: 50,
        ..SimConfig::default()
    };
    let s = Simulation::new(&cfg)?.run(&mut |_, _| Ok(()))?;
    push!(upper("sideris-vega", s.sv.max_ratio, 1.0 + SV_TOLERANCE));
    let q0 = conserved_quantities(&s.initial.boundary);
    let q1 = conserved_quantities(&s.final_state.boundary);
    let area_tol = if fast { 1e-4 } else { 1e-5 };
    push!(upper("area-drift", (q1.area - q0.area).abs() / q0.area / t_end, area_tol));
    push!(upper("centroid-drift", q1.centroid.dist(q0.centroid) / t_end, area_tol));
    push!(upper("angular-impulse-drift", (q1.angular_impulse - q0.angular_impulse).abs() / q0.angular_impulse, 1e-4));
    push!(upper("winding-consistency", s.winding_mismatch_max, 1e-3 * (1.0 + t_end)));
    Ok(out)
}

pub fn cmd_verify(opts: &VerifyOptions) -> i32 {
    match run_checks(opts) {
        Ok(checks) => {
            println!("{:<24} {:>12} {:>12}  status", "check", "value", "tolerance");
            for c in &checks {
                let rel = if c.lower_bound { "≥" } else { "≤" };
                println!(
                    "{:<24} {:>12.4e} {rel}{:>11.4e}  {}",
                    c.name,
                    c.value,
                    c.tolerance,
                    if c.passed { "ok" } else { "FAILED" }
                );
            }
            if opts.fast {
                println!("fast mode: reduced resolution, widened tolerances");
            }
            match checks.iter().find(|c| !c.passed) {
                Some(c) => {
                    eprintln!("verification failed: {}", c.name);
                    EXIT_FAILURE
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
