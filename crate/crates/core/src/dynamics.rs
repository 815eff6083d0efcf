//! Time integration of the boundary and tracers, boundary remeshing, and the run driver.

use rayon::prelude::*;

use crate::config::{FieldMode, SimConfig};
use crate::diagnostics::{self, assemble_report, check_sv_inequality, DiagnosticsRecord, SvCheck, TheoremReport};
use crate::error::{Error, Result};
use crate::geometry::{signed_area, symmetric_difference_area, DiskSpec, PatchBoundary, MIN_NODES};
use crate::point::Vec2;
use crate::tracers::{
    good_set_membership, halton_points, occupancy_fractions, seed_points, tracers_at, winding_statistics, Tracer,
    WindingStatistics,
};
use crate::velocity::{exact_disk_velocity, ContourField};

/// Fixed-step RK4 settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub cfl: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub t_end: f64,
    pub snapshot_dt: f64,
    pub r_guard: f64,
    pub rho_min: f64,
    pub field_mode: FieldMode,
    /// Remesh the boundary after every step.
    pub remesh: bool,
}

impl IntegratorConfig {
    /// Defaults for a boundary with initial mean spacing `h0`.
    pub fn for_spacing(dt: f64, h0: f64) -> Self {
        IntegratorConfig {
            dt,
            cfl: 10.0,
            h_min: 0.5 * h0,
            h_max: 2.0 * h0,
            t_end: 0.0,
            snapshot_dt: 1.0,
            r_guard: 10.0,
            rho_min: crate::tracers::DEFAULT_RHO_MIN,
            field_mode: FieldMode::Contour,
            remesh: true,
        }
    }

    /// `dt ≤ cfl · h_min / U_max`.
    pub fn check_cfl(&self, u_max: f64) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::ConfigValidation { field: "dt".into(), message: format!("must be positive, got {}", self.dt) });
        }
        let limit = self.cfl * self.h_min / u_max.max(f64::MIN_POSITIVE);
        if self.dt > limit {
            return Err(Error::ConfigValidation {
                field: "dt".into(),
                message: format!("{} exceeds the CFL limit {limit:.3e} (U_max = {u_max:.3e}, h_min = {:.3e})", self.dt, self.h_min),
            });
        }
        Ok(())
    }
}

/// Boundary, tracers and time.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub boundary: PatchBoundary,
    pub tracers: Vec<Tracer>,
}

/// Velocities at the boundary nodes and at extra points, for a boundary given by `nodes`.
fn evaluate(mode: FieldMode, nodes: &[Vec2], points: &[Vec2]) -> (Vec<Vec2>, Vec<Vec2>) {
    match mode {
        FieldMode::Contour => {
            let field = ContourField::from_nodes(nodes);
            let on_nodes = field.node_velocities();
            let on_points = if points.is_empty() { Vec::new() } else { field.velocities(points) };
            (on_nodes, on_points)
        }
        FieldMode::ExactDisk => {
            let f = |xs: &[Vec2]| xs.par_iter().map(|&x| exact_disk_velocity(x, 1.0)).collect();
            (f(nodes), f(points))
        }
    }
}

fn axpy(x: &[Vec2], k: &[Vec2], h: f64) -> Vec<Vec2> {
    x.iter().zip(k).map(|(&a, &b)| a + b * h).collect()
}

fn rk4_combine(x: &[Vec2], k: [&[Vec2]; 4], dt: f64) -> Vec<Vec2> {
    let h = dt / 6.0;
    (0..x.len()).map(|i| x[i] + (k[0][i] + k[1][i] * 2.0 + k[2][i] * 2.0 + k[3][i]) * h).collect()
}

/// One RK4 step of the boundary alone; `dt` may be negative.
pub fn advance_boundary(nodes: &[Vec2], mode: FieldMode, dt: f64) -> Vec<Vec2> {
    let k1 = evaluate(mode, nodes, &[]).0;
    let x2 = axpy(nodes, &k1, 0.5 * dt);
    let k2 = evaluate(mode, &x2, &[]).0;
    let x3 = axpy(nodes, &k2, 0.5 * dt);
    let k3 = evaluate(mode, &x3, &[]).0;
    let x4 = axpy(nodes, &k3, dt);
    let k4 = evaluate(mode, &x4, &[]).0;
    rk4_combine(nodes, [&k1, &k2, &k3, &k4], dt)
}

fn max_radius(xs: &[Vec2]) -> f64 {
    xs.iter().map(|p| if p.x.is_finite() && p.y.is_finite() { p.norm() } else { f64::INFINITY }).fold(0.0, f64::max)
}

impl SimState {
    pub fn new(boundary: PatchBoundary, tracers: Vec<Tracer>) -> Self {
        SimState { t: 0.0, boundary, tracers }
    }

    /// Advances one RK4 step in place. Every stage re-evaluates the field of the stage
    /// boundary. On divergence the state is left untouched.
    pub fn advance(&mut self, cfg: &IntegratorConfig) -> Result<()> {
        let dt = cfg.dt;
        let n0 = self.boundary.nodes();
        let p0: Vec<Vec2> = self.tracers.iter().map(|tr| tr.x).collect();

        let (kn1, kp1) = evaluate(cfg.field_mode, n0, &p0);
        let (n2, p2) = (axpy(n0, &kn1, 0.5 * dt), axpy(&p0, &kp1, 0.5 * dt));
        let (kn2, kp2) = evaluate(cfg.field_mode, &n2, &p2);
        let (n3, p3) = (axpy(n0, &kn2, 0.5 * dt), axpy(&p0, &kp2, 0.5 * dt));
        let (kn3, kp3) = evaluate(cfg.field_mode, &n3, &p3);
        let (n4, p4) = (axpy(n0, &kn3, dt), axpy(&p0, &kp3, dt));
        let (kn4, kp4) = evaluate(cfg.field_mode, &n4, &p4);
        let nodes = rk4_combine(n0, [&kn1, &kn2, &kn3, &kn4], dt);
        let points = rk4_combine(&p0, [&kp1, &kp2, &kp3, &kp4], dt);

        let radius = max_radius(&nodes).max(max_radius(&points));
        if radius > cfg.r_guard {
            return Err(Error::Divergence { t: self.t + dt, radius, guard: cfg.r_guard });
        }

        self.tracers.par_iter_mut().enumerate().for_each(|(j, tr)| {
            tr.accumulate(&[p0[j], p2[j], p3[j], p4[j]], &[kp1[j], kp2[j], kp3[j], kp4[j]], points[j], dt, cfg.rho_min);
        });
        let boundary = PatchBoundary::from_nodes_unchecked(nodes);
        self.boundary = if cfg.remesh { remesh(&boundary, cfg.h_min, cfg.h_max) } else { boundary };
        self.t += dt;
        Ok(())
    }
}

/// Functional form of [`SimState::advance`].
pub fn step(s: &SimState, cfg: &IntegratorConfig) -> Result<SimState> {
    let mut next = s.clone();
    next.advance(cfg)?;
    Ok(next)
}

fn catmull_rom(p0: Vec2, p1: Vec2, p2: Vec2, p3: Vec2, s: f64) -> Vec2 {
    let (s2, s3) = (s * s, s * s * s);
    (p1 * 2.0 + (p2 - p0) * s + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * s2 + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * s3) * 0.5
}

const MAX_INSERT_PASSES: usize = 8;

/// Inserts nodes (cubic interpolation through the four surrounding nodes) on edges longer than
/// `h_max` and drops nodes closer than `h_min` to their predecessor when the merged edge stays
/// within `h_max`. Moved or inserted nodes are then shifted along the area gradient so the
/// signed area is unchanged. A boundary already within bounds is returned as is.
pub fn remesh(b: &PatchBoundary, h_min: f64, h_max: f64) -> PatchBoundary {
    let nodes = b.nodes();
    let n = nodes.len();
    let out_of_bounds = (0..n).any(|i| {
        let len = nodes[i].dist(nodes[(i + 1) % n]);
        len > h_max || (len < h_min && n > MIN_NODES)
    });
    if !out_of_bounds {
        return b.clone();
    }
    let target = signed_area(nodes);
    let mut pts = nodes.to_vec();
    let mut touched = vec![false; n];

    for _ in 0..MAX_INSERT_PASSES {
        let m = pts.len();
        let mut out = Vec::with_capacity(m + m / 4);
        let mut out_touched = Vec::with_capacity(m + m / 4);
        for i in 0..m {
            let (p1, p2) = (pts[i], pts[(i + 1) % m]);
            out.push(p1);
            out_touched.push(touched[i]);
            let len = p1.dist(p2);
            if len > h_max {
                let (p0, p3) = (pts[(i + m - 1) % m], pts[(i + 2) % m]);
                let pieces = (len / h_max).ceil() as usize;
                for j in 1..pieces {
                    out.push(catmull_rom(p0, p1, p2, p3, j as f64 / pieces as f64));
                    out_touched.push(true);
                }
            }
        }
        let grew = out.len() > m;
        pts = out;
        touched = out_touched;
        if !grew {
            break;
        }
    }

    let m = pts.len();
    let mut out = vec![pts[0]];
    let mut out_touched = vec![touched[0]];
    let mut mark_next = false;
    let mut count = m;
    for j in 1..m {
        let last = *out.last().unwrap();
        let next = if j + 1 < m { pts[j + 1] } else { out[0] };
        if count > MIN_NODES && last.dist(pts[j]) < h_min && last.dist(next) <= h_max {
            count -= 1;
            *out_touched.last_mut().unwrap() = true;
            if j + 1 < m {
                mark_next = true;
            } else {
                out_touched[0] = true;
            }
            continue;
        }
        out.push(pts[j]);
        out_touched.push(touched[j] || mark_next);
        mark_next = false;
    }

    let ids: Vec<usize> = (0..out.len()).filter(|&i| out_touched[i]).collect();
    if ids.is_empty() {
        return b.clone();
    }
    let m = out.len();
    for _ in 0..3 {
        let residual = target - signed_area(&out);
        if residual.abs() <= 1e-15 * target.abs() {
            break;
        }
        // dA/dp_i = ½ (p_{i+1} − p_{i−1}) rotated clockwise: the outward normal
        let grads: Vec<Vec2> = ids.iter().map(|&i| -(out[(i + 1) % m] - out[(i + m - 1) % m]).perp() * 0.5).collect();
        let norm2: f64 = grads.iter().map(|g| g.norm_sq()).sum();
        if norm2 == 0.0 {
            break;
        }
        let lambda = residual / norm2;
        for (&i, g) in ids.iter().zip(&grads) {
            out[i] += *g * lambda;
        }
    }
    PatchBoundary::from_nodes_unchecked(out)
}

/// Per-snapshot callback: the state and its diagnostics.
pub type SnapshotSink<'a> = dyn FnMut(&SimState, &DiagnosticsRecord) -> Result<()> + 'a;

/// Everything a finished run produces.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub initial: SimState,
    pub final_state: SimState,
    /// Measured `|Ω_0 △ D|`.
    pub delta: f64,
    /// `δ` used for scaling; zero when at or below the configured floor.
    pub delta_effective: f64,
    pub epsilon: f64,
    pub area0: f64,
    pub dt: f64,
    pub steps: usize,
    pub series: Vec<DiagnosticsRecord>,
    pub sv: SvCheck,
    /// `None` for a zero-length run.
    pub stats: Option<WindingStatistics>,
    pub report: Option<TheoremReport>,
    /// Largest `|2πN − Δθ|` over unflagged tracers.
    pub winding_mismatch_max: f64,
}

/// A configured experiment ready to run.
pub struct Simulation {
    cfg: SimConfig,
    integrator: IntegratorConfig,
    state: SimState,
    probes: Vec<Vec2>,
    delta: f64,
    delta_effective: f64,
    epsilon: f64,
    sv_rhs: f64,
    steps: usize,
    snapshot_every: usize,
}

impl Simulation {
    /// Builds the initial boundary and quasi-random tracers inside it.
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        Self::build(cfg, None)
    }

    /// As [`Simulation::new`] but with tracers at the given points.
    pub fn with_tracer_points(cfg: &SimConfig, points: Vec<Vec2>) -> Result<Self> {
        Self::build(cfg, Some(points))
    }

    fn build(cfg: &SimConfig, points: Option<Vec<Vec2>>) -> Result<Self> {
        cfg.validate()?;
        let boundary = cfg.initial_shape.boundary(cfg.nodes)?;
        let unit = DiskSpec::unit();
        // in exact-disk mode the field is generated by B_1 itself, so the patch is the disk
        let delta = match cfg.field_mode {
            FieldMode::Contour => symmetric_difference_area(&boundary, unit),
            FieldMode::ExactDisk => 0.0,
        };
        let delta_effective = if delta <= cfg.delta_floor { 0.0 } else { delta };
        let epsilon = match cfg.epsilon_override {
            Some(e) => e,
            None => delta_effective.powf(1.0 / 6.0),
        };
        if epsilon >= 1.0 {
            return Err(Error::ConfigValidation {
                field: "initial_shape".into(),
                message: format!("δ = {delta:.4} gives ε = δ^(1/6) = {epsilon:.4} ≥ 1; set epsilon_override"),
            });
        }
        let points = match points {
            Some(p) => p,
            None => seed_points(&boundary, cfg.tracers, cfg.seed),
        };
        let tracers = tracers_at(&points, epsilon, cfg.rho_min)?;

        let h0 = boundary.perimeter() / boundary.len() as f64;
        let (h_min, h_max) = cfg.spacing_bounds(h0);
        let steps = if cfg.t_end > 0.0 { (cfg.t_end / cfg.dt - 1e-9).ceil().max(1.0) as usize } else { 0 };
        let dt = if steps > 0 { cfg.t_end / steps as f64 } else { cfg.dt };
        let integrator = IntegratorConfig {
            dt,
            cfl: cfg.cfl,
            h_min,
            h_max,
            t_end: cfg.t_end,
            snapshot_dt: cfg.snapshot_dt,
            r_guard: cfg.r_guard,
            rho_min: cfg.rho_min,
            field_mode: cfg.field_mode,
            remesh: cfg.field_mode == FieldMode::Contour,
        };
        let (u_nodes, _) = evaluate(cfg.field_mode, boundary.nodes(), &[]);
        integrator.check_cfl(u_nodes.iter().map(|u| u.norm()).fold(0.0, f64::max))?;

        let probes = halton_points(4 * cfg.probes, cfg.seed.wrapping_add(0x9e37_79b9))
            .into_iter()
            .map(|[u, v]| Vec2::new(4.0 * u - 2.0, 4.0 * v - 2.0))
            .filter(|p| p.norm() < 2.0)
            .take(cfg.probes)
            .collect();
        let sv_rhs = diagnostics::sideris_vega_rhs(&boundary, unit);
        let snapshot_every = ((cfg.snapshot_dt / dt).round() as usize).max(1);
        Ok(Simulation {
            cfg: cfg.clone(),
            integrator,
            state: SimState::new(boundary, tracers),
            probes,
            delta,
            delta_effective,
            epsilon,
            sv_rhs,
            steps,
            snapshot_every,
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn integrator(&self) -> &IntegratorConfig {
        &self.integrator
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn snapshot(&self) -> Result<DiagnosticsRecord> {
        let s = &self.state;
        let mut rec = diagnostics::record(s.t, &s.boundary, &self.probes, self.sv_rhs)?;
        if s.t > 0.0 && !s.tracers.is_empty() {
            let mut members = 0usize;
            for tr in &s.tracers {
                let fr = occupancy_fractions(&tr.ledger, tr.ledger.elapsed())?;
                members += good_set_membership(&fr, self.epsilon, !tr.flagged()) as usize;
            }
            rec.good_set_fraction = Some(members as f64 / s.tracers.len() as f64);
        }
        Ok(rec)
    }

    /// Runs to `t_end`, calling `sink` at every snapshot (including `t = 0` and the end).
    pub fn run(mut self, sink: &mut SnapshotSink<'_>) -> Result<RunSummary> {
        let initial = self.state.clone();
        let mut series = Vec::new();
        let rec = self.snapshot()?;
        sink(&self.state, &rec)?;
        series.push(rec);
        for k in 1..=self.steps {
            self.state.advance(&self.integrator)?;
            if k == self.steps {
                // land exactly on t_end
                self.state.t = self.cfg.t_end;
            }
            if k % self.snapshot_every == 0 || k == self.steps {
                let rec = self.snapshot()?;
                sink(&self.state, &rec)?;
                series.push(rec);
            }
        }
        let sv = check_sv_inequality(&series, self.sv_rhs)?;
        let t = self.state.t;
        let stats = if t > 0.0 { Some(winding_statistics(&self.state.tracers, t)?) } else { None };
        let report = stats.as_ref().map(|s| {
            assemble_report(self.delta, self.delta_effective, self.epsilon, s, series.clone(), sv)
        });
        let winding_mismatch_max = self
            .state
            .tracers
            .iter()
            .filter(|tr| !tr.flagged())
            .map(Tracer::winding_mismatch)
            .fold(0.0, f64::max);
        Ok(RunSummary {
            initial,
            final_state: self.state,
            delta: self.delta,
            delta_effective: self.delta_effective,
            epsilon: self.epsilon,
            area0: series[0].area,
            dt: self.integrator.dt,
            steps: self.steps,
            series,
            sv,
            stats,
            report,
            winding_mismatch_max,
        })
    }
}

/// Runs a config to completion without observing snapshots.
pub fn run(cfg: &SimConfig) -> Result<RunSummary> {
    Simulation::new(cfg)?.run(&mut |_, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_disk, make_perturbed_disk};
    use std::f64::consts::PI;

    #[test]
    fn disk_boundary_rotates_by_half_dt() {
        let b = make_disk(1.0, 512).unwrap();
        let cfg = IntegratorConfig { remesh: false, ..IntegratorConfig::for_spacing(0.01, 2.0 * PI / 512.0) };
        let s = step(&SimState::new(b.clone(), vec![]), &cfg).unwrap();
        // rotation rate of the inscribed polygon differs from 1/2 by O(n^-2)
        let expect = b.rotated(0.005);
        let err = s.boundary.nodes().iter().zip(expect.nodes()).map(|(a, b)| a.dist(*b)).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        assert_eq!(s.t, 0.01);
    }

    #[test]
    fn exact_disk_tracer_period() {
        let b = make_disk(1.0, 64).unwrap();
        let tr = tracers_at(&[Vec2::new(0.5, 0.0)], 0.0, 1e-8).unwrap();
        let steps = 1257;
        let cfg = IntegratorConfig {
            field_mode: FieldMode::ExactDisk,
            remesh: false,
            ..IntegratorConfig::for_spacing(4.0 * PI / steps as f64, 0.1)
        };
        let mut s = SimState::new(b, tr);
        for _ in 0..steps {
            s.advance(&cfg).unwrap();
        }
        assert!(s.tracers[0].x.dist(Vec2::new(0.5, 0.0)) < 1e-4);
        assert!((s.tracers[0].winding - 1.0).abs() < 1e-5);
    }

    #[test]
    fn divergence_leaves_state_untouched() {
        let b = make_disk(1.0, 64).unwrap();
        let s = SimState::new(b, tracers_at(&[Vec2::new(0.5, 0.0)], 0.0, 1e-8).unwrap());
        let cfg = IntegratorConfig { field_mode: FieldMode::ExactDisk, ..IntegratorConfig::for_spacing(1000.0, 0.1) };
        let mut t = s.clone();
        assert!(matches!(t.advance(&cfg), Err(Error::Divergence { .. })));
        assert_eq!(t, s);
    }

    #[test]
    fn remesh_within_bounds_is_identity() {
        let b = make_disk(1.0, 256).unwrap();
        let h = b.spacing_range().0;
        assert_eq!(remesh(&b, 0.5 * h, 2.0 * h), b);
    }

    #[test]
    fn remesh_refines_a_long_edge() {
        let base = make_disk(1.0, 256).unwrap();
        let h0 = base.spacing_range().1;
        let (h_min, h_max) = (0.5 * h0, 2.0 * h0);
        // stretch one edge to 3 h_max by deleting the nodes inside it
        let mut nodes = base.into_nodes();
        let span = (3.0 * h_max / h0).round() as usize;
        nodes.drain(1..span);
        let b = PatchBoundary::new(nodes).unwrap();
        assert!(b.spacing_range().1 > 2.5 * h_max);
        let r = remesh(&b, h_min, h_max);
        assert!(r.len() > b.len());
        assert!(r.spacing_range().1 <= h_max);
        assert!((r.signed_area() - b.signed_area()).abs() < 1e-8 * b.signed_area());
    }

    #[test]
    fn remesh_coarsens_crowded_nodes() {
        let base = make_perturbed_disk(3, 0.1, 200).unwrap();
        let mut nodes = base.nodes().to_vec();
        let (a, c) = (nodes[10], nodes[11]);
        for k in 1..6 {
            nodes.insert(10 + k, a + (c - a) * (k as f64 / 6.0));
        }
        let b = PatchBoundary::new(nodes).unwrap();
        let (lo, hi) = base.spacing_range();
        let r = remesh(&b, 0.5 * lo, 2.0 * hi);
        assert!(r.len() < b.len());
        assert!((r.signed_area() - b.signed_area()).abs() < 1e-8 * b.signed_area());
    }

    #[test]
    fn reversibility() {
        let b = make_perturbed_disk(2, 0.05, 128).unwrap();
        let mut x = b.nodes().to_vec();
        let dt = 0.05;
        for _ in 0..20 {
            x = advance_boundary(&x, FieldMode::Contour, dt);
        }
        for _ in 0..20 {
            x = advance_boundary(&x, FieldMode::Contour, -dt);
        }
        let err = x.iter().zip(b.nodes()).map(|(a, b)| a.dist(*b)).fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn zero_length_run_is_initial_data() {
        let cfg = SimConfig { t_end: 0.0, tracers: 20, nodes: 128, probes: 10, ..SimConfig::default() };
        let mut count = 0;
        let s = Simulation::new(&cfg).unwrap().run(&mut |_, _| {
            count += 1;
            Ok(())
        });
        let s = s.unwrap();
        assert_eq!(count, 1);
        assert_eq!(s.final_state, s.initial);
        assert!(s.report.is_none());
    }
}
