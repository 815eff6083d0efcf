use std::f64::consts::PI;

use patchwind::config::{FieldMode, InitialShape, SimConfig};
use patchwind::diagnostics::conserved_quantities;
use patchwind::dynamics::{advance_boundary, run, IntegratorConfig, SimState, Simulation};
use patchwind::geometry::{make_ellipse, make_perturbed_disk, PatchBoundary};
use patchwind::Vec2;

fn ellipse_residual(nodes: &[Vec2], a: f64, b: f64, angle: f64) -> f64 {
    nodes
        .iter()
        .map(|p| {
            let q = p.rotate(-angle);
            ((q.x / a).powi(2) + (q.y / b).powi(2)).sqrt() - 1.0
        })
        .map(f64::abs)
        .fold(0.0, f64::max)
}

/// Golden-section minimisation of the residual over the rotation angle.
fn fit_rotation(nodes: &[Vec2], a: f64, b: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0, PI / 2.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if ellipse_residual(nodes, a, b, m1) < ellipse_residual(nodes, a, b, m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let angle = 0.5 * (lo + hi);
    (angle, ellipse_residual(nodes, a, b, angle))
}

#[test]
fn kirchhoff_ellipse_rotates_rigidly() {
    let (a, b) = (1.05, 1.0 / 1.05);
    let boundary = make_ellipse(a, b, 1024).unwrap();
    let h0 = boundary.perimeter() / 1024.0;
    let cfg = IntegratorConfig::for_spacing(0.02, h0);
    let mut s = SimState::new(boundary, vec![]);
    for _ in 0..50 {
        s.advance(&cfg).unwrap();
    }
    let (angle, residual) = fit_rotation(s.boundary.nodes(), a, b);
    let rate = angle / s.t;
    println!("Kirchhoff ellipse: fitted rate {rate:.6}, residual {residual:.3e}");
    assert!(residual < 1e-3);
    assert!(rate > 0.2 && rate < 0.3);
}

fn perturbed_after(dt: f64, steps: usize) -> Vec<Vec2> {
    let mut x = make_perturbed_disk(3, 0.1, 256).unwrap().into_nodes();
    for _ in 0..steps {
        x = advance_boundary(&x, FieldMode::Contour, dt);
    }
    x
}

fn max_dist(a: &[Vec2], b: &[Vec2]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.dist(*q)).fold(0.0, f64::max)
}

#[test]
fn time_step_convergence() {
    let reference = perturbed_after(0.0125, 80);
    let coarse = max_dist(&perturbed_after(0.1, 10), &reference);
    let fine = max_dist(&perturbed_after(0.05, 20), &reference);
    println!("t = 1 errors: dt = 0.1 {coarse:.3e}, dt = 0.05 {fine:.3e}, ratio {:.2}", coarse / fine);
    assert!(coarse / fine >= 12.0);
}

#[test]
fn reversibility_to_t_one() {
    let x0 = make_perturbed_disk(2, 0.05, 256).unwrap().into_nodes();
    let mut x = x0.clone();
    for _ in 0..20 {
        x = advance_boundary(&x, FieldMode::Contour, 0.05);
    }
    for _ in 0..20 {
        x = advance_boundary(&x, FieldMode::Contour, -0.05);
    }
    assert!(max_dist(&x, &x0) < 1e-5);
}

fn perturbed_cfg(t_end: f64) -> SimConfig {
    SimConfig {
        initial_shape: InitialShape::Perturbed { mode: 2, amplitude: 0.05 },
        nodes: 1024,
        tracers: 100,
        dt: 0.025,
        t_end,
        snapshot_dt: 1.0,
        probes: 20,
        ..SimConfig::default()
    }
}

#[test]
fn long_run_conserves_area_and_centroid() {
    let s = run(&perturbed_cfg(20.0)).unwrap();
    let q0 = conserved_quantities(&s.initial.boundary);
    let area_drift = s.series.iter().map(|r| (r.area - q0.area).abs() / q0.area).fold(0.0, f64::max);
    let centroid = s.series.iter().map(|r| r.centroid.norm()).fold(0.0, f64::max);
    let impulse = s
        .series
        .iter()
        .map(|r| (r.angular_impulse - q0.angular_impulse).abs() / q0.angular_impulse)
        .fold(0.0, f64::max);
    println!("t = 20: area drift {area_drift:.3e}, centroid {centroid:.3e}, impulse drift {impulse:.3e}");
    // area drift per unit time stays under 1e-5
    for r in &s.series[1..] {
        assert!((r.area - q0.area).abs() / q0.area < 1e-5 * r.t);
        assert!(r.centroid.dist(q0.centroid) < 1e-5 * r.t);
    }
    assert!(area_drift < 1e-4);
    assert!(impulse < 1e-4);
    assert!(s.sv.holds);
}

#[test]
fn disk_run_returns_after_one_period() {
    let cfg = SimConfig {
        nodes: 1024,
        tracers: 200,
        dt: 0.02,
        t_end: 4.0 * PI,
        snapshot_dt: 4.0 * PI,
        probes: 20,
        ..SimConfig::default()
    };
    let s = run(&cfg).unwrap();
    assert!((s.final_state.t - 4.0 * PI).abs() < 1e-12);
    let worst = s
        .final_state
        .tracers
        .iter()
        .zip(&s.initial.tracers)
        .map(|(a, b)| a.x.dist(b.x))
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn runs_are_deterministic_and_snapshot_on_schedule() {
    let cfg = SimConfig { t_end: 2.0, snapshot_dt: 0.5, nodes: 256, ..perturbed_cfg(2.0) };
    let mut times = Vec::new();
    let a = Simulation::new(&cfg)
        .unwrap()
        .run(&mut |s, _| {
            times.push(s.t);
            Ok(())
        })
        .unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a.final_state, b.final_state);
    assert_eq!(a.series, b.series);
    assert_eq!(times.len(), 5);
    assert!((times[4] - 2.0).abs() < 1e-12);
}

#[test]
fn stretched_boundary_stays_resolved() {
    // a strongly perturbed patch filaments; remeshing keeps spacing bounded
    let cfg = SimConfig {
        initial_shape: InitialShape::Perturbed { mode: 3, amplitude: 0.3 },
        nodes: 512,
        tracers: 10,
        dt: 0.025,
        t_end: 4.0,
        probes: 10,
        epsilon_override: Some(0.5),
        ..SimConfig::default()
    };
    let sim = Simulation::new(&cfg).unwrap();
    let (h_min, h_max) = (sim.integrator().h_min, sim.integrator().h_max);
    let s = sim.run(&mut |_, _| Ok(())).unwrap();
    let b: &PatchBoundary = &s.final_state.boundary;
    let (lo, hi) = b.spacing_range();
    println!("stretched patch: {} nodes, spacing [{lo:.3e}, {hi:.3e}], bounds [{h_min:.3e}, {h_max:.3e}]", b.len());
    assert!(hi <= h_max * (1.0 + 1e-9));
    assert!(lo >= h_min * (1.0 - 1e-9));
    assert!(b.is_simple());
    let q0 = conserved_quantities(&s.initial.boundary);
    assert!((b.signed_area() - q0.area).abs() / q0.area < 1e-4);
}

#[test]
fn huge_step_fails_the_cfl_check() {
    let cfg = SimConfig { dt: 1.0, ..perturbed_cfg(2.0) };
    assert!(matches!(Simulation::new(&cfg), Err(patchwind::Error::ConfigValidation { field, .. }) if field == "dt"));
}
