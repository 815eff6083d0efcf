//! Conserved quantities, the Sideris–Vega stability functional, and the run report.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{symmetric_difference_area, symmetric_difference_radial_sup, DiskSpec, PatchBoundary};
use crate::point::Vec2;
use crate::tracers::{ball_threshold, occupancy_fractions, Tracer, WindingStatistics};
use crate::velocity::{max_deviation_from_disk, ContourField};

/// Slack allowed on the Sideris–Vega ratio for discretization error.
pub const SV_TOLERANCE: f64 = 0.05;

/// Below this, `|Ω_t △ B_r|²` counts as zero.
const SV_ZERO: f64 = 1e-12;

/// Area, centroid and angular impulse `∫_Ω |x|²` of a patch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConservedQuantities {
    pub area: f64,
    pub centroid: Vec2,
    pub angular_impulse: f64,
}

/// Exact polygon moments by Green's theorem.
pub fn conserved_quantities(b: &PatchBoundary) -> ConservedQuantities {
    let (mut a, mut mx, mut my, mut ixx, mut iyy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, q) in b.edges() {
        let c = p.cross(q);
        a += c;
        mx += c * (p.x + q.x);
        my += c * (p.y + q.y);
        ixx += c * (p.x * p.x + p.x * q.x + q.x * q.x);
        iyy += c * (p.y * p.y + p.y * q.y + q.y * q.y);
    }
    let area = 0.5 * a;
    ConservedQuantities {
        area,
        centroid: Vec2::new(mx / (6.0 * area), my / (6.0 * area)),
        angular_impulse: (ixx + iyy) / 12.0,
    }
}

/// `4π · sup_{Ω_0 △ B_r} ||x|² − r²| · |Ω_0 △ B_r|`.
pub fn sideris_vega_rhs(b0: &PatchBoundary, disk: DiskSpec) -> f64 {
    4.0 * PI * symmetric_difference_radial_sup(b0, disk) * symmetric_difference_area(b0, disk)
}

/// Diagnostics of one snapshot.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub area: f64,
    pub centroid: Vec2,
    pub angular_impulse: f64,
    /// `|Ω_t △ D|`.
    pub sym_diff_vs_d: f64,
    /// `max_probes |u − u_D|`.
    pub vel_dev_max: f64,
    pub sv_rhs: f64,
    /// Good-set fraction `|H_t|/|Ω_0|` estimated at this time; undefined at `t = 0`.
    pub good_set_fraction: Option<f64>,
    pub nodes: usize,
}

/// Snapshot diagnostics against the unit disk.
pub fn record(t: f64, b: &PatchBoundary, probes: &[Vec2], sv_rhs: f64) -> Result<DiagnosticsRecord> {
    let q = conserved_quantities(b);
    let field = ContourField::new(b);
    let vel_dev_max = max_deviation_from_disk(probes, |x| field.velocity(x))?;
    Ok(DiagnosticsRecord {
        t,
        area: q.area,
        centroid: q.centroid,
        angular_impulse: q.angular_impulse,
        sym_diff_vs_d: symmetric_difference_area(b, DiskSpec::unit()),
        vel_dev_max,
        sv_rhs,
        good_set_fraction: None,
        nodes: b.len(),
    })
}

/// Outcome of the Sideris–Vega check over a record series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SvCheck {
    pub holds: bool,
    /// `max_t |Ω_t △ B_r|² / RHS`; zero when both sides vanish.
    pub max_ratio: f64,
}

/// Checks `|Ω_t △ B_r|² ≤ (1 + tol)·RHS` at every record.
pub fn check_sv_inequality(series: &[DiagnosticsRecord], rhs: f64) -> Result<SvCheck> {
    if series.is_empty() {
        return Err(invalid("Sideris–Vega check needs at least one record"));
    }
    let sd2 = series.iter().map(|r| r.sym_diff_vs_d * r.sym_diff_vs_d).fold(0.0, f64::max);
    if !(rhs > 0.0) {
        if sd2 > SV_ZERO {
            return Err(Error::Inconsistency(format!(
                "Sideris–Vega bound is {rhs} but |Ω_t △ B_r|² reaches {sd2}"
            )));
        }
        return Ok(SvCheck { holds: true, max_ratio: 0.0 });
    }
    let max_ratio = sd2 / rhs;
    Ok(SvCheck { holds: max_ratio <= 1.0 + SV_TOLERANCE || sd2 <= SV_ZERO, max_ratio })
}

/// Per-radius checks of the occupancy lemma and Markov's inequality over a tracer cloud.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancyCheck {
    pub i: usize,
    pub radius: f64,
    /// Tracer mean of `G_i^T`.
    pub mean: f64,
    /// One-sigma sampling error of `mean`.
    pub sigma: f64,
    /// `π r² / |Ω_0|`.
    pub area_bound: f64,
    pub area_bound_holds: bool,
    /// Fraction of tracers with `G_i^T ≥ (2^{-i}ε)^{3/2}`.
    pub tail_fraction: f64,
    pub threshold: f64,
    pub markov_sigma: f64,
    pub markov_holds: bool,
}

fn mean_and_sigma(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

/// Occupancy of each tracked ball `B_{2^{-i}ε}` against `π r²/|Ω_0|`, and the Markov tail bound,
/// each allowed 3 sampling sigma.
pub fn occupancy_checks(tracers: &[Tracer], t: f64, area0: f64) -> Result<Vec<OccupancyCheck>> {
    let Some(first) = tracers.first() else {
        return Err(Error::EmptyStatistics);
    };
    let epsilon = first.ledger.epsilon();
    let fractions: Vec<_> = tracers.iter().map(|tr| occupancy_fractions(&tr.ledger, t)).collect::<Result<_>>()?;
    let depth = fractions[0].balls.len();
    let mut out = Vec::with_capacity(depth);
    for i in 0..depth {
        let g: Vec<f64> = fractions.iter().map(|f| f.balls[i]).collect();
        let radius = epsilon * 0.5f64.powi(i as i32);
        let threshold = ball_threshold(i, epsilon);
        let (mean, sigma) = mean_and_sigma(&g);
        let area_bound = PI * radius * radius / area0;
        // Markov: thr·P(G ≥ thr) ≤ E[G]; test the mean of thr·1{G ≥ thr} − G
        let slack: Vec<f64> = g.iter().map(|&x| if x >= threshold { threshold - x } else { -x }).collect();
        let (slack_mean, markov_sigma) = mean_and_sigma(&slack);
        let tail_fraction = g.iter().filter(|&&x| x >= threshold).count() as f64 / g.len() as f64;
        out.push(OccupancyCheck {
            i,
            radius,
            mean,
            sigma,
            area_bound,
            area_bound_holds: mean <= area_bound + 3.0 * sigma + 1e-12,
            tail_fraction,
            threshold,
            markov_sigma,
            markov_holds: slack_mean <= 3.0 * markov_sigma + 1e-12,
        });
    }
    Ok(out)
}

/// Theorem-verification summary. Serializes to the report JSON.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub delta: f64,
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub good_set_fraction: f64,
    pub dev_q50: f64,
    pub dev_q90: f64,
    pub dev_q99: f64,
    /// `max_t |Ω_t △ D| / √δ`.
    pub c_sqrt_delta: Option<f64>,
    /// `max_t vel_dev / δ^{1/4}`.
    pub c_quarter: Option<f64>,
    /// `dev_q90 / δ^{1/12}`.
    pub c_twelfth: Option<f64>,
    pub sv_max_ratio: f64,
    pub flagged: usize,
    #[serde(skip)]
    pub series: Vec<DiagnosticsRecord>,
}

/// Builds the report. `delta_effective` is the `δ` used for scaling (zero for an exact disk);
/// the empirical constants are omitted when it is zero.
pub fn assemble_report(
    delta: f64,
    delta_effective: f64,
    epsilon: f64,
    stats: &WindingStatistics,
    series: Vec<DiagnosticsRecord>,
    sv: SvCheck,
) -> TheoremReport {
    let scaled = |value: f64, power: f64| (delta_effective > 0.0).then(|| value / delta_effective.powf(power));
    let max_sd = series.iter().map(|r| r.sym_diff_vs_d).fold(0.0, f64::max);
    let max_vd = series.iter().map(|r| r.vel_dev_max).fold(0.0, f64::max);
    TheoremReport {
        delta,
        epsilon,
        t: stats.t,
        good_set_fraction: stats.good_set_fraction,
        dev_q50: stats.dev_q50,
        dev_q90: stats.dev_q90,
        dev_q99: stats.dev_q99,
        c_sqrt_delta: scaled(max_sd, 0.5),
        c_quarter: scaled(max_vd, 0.25),
        c_twelfth: scaled(stats.dev_q90, 1.0 / 12.0),
        sv_max_ratio: sv.max_ratio,
        flagged: stats.flagged,
        series,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        make_disk, make_ellipse, symmetric_difference_monte_carlo, symmetric_difference_radial_sup_monte_carlo,
    };

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn disk_moments() {
        let q = conserved_quantities(&make_disk(1.0, 4096).unwrap());
        assert!(rel(q.area, PI) < 1e-5);
        assert!(q.centroid.norm() < 1e-12);
        assert!(rel(q.angular_impulse, PI / 2.0) < 1e-5);
        let q = conserved_quantities(&make_disk(2.0, 4096).unwrap());
        assert!(rel(q.area, 4.0 * PI) < 1e-5);
        assert!(rel(q.angular_impulse, 8.0 * PI) < 1e-5);
    }

    #[test]
    fn ellipse_moments_against_grid_quadrature() {
        let b = make_ellipse(2.0, 1.0, 4096).unwrap();
        let q = conserved_quantities(&b);
        // midpoint rule on the ellipse indicator
        let n = 2000;
        let (hx, hy) = (4.0 / n as f64, 2.0 / n as f64);
        let mut acc = 0.0;
        for i in 0..n {
            let x = -2.0 + (i as f64 + 0.5) * hx;
            for j in 0..n {
                let y = -1.0 + (j as f64 + 0.5) * hy;
                if x * x / 4.0 + y * y < 1.0 {
                    acc += (x * x + y * y) * hx * hy;
                }
            }
        }
        assert!(rel(acc, 2.5 * PI) < 1e-3, "{acc}");
        assert!(rel(q.angular_impulse, 2.5 * PI) < 1e-4);
        assert!(rel(q.area, 2.0 * PI) < 1e-5);
    }

    #[test]
    fn sv_rhs_closed_forms() {
        let d = DiskSpec::unit();
        assert!(sideris_vega_rhs(&make_disk(1.0, 4096).unwrap(), d) < 1e-9);
        let b = make_disk(1.1, 8192).unwrap();
        let expect = 4.0 * PI * PI * 0.21f64.powi(2);
        assert!(rel(sideris_vega_rhs(&b, d), expect) < 1e-3, "{}", sideris_vega_rhs(&b, d));
    }

    #[test]
    fn sv_rhs_ellipse_vs_monte_carlo() {
        let b = make_ellipse(1.05, 1.0 / 1.05, 2048).unwrap();
        let d = DiskSpec::unit();
        let exact = sideris_vega_rhs(&b, d);
        let area = symmetric_difference_monte_carlo(&b, d, 4_000_000, 11);
        let sup = symmetric_difference_radial_sup_monte_carlo(&b, d, 4_000_000, 12);
        let mc = 4.0 * PI * sup * area.area;
        assert!(rel(mc, exact) < 0.01, "mc {mc} exact {exact}");
    }

    fn series(sd: &[f64]) -> Vec<DiagnosticsRecord> {
        sd.iter()
            .enumerate()
            .map(|(k, &s)| DiagnosticsRecord {
                t: k as f64,
                area: PI,
                centroid: Vec2::ZERO,
                angular_impulse: PI / 2.0,
                sym_diff_vs_d: s,
                vel_dev_max: 0.0,
                sv_rhs: 0.0,
                good_set_fraction: None,
                nodes: 64,
            })
            .collect()
    }

    #[test]
    fn sv_check_paths() {
        let ok = check_sv_inequality(&series(&[0.1, 0.12, 0.11]), 0.02).unwrap();
        assert!(ok.holds);
        assert!((ok.max_ratio - 0.72).abs() < 1e-12);
        let doubled = check_sv_inequality(&series(&[0.2, 0.24, 0.22]), 0.02).unwrap();
        assert!(!doubled.holds);
        assert!(check_sv_inequality(&series(&[1e-8, 0.0]), 0.0).unwrap().holds);
        assert!(matches!(check_sv_inequality(&series(&[0.1]), 0.0), Err(Error::Inconsistency(_))));
        assert!(check_sv_inequality(&[], 1.0).is_err());
    }
}
