//! Lagrangian tracer diagnostics: winding number about the origin, travel distance, unwrapped
//! angle, and time spent in dyadic balls around the origin.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{PatchBoundary, PointLocator};
use crate::point::Vec2;

/// Winding rate of every particle of the unit disk patch, `1 / 4π` turns per unit time.
pub const DISK_WINDING_RATE: f64 = 1.0 / (4.0 * PI);

/// Default radial floor below which a trajectory counts as hitting the origin.
pub const DEFAULT_RHO_MIN: f64 = 1e-8;

/// RK4 quadrature weights.
pub(crate) const RK4_WEIGHTS: [f64; 4] = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];

/// Time a particle has spent in each dyadic annulus `A_i = B_{2^{-i}ε} \ B_{2^{-i-1}ε}` and in
/// the exterior of the unit disk.
///
/// Annuli deeper than `i_max = ceil(log2(ε / ρ_min))` are merged into the deepest bucket. The
/// buckets, the exterior time and the remaining time (inside `D`, outside `B_ε`) partition the
/// elapsed time.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyLedger {
    epsilon: f64,
    buckets: Vec<f64>,
    outside: f64,
    complement: f64,
    elapsed: f64,
}

impl OccupancyLedger {
    /// `epsilon = 0` tracks no annuli (the exact-disk case); otherwise `0 < ε < 1`.
    pub fn new(epsilon: f64, rho_min: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(invalid(format!("occupancy scale ε must lie in [0, 1), got {epsilon}")));
        }
        if !(rho_min > 0.0) {
            return Err(invalid(format!("radial floor must be positive, got {rho_min}")));
        }
        let depth = if epsilon > 0.0 {
            (epsilon / rho_min).log2().ceil().max(0.0) as usize + 1
        } else {
            0
        };
        Ok(OccupancyLedger { epsilon, buckets: vec![0.0; depth], outside: 0.0, complement: 0.0, elapsed: 0.0 })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Deepest tracked annulus index, `None` when no annuli are tracked.
    pub fn i_max(&self) -> Option<usize> {
        self.buckets.len().checked_sub(1)
    }

    /// Annulus index of a radius: `Some(-1)` outside `D`, `Some(i)` inside `B_ε`, `None` between.
    pub fn annulus_index(&self, radius: f64) -> Option<isize> {
        if radius >= 1.0 {
            return Some(-1);
        }
        let i_max = self.i_max()?;
        if radius >= self.epsilon {
            return None;
        }
        if radius <= 0.0 {
            return Some(i_max as isize);
        }
        let mut i = (self.epsilon / radius).log2().floor().max(0.0) as usize;
        // settle floating-point edge cases so that 2^{-(i+1)} ε ≤ r < 2^{-i} ε
        while i > 0 && radius >= self.epsilon * 0.5f64.powi(i as i32) {
            i -= 1;
        }
        while radius < self.epsilon * 0.5f64.powi(i as i32 + 1) && i < i_max {
            i += 1;
        }
        Some(i.min(i_max) as isize)
    }

    pub fn record(&mut self, radius: f64, dt: f64) {
        match self.annulus_index(radius) {
            Some(-1) => self.outside += dt,
            Some(i) => self.buckets[i as usize] += dt,
            None => self.complement += dt,
        }
        self.elapsed += dt;
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn buckets(&self) -> &[f64] {
        &self.buckets
    }

    /// Time with `|x| ≥ 1`.
    pub fn outside(&self) -> f64 {
        self.outside
    }

    /// Time inside `D` but outside `B_ε`.
    pub fn complement(&self) -> f64 {
        self.complement
    }
}

/// The occupancy functionals `G_{-1}^T` (time fraction in `D^C`) and `G_i^T` (time fraction in
/// the ball `B_{2^{-i}ε}`), `i = 0..=i_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancyFractions {
    pub outside: f64,
    pub balls: Vec<f64>,
}

/// Time fractions from a ledger whose elapsed time is `t`.
///
/// Balls are nested, so `G_i` sums the annulus buckets from `i` down to the deepest one.
pub fn occupancy_fractions(ledger: &OccupancyLedger, t: f64) -> Result<OccupancyFractions> {
    if !(t > 0.0) || (t - ledger.elapsed).abs() > 1e-9 * t.max(1.0) {
        return Err(invalid(format!(
            "occupancy horizon T = {t} does not match the ledger's elapsed time {}",
            ledger.elapsed
        )));
    }
    let mut balls = vec![0.0; ledger.buckets.len()];
    let mut acc = 0.0;
    for i in (0..ledger.buckets.len()).rev() {
        acc += ledger.buckets[i];
        balls[i] = acc / t;
    }
    Ok(OccupancyFractions { outside: ledger.outside / t, balls })
}

/// Threshold `(2^{-i} ε)^{3/2}` on `G_i^T`.
pub fn ball_threshold(i: usize, epsilon: f64) -> f64 {
    (epsilon * 0.5f64.powi(i as i32)).powf(1.5)
}

/// Membership in the good set: `G_i < (2^{-i}ε)^{3/2}` for every tracked `i ≥ 0`,
/// `G_{-1} < 2ε`, and the trajectory never reached the radial floor.
///
/// With `ε = 0` (an exact disk) every particle that avoided the origin belongs to the set.
pub fn good_set_membership(fractions: &OccupancyFractions, epsilon: f64, origin_avoided: bool) -> bool {
    if !origin_avoided {
        return false;
    }
    if epsilon == 0.0 {
        return true;
    }
    fractions.outside < 2.0 * epsilon
        && fractions.balls.iter().enumerate().all(|(i, &g)| g < ball_threshold(i, epsilon))
}

/// One Lagrangian particle and its accumulators.
#[derive(Clone, Debug, PartialEq)]
pub struct Tracer {
    pub id: usize,
    pub x0: Vec2,
    pub x: Vec2,
    pub theta0: f64,
    /// Continuous polar angle, radians.
    pub theta_unwrapped: f64,
    /// Winding number `N_x(t)` in turns.
    pub winding: f64,
    /// Travel distance `d_x(t)`.
    pub travel: f64,
    pub origin_floor_hits: u32,
    pub ledger: OccupancyLedger,
}

impl Tracer {
    pub fn new(id: usize, x0: Vec2, epsilon: f64, rho_min: f64) -> Result<Self> {
        let theta0 = x0.angle();
        Ok(Tracer {
            id,
            x0,
            x: x0,
            theta0,
            theta_unwrapped: theta0,
            winding: 0.0,
            travel: 0.0,
            origin_floor_hits: 0,
            ledger: OccupancyLedger::new(epsilon, rho_min)?,
        })
    }

    /// Flagged tracers came within the radial floor and are excluded from winding statistics.
    pub fn flagged(&self) -> bool {
        self.origin_floor_hits > 0
    }

    /// `|2π N − Δθ|`: disagreement between the integral and the unwrapped-angle winding.
    pub fn winding_mismatch(&self) -> f64 {
        (2.0 * PI * self.winding - (self.theta_unwrapped - self.theta0)).abs()
    }

    /// Folds one RK4 step into the accumulators and moves the tracer to `x_new`.
    ///
    /// `stages` and `velocities` are the four RK4 stage positions and velocities; the winding
    /// integral and travel distance use the same stage values as the integrator. The occupancy
    /// ledger is charged at the step midpoint (third stage position).
    pub fn accumulate(&mut self, stages: &[Vec2; 4], velocities: &[Vec2; 4], x_new: Vec2, dt: f64, rho_min: f64) {
        debug_assert!(dt > 0.0);
        if stages.iter().chain(std::iter::once(&x_new)).any(|p| p.norm() <= rho_min) {
            self.origin_floor_hits += 1;
        }
        let mut rate = 0.0;
        let mut speed = 0.0;
        for ((p, u), w) in stages.iter().zip(velocities).zip(RK4_WEIGHTS) {
            speed += w * u.norm();
            if !self.flagged() {
                // u_tan / |x| = (u · x^⊥) / |x|²
                rate += w * u.dot(p.perp()) / p.norm_sq();
            }
        }
        if !self.flagged() {
            self.winding += dt * rate / (2.0 * PI);
        }
        self.travel += dt * speed;
        self.theta_unwrapped += self.x.cross(x_new).atan2(self.x.dot(x_new));
        self.ledger.record(stages[2].norm(), dt);
        self.x = x_new;
    }
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while k > 0 {
        acc += f * (k % base) as f64;
        k /= base;
        f *= inv;
    }
    acc
}

/// Randomly shifted 2D Halton sequence on the unit square, deterministic in `seed`.
pub fn halton_points(count: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 2] = [rng.gen(), rng.gen()];
    (1..=count as u64)
        .map(|k| [(radical_inverse(k, 2) + shift[0]).fract(), (radical_inverse(k, 3) + shift[1]).fract()])
        .collect()
}

/// Low-discrepancy points inside the patch, by rejection from its bounding box.
pub fn seed_points(b: &PatchBoundary, count: usize, seed: u64) -> Vec<Vec2> {
    let locator = PointLocator::new(b.nodes());
    let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in b.nodes() {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 2] = [rng.gen(), rng.gen()];
    let mut out = Vec::with_capacity(count);
    let mut k = 1u64;
    while out.len() < count {
        let u = (radical_inverse(k, 2) + shift[0]).fract();
        let v = (radical_inverse(k, 3) + shift[1]).fract();
        k += 1;
        let p = Vec2::new(lo.x + u * (hi.x - lo.x), lo.y + v * (hi.y - lo.y));
        if locator.contains(p) {
            out.push(p);
        }
    }
    out
}

/// Tracers at the given points, ids in order.
pub fn tracers_at(points: &[Vec2], epsilon: f64, rho_min: f64) -> Result<Vec<Tracer>> {
    points.iter().enumerate().map(|(id, &p)| Tracer::new(id, p, epsilon, rho_min)).collect()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Winding-rate summary over a tracer cloud at horizon `T`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindingStatistics {
    pub t: f64,
    /// Histogram of `N/T` over unflagged tracers.
    pub histogram: Vec<HistogramBin>,
    /// 50/90/99% quantiles of `|N/T − 1/4π|` over unflagged tracers.
    pub dev_q50: f64,
    pub dev_q90: f64,
    pub dev_q99: f64,
    pub max_deviation: f64,
    pub mean_rate: f64,
    /// Good-set members over all tracers, flagged ones included in the denominator.
    pub good_set_fraction: f64,
    pub total: usize,
    pub flagged: usize,
}

const HISTOGRAM_BINS: usize = 40;

/// Statistics of `N_x(T)/T` and good-set membership.
pub fn winding_statistics(tracers: &[Tracer], t: f64) -> Result<WindingStatistics> {
    if !(t > 0.0) {
        return Err(invalid(format!("statistics horizon must be positive, got {t}")));
    }
    let rates: Vec<f64> = tracers.iter().filter(|tr| !tr.flagged()).map(|tr| tr.winding / t).collect();
    if rates.is_empty() {
        return Err(Error::EmptyStatistics);
    }
    let mut devs: Vec<f64> = rates.iter().map(|r| (r - DISK_WINDING_RATE).abs()).collect();
    devs.sort_by(f64::total_cmp);
    let mut members = 0usize;
    for tr in tracers {
        let fr = occupancy_fractions(&tr.ledger, t)?;
        if good_set_membership(&fr, tr.ledger.epsilon(), !tr.flagged()) {
            members += 1;
        }
    }
    let lo = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let histogram = if width > 0.0 {
        let mut counts = vec![0usize; HISTOGRAM_BINS];
        for r in &rates {
            let k = (((r - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
            counts[k] += 1;
        }
        counts
            .into_iter()
            .enumerate()
            .map(|(k, count)| HistogramBin { lo: lo + k as f64 * width, hi: lo + (k + 1) as f64 * width, count })
            .collect()
    } else {
        vec![HistogramBin { lo, hi, count: rates.len() }]
    };
    Ok(WindingStatistics {
        t,
        histogram,
        dev_q50: quantile_sorted(&devs, 0.5),
        dev_q90: quantile_sorted(&devs, 0.9),
        dev_q99: quantile_sorted(&devs, 0.99),
        max_deviation: *devs.last().unwrap(),
        mean_rate: rates.iter().sum::<f64>() / rates.len() as f64,
        good_set_fraction: members as f64 / tracers.len() as f64,
        total: tracers.len(),
        flagged: tracers.len() - rates.len(),
    })
}
