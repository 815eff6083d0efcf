//! Biot–Savart velocity of a unit-strength vortex patch.
//!
//! In complex notation (`u = u1 + i u2`, `w = ζ − z`) the area integral `u = K ∗ 1_Ω` with
//! `K(x) = x^⊥ / (2π|x|²)` becomes, by Green's theorem, the contour integral
//!
//! ```text
//!     u(z) = (1 / 4π) ∮_{∂Ω} (w / w̄) dζ̄
//! ```
//!
//! whose integrand has unit modulus: there is no logarithmic singularity to desingularize, and on
//! the boundary itself the integrand `(chord direction)²` stays smooth. Away from the contour the
//! sum is the composite trapezoid rule on the polygon; segments close to the query point are
//! replaced by their exact integral.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{DiskSpec, PatchBoundary};
use crate::point::Vec2;

const INV_4PI: f64 = 1.0 / (4.0 * PI);
const INV_2PI: f64 = 1.0 / (2.0 * PI);

/// Segments closer to the query point than `NEAR_FACTOR` segment lengths are integrated exactly.
pub const NEAR_FACTOR: f64 = 4.0;

const TILE: usize = 128;

/// Per-tile partial sums for the row nodes and the column nodes.
type TileSums = (Vec<[f64; 2]>, Vec<[f64; 2]>);

/// Velocity induced by the unit-strength disk patch `B_r`.
///
/// Inside, rigid rotation `x^⊥ / 2`; outside, the point-vortex field `r² x^⊥ / (2|x|²)`.
pub fn exact_disk_velocity(x: Vec2, r: f64) -> Vec2 {
    let q = x.norm_sq();
    if q < r * r {
        x.perp() * 0.5
    } else {
        x.perp() * (0.5 * r * r / q)
    }
}

/// Fixed 17-point probe set on the ray at angle 0.3 for disk convergence studies: radii
/// `0, 0.1, …, 0.9` and `1.1, …, 1.7`. The boundary radius is skipped, since on the contour the
/// chord geometry of the polygon adds an `h² log h` term.
pub fn radial_probes() -> Vec<Vec2> {
    (0..17)
        .map(|k| {
            let r = if k < 10 { 0.1 * k as f64 } else { 0.1 * (k + 1) as f64 };
            Vec2::from_polar(r, 0.3)
        })
        .collect()
}

/// Radial and angular components of a velocity about the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarVelocity {
    pub u_rad: f64,
    pub u_tan: f64,
}

impl PolarVelocity {
    /// Rebuilds `u_rad x/|x| + u_tan x^⊥/|x|`.
    pub fn to_cartesian(self, x: Vec2) -> Vec2 {
        let r = x.norm();
        (x * self.u_rad + x.perp() * self.u_tan) * (1.0 / r)
    }
}

/// Splits `u` at `x ≠ 0` into radial and tangential parts.
pub fn decompose_polar(x: Vec2, u: Vec2) -> Result<PolarVelocity> {
    let r = x.norm();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::OriginSingularity);
    }
    Ok(PolarVelocity { u_rad: u.dot(x) / r, u_tan: u.dot(x.perp()) / r })
}

/// Exact `∫_seg (w / w̄) dw̄` over the segment `w0 → w0 + e`.
///
/// Writing `w/w̄ = e/ē + c / (w̄0 + s ē)` with `c = w0 − (e/ē) w̄0` gives
/// `e + c · Log((w̄0 + ē) / w̄0)`. When the query point is collinear with the segment the
/// integrand is constant and the result is `e`.
fn exact_segment(w0: Vec2, e: Vec2) -> Vec2 {
    let kappa = w0.cross(e);
    let w1 = w0 + e;
    let q0 = w0.norm_sq();
    let q1 = w1.norm_sq();
    if kappa == 0.0 || q0 == 0.0 || q1 == 0.0 {
        return e;
    }
    // c = -2 i κ e / |e|²
    let s = -2.0 * kappa / e.norm_sq();
    let c = Vec2::new(-s * e.y, s * e.x);
    // Log(conj(w1 / w0)) = ln|w1/w0| − i arg(w1/w0)
    let log_re = 0.5 * (q1 / q0).ln();
    let log_im = -w0.cross(w1).atan2(w0.dot(w1));
    e + Vec2::new(c.x * log_re - c.y * log_im, c.x * log_im + c.y * log_re)
}

/// `(w/w̄) · conj(t)` with the convention `f(0) = 0`.
#[inline(always)]
fn kernel_term(dx: f64, dy: f64, tx: f64, ty: f64) -> (f64, f64) {
    let inv = 1.0 / (dx * dx + dy * dy + f64::MIN_POSITIVE);
    let fr = (dx * dx - dy * dy) * inv;
    let fi = 2.0 * dx * dy * inv;
    (fr * tx + fi * ty, fi * tx - fr * ty)
}

/// `d/ds [f(w0 + s e) ē]` at `s = 0`, with `f = w/w̄`: `|e|²/w̄ − ē² w/w̄²`.
fn trapezoid_endpoint_slope(w: Vec2, e: Vec2) -> Vec2 {
    let q = w.norm_sq();
    // w³
    let w2 = Vec2::new(w.x * w.x - w.y * w.y, 2.0 * w.x * w.y);
    let w3 = Vec2::new(w2.x * w.x - w2.y * w.y, w2.x * w.y + w2.y * w.x);
    // conj(e²)
    let ce2 = Vec2::new(e.x * e.x - e.y * e.y, -2.0 * e.x * e.y);
    let prod = Vec2::new(ce2.x * w3.x - ce2.y * w3.y, ce2.x * w3.y + ce2.y * w3.x);
    w * (e.norm_sq() / q) - prod * (1.0 / (q * q))
}

/// Contour-dynamics velocity evaluator for a fixed polygonal boundary.
///
/// Immutable after construction; evaluation never mutates it.
#[derive(Clone, Debug)]
pub struct ContourField {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // half central differences (y_{j+1} − y_{j−1}) / 2, the trapezoid weights before conjugation
    tx: Vec<f64>,
    ty: Vec<f64>,
    max_edge: f64,
}

impl ContourField {
    pub fn new(b: &PatchBoundary) -> Self {
        Self::from_nodes(b.nodes())
    }

    pub(crate) fn from_nodes(nodes: &[Vec2]) -> Self {
        let n = nodes.len();
        let xs: Vec<f64> = nodes.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = nodes.iter().map(|p| p.y).collect();
        let mut tx = Vec::with_capacity(n);
        let mut ty = Vec::with_capacity(n);
        let mut max_edge: f64 = 0.0;
        for j in 0..n {
            let next = nodes[(j + 1) % n];
            let prev = nodes[(j + n - 1) % n];
            tx.push(0.5 * (next.x - prev.x));
            ty.push(0.5 * (next.y - prev.y));
            max_edge = max_edge.max(next.dist(nodes[j]));
        }
        ContourField { xs, ys, tx, ty, max_edge }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    #[inline]
    fn node(&self, j: usize) -> Vec2 {
        Vec2::new(self.xs[j], self.ys[j])
    }

    /// Velocity at an arbitrary point of the plane.
    pub fn velocity(&self, x: Vec2) -> Vec2 {
        let (s, closest) = kernels::point_sum(x.x, x.y, &self.xs, &self.ys, &self.tx, &self.ty);
        let mut sum = Vec2::new(s[0], s[1]);
        let reach = NEAR_FACTOR * self.max_edge;
        if closest < reach * reach {
            sum += self.near_correction(x);
        }
        sum * INV_4PI
    }

    /// Exact-minus-trapezoid correction over segments near `x`.
    ///
    /// Where a near segment meets a far one, the far side's trapezoid sum no longer telescopes,
    /// leaving an endpoint error of order `h²/reach`, i.e. `O(h)`; the leading Euler–Maclaurin
    /// endpoint term is added there.
    fn near_correction(&self, x: Vec2) -> Vec2 {
        let n = self.len();
        let near: Vec<bool> = (0..n)
            .map(|k| {
                let (a, b) = (self.node(k), self.node((k + 1) % n));
                let reach = NEAR_FACTOR * a.dist(b);
                crate::geometry::point_segment_dist_sq(x, a, b) < reach * reach
            })
            .collect();
        let mut corr = Vec2::ZERO;
        for k in (0..n).filter(|&k| near[k]) {
            let a = self.node(k);
            let b = self.node((k + 1) % n);
            let e = b - a;
            let w0 = a - x;
            let w1 = b - x;
            let exact = exact_segment(w0, e);
            // trapezoid contribution of this segment: (f(w0) + f(w1)) ē / 2
            let (a0, b0) = kernel_term(w0.x, w0.y, 0.5 * e.x, 0.5 * e.y);
            let (a1, b1) = kernel_term(w1.x, w1.y, 0.5 * e.x, 0.5 * e.y);
            corr += exact - Vec2::new(a0 + a1, b0 + b1);
            let prev = (k + n - 1) % n;
            if !near[prev] {
                corr += trapezoid_endpoint_slope(w0, a - self.node(prev)) * (-1.0 / 12.0);
            }
            let next = (k + 1) % n;
            if !near[next] {
                corr += trapezoid_endpoint_slope(w1, self.node((next + 1) % n) - b) * (1.0 / 12.0);
            }
        }
        corr
    }

    /// Velocities at many points, evaluated in parallel.
    pub fn velocities(&self, points: &[Vec2]) -> Vec<Vec2> {
        points.par_iter().map(|&p| self.velocity(p)).collect()
    }

    /// Velocities at the boundary's own nodes.
    ///
    /// Uses the symmetry `f(y_j − y_i) = f(y_i − y_j)` so every node pair is visited once; work is
    /// split into fixed tiles and reduced in a fixed order, so results do not depend on the number
    /// of worker threads.
    pub fn node_velocities(&self) -> Vec<Vec2> {
        let n = self.len();
        let blocks = n.div_ceil(TILE);
        let pairs: Vec<(usize, usize)> =
            (0..blocks).flat_map(|p| (p..blocks).map(move |q| (p, q))).collect();
        let partials: Vec<TileSums> =
            pairs.par_iter().map(|&(p, q)| self.tile(p, q)).collect();
        let mut acc = vec![[0.0f64; 2]; n];
        for (&(p, q), (rows, cols)) in pairs.iter().zip(&partials) {
            let (p0, q0) = (p * TILE, q * TILE);
            for (k, v) in rows.iter().enumerate() {
                acc[p0 + k][0] += v[0];
                acc[p0 + k][1] += v[1];
            }
            for (k, v) in cols.iter().enumerate() {
                acc[q0 + k][0] += v[0];
                acc[q0 + k][1] += v[1];
            }
        }
        acc.iter()
            .enumerate()
            .map(|(i, v)| {
                // the singular self term is replaced by the adjacent-segment integrals (e_{i−1} + e_i) / 2
                Vec2::new(v[0] + self.tx[i], v[1] + self.ty[i]) * INV_4PI
            })
            .collect()
    }

    fn tile(&self, p: usize, q: usize) -> TileSums {
        let n = self.len();
        let rows = p * TILE..((p + 1) * TILE).min(n);
        let cols = q * TILE..((q + 1) * TILE).min(n);
        let mut row_acc = vec![[0.0f64; 2]; rows.len()];
        let mut col_re = vec![0.0f64; cols.len()];
        let mut col_im = vec![0.0f64; cols.len()];
        let mut fr = vec![0.0f64; cols.len()];
        let mut fi = vec![0.0f64; cols.len()];
        let xs = &self.xs[cols.clone()];
        let ys = &self.ys[cols.clone()];
        let txs = &self.tx[cols.clone()];
        let tys = &self.ty[cols.clone()];
        for (ri, i) in rows.enumerate() {
            let start = if p == q { ri + 1 } else { 0 };
            if start >= xs.len() {
                continue;
            }
            let (fr, fi) = (&mut fr[start..], &mut fi[start..]);
            kernels::direction_squared(self.xs[i], self.ys[i], &xs[start..], &ys[start..], fr, fi);
            row_acc[ri] = kernels::conj_dot(fr, fi, &txs[start..], &tys[start..]);
            kernels::conj_axpy(
                self.tx[i],
                self.ty[i],
                fr,
                fi,
                &mut col_re[start..],
                &mut col_im[start..],
            );
        }
        let col_acc = col_re.into_iter().zip(col_im).map(|(a, b)| [a, b]).collect();
        (row_acc, col_acc)
    }
}

/// Slice kernels for the pair sums, written as plain elementwise loops so they vectorize.
mod kernels {
    /// `f = w²/|w|²` for `w = (xs, ys) − (x0, y0)`, split into real and imaginary parts.
    #[inline(always)]
    fn direction_squared_impl(x0: f64, y0: f64, xs: &[f64], ys: &[f64], fr: &mut [f64], fi: &mut [f64]) {
        let n = xs.len();
        let (ys, fr, fi) = (&ys[..n], &mut fr[..n], &mut fi[..n]);
        for j in 0..n {
            let dx = xs[j] - x0;
            let dy = ys[j] - y0;
            let inv = 1.0 / (dx * dx + dy * dy);
            fr[j] = (dx * dx - dy * dy) * inv;
            fi[j] = 2.0 * dx * dy * inv;
        }
    }

    /// `Σ f_j conj(t_j)` with fixed lane-wise summation order.
    #[inline(always)]
    fn conj_dot_impl(fr: &[f64], fi: &[f64], tx: &[f64], ty: &[f64]) -> [f64; 2] {
        const L: usize = 8;
        let n = fr.len();
        let (fi, tx, ty) = (&fi[..n], &tx[..n], &ty[..n]);
        let mut re = [0.0f64; L];
        let mut im = [0.0f64; L];
        let chunks = n / L * L;
        for c in (0..chunks).step_by(L) {
            for l in 0..L {
                let j = c + l;
                re[l] += fr[j] * tx[j] + fi[j] * ty[j];
                im[l] += fi[j] * tx[j] - fr[j] * ty[j];
            }
        }
        for j in chunks..n {
            re[0] += fr[j] * tx[j] + fi[j] * ty[j];
            im[0] += fi[j] * tx[j] - fr[j] * ty[j];
        }
        [re.iter().sum(), im.iter().sum()]
    }

    /// `acc_j += f_j conj(t)`.
    #[inline(always)]
    fn conj_axpy_impl(tx: f64, ty: f64, fr: &[f64], fi: &[f64], acc_re: &mut [f64], acc_im: &mut [f64]) {
        let n = fr.len();
        let (fi, acc_re, acc_im) = (&fi[..n], &mut acc_re[..n], &mut acc_im[..n]);
        for j in 0..n {
            acc_re[j] += fr[j] * tx + fi[j] * ty;
            acc_im[j] += fi[j] * tx - fr[j] * ty;
        }
    }

    /// `Σ_j f(y_j − x) conj(t_j)` and `min_j |y_j − x|²`, with `f(0) = 0`.
    #[inline(always)]
    fn point_sum_impl(x0: f64, y0: f64, xs: &[f64], ys: &[f64], tx: &[f64], ty: &[f64]) -> ([f64; 2], f64) {
        const BLOCK: usize = 256;
        let mut fr = [0.0f64; BLOCK];
        let mut fi = [0.0f64; BLOCK];
        let mut q = [0.0f64; BLOCK];
        let mut acc = [0.0f64; 2];
        let mut closest = f64::INFINITY;
        let n = xs.len();
        let mut start = 0;
        while start < n {
            let end = (start + BLOCK).min(n);
            let m = end - start;
            let (xb, yb) = (&xs[start..end], &ys[start..end][..m]);
            let (frb, fib, qb) = (&mut fr[..m], &mut fi[..m], &mut q[..m]);
            for j in 0..m {
                let dx = xb[j] - x0;
                let dy = yb[j] - y0;
                let r2 = dx * dx + dy * dy;
                qb[j] = r2;
                let inv = 1.0 / (r2 + f64::MIN_POSITIVE);
                frb[j] = (dx * dx - dy * dy) * inv;
                fib[j] = 2.0 * dx * dy * inv;
            }
            let part = conj_dot_impl(frb, fib, &tx[start..end], &ty[start..end]);
            acc[0] += part[0];
            acc[1] += part[1];
            closest = min_impl(qb, closest);
            start = end;
        }
        (acc, closest)
    }

    #[inline(always)]
    fn min_impl(v: &[f64], init: f64) -> f64 {
        const L: usize = 8;
        let mut lanes = [init; L];
        let chunks = v.len() / L * L;
        for c in (0..chunks).step_by(L) {
            for l in 0..L {
                let x = v[c + l];
                lanes[l] = if x < lanes[l] { x } else { lanes[l] };
            }
        }
        for &x in &v[chunks..] {
            lanes[0] = if x < lanes[0] { x } else { lanes[0] };
        }
        lanes.iter().fold(init, |a, &b| if b < a { b } else { a })
    }

    macro_rules! dispatch {
        ($name:ident, $imp:ident, $avx:ident, ($($arg:ident : $ty:ty),*) $(-> $ret:ty)?) => {
            #[cfg(target_arch = "x86_64")]
            #[target_feature(enable = "avx2,fma")]
            unsafe fn $avx($($arg: $ty),*) $(-> $ret)? {
                $imp($($arg),*)
            }

            #[inline]
            pub(super) fn $name($($arg: $ty),*) $(-> $ret)? {
                #[cfg(target_arch = "x86_64")]
                {
                    if std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma") {
                        // SAFETY: the required CPU features were detected at runtime.
                        return unsafe { $avx($($arg),*) };
                    }
                }
                $imp($($arg),*)
            }
        };
    }

    dispatch!(point_sum, point_sum_impl, point_sum_avx2,
        (x0: f64, y0: f64, xs: &[f64], ys: &[f64], tx: &[f64], ty: &[f64]) -> ([f64; 2], f64));
    dispatch!(direction_squared, direction_squared_impl, direction_squared_avx2,
        (x0: f64, y0: f64, xs: &[f64], ys: &[f64], fr: &mut [f64], fi: &mut [f64]));
    dispatch!(conj_dot, conj_dot_impl, conj_dot_avx2,
        (fr: &[f64], fi: &[f64], tx: &[f64], ty: &[f64]) -> [f64; 2]);
    dispatch!(conj_axpy, conj_axpy_impl, conj_axpy_avx2,
        (tx: f64, ty: f64, fr: &[f64], fi: &[f64], acc_re: &mut [f64], acc_im: &mut [f64]));
}

/// Contour-dynamics velocity of the patch bounded by `b` at `x`.
pub fn contour_velocity(b: &PatchBoundary, x: Vec2) -> Vec2 {
    ContourField::new(b).velocity(x)
}

/// Brute-force midpoint-rule discretization of `K ∗ 1_Ω` on a uniform grid.
///
/// Cells whose centers fall inside Ω (scanline fill with the same inside-on-boundary rule as
/// [`crate::geometry::contains`]) carry weight `h²`. Cells within one cell diagonal of the query
/// point are skipped; their contribution is bounded by `∫_{B_ρ} |K| = ρ` with
/// `ρ = 1.5·√2·h` and reported as the error bar.
#[derive(Clone, Debug)]
pub struct AreaQuadrature {
    cx: Vec<f64>,
    cy: Vec<f64>,
    h: f64,
}

/// An oracle velocity together with the bound on the excluded-cell contribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleVelocity {
    pub velocity: Vec2,
    pub error_bound: f64,
}

impl AreaQuadrature {
    pub fn new(b: &PatchBoundary, resolution: usize) -> Result<Self> {
        if resolution < 128 {
            return Err(crate::error::invalid(format!(
                "area quadrature resolution must be at least 128, got {resolution}"
            )));
        }
        let nodes = b.nodes();
        let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in nodes {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let center = (lo + hi) * 0.5;
        let side = (hi.x - lo.x).max(hi.y - lo.y) * (1.0 + 1e-9);
        let h = side / resolution as f64;
        let origin = center - Vec2::new(0.5 * side, 0.5 * side);
        let n = nodes.len();
        let mut cx = Vec::new();
        let mut cy = Vec::new();
        let mut crossings = Vec::new();
        for row in 0..resolution {
            let y = origin.y + (row as f64 + 0.5) * h;
            crossings.clear();
            for i in 0..n {
                let a = nodes[i];
                let c = nodes[(i + 1) % n];
                if (a.y > y) != (c.y > y) {
                    crossings.push(a.x + (y - a.y) * (c.x - a.x) / (c.y - a.y));
                }
            }
            crossings.sort_by(|a, b| a.total_cmp(b));
            for pair in crossings.chunks_exact(2) {
                let first = ((pair[0] - origin.x) / h - 0.5).ceil().max(0.0) as usize;
                let last = ((pair[1] - origin.x) / h - 0.5).floor();
                if last < 0.0 {
                    continue;
                }
                let last = (last as usize).min(resolution - 1);
                for col in first..=last {
                    cx.push(origin.x + (col as f64 + 0.5) * h);
                    cy.push(y);
                }
            }
        }
        Ok(AreaQuadrature { cx, cy, h })
    }

    pub fn cell_size(&self) -> f64 {
        self.h
    }

    /// Number of cells counted as inside the patch.
    pub fn cell_count(&self) -> usize {
        self.cx.len()
    }

    pub fn velocity(&self, x: Vec2) -> OracleVelocity {
        let excl2 = 2.0 * self.h * self.h;
        let mut sx = [0.0f64; 4];
        let mut sy = [0.0f64; 4];
        let m = self.cx.len();
        let chunks = m / 4 * 4;
        let mut j = 0;
        while j < chunks {
            for l in 0..4 {
                let dx = x.x - self.cx[j + l];
                let dy = x.y - self.cy[j + l];
                let q = dx * dx + dy * dy;
                let w = if q < excl2 { 0.0 } else { 1.0 / q };
                sx[l] -= dy * w;
                sy[l] += dx * w;
            }
            j += 4;
        }
        let mut v = Vec2::new((sx[0] + sx[1]) + (sx[2] + sx[3]), (sy[0] + sy[1]) + (sy[2] + sy[3]));
        for j in chunks..m {
            let dx = x.x - self.cx[j];
            let dy = x.y - self.cy[j];
            let q = dx * dx + dy * dy;
            if q >= excl2 {
                v += Vec2::new(-dy / q, dx / q);
            }
        }
        OracleVelocity {
            velocity: v * (INV_2PI * self.h * self.h),
            error_bound: 1.5 * std::f64::consts::SQRT_2 * self.h,
        }
    }

    pub fn velocities(&self, points: &[Vec2]) -> Vec<OracleVelocity> {
        points.par_iter().map(|&p| self.velocity(p)).collect()
    }
}

/// Oracle velocity of the patch bounded by `b` at `x` on a `resolution²` grid.
pub fn area_quadrature_velocity(b: &PatchBoundary, x: Vec2, resolution: usize) -> Result<OracleVelocity> {
    Ok(AreaQuadrature::new(b, resolution)?.velocity(x))
}

/// One velocity field behind a common interface.
#[derive(Clone, Debug)]
pub enum VelocityEvaluator {
    ContourDynamics(ContourField),
    ExactDisk(DiskSpec),
    AreaQuadrature(AreaQuadrature),
}

impl VelocityEvaluator {
    pub fn evaluate(&self, x: Vec2) -> Vec2 {
        match self {
            VelocityEvaluator::ContourDynamics(f) => f.velocity(x),
            VelocityEvaluator::ExactDisk(d) => exact_disk_velocity(x, d.radius()),
            VelocityEvaluator::AreaQuadrature(q) => q.velocity(x).velocity,
        }
    }

    pub fn evaluate_many(&self, points: &[Vec2]) -> Vec<Vec2> {
        points.par_iter().map(|&p| self.evaluate(p)).collect()
    }
}

/// Max over `samples` of `|u(x) − u_D(x)|`, `u` from any field.
pub fn max_deviation_from_disk(samples: &[Vec2], field: impl Fn(Vec2) -> Vec2 + Sync) -> Result<f64> {
    if samples.is_empty() {
        return Err(crate::error::invalid("velocity deviation needs at least one sample point"));
    }
    Ok(samples
        .par_iter()
        .map(|&x| (field(x) - exact_disk_velocity(x, 1.0)).norm())
        .reduce(|| 0.0, f64::max))
}

/// `max_x |u(x) − u_D(x)|` over `samples` for the contour-dynamics field of `b`.
pub fn velocity_deviation_from_disk(b: &PatchBoundary, samples: &[Vec2]) -> Result<f64> {
    let field = ContourField::new(b);
    max_deviation_from_disk(samples, |x| field.velocity(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_disk, make_ellipse, make_perturbed_disk};

    #[test]
    fn exact_disk_closed_forms() {
        assert_eq!(exact_disk_velocity(Vec2::new(0.5, 0.0), 1.0), Vec2::new(0.0, 0.25));
        assert_eq!(exact_disk_velocity(Vec2::ZERO, 1.0), Vec2::ZERO);
        let u = exact_disk_velocity(Vec2::new(2.0, 0.0), 1.0);
        assert!((u.y - 0.25).abs() < 1e-15 && u.x == 0.0);
    }

    #[test]
    fn polar_decomposition() {
        let p = decompose_polar(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!((p.u_rad, p.u_tan), (0.0, 1.0));
        let p = decompose_polar(Vec2::new(0.0, 2.0), Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!((p.u_rad, p.u_tan), (1.0, 0.0));
        assert!(matches!(
            decompose_polar(Vec2::ZERO, Vec2::new(1.0, 1.0)),
            Err(Error::OriginSingularity)
        ));
    }

    #[test]
    fn contour_rotates_disk_counterclockwise() {
        let b = make_disk(1.0, 4096).unwrap();
        let u = contour_velocity(&b, Vec2::new(0.5, 0.0));
        assert!(u.x.abs() < 1e-4 && (u.y - 0.25).abs() < 1e-4, "{u:?}");
        let c = contour_velocity(&b, Vec2::ZERO);
        assert!(c.norm() < 1e-6, "{c:?}");
        let ext = contour_velocity(&b, Vec2::new(2.0, 0.0));
        assert!((ext - Vec2::new(0.0, 0.25)).norm() < 1e-4, "{ext:?}");
    }

    #[test]
    fn node_velocities_match_pointwise_evaluation() {
        let b = make_perturbed_disk(3, 0.1, 300).unwrap();
        let f = ContourField::new(&b);
        let nodes = f.node_velocities();
        for (i, p) in b.nodes().iter().enumerate() {
            let v = f.velocity(*p);
            assert!((nodes[i] - v).norm() < 2e-5, "node {i}: {:?} vs {:?}", nodes[i], v);
        }
    }

    #[test]
    fn exact_segment_matches_fine_quadrature() {
        let w0 = Vec2::new(0.3, -0.2);
        let e = Vec2::new(-0.1, 0.45);
        let m = 200_000;
        let mut acc = Vec2::ZERO;
        for k in 0..m {
            let s = (k as f64 + 0.5) / m as f64;
            let w = w0 + e * s;
            let (a, b) = kernel_term(w.x, w.y, e.x / m as f64, e.y / m as f64);
            acc += Vec2::new(a, b);
        }
        let ex = exact_segment(w0, e);
        assert!((acc - ex).norm() < 1e-9, "{acc:?} vs {ex:?}");
    }

    #[test]
    fn point_on_edge_is_finite() {
        let b = make_disk(1.0, 64).unwrap();
        let mid = (b.nodes()[0] + b.nodes()[1]) * 0.5;
        let u = contour_velocity(&b, mid);
        assert!(u.x.is_finite() && u.y.is_finite());
        let at_node = contour_velocity(&b, b.nodes()[7]);
        assert!((at_node.norm() - 0.5).abs() < 5e-3);
    }

    #[test]
    fn oracle_disk_values() {
        let b = make_disk(1.0, 4096).unwrap();
        let q = AreaQuadrature::new(&b, 2048).unwrap();
        let v = q.velocity(Vec2::new(0.5, 0.0)).velocity;
        assert!(v.x.abs() < 1e-3 && (v.y - 0.25).abs() < 1e-3, "{v:?}");
        let q = AreaQuadrature::new(&b, 1024).unwrap();
        let v = q.velocity(Vec2::new(3.0, 0.0)).velocity;
        assert!(v.x.abs() < 1e-3 && (v.y - 1.0 / 6.0).abs() < 1e-3, "{v:?}");
        assert!(AreaQuadrature::new(&b, 64).is_err());
    }

    #[test]
    fn oracle_symmetric_ellipse_center() {
        let e = make_ellipse(2.0, 1.0, 4096).unwrap();
        let v = area_quadrature_velocity(&e, Vec2::ZERO, 1024).unwrap().velocity;
        assert!(v.norm() < 1e-4, "{v:?}");
    }

    #[test]
    fn deviation_requires_samples() {
        let b = make_disk(1.0, 64).unwrap();
        assert!(velocity_deviation_from_disk(&b, &[]).is_err());
    }
}
