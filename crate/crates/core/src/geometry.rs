//! Closed polygonal patch boundaries and their comparison with origin-centered disks.
//!
//! A patch is stored as the ordered list of its boundary nodes, counterclockwise, with the
//! closing edge from the last node back to the first left implicit. Everything here is a pure
//! function of its inputs.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::point::Vec2;

/// Minimum node count of a patch boundary.
pub const MIN_NODES: usize = 8;

/// Ordered closed polyline bounding a vortex patch, counterclockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchBoundary {
    nodes: Vec<Vec2>,
}

impl PatchBoundary {
    /// Validates node count, consecutive-node spacing and orientation.
    ///
    /// Simplicity is not checked here (it is quadratic); see [`PatchBoundary::is_simple`].
    pub fn new(nodes: Vec<Vec2>) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return Err(invalid(format!(
                "a patch boundary needs at least {MIN_NODES} nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(invalid("boundary node is not finite"));
        }
        let n = nodes.len();
        for i in 0..n {
            if nodes[i] == nodes[(i + 1) % n] {
                return Err(invalid(format!("boundary nodes {i} and {} coincide", (i + 1) % n)));
            }
        }
        if signed_area(&nodes) <= 0.0 {
            return Err(invalid("boundary must be counterclockwise (positive signed area)"));
        }
        Ok(PatchBoundary { nodes })
    }

    /// Wraps nodes produced by an integrator stage without re-validating them.
    pub(crate) fn from_nodes_unchecked(nodes: Vec<Vec2>) -> Self {
        PatchBoundary { nodes }
    }

    #[inline]
    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn into_nodes(self) -> Vec<Vec2> {
        self.nodes
    }

    /// Edge vectors `nodes[i+1] - nodes[i]`, cyclic.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.nodes.len();
        (0..n).map(move |i| (self.nodes[i], self.nodes[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.nodes)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        contains(&self.nodes, p)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    /// (min, max) edge length.
    pub fn spacing_range(&self) -> (f64, f64) {
        self.edges()
            .map(|(a, b)| a.dist(b))
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), h| (lo.min(h), hi.max(h)))
    }

    pub fn rotated(&self, angle: f64) -> PatchBoundary {
        PatchBoundary { nodes: self.nodes.iter().map(|p| p.rotate(angle)).collect() }
    }

    /// True when no two non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        let n = self.nodes.len();
        let bbox: Vec<(Vec2, Vec2)> = (0..n)
            .map(|i| {
                let a = self.nodes[i];
                let b = self.nodes[(i + 1) % n];
                (Vec2::new(a.x.min(b.x), a.y.min(b.y)), Vec2::new(a.x.max(b.x), a.y.max(b.y)))
            })
            .collect();
        for i in 0..n {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (lo_i, hi_i) = bbox[i];
                let (lo_j, hi_j) = bbox[j];
                if hi_i.x < lo_j.x || hi_j.x < lo_i.x || hi_i.y < lo_j.y || hi_j.y < lo_i.y {
                    continue;
                }
                let (a, b) = (self.nodes[i], self.nodes[(i + 1) % n]);
                let (c, d) = (self.nodes[j], self.nodes[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2, o: f64| {
        o == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

/// Origin-centered disk `B_r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskSpec {
    radius: f64,
}

impl DiskSpec {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid(format!("disk radius must be positive, got {radius}")));
        }
        Ok(DiskSpec { radius })
    }

    /// The unit disk `D`.
    pub fn unit() -> Self {
        DiskSpec { radius: 1.0 }
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

fn check_node_count(n: usize) -> Result<()> {
    if n < MIN_NODES {
        return Err(invalid(format!("node count must be at least {MIN_NODES}, got {n}")));
    }
    Ok(())
}

fn sample_polar(n: usize, radius: impl Fn(f64) -> f64) -> Vec<Vec2> {
    (0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64;
            Vec2::from_polar(radius(theta), theta)
        })
        .collect()
}

/// `n` equally spaced nodes on the circle of radius `r`.
pub fn make_disk(r: f64, n: usize) -> Result<PatchBoundary> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("disk radius must be positive, got {r}")));
    }
    check_node_count(n)?;
    PatchBoundary::new(sample_polar(n, |_| r))
}

/// Nodes `(a cos θ_k, b sin θ_k)` with equispaced parameter `θ_k`.
pub fn make_ellipse(a: f64, b: f64, n: usize) -> Result<PatchBoundary> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(invalid(format!("ellipse semi-axes must be positive, got ({a}, {b})")));
    }
    check_node_count(n)?;
    let nodes = (0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64;
            Vec2::new(a * theta.cos(), b * theta.sin())
        })
        .collect();
    PatchBoundary::new(nodes)
}

/// Boundary `r(θ) = 1 + η cos(mθ)` sampled at `n` equispaced angles.
pub fn make_perturbed_disk(mode: u32, amplitude: f64, n: usize) -> Result<PatchBoundary> {
    if mode < 2 {
        return Err(invalid(format!("perturbation mode must be at least 2, got {mode}")));
    }
    if !(amplitude.abs() < 0.5) {
        return Err(invalid(format!("perturbation amplitude must satisfy |η| < 1/2, got {amplitude}")));
    }
    check_node_count(n)?;
    let m = mode as f64;
    PatchBoundary::new(sample_polar(n, |theta| 1.0 + amplitude * (m * theta).cos()))
}

/// Shoelace signed area; positive for counterclockwise polygons.
pub fn signed_area(nodes: &[Vec2]) -> f64 {
    let n = nodes.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += nodes[i].cross(nodes[(i + 1) % n]);
    }
    0.5 * acc
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2, tol: f64) -> bool {
    let d = b - a;
    let len2 = d.norm_sq();
    if len2 == 0.0 {
        return p.dist(a) <= tol;
    }
    let s = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a + d * s) <= tol
}

#[inline]
fn crosses_ray(a: Vec2, b: Vec2, p: Vec2) -> bool {
    if (a.y > p.y) != (b.y > p.y) {
        let x_int = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        p.x < x_int
    } else {
        false
    }
}

fn boundary_tolerance(p: Vec2) -> f64 {
    1e-12 * (1.0 + p.x.abs() + p.y.abs())
}

/// Even-odd point-in-polygon test. Points on the boundary count as inside.
pub fn contains(nodes: &[Vec2], p: Vec2) -> bool {
    let n = nodes.len();
    let tol = boundary_tolerance(p);
    let mut inside = false;
    for i in 0..n {
        let a = nodes[i];
        let b = nodes[(i + 1) % n];
        if on_segment(a, b, p, tol) {
            return true;
        }
        if crosses_ray(a, b, p) {
            inside = !inside;
        }
    }
    inside
}

/// Horizontal-slab index over a polygon's edges for repeated membership queries.
///
/// Answers exactly like [`contains`] but only visits edges overlapping the query's slab.
pub struct PointLocator {
    nodes: Vec<Vec2>,
    y_min: f64,
    y_max: f64,
    slab_height: f64,
    slabs: Vec<Vec<u32>>,
}

impl PointLocator {
    pub fn new(nodes: &[Vec2]) -> Self {
        let n = nodes.len();
        let (y_min, y_max) = nodes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
        let count = (n / 2).max(1);
        let slab_height = ((y_max - y_min) / count as f64).max(f64::MIN_POSITIVE);
        let mut slabs = vec![Vec::new(); count];
        let slab_of = |y: f64| (((y - y_min) / slab_height) as usize).min(count - 1);
        for i in 0..n {
            let a = nodes[i];
            let b = nodes[(i + 1) % n];
            let (lo, hi) = (slab_of(a.y.min(b.y)), slab_of(a.y.max(b.y)));
            for slab in &mut slabs[lo..=hi] {
                slab.push(i as u32);
            }
        }
        PointLocator { nodes: nodes.to_vec(), y_min, y_max, slab_height, slabs }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let tol = boundary_tolerance(p);
        if p.y < self.y_min - tol || p.y > self.y_max + tol {
            return false;
        }
        let count = self.slabs.len();
        let slab = (((p.y - self.y_min) / self.slab_height).max(0.0) as usize).min(count - 1);
        let n = self.nodes.len();
        let mut inside = false;
        for &i in &self.slabs[slab] {
            let a = self.nodes[i as usize];
            let b = self.nodes[(i as usize + 1) % n];
            if on_segment(a, b, p, tol) {
                return true;
            }
            if crosses_ray(a, b, p) {
                inside = !inside;
            }
        }
        inside
    }
}

/// Signed area of `triangle(0, a, b) ∩ B_r`.
fn triangle_disk_area(a: Vec2, b: Vec2, r: f64) -> f64 {
    let r2 = r * r;
    let d = b - a;
    let qa = d.norm_sq();
    if qa == 0.0 {
        return 0.0;
    }
    let qb = 2.0 * a.dot(d);
    let qc = a.norm_sq() - r2;
    let mut cuts = [0.0_f64, 1.0, 1.0, 1.0];
    let mut k = 1;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc > 0.0 {
        let sq = disc.sqrt();
        // numerically stable pair of roots
        let q = -0.5 * (qb + qb.signum() * sq);
        let (mut s1, mut s2) = if q != 0.0 { (q / qa, qc / q) } else { (0.0, 0.0) };
        if s1 > s2 {
            std::mem::swap(&mut s1, &mut s2);
        }
        for s in [s1, s2] {
            if s > 0.0 && s < 1.0 {
                cuts[k] = s;
                k += 1;
            }
        }
    }
    cuts[k] = 1.0;
    let mut area = 0.0;
    for w in cuts[..=k].windows(2) {
        let p = a + d * w[0];
        let q = a + d * w[1];
        let mid = (p + q) * 0.5;
        if mid.norm_sq() <= r2 {
            area += 0.5 * p.cross(q);
        } else {
            area += 0.5 * r2 * p.cross(q).atan2(p.dot(q));
        }
    }
    area
}

/// Area of `Ω ∩ B_r` by exact polygon–circle clipping.
pub fn intersection_area(b: &PatchBoundary, disk: DiskSpec) -> f64 {
    b.edges().map(|(p, q)| triangle_disk_area(p, q, disk.radius())).sum()
}

/// `|Ω △ B_r|` by exact polygon–circle clipping.
pub fn symmetric_difference_area(b: &PatchBoundary, disk: DiskSpec) -> f64 {
    let inter = intersection_area(b, disk);
    (b.signed_area() + disk.area() - 2.0 * inter).max(0.0)
}

/// How `|Ω △ B_r|` is measured.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SymDiffMethod {
    Clipping,
    MonteCarlo { samples: usize, seed: u64 },
}

/// A symmetric-difference area with its one-sigma error estimate (zero for clipping).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AreaEstimate {
    pub area: f64,
    pub std_error: f64,
}

pub fn symmetric_difference(b: &PatchBoundary, disk: DiskSpec, method: SymDiffMethod) -> AreaEstimate {
    match method {
        SymDiffMethod::Clipping => {
            AreaEstimate { area: symmetric_difference_area(b, disk), std_error: 0.0 }
        }
        SymDiffMethod::MonteCarlo { samples, seed } => {
            symmetric_difference_monte_carlo(b, disk, samples, seed)
        }
    }
}

/// Sampling radius that encloses both the patch and the disk.
fn enclosing_radius(b: &PatchBoundary, disk: DiskSpec) -> f64 {
    let rmax = b.nodes().iter().map(|p| p.norm()).fold(0.0, f64::max);
    rmax.max(disk.radius()) * 1.01
}

fn uniform_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> Vec2 {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = 2.0 * PI * rng.gen::<f64>();
    Vec2::from_polar(r, theta)
}

/// Monte Carlo estimate of `|Ω △ B_r|` from uniform samples on an enclosing disk.
pub fn symmetric_difference_monte_carlo(
    b: &PatchBoundary,
    disk: DiskSpec,
    samples: usize,
    seed: u64,
) -> AreaEstimate {
    let radius = enclosing_radius(b, disk);
    let locator = PointLocator::new(b.nodes());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = disk.radius() * disk.radius();
    let mut hits = 0usize;
    for _ in 0..samples {
        let p = uniform_in_disk(&mut rng, radius);
        if locator.contains(p) != (p.norm_sq() < r2) {
            hits += 1;
        }
    }
    let domain = PI * radius * radius;
    let frac = hits as f64 / samples as f64;
    AreaEstimate {
        area: frac * domain,
        std_error: domain * (frac * (1.0 - frac) / samples as f64).sqrt(),
    }
}

/// `sup_{x ∈ Ω △ B_r} ||x|² − r²|` for a polygonal Ω.
///
/// On `Ω \ B_r` the supremum is reached at the farthest vertex. On `B_r \ Ω` it is reached at
/// the point of the complement nearest the origin: the origin itself when it lies outside Ω,
/// otherwise the nearest boundary point.
pub fn symmetric_difference_radial_sup(b: &PatchBoundary, disk: DiskSpec) -> f64 {
    let r2 = disk.radius() * disk.radius();
    let far2 = b.nodes().iter().map(|p| p.norm_sq()).fold(0.0, f64::max);
    let mut sup: f64 = if far2 > r2 { far2 - r2 } else { 0.0 };
    let origin = Vec2::ZERO;
    let near2 = if b.contains(origin) {
        b.edges().map(|(p, q)| point_segment_dist_sq(origin, p, q)).fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    if near2 < r2 {
        sup = sup.max(r2 - near2);
    }
    sup
}

/// Monte Carlo companion of [`symmetric_difference_radial_sup`]: the largest `||x|² − r²|`
/// among uniform samples falling in `Ω △ B_r`. Converges to the supremum from below.
pub fn symmetric_difference_radial_sup_monte_carlo(
    b: &PatchBoundary,
    disk: DiskSpec,
    samples: usize,
    seed: u64,
) -> f64 {
    let radius = enclosing_radius(b, disk);
    let locator = PointLocator::new(b.nodes());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = disk.radius() * disk.radius();
    let mut sup: f64 = 0.0;
    for _ in 0..samples {
        let p = uniform_in_disk(&mut rng, radius);
        let q = p.norm_sq();
        if locator.contains(p) != (q < r2) {
            sup = sup.max((q - r2).abs());
        }
    }
    sup
}

pub(crate) fn point_segment_dist_sq(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let len2 = d.norm_sq();
    let s = if len2 > 0.0 { ((p - a).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + d * s)).norm_sq()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec2> {
        vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)]
    }

    #[test]
    fn disk_area_matches_inscribed_polygon() {
        let b = make_disk(1.0, 4096).unwrap();
        let n = 4096.0;
        let exact = 0.5 * n * (2.0 * PI / n).sin();
        assert!((b.signed_area() - exact).abs() < 1e-12);
        // the deficit is 2π³/(3n²) ≈ 1.2e-6 absolute, i.e. below 1e-6 relative
        assert!((b.signed_area() / PI - 1.0).abs() < 1e-6);
    }

    #[test]
    fn octagon_area() {
        let b = make_disk(1.0, 8).unwrap();
        assert!((b.signed_area() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(make_disk(0.0, 64).is_err());
        assert!(make_disk(1.0, 7).is_err());
        assert!(make_ellipse(-1.0, 1.0, 64).is_err());
        assert!(make_ellipse(1.0, 0.0, 64).is_err());
        assert!(make_perturbed_disk(4, 0.6, 1024).is_err());
        assert!(make_perturbed_disk(1, 0.1, 1024).is_err());
    }

    #[test]
    fn clockwise_boundary_rejected() {
        let mut nodes = make_disk(1.0, 16).unwrap().into_nodes();
        nodes.reverse();
        assert!(PatchBoundary::new(nodes).is_err());
    }

    #[test]
    fn ellipse_areas() {
        let e = make_ellipse(1.0, 1.0, 4096).unwrap();
        assert_eq!(e.nodes().len(), 4096);
        let d = make_disk(1.0, 4096).unwrap();
        for (p, q) in e.nodes().iter().zip(d.nodes()) {
            assert!(p.dist(*q) < 1e-15);
        }
        let k = make_ellipse(1.05, 1.0 / 1.05, 4096).unwrap();
        assert!((k.signed_area() / PI - 1.0).abs() < 1e-5);
        let w = make_ellipse(2.0, 1.0, 4096).unwrap();
        assert!((w.signed_area() / (2.0 * PI) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn zero_amplitude_is_unit_disk() {
        let p = make_perturbed_disk(3, 0.0, 1024).unwrap();
        let d = make_disk(1.0, 1024).unwrap();
        assert_eq!(p, d);
    }

    #[test]
    fn shoelace_orientation() {
        let sq = square();
        assert_eq!(signed_area(&sq), 1.0);
        let mut rev = sq.clone();
        rev.reverse();
        assert_eq!(signed_area(&rev), -1.0);
        let b = make_disk(2.0, 8192).unwrap();
        assert!((b.signed_area() / (4.0 * PI) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn membership() {
        let d = make_disk(1.0, 256).unwrap();
        assert!(d.contains(Vec2::ZERO));
        assert!(!d.contains(Vec2::new(2.0, 0.0)));
        let e = make_ellipse(2.0, 1.0, 256).unwrap();
        assert!(e.contains(Vec2::new(1.5, 0.0)));
        // nodes and edge points resolve to inside
        assert!(d.contains(d.nodes()[3]));
        let mid = (d.nodes()[5] + d.nodes()[6]) * 0.5;
        assert!(d.contains(mid));
        let loc = PointLocator::new(d.nodes());
        assert!(loc.contains(mid));
        assert!(loc.contains(d.nodes()[3]));
        assert!(!loc.contains(Vec2::new(0.0, 1.5)));
    }

    #[test]
    fn symmetric_difference_closed_forms() {
        let d = make_disk(1.0, 4096).unwrap();
        assert!(symmetric_difference_area(&d, DiskSpec::unit()) < 1e-4);
        let big = make_disk(1.1, 4096).unwrap();
        let sd = symmetric_difference_area(&big, DiskSpec::unit());
        assert!((sd - 0.21 * PI).abs() < 1e-3, "{sd}");
    }

    #[test]
    fn clipping_of_disjoint_and_nested_shapes() {
        // a small disk far from the origin: no overlap with B_1
        let far: Vec<Vec2> = make_disk(0.5, 64)
            .unwrap()
            .nodes()
            .iter()
            .map(|p| *p + Vec2::new(3.0, 0.0))
            .collect();
        let far = PatchBoundary::new(far).unwrap();
        assert!(intersection_area(&far, DiskSpec::unit()).abs() < 1e-14);
        let sd = symmetric_difference_area(&far, DiskSpec::unit());
        assert!((sd - (far.signed_area() + PI)).abs() < 1e-12);
        // patch strictly inside the disk
        let small = make_disk(0.5, 64).unwrap();
        let inter = intersection_area(&small, DiskSpec::unit());
        assert!((inter - small.signed_area()).abs() < 1e-14);
    }

    #[test]
    fn radial_sup_of_enlarged_disk() {
        let big = make_disk(1.1, 4096).unwrap();
        let sup = symmetric_difference_radial_sup(&big, DiskSpec::unit());
        assert!((sup - 0.21).abs() < 1e-12);
        let shifted: Vec<Vec2> =
            make_disk(0.3, 64).unwrap().nodes().iter().map(|p| *p + Vec2::new(2.0, 0.0)).collect();
        let shifted = PatchBoundary::new(shifted).unwrap();
        // origin outside the patch: the whole unit disk is in the difference
        let sup = symmetric_difference_radial_sup(&shifted, DiskSpec::unit());
        assert!((sup - (2.3f64.powi(2) - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn simplicity() {
        assert!(make_perturbed_disk(3, 0.3, 512).unwrap().is_simple());
        // a bow-tie with positive net area is rejected by is_simple
        let bowtie: Vec<Vec2> = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(1.5, 2.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(0.5, 2.0),
            Vec2::new(0.2, 2.0),
            Vec2::new(0.0, 1.0),
        ];
        let b = PatchBoundary::new(bowtie).unwrap();
        assert!(!b.is_simple());
    }
}
