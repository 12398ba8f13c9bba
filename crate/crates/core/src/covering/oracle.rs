//! Membership oracles for bounded open sets.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::{Cube, OperatorParams, PointMassMeasure, SampledFunction, MAX_DIM};
use crate::potential::{riesz_potential_direct, PotentialOptions};

/// Where a closed cube sits relative to the open set `E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Inside,
    Outside,
    Straddles,
}

/// `lower ≤ dist(Q, Eᶜ) ≤ upper`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceBracket {
    pub lower: f64,
    pub upper: f64,
}

impl DistanceBracket {
    pub fn exact(d: f64) -> Self {
        Self { lower: d, upper: d }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Lattice resolution used by the sampled defaults: `(m+1)ⁿ` points per
/// cube, which includes the corners, the center and the edge midpoints.
const SAMPLE_LATTICE: usize = 4;
/// Bisection stops once the bracket is this fraction of the cube side.
pub const BRACKET_REL_TOL: f64 = 1e-7;

/// A bounded open set `E ⊂ ℝⁿ` known through point membership.
///
/// The provided `classify` and `complement_distance` sample the oracle. They
/// are exact only up to that sampling: a feature of `E` smaller than the
/// sample spacing can be missed, and the distance bracket is certified along
/// the probed directions only. Oracles with known geometry should override
/// both.
pub trait OpenSetOracle: Sync {
    fn dim(&self) -> usize;

    fn contains(&self, x: &[f64]) -> bool;

    /// A cube whose closure contains `E`; points outside it are in `Eᶜ`.
    fn bounding_box(&self) -> Cube;

    /// Smallest cube side the decomposition may visit.
    fn resolution_floor(&self) -> f64;

    fn classify(&self, q: &Cube) -> Region {
        let mut inside = 0usize;
        let pts = q.lattice(SAMPLE_LATTICE);
        for p in &pts {
            if self.contains(p) {
                inside += 1;
            }
        }
        match inside {
            0 => Region::Outside,
            k if k == pts.len() => Region::Inside,
            _ => Region::Straddles,
        }
    }

    /// Bracket for `dist(Q, Eᶜ)`, only called for cubes classified
    /// [`Region::Inside`].
    fn complement_distance(&self, q: &Cube) -> DistanceBracket {
        sampled_complement_distance(self, q)
    }
}

fn outside_box(b: &Cube, x: &[f64]) -> bool {
    !b.contains_closed(x)
}

/// Marches outward from boundary samples of `q` along axis and diagonal
/// directions until leaving `E`, then bisects the crossing.
pub fn sampled_complement_distance<O: OpenSetOracle + ?Sized>(oracle: &O, q: &Cube) -> DistanceBracket {
    let n = q.dim();
    let bbox = oracle.bounding_box();
    let tol = q.side() * BRACKET_REL_TOL;
    let center = q.center();
    let in_e = |x: &[f64]| !outside_box(&bbox, x) && oracle.contains(x);
    let mut dirs: Vec<[f64; MAX_DIM]> = Vec::new();
    for k in 0..n {
        for s in [-1.0, 1.0] {
            let mut u = [0.0; MAX_DIM];
            u[k] = s;
            dirs.push(u);
        }
    }
    if n > 1 {
        let norm = 1.0 / (n as f64).sqrt();
        for mask in 0..1usize << n {
            let mut u = [0.0; MAX_DIM];
            for (k, slot) in u.iter_mut().enumerate().take(n) {
                *slot = if mask >> k & 1 == 1 { norm } else { -norm };
            }
            dirs.push(u);
        }
    }
    let mut best = DistanceBracket {
        lower: f64::INFINITY,
        upper: f64::INFINITY,
    };
    let on_boundary = |p: &[f64]| (0..n).any(|k| p[k] == q.lo()[k] || p[k] == q.hi()[k]);
    let mut x = vec![0.0; n];
    for p in q.lattice(SAMPLE_LATTICE).into_iter().filter(|p| on_boundary(p)) {
        for u in &dirs {
            // outward directions only
            let outward: f64 = (0..n).map(|k| u[k] * (p[k] - center[k])).sum();
            if outward <= 0.0 {
                continue;
            }
            let at = |t: f64, x: &mut Vec<f64>| {
                for k in 0..n {
                    x[k] = p[k] + t * u[k];
                }
            };
            let mut t_in = 0.0;
            let mut t_out = q.side() / 4.0;
            loop {
                at(t_out, &mut x);
                if !in_e(&x) {
                    break;
                }
                t_in = t_out;
                t_out *= 2.0;
            }
            while t_out - t_in > tol {
                let mid = 0.5 * (t_in + t_out);
                at(mid, &mut x);
                if in_e(&x) {
                    t_in = mid;
                } else {
                    t_out = mid;
                }
            }
            at(t_in, &mut x);
            let lower = q.distance_to_point(&x);
            at(t_out, &mut x);
            let upper = q.distance_to_point(&x);
            if upper < best.upper {
                best = DistanceBracket { lower, upper };
            }
        }
    }
    best
}

/// Union of open Euclidean balls in ℝ¹ or ℝ² with exact geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallUnion {
    dim: usize,
    centers: Vec<Vec<f64>>,
    radii: Vec<f64>,
    floor: f64,
}

impl BallUnion {
    pub fn new(dim: usize, centers: Vec<Vec<f64>>, radii: Vec<f64>, floor: f64) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(invalid("dim", "ball unions are supported in 1 and 2 dimensions"));
        }
        if centers.len() != radii.len() {
            return Err(Error::LengthMismatch {
                what: "radii",
                expected: centers.len(),
                got: radii.len(),
            });
        }
        for c in &centers {
            if c.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: c.len() });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(invalid("centers", "non-finite coordinate"));
            }
        }
        if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(invalid("radii", "radii must be positive and finite"));
        }
        if !(floor > 0.0) {
            return Err(invalid("resolution_floor", "must be positive"));
        }
        Ok(Self { dim, centers, radii, floor })
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Index of a ball containing `x`, if any.
    pub fn component_of(&self, x: &[f64]) -> Option<usize> {
        (0..self.radii.len()).find(|&i| sq(&self.centers[i], x) < self.radii[i] * self.radii[i])
    }

    /// Boundary of `E`: merged interval endpoints in 1D.
    fn endpoints_1d(&self) -> Vec<f64> {
        let mut iv: Vec<(f64, f64)> = self
            .centers
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| (c[0] - r, c[0] + r))
            .collect();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in iv {
            match merged.last_mut() {
                // open intervals sharing only an endpoint stay separate
                Some(last) if a < last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        merged.into_iter().flat_map(|(a, b)| [a, b]).collect()
    }

    /// Arcs `[θ₀, θ₁]` of circle `i` not covered by the other open balls.
    fn uncovered_arcs(&self, i: usize) -> Vec<(f64, f64)> {
        use std::f64::consts::TAU;
        let (ci, ri) = (&self.centers[i], self.radii[i]);
        let mut covered: Vec<(f64, f64)> = Vec::new();
        for j in 0..self.radii.len() {
            if j == i {
                continue;
            }
            let (cj, rj) = (&self.centers[j], self.radii[j]);
            let d = sq(ci, cj).sqrt();
            if d == 0.0 {
                if rj > ri {
                    return Vec::new();
                }
                continue;
            }
            let cos_phi = (d * d + ri * ri - rj * rj) / (2.0 * d * ri);
            if cos_phi <= -1.0 {
                return Vec::new();
            }
            if cos_phi >= 1.0 {
                continue;
            }
            let phi = cos_phi.acos();
            let dir = (cj[1] - ci[1]).atan2(cj[0] - ci[0]);
            let a = (dir - phi).rem_euclid(TAU);
            let b = a + 2.0 * phi;
            if b <= TAU {
                covered.push((a, b));
            } else {
                covered.push((a, TAU));
                covered.push((0.0, b - TAU));
            }
        }
        covered.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut arcs = Vec::new();
        let mut t = 0.0;
        for (a, b) in covered {
            if a > t {
                arcs.push((t, a));
            }
            t = f64::max(t, b);
        }
        if t < TAU {
            arcs.push((t, TAU));
        }
        arcs
    }

    fn circle_point(&self, i: usize, theta: f64) -> [f64; 2] {
        let c = &self.centers[i];
        [c[0] + self.radii[i] * theta.cos(), c[1] + self.radii[i] * theta.sin()]
    }

    /// `dist(Q, ∂E)` for the closed cube `q`; zero when `∂E` meets `q`.
    fn boundary_distance(&self, q: &Cube) -> f64 {
        if self.dim == 1 {
            return self
                .endpoints_1d()
                .into_iter()
                .map(|e| q.distance_to_point(&[e]))
                .fold(f64::INFINITY, f64::min);
        }
        use std::f64::consts::{FRAC_PI_2, TAU};
        let mut best = f64::INFINITY;
        for i in 0..self.radii.len() {
            let arcs = self.uncovered_arcs(i);
            if arcs.is_empty() {
                continue;
            }
            let c = &self.centers[i];
            let in_arc = |theta: f64| {
                let t = theta.rem_euclid(TAU);
                arcs.iter().any(|&(a, b)| a <= t && t <= b)
            };
            let mut candidates: Vec<f64> = arcs.iter().flat_map(|&(a, b)| [a, b]).collect();
            candidates.extend((0..4).map(|k| k as f64 * FRAC_PI_2));
            for corner in q.corners() {
                let dir = (corner[1] - c[1]).atan2(corner[0] - c[0]);
                candidates.push(dir);
                candidates.push(dir + std::f64::consts::PI);
            }
            for theta in candidates {
                if in_arc(theta) {
                    best = best.min(q.distance_to_point(&self.circle_point(i, theta)));
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            if self.arc_crosses_cube(i, q, &in_arc) {
                return 0.0;
            }
        }
        best
    }

    fn arc_crosses_cube(&self, i: usize, q: &Cube, in_arc: &dyn Fn(f64) -> bool) -> bool {
        let c = &self.centers[i];
        let r = self.radii[i];
        for axis in 0..2 {
            let other = 1 - axis;
            for plane in [q.lo()[axis], q.hi()[axis]] {
                let off = plane - c[axis];
                if off.abs() > r {
                    continue;
                }
                let h = (r * r - off * off).sqrt();
                for s in [-h, h] {
                    let v = c[other] + s;
                    if q.lo()[other] <= v && v <= q.hi()[other] {
                        let mut p = [0.0; 2];
                        p[axis] = plane;
                        p[other] = v;
                        let theta = (p[1] - c[1]).atan2(p[0] - c[0]);
                        if in_arc(theta) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl OpenSetOracle for BallUnion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.component_of(x).is_some()
    }

    fn bounding_box(&self) -> Cube {
        if self.is_empty() {
            return Cube::centered(&vec![0.0; self.dim], 1.0);
        }
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for (c, r) in self.centers.iter().zip(&self.radii) {
            for k in 0..self.dim {
                lo[k] = lo[k].min(c[k] - r);
                hi[k] = hi[k].max(c[k] + r);
            }
        }
        let side = (0..self.dim).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
        Cube::from_bounds(lo.clone(), lo.iter().map(|a| a + side).collect())
    }

    fn resolution_floor(&self) -> f64 {
        self.floor
    }

    fn classify(&self, q: &Cube) -> Region {
        let d = self.boundary_distance(q);
        if d == 0.0 {
            Region::Straddles
        } else if self.contains(&q.center()) {
            Region::Inside
        } else {
            Region::Outside
        }
    }

    fn complement_distance(&self, q: &Cube) -> DistanceBracket {
        DistanceBracket::exact(self.boundary_distance(q))
    }
}

/// The superlevel set `{x : I_α f(x) > λ}` of a potential with `f ≥ 0`.
///
/// Atoms carrying `f > 0` have infinite potential and lie in the set. The
/// set is bounded because `I_α f(x) ≤ Σ mᵢ fᵢ / dist(x, supp µ)^{N-α}`.
pub struct SuperlevelOracle<'a> {
    mu: &'a PointMassMeasure,
    f: &'a SampledFunction,
    params: OperatorParams,
    lambda: f64,
    floor: f64,
    bbox: Cube,
}

impl<'a> SuperlevelOracle<'a> {
    pub fn new(
        mu: &'a PointMassMeasure,
        f: &'a SampledFunction,
        params: OperatorParams,
        lambda: f64,
        floor: f64,
    ) -> Result<Self> {
        f.check_aligned(mu)?;
        if let Some(i) = f.iter().position(|&v| v < 0.0) {
            return Err(invalid("f", format!("superlevel sets need f ≥ 0 (f[{i}] = {})", f[i])));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("{lambda} must be positive and finite")));
        }
        if !(floor > 0.0) {
            return Err(invalid("resolution_floor", "must be positive"));
        }
        let total: f64 = mu.masses().iter().zip(f.iter()).map(|(m, v)| m * v).sum();
        let reach = (total / lambda).powf(1.0 / params.kernel_exponent());
        let (lo, hi) = mu.bounding_box();
        let side = (0..mu.dim()).map(|k| hi[k] - lo[k]).fold(0.0, f64::max) + 2.0 * reach;
        let lo: Vec<f64> = lo.iter().map(|a| a - reach).collect();
        let bbox = Cube::from_bounds(lo.clone(), lo.iter().map(|a| a + side).collect());
        Ok(Self {
            mu,
            f,
            params,
            lambda,
            floor,
            bbox,
        })
    }
}

impl OpenSetOracle for SuperlevelOracle<'_> {
    fn dim(&self) -> usize {
        self.mu.dim()
    }

    fn contains(&self, x: &[f64]) -> bool {
        let opts = PotentialOptions {
            exclude_diagonal: false,
            ..Default::default()
        };
        riesz_potential_direct(self.mu, self.f, &self.params, x, &opts).is_ok_and(|v| v > self.lambda)
    }

    fn bounding_box(&self) -> Cube {
        self.bbox.clone()
    }

    fn resolution_floor(&self) -> f64 {
        self.floor
    }
}
