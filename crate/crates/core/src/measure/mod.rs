//! Finite point-mass measures on ℝⁿ, the balls and cubes used to probe them,
//! and exact mass/integral queries.
//!
//! Every query is a plain filtered sum over atoms in atom-index order, so the
//! result of [`ball_mass`] is bit-for-bit the same as a hand-written filter
//! over the atom list.

mod cube;
pub mod io;
mod scan;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use cube::{Cube, DyadicCube, DyadicRoot};
pub use scan::{
    doubling_constant_scan, growth_constant_scan, CenterPolicy, DoublingReport, GrowthReport,
    ScaleSample,
};

/// Largest ambient dimension handled by the toolkit.
pub const MAX_DIM: usize = 3;

/// Euclidean distance between two points of equal dimension.
#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Ambient dimension `n`, growth exponent `N` and order `α` of the operators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub ambient_dim: usize,
    pub growth_exp: f64,
    pub alpha: f64,
}

impl OperatorParams {
    pub fn new(ambient_dim: usize, growth_exp: f64, alpha: f64) -> Result<Self> {
        if ambient_dim == 0 || ambient_dim > MAX_DIM {
            return Err(invalid("ambient_dim", format!("{ambient_dim} not in 1..={MAX_DIM}")));
        }
        if !(growth_exp.is_finite() && growth_exp > 0.0) {
            return Err(invalid("growth_exp", format!("{growth_exp} must be positive")));
        }
        if !(alpha > 0.0 && alpha < growth_exp) {
            return Err(invalid(
                "alpha",
                format!("{alpha} must satisfy 0 < alpha < growth_exp = {growth_exp}"),
            ));
        }
        Ok(Self {
            ambient_dim,
            growth_exp,
            alpha,
        })
    }

    /// `N - α`, the decay exponent of the Riesz kernel.
    pub fn kernel_exponent(&self) -> f64 {
        self.growth_exp - self.alpha
    }

    /// `(N - α) / N`, the power of `µ(B)` normalising the fractional maximal average.
    pub fn maximal_exponent(&self) -> f64 {
        (self.growth_exp - self.alpha) / self.growth_exp
    }

    /// `N / (N - α)`, the ε-exponent of the good-λ bound.
    pub fn good_lambda_exponent(&self) -> f64 {
        self.growth_exp / (self.growth_exp - self.alpha)
    }
}

/// A finite sum of positive point masses in ℝⁿ.
///
/// Coordinates are stored flat with stride `dim`. Atoms sharing identical
/// coordinates are merged at construction (masses summed), so distinct atoms
/// are at positive distance from each other.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMassMeasure {
    dim: usize,
    coords: Vec<f64>,
    masses: Vec<f64>,
}

/// Result of merging duplicate coordinates: `groups[i]` is the merged atom
/// that input atom `i` was folded into.
#[derive(Clone, Debug)]
pub struct MergeMap {
    pub groups: Vec<usize>,
    pub merged_len: usize,
}

impl MergeMap {
    /// Mass-weighted average of per-input-atom values onto the merged atoms.
    /// Keeps `Σ mᵢ vᵢ` unchanged across the merge.
    pub fn merge_values(&self, input_masses: &[f64], values: &[f64], merged_masses: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.merged_len];
        let mut counts = vec![0usize; self.merged_len];
        let mut first = vec![0.0; self.merged_len];
        for (i, &g) in self.groups.iter().enumerate() {
            if counts[g] == 0 {
                first[g] = values[i];
            }
            counts[g] += 1;
            acc[g] += input_masses[i] * values[i];
        }
        (0..self.merged_len)
            .map(|g| if counts[g] == 1 { first[g] } else { acc[g] / merged_masses[g] })
            .collect()
    }
}

impl PointMassMeasure {
    /// Builds a measure from a list of points and masses.
    pub fn new(dim: usize, points: &[Vec<f64>], masses: &[f64]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, masses.to_vec())
    }

    /// Builds a measure from flat coordinates (stride `dim`).
    pub fn from_flat(dim: usize, coords: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        Self::from_flat_with_map(dim, coords, masses).map(|(m, _)| m)
    }

    /// Like [`from_flat`](Self::from_flat) but also returns how input atoms
    /// were merged, so aligned per-atom columns can follow.
    pub fn from_flat_with_map(
        dim: usize,
        coords: Vec<f64>,
        masses: Vec<f64>,
    ) -> Result<(Self, MergeMap)> {
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid("dim", format!("{dim} not in 1..={MAX_DIM}")));
        }
        if masses.is_empty() {
            return Err(Error::Empty("measure has no atoms"));
        }
        if coords.len() != masses.len() * dim {
            return Err(Error::LengthMismatch {
                what: "coordinates",
                expected: masses.len() * dim,
                got: coords.len(),
            });
        }
        for (i, &c) in coords.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite {
                    what: "coordinates",
                    index: i / dim,
                    value: c,
                });
            }
        }
        for (i, &m) in masses.iter().enumerate() {
            if !m.is_finite() {
                return Err(Error::NonFinite {
                    what: "masses",
                    index: i,
                    value: m,
                });
            }
            if m <= 0.0 {
                return Err(Error::NonPositiveMass { index: i, value: m });
            }
        }

        // -0.0 and 0.0 are the same location
        let key = |p: &[f64]| -> [u64; MAX_DIM] {
            let mut k = [0u64; MAX_DIM];
            for (slot, &x) in k.iter_mut().zip(p) {
                *slot = (x + 0.0).to_bits();
            }
            k
        };
        let mut seen: HashMap<[u64; MAX_DIM], usize> = HashMap::with_capacity(masses.len());
        let mut out_coords = Vec::with_capacity(coords.len());
        let mut out_masses: Vec<f64> = Vec::with_capacity(masses.len());
        let mut groups = Vec::with_capacity(masses.len());
        for (i, p) in coords.chunks_exact(dim).enumerate() {
            match seen.get(&key(p)) {
                Some(&g) => {
                    out_masses[g] += masses[i];
                    groups.push(g);
                }
                None => {
                    let g = out_masses.len();
                    seen.insert(key(p), g);
                    out_coords.extend(p.iter().map(|&x| x + 0.0));
                    out_masses.push(masses[i]);
                    groups.push(g);
                }
            }
        }
        let merged_len = out_masses.len();
        Ok((
            Self {
                dim,
                coords: out_coords,
                masses: out_masses,
            },
            MergeMap { groups, merged_len },
        ))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Componentwise `(min, max)` of the atom coordinates.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Smallest distance between two distinct atoms; `None` for a single atom.
    pub fn min_separation(&self) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        if self.dim == 1 {
            let mut xs = self.coords.clone();
            xs.sort_by(f64::total_cmp);
            return xs.windows(2).map(|w| w[1] - w[0]).reduce(f64::min);
        }
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.min(squared_distance(self.point(i), self.point(j)));
            }
        }
        Some(best.sqrt())
    }

    /// Largest distance from `x` to any atom.
    pub fn max_distance_from(&self, x: &[f64]) -> f64 {
        self.points().map(|p| distance(x, p)).fold(0.0, f64::max)
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Values of a function on the atoms of a measure, index-aligned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction(Vec<f64>);

impl SampledFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "sampled function",
                index,
                value,
            });
        }
        Ok(Self(values))
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self(vec![value; len])
    }

    /// `f(x)` evaluated at every atom of `mu`.
    pub fn from_fn(mu: &PointMassMeasure, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new(mu.points().map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| v * c).collect())
    }

    pub(crate) fn check_aligned(&self, mu: &PointMassMeasure) -> Result<()> {
        if self.0.len() != mu.len() {
            return Err(Error::LengthMismatch {
                what: "sampled function",
                expected: mu.len(),
                got: self.0.len(),
            });
        }
        Ok(())
    }
}

impl std::ops::Deref for SampledFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Closed Euclidean ball `{y : |y - center| ≤ radius}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(invalid("radius", format!("{radius} must be >= 0")));
        }
        Ok(Self { center, radius })
    }

    #[inline]
    pub fn contains(&self, y: &[f64]) -> bool {
        distance(&self.center, y) <= self.radius
    }
}

/// `µ(B)`: sum of the masses of atoms inside the closed ball, in atom order.
pub fn ball_mass(mu: &PointMassMeasure, b: &Ball) -> f64 {
    let mut acc = 0.0;
    for (p, &m) in mu.points().zip(mu.masses()) {
        if b.contains(p) {
            acc += m;
        }
    }
    acc
}

/// `∫_B f dµ` (or `∫_B |f| dµ` when `absolute`).
pub fn ball_integral(mu: &PointMassMeasure, f: &SampledFunction, b: &Ball, absolute: bool) -> Result<f64> {
    f.check_aligned(mu)?;
    let mut acc = 0.0;
    for ((p, &m), &v) in mu.points().zip(mu.masses()).zip(f.values()) {
        if b.contains(p) {
            acc += m * if absolute { v.abs() } else { v };
        }
    }
    Ok(acc)
}

/// Mass of the concentric dilation `dilation · q` (half-open).
pub fn cube_mass(mu: &PointMassMeasure, q: &Cube, dilation: f64) -> Result<f64> {
    if !(dilation >= 1.0) {
        return Err(invalid("dilation", format!("{dilation} must be >= 1")));
    }
    let cube = q.dilate(dilation);
    Ok(mass_in_cube(mu, &cube))
}

/// `µ(Q)` for the half-open cube `Q`.
pub fn mass_in_cube(mu: &PointMassMeasure, cube: &Cube) -> f64 {
    let mut acc = 0.0;
    for (p, &m) in mu.points().zip(mu.masses()) {
        if cube.contains(p) {
            acc += m;
        }
    }
    acc
}

/// Log-spaced window of radii `[r_min, r_max]` used by the scale scans.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleRange {
    pub r_min: f64,
    pub r_max: f64,
    pub num_samples: usize,
}

impl ScaleRange {
    pub fn new(r_min: f64, r_max: f64, num_samples: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_min.is_finite()) {
            return Err(invalid("r_min", format!("{r_min} must be positive")));
        }
        if !(r_max > r_min && r_max.is_finite()) {
            return Err(invalid("r_max", format!("{r_max} must exceed r_min = {r_min}")));
        }
        if num_samples < 2 {
            return Err(invalid("num_samples", "need at least 2 radii"));
        }
        Ok(Self {
            r_min,
            r_max,
            num_samples,
        })
    }

    /// Default window for a measure: from the minimum atom separation up to
    /// the diameter of the atom set.
    pub fn for_measure(mu: &PointMassMeasure, num_samples: usize) -> Result<Self> {
        let r_min = mu
            .min_separation()
            .ok_or_else(|| invalid("r_min", "single-atom measure has no separation scale"))?;
        let (lo, hi) = mu.bounding_box();
        let diam = distance(&lo, &hi);
        Self::new(r_min, diam.max(2.0 * r_min), num_samples)
    }

    /// Geometrically spaced radii; the endpoints are exactly `r_min`, `r_max`.
    pub fn radii(&self) -> Vec<f64> {
        let n = self.num_samples;
        let ratio = (self.r_max / self.r_min).ln();
        (0..n)
            .map(|i| {
                if i == 0 {
                    self.r_min
                } else if i == n - 1 {
                    self.r_max
                } else {
                    self.r_min * (ratio * i as f64 / (n - 1) as f64).exp()
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], ms: &[f64]) -> PointMassMeasure {
        PointMassMeasure::from_flat(1, xs.to_vec(), ms.to_vec()).unwrap()
    }

    #[test]
    fn closed_ball_contains_center_atom() {
        let mu = PointMassMeasure::new(2, &[vec![0.0, 0.0]], &[2.0]).unwrap();
        let b = Ball::new(vec![0.0, 0.0], 0.0).unwrap();
        assert_eq!(ball_mass(&mu, &b), 2.0);
    }

    #[test]
    fn ball_mass_picks_near_atom_only() {
        let mu = line(&[0.0, 3.0], &[1.0, 1.0]);
        assert_eq!(ball_mass(&mu, &Ball::new(vec![1.0], 1.5).unwrap()), 1.0);
    }

    #[test]
    fn ball_mass_on_hundred_atom_grid() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let mu = line(&xs, &[0.01; 100]);
        let b = Ball::new(vec![0.5], 0.25).unwrap();
        // oracle: direct filter
        let count = xs.iter().filter(|&&x| (x - 0.5f64).abs() <= 0.25).count();
        assert_eq!(count, 51);
        let got = ball_mass(&mu, &b);
        assert!((got - 0.51).abs() < 1e-14, "{got}");
    }

    #[test]
    fn ball_integral_signed_and_absolute() {
        let mu = PointMassMeasure::new(2, &[vec![0.0, 1.0], vec![1.0, 1.0]], &[1.0, 1.0]).unwrap();
        let f = SampledFunction::new(vec![2.0, -4.0]).unwrap();
        let b = Ball::new(vec![0.5, 1.0], 1.0).unwrap();
        assert_eq!(ball_integral(&mu, &f, &b, true).unwrap(), 6.0);
        assert_eq!(ball_integral(&mu, &f, &b, false).unwrap(), -2.0);
    }

    #[test]
    fn ball_integral_of_one_is_mass() {
        let mu = line(&[0.0, 0.3, 0.7, 2.0], &[0.5, 1.5, 2.0, 0.25]);
        let one = SampledFunction::constant(4, 1.0);
        for r in [0.0, 0.3, 0.5, 1.0, 5.0] {
            let b = Ball::new(vec![0.2], r).unwrap();
            assert_eq!(ball_integral(&mu, &one, &b, false).unwrap(), ball_mass(&mu, &b));
        }
    }

    #[test]
    fn cube_mass_dilations() {
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 / 10.0 - 0.5).collect();
        let mu = line(&xs, &[0.1; 21]);
        let unit = Cube::from_bounds(vec![0.0], vec![1.0]);
        let doubled = cube_mass(&mu, &unit, 2.0).unwrap();
        // oracle: atoms in [-0.5, 1.5)
        let expect: f64 = xs
            .iter()
            .filter(|&&x| (-0.5..1.5).contains(&x))
            .map(|_| 0.1)
            .sum();
        assert_eq!(doubled, expect);
        assert_eq!(cube_mass(&mu, &unit, 1.0).unwrap(), mass_in_cube(&mu, &unit));

        let single = PointMassMeasure::new(2, &[vec![0.5, 0.5]], &[3.0]).unwrap();
        let q = Cube::from_bounds(vec![0.0, 0.0], vec![1.0, 1.0]);
        assert_eq!(cube_mass(&single, &q, 2.0).unwrap(), cube_mass(&single, &q, 1.0).unwrap());
        assert!(cube_mass(&single, &q, 0.5).is_err());
    }

    #[test]
    fn duplicates_are_merged() {
        let mu = PointMassMeasure::from_flat(1, vec![0.0, -0.0, 1.0, 0.0], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(mu.len(), 2);
        assert_eq!(mu.masses(), &[7.0, 3.0]);
    }

    #[test]
    fn rejects_bad_masses() {
        assert!(matches!(
            PointMassMeasure::from_flat(1, vec![0.0], vec![0.0]),
            Err(Error::NonPositiveMass { .. })
        ));
        assert!(PointMassMeasure::from_flat(1, vec![], vec![]).is_err());
        assert!(PointMassMeasure::from_flat(2, vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn operator_params_validation() {
        assert!(OperatorParams::new(1, 1.0, 0.5).is_ok());
        assert!(OperatorParams::new(1, 1.0, 1.0).is_err());
        assert!(OperatorParams::new(4, 1.0, 0.5).is_err());
        let p = OperatorParams::new(2, 2.0, 0.5).unwrap();
        assert_eq!(p.good_lambda_exponent(), 2.0 / 1.5);
    }

    #[test]
    fn scale_range_endpoints_exact() {
        let s = ScaleRange::new(0.05, 0.5, 32).unwrap();
        let r = s.radii();
        assert_eq!(r[0], 0.05);
        assert_eq!(r[31], 0.5);
        assert!(r.windows(2).all(|w| w[0] < w[1]));
    }
}
