//! Whitney decomposition of a bounded open set into dyadic cubes, and
//! verification of its covering properties.
//!
//! The descent starts from the oracle's bounding box and keeps the maximal
//! dyadic cubes `Q ⊂ E` with `diam Q ≤ dist(Q, Eᶜ)`. Maximality gives the
//! upper bound: the parent `P` failed, so `dist(Q, Eᶜ) ≤ dist(P, Eᶜ) + diam P
//! < 2 diam P = 4 diam Q`.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::oracle::{DistanceBracket, OpenSetOracle, Region};
use crate::error::{invalid, Error, Result};
use crate::measure::{mass_in_cube, Cube, DyadicCube, DyadicRoot, PointMassMeasure};

/// `δ` in the dilated cubes `(1+δ)Q`.
pub const DEFAULT_DELTA: f64 = 0.125;
/// Upper bound on cubes visited by one descent.
pub const DEFAULT_NODE_CAP: usize = 5_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCube {
    pub cube: DyadicCube,
    pub dist: DistanceBracket,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyDecomposition {
    pub root: DyadicRoot,
    /// Sorted by `(level, index)`.
    pub cubes: Vec<WhitneyCube>,
    pub dilation_delta: f64,
    pub resolution_floor: f64,
    /// Cubes at the resolution floor that could not be selected.
    pub residue: Vec<DyadicCube>,
    pub uncovered_volume_bound: f64,
    pub visited: usize,
}

impl WhitneyDecomposition {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// `µ`-mass of the residue cubes.
    pub fn uncovered_mass_bound(&self, mu: &PointMassMeasure) -> f64 {
        self.residue.iter().fold(0.0, |acc, q| acc + mass_in_cube(mu, &q.to_cube()))
    }

    /// CSV rows `level,index_1..index_n,side,dist_lower,dist_upper`.
    pub fn to_csv(&self) -> String {
        let n = self.root.corner.len();
        let mut out = String::from("level");
        for k in 1..=n {
            let _ = write!(out, ",index_{k}");
        }
        out.push_str(",side,dist_lower,dist_upper\n");
        for c in &self.cubes {
            let _ = write!(out, "{}", c.cube.level);
            for i in &c.cube.index {
                let _ = write!(out, ",{i}");
            }
            let _ = writeln!(out, ",{:?},{:?},{:?}", c.cube.side(), c.dist.lower, c.dist.upper);
        }
        out
    }
}

#[derive(Default)]
struct Found {
    cubes: Vec<WhitneyCube>,
    residue: Vec<DyadicCube>,
}

impl Found {
    fn append(&mut self, other: Found) {
        self.cubes.extend(other.cubes);
        self.residue.extend(other.residue);
    }
}

struct Descent<'a, O: ?Sized> {
    oracle: &'a O,
    floor: f64,
    visited: AtomicUsize,
    cap: usize,
    aborted: AtomicBool,
}

impl<O: OpenSetOracle + ?Sized> Descent<'_, O> {
    fn visit(&self, q: DyadicCube, parent_inside: bool) -> Result<Found> {
        if self.visited.fetch_add(1, Ordering::Relaxed) >= self.cap {
            self.aborted.store(true, Ordering::Relaxed);
            return Ok(Found::default());
        }
        let cube = q.to_cube();
        let region = self.oracle.classify(&cube);
        // the corners of a child are sample points of its parent
        if parent_inside && region == Region::Outside {
            return Err(Error::OracleInconsistent(format!(
                "cube at level {} index {:?} is {region:?} but its parent was inside",
                q.level, q.index
            )));
        }
        let mut found = Found::default();
        match region {
            Region::Outside => return Ok(found),
            Region::Inside => {
                let dist = self.oracle.complement_distance(&cube);
                if dist.lower >= cube.diam() {
                    found.cubes.push(WhitneyCube { cube: q, dist });
                    return Ok(found);
                }
            }
            Region::Straddles => {}
        }
        if cube.side() / 2.0 < self.floor {
            found.residue.push(q);
            return Ok(found);
        }
        let inside = region == Region::Inside;
        let parts: Vec<Result<Found>> = q
            .children()
            .into_par_iter()
            .map(|c| self.visit(c, inside))
            .collect();
        for p in parts {
            found.append(p?);
        }
        Ok(found)
    }
}

/// Whitney decomposition of the oracle's set.
pub fn whitney_decompose<O: OpenSetOracle + ?Sized>(oracle: &O) -> Result<WhitneyDecomposition> {
    whitney_decompose_capped(oracle, DEFAULT_NODE_CAP)
}

pub fn whitney_decompose_capped<O: OpenSetOracle + ?Sized>(oracle: &O, cap: usize) -> Result<WhitneyDecomposition> {
    let floor = oracle.resolution_floor();
    if !(floor > 0.0 && floor.is_finite()) {
        return Err(invalid("resolution_floor", format!("{floor} must be positive")));
    }
    let bbox = oracle.bounding_box();
    if bbox.dim() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim(),
            got: bbox.dim(),
        });
    }
    let root = DyadicRoot {
        corner: bbox.lo().to_vec(),
        side: bbox.side(),
    };
    let descent = Descent {
        oracle,
        floor,
        visited: AtomicUsize::new(0),
        cap,
        aborted: AtomicBool::new(false),
    };
    let found = descent.visit(DyadicCube::root_cube(root.clone()), false)?;
    let visited = descent.visited.load(Ordering::Relaxed);
    if descent.aborted.load(Ordering::Relaxed) {
        return Err(Error::NodeCapExceeded { count: visited, cap });
    }
    let Found { mut cubes, mut residue } = found;
    cubes.sort_by(|a, b| (a.cube.level, &a.cube.index).cmp(&(b.cube.level, &b.cube.index)));
    residue.sort_by(|a, b| (a.level, &a.index).cmp(&(b.level, &b.index)));
    let uncovered_volume_bound = residue.iter().fold(0.0, |acc, q| acc + q.to_cube().volume());
    Ok(WhitneyDecomposition {
        root,
        cubes,
        dilation_delta: DEFAULT_DELTA,
        resolution_floor: floor,
        residue,
        uncovered_volume_bound,
        visited,
    })
}

/// Outcome of checking a decomposition against the Whitney properties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCheck {
    pub cubes: usize,
    /// Pairs of cubes with overlapping interiors.
    pub overlapping_pairs: usize,
    /// Cubes violating `√n ℓ ≤ dist ≤ 4√n ℓ` beyond the tolerance.
    pub distance_violations: usize,
    pub distance_tolerance_rel: f64,
    pub min_dist_over_diam: f64,
    pub max_dist_over_diam: f64,
    pub min_neighbor_side_ratio: f64,
    pub max_neighbor_side_ratio: f64,
    pub max_neighbors: usize,
    pub neighbor_bound: usize,
    pub max_dilated_overlap: usize,
    pub overlap_points: usize,
    /// Sample points of some `(1+δ)Q` found outside `E`.
    pub dilated_escapes: usize,
    pub passed: bool,
}

type Key = (u32, Vec<i64>);

fn key(q: &DyadicCube) -> Key {
    (q.level, q.index.clone())
}

/// Neighbour lists (closures touching) for every cube.
pub fn neighbor_lists(d: &WhitneyDecomposition) -> Vec<Vec<usize>> {
    let selected: HashMap<Key, usize> = d.cubes.iter().enumerate().map(|(i, c)| (key(&c.cube), i)).collect();
    let mut occupied: HashSet<Key> = HashSet::new();
    for c in &d.cubes {
        let mut q = c.cube.clone();
        while let Some(p) = q.parent() {
            if !occupied.insert(key(&p)) {
                break;
            }
            q = p;
        }
    }
    let n = d.root.corner.len();
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(n as u32))
        .map(|mut t| {
            (0..n)
                .map(|_| {
                    let o = (t % 3) as i64 - 1;
                    t /= 3;
                    o
                })
                .collect()
        })
        .filter(|o: &Vec<i64>| o.iter().any(|&v| v != 0))
        .collect();
    d.cubes
        .par_iter()
        .map(|c| {
            let q = &c.cube;
            let mut out: Vec<usize> = Vec::new();
            for o in &offsets {
                let cell = DyadicCube {
                    level: q.level,
                    index: q.index.iter().zip(o).map(|(i, d)| i + d).collect(),
                    root: q.root.clone(),
                };
                // a selected ancestor-or-self of the adjacent cell
                let mut hit = None;
                for l in 0..=cell.level {
                    if let Some(&j) = selected.get(&(l, cell.ancestor_index(l))) {
                        hit = Some(j);
                        break;
                    }
                }
                match hit {
                    Some(j) => out.push(j),
                    None => descend_touching(&cell, q, &selected, &occupied, &mut out),
                }
            }
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect()
}

fn descend_touching(
    cell: &DyadicCube,
    q: &DyadicCube,
    selected: &HashMap<Key, usize>,
    occupied: &HashSet<Key>,
    out: &mut Vec<usize>,
) {
    if !occupied.contains(&key(cell)) {
        return;
    }
    for child in cell.children() {
        if !child.touches(q) {
            continue;
        }
        match selected.get(&key(&child)) {
            Some(&j) => out.push(j),
            None => descend_touching(&child, q, selected, occupied, out),
        }
    }
}

/// Checks properties (i)–(v) of a decomposition of the oracle's set.
///
/// Overlap of the dilated cubes is counted at `extra_points` (typically the
/// atoms of a measure) and at `random_points` points of `E` drawn by
/// rejection from the bounding box with the given seed.
pub fn verify_whitney<O: OpenSetOracle + ?Sized>(
    d: &WhitneyDecomposition,
    oracle: &O,
    extra_points: &[Vec<f64>],
    random_points: usize,
    seed: u64,
) -> WhitneyCheck {
    let n = d.root.corner.len();
    let tol_rel = 1e-6;
    let sqrt_n = (n as f64).sqrt();
    let bound_12 = 12usize.pow(n as u32);

    // (i) two dyadic cubes overlap iff one is an ancestor-or-self of the other
    let keys: HashSet<Key> = d.cubes.iter().map(|c| key(&c.cube)).collect();
    let mut overlapping_pairs = d.cubes.len() - keys.len();
    for c in &d.cubes {
        for l in 0..c.cube.level {
            if keys.contains(&(l, c.cube.ancestor_index(l))) {
                overlapping_pairs += 1;
            }
        }
    }

    // (ii)
    let mut distance_violations = 0;
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    for c in &d.cubes {
        let l = c.cube.side();
        let tol = l * tol_rel;
        if c.dist.lower < sqrt_n * l - tol || c.dist.upper > 4.0 * sqrt_n * l + tol || c.dist.width() > tol {
            distance_violations += 1;
        }
        min_ratio = min_ratio.min(c.dist.lower / (sqrt_n * l));
        max_ratio = max_ratio.max(c.dist.upper / (sqrt_n * l));
    }

    // (iii), (iv)
    let neighbors = neighbor_lists(d);
    let mut min_side = f64::INFINITY;
    let mut max_side = 0.0f64;
    let mut max_neighbors = 0;
    for (i, list) in neighbors.iter().enumerate() {
        max_neighbors = max_neighbors.max(list.len());
        for &j in list {
            let r = d.cubes[i].cube.side() / d.cubes[j].cube.side();
            min_side = min_side.min(r);
            max_side = max_side.max(r);
        }
    }

    // (v)
    let dilated: Vec<Cube> = d
        .cubes
        .iter()
        .map(|c| c.cube.to_cube().dilate(1.0 + d.dilation_delta))
        .collect();
    let mut points: Vec<Vec<f64>> = extra_points.to_vec();
    let bbox = oracle.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = 0;
    let mut attempts = 0usize;
    while drawn < random_points && attempts < random_points * 1000 {
        attempts += 1;
        let x: Vec<f64> = (0..n)
            .map(|k| bbox.lo()[k] + rng.gen::<f64>() * bbox.side())
            .collect();
        if oracle.contains(&x) {
            points.push(x);
            drawn += 1;
        }
    }
    let max_dilated_overlap = points
        .par_iter()
        .map(|x| dilated.iter().filter(|q| q.contains_closed(x)).count())
        .max()
        .unwrap_or(0);
    let dilated_escapes: usize = dilated
        .par_iter()
        .map(|q| q.lattice(2).iter().filter(|p| !oracle.contains(p)).count())
        .sum();

    let neighbors_ok = d.cubes.is_empty() || (min_side >= 0.25 && max_side <= 4.0 && max_neighbors <= bound_12);
    let passed = overlapping_pairs == 0
        && distance_violations == 0
        && neighbors_ok
        && max_dilated_overlap <= bound_12
        && dilated_escapes == 0;
    WhitneyCheck {
        cubes: d.cubes.len(),
        overlapping_pairs,
        distance_violations,
        distance_tolerance_rel: tol_rel,
        min_dist_over_diam: min_ratio,
        max_dist_over_diam: max_ratio,
        min_neighbor_side_ratio: min_side,
        max_neighbor_side_ratio: max_side,
        max_neighbors,
        neighbor_bound: bound_12,
        max_dilated_overlap,
        overlap_points: points.len(),
        dilated_escapes,
        passed,
    }
}
