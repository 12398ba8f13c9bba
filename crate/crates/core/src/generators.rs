//! Reproducible test measures covering doubling and growth-only regimes.
//!
//! | kind               | regime                                             |
//! |--------------------|----------------------------------------------------|
//! | `lebesgue_grid`    | doubling, growth with `N = n`                      |
//! | `power_density`    | doubling for moderate `γ`                          |
//! | `segment_in_plane` | growth with `N = 1` in the plane, not doubling     |
//! | `cantor_like`      | growth with `N = log 2 / log(1/ρ)`; doubling degrades as `θ` leaves ½ |
//! | `random_atoms`     | fuzz instances                                     |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::{PointMassMeasure, MAX_DIM};

pub const DEFAULT_MAX_NODES: usize = 5_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Grid nodes `lo + i·h` inside the box, mass `hⁿ` each.
    LebesgueGrid {
        lo: Vec<f64>,
        hi: Vec<f64>,
        h: f64,
        #[serde(default = "default_max_nodes")]
        max_nodes: usize,
    },
    /// Grid nodes with mass `hⁿ · max(|x|, h)^γ`.
    PowerDensity {
        lo: Vec<f64>,
        hi: Vec<f64>,
        h: f64,
        gamma: f64,
        #[serde(default = "default_max_nodes")]
        max_nodes: usize,
    },
    /// Atoms of mass `h` spaced `h` along `[0, length] × {0}`, plus a plane
    /// grid of spacing `plane_spacing` (default `√h`) over the plane box with
    /// mass `plane_mass · h` each. `plane_mass = 0` drops the plane part.
    SegmentInPlane {
        length: f64,
        h: f64,
        plane_lo: [f64; 2],
        plane_hi: [f64; 2],
        plane_mass: f64,
        #[serde(default)]
        plane_spacing: Option<f64>,
        #[serde(default = "default_max_nodes")]
        max_nodes: usize,
    },
    /// Midpoints of the `2^levels` intervals of a Cantor construction on
    /// `[0, 1]` with ratio `ratio`; each split hands `left_share` of the
    /// parent mass to the left child.
    CantorLike { levels: u32, ratio: f64, left_share: f64 },
    /// Uniform points in the box, seeded ChaCha8 stream.
    RandomAtoms {
        count: usize,
        lo: Vec<f64>,
        hi: Vec<f64>,
        masses: MassDistribution,
        seed: u64,
    },
}

fn default_max_nodes() -> usize {
    DEFAULT_MAX_NODES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum MassDistribution {
    Constant { value: f64 },
    /// Uniform on `[min, max]`, `min > 0`.
    Uniform { min: f64, max: f64 },
}

impl Default for MassDistribution {
    fn default() -> Self {
        MassDistribution::Constant { value: 1.0 }
    }
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<PointMassMeasure> {
        match self {
            GeneratorSpec::LebesgueGrid { lo, hi, h, max_nodes } => {
                let (coords, n) = grid(lo, hi, *h, *max_nodes)?;
                let m = h.powi(lo.len() as i32);
                PointMassMeasure::from_flat(lo.len(), coords, vec![m; n])
            }
            GeneratorSpec::PowerDensity {
                lo,
                hi,
                h,
                gamma,
                max_nodes,
            } => {
                if !gamma.is_finite() {
                    return Err(invalid("gamma", format!("{gamma} must be finite")));
                }
                let dim = lo.len();
                let (coords, _) = grid(lo, hi, *h, *max_nodes)?;
                let base = h.powi(dim as i32);
                let masses = coords
                    .chunks_exact(dim)
                    .map(|p| base * norm(p).max(*h).powf(*gamma))
                    .collect();
                PointMassMeasure::from_flat(dim, coords, masses)
            }
            GeneratorSpec::SegmentInPlane {
                length,
                h,
                plane_lo,
                plane_hi,
                plane_mass,
                plane_spacing,
                max_nodes,
            } => segment_in_plane(*length, *h, plane_lo, plane_hi, *plane_mass, *plane_spacing, *max_nodes),
            GeneratorSpec::CantorLike {
                levels,
                ratio,
                left_share,
            } => cantor_like(*levels, *ratio, *left_share),
            GeneratorSpec::RandomAtoms {
                count,
                lo,
                hi,
                masses,
                seed,
            } => random_atoms(*count, lo, hi, masses, *seed),
        }
    }
}

fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_box(lo: &[f64], hi: &[f64]) -> Result<()> {
    if lo.is_empty() || lo.len() > MAX_DIM {
        return Err(invalid("box", format!("dimension {} not in 1..={MAX_DIM}", lo.len())));
    }
    if lo.len() != hi.len() {
        return Err(Error::DimensionMismatch {
            expected: lo.len(),
            got: hi.len(),
        });
    }
    for (a, b) in lo.iter().zip(hi) {
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(invalid("box", format!("bad extent [{a}, {b}]")));
        }
    }
    Ok(())
}

/// Flat coordinates of `lo + i·h`, first axis fastest.
fn grid(lo: &[f64], hi: &[f64], h: f64, max_nodes: usize) -> Result<(Vec<f64>, usize)> {
    check_box(lo, hi)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", format!("{h} must be positive")));
    }
    let counts: Vec<usize> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| ((b - a) / h + 1e-9).floor() as usize + 1)
        .collect();
    let total = counts
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c))
        .unwrap_or(usize::MAX);
    if total > max_nodes {
        return Err(Error::NodeCapExceeded {
            count: total,
            cap: max_nodes,
        });
    }
    let dim = lo.len();
    let mut coords = Vec::with_capacity(total * dim);
    for t in 0..total {
        let mut rest = t;
        for k in 0..dim {
            let i = rest % counts[k];
            rest /= counts[k];
            coords.push(lo[k] + i as f64 * h);
        }
    }
    Ok((coords, total))
}

fn segment_in_plane(
    length: f64,
    h: f64,
    plane_lo: &[f64; 2],
    plane_hi: &[f64; 2],
    plane_mass: f64,
    plane_spacing: Option<f64>,
    max_nodes: usize,
) -> Result<PointMassMeasure> {
    if !(length >= 0.0 && length.is_finite()) {
        return Err(invalid("length", format!("{length} must be non-negative")));
    }
    if !(plane_mass >= 0.0 && plane_mass.is_finite()) {
        return Err(invalid("plane_mass", format!("{plane_mass} must be non-negative")));
    }
    let (seg, n_seg) = grid(&[0.0], &[length], h, max_nodes)?;
    let mut coords: Vec<f64> = seg.iter().flat_map(|&x| [x, 0.0]).collect();
    let mut masses = vec![h; n_seg];
    if plane_mass > 0.0 {
        let s = plane_spacing.unwrap_or_else(|| h.sqrt());
        let (plane, n_plane) = grid(plane_lo, plane_hi, s, max_nodes.saturating_sub(n_seg))?;
        coords.extend(plane);
        masses.extend(std::iter::repeat_n(plane_mass * h, n_plane));
    }
    PointMassMeasure::from_flat(2, coords, masses)
}

pub const MAX_CANTOR_LEVELS: u32 = 16;

fn cantor_like(levels: u32, ratio: f64, left_share: f64) -> Result<PointMassMeasure> {
    if levels > MAX_CANTOR_LEVELS {
        return Err(invalid("levels", format!("{levels} exceeds {MAX_CANTOR_LEVELS}")));
    }
    if !(ratio > 0.0 && ratio < 0.5) {
        return Err(invalid("ratio", format!("{ratio} not in (0, 1/2)")));
    }
    if !(left_share > 0.0 && left_share < 1.0) {
        return Err(invalid("left_share", format!("{left_share} not in (0, 1)")));
    }
    // (left endpoint, length, mass)
    let mut cells = vec![(0.0f64, 1.0f64, 1.0f64)];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for (a, len, m) in cells {
            let child = len * ratio;
            let left = m * left_share;
            next.push((a, child, left));
            next.push((a + len - child, child, m - left));
        }
        cells = next;
    }
    let coords = cells.iter().map(|(a, len, _)| a + len / 2.0).collect();
    let masses = cells.iter().map(|c| c.2).collect();
    PointMassMeasure::from_flat(1, coords, masses)
}

fn random_atoms(count: usize, lo: &[f64], hi: &[f64], dist: &MassDistribution, seed: u64) -> Result<PointMassMeasure> {
    check_box(lo, hi)?;
    if count == 0 {
        return Err(invalid("count", "must be at least 1"));
    }
    match *dist {
        MassDistribution::Constant { value } if !(value > 0.0 && value.is_finite()) => {
            return Err(invalid("mass", format!("{value} must be positive")));
        }
        MassDistribution::Uniform { min, max } if !(min > 0.0 && min <= max && max.is_finite()) => {
            return Err(invalid("mass", format!("bad range [{min}, {max}]")));
        }
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = lo.len();
    let mut coords = Vec::with_capacity(count * dim);
    let mut masses = Vec::with_capacity(count);
    for _ in 0..count {
        for k in 0..dim {
            coords.push(lo[k] + (hi[k] - lo[k]) * rng.gen::<f64>());
        }
        masses.push(match *dist {
            MassDistribution::Constant { value } => value,
            MassDistribution::Uniform { min, max } => min + (max - min) * rng.gen::<f64>(),
        });
    }
    PointMassMeasure::from_flat(dim, coords, masses)
}
