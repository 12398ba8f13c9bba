//! Growth and doubling diagnostics over a window of scales.
//!
//! For a fixed center `x`, `r ↦ µ(B(x,r))` is a right-continuous step
//! function jumping at the atom distances. On `[r_min, r_max]` the growth
//! ratio `µ(B(x,r))/r^N` is therefore maximised at `r_min` or at an atom
//! distance, and the doubling ratio `µ(B(x,2r))/µ(B(x,r))` at `r_min` or at
//! half an atom distance. Both scans evaluate exactly those candidates, so
//! the reported constant is the exact supremum over the window for each
//! scanned center. Shrinking `r_min` can only add candidates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{distance, PointMassMeasure, ScaleRange};
use crate::error::{invalid, Error, Result};

/// Which centers `x` a scan visits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterPolicy {
    AtomsOnly,
    /// Atoms plus a regular grid of the given spacing over the atoms'
    /// bounding box.
    AtomsPlusGrid { spacing: f64 },
}

const MAX_GRID_CENTERS: usize = 1_000_000;

impl CenterPolicy {
    fn centers(&self, mu: &PointMassMeasure) -> Result<Vec<Vec<f64>>> {
        let mut out: Vec<Vec<f64>> = mu.points().map(<[f64]>::to_vec).collect();
        if let CenterPolicy::AtomsPlusGrid { spacing } = *self {
            if !(spacing > 0.0) {
                return Err(invalid("spacing", format!("{spacing} must be positive")));
            }
            let (lo, hi) = mu.bounding_box();
            let counts: Vec<usize> = lo
                .iter()
                .zip(&hi)
                .map(|(a, b)| ((b - a) / spacing + 1e-9).floor() as usize + 1)
                .collect();
            let total: usize = counts.iter().product();
            if total > MAX_GRID_CENTERS {
                return Err(Error::NodeCapExceeded {
                    count: total,
                    cap: MAX_GRID_CENTERS,
                });
            }
            for mut t in 0..total {
                let p = (0..lo.len())
                    .map(|k| {
                        let i = t % counts[k];
                        t /= counts[k];
                        lo[k] + i as f64 * spacing
                    })
                    .collect();
                out.push(p);
            }
        }
        Ok(out)
    }
}

/// One radius of a scan profile: the worst ratio over all centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSample {
    pub radius: f64,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub growth_exp: f64,
    /// `max µ(B(x,r)) / r^N` over scanned centers and `r ∈ [r_min, r_max]`.
    pub constant: f64,
    pub argmax_center: Vec<f64>,
    pub argmax_radius: f64,
    pub profile: Vec<ScaleSample>,
    pub window: ScaleRange,
    pub center_policy: CenterPolicy,
    pub centers_scanned: usize,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    /// `max µ(B(x,2r)) / µ(B(x,r))` over scanned `(x, r)` with nonempty inner ball.
    pub constant: f64,
    pub argmax_center: Vec<f64>,
    pub argmax_radius: f64,
    pub profile: Vec<ScaleSample>,
    pub window: ScaleRange,
    pub center_policy: CenterPolicy,
    pub centers_scanned: usize,
}

/// Distances from `x` sorted ascending with the cumulative mass at each.
/// Ties are broken by atom index, so the accumulation order is fixed.
struct RadialProfile {
    dist: Vec<f64>,
    cum_mass: Vec<f64>,
}

impl RadialProfile {
    fn new(mu: &PointMassMeasure, x: &[f64]) -> Self {
        let mut order: Vec<(f64, usize)> = mu.points().enumerate().map(|(i, p)| (distance(x, p), i)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut acc = 0.0;
        let mut dist = Vec::with_capacity(order.len());
        let mut cum_mass = Vec::with_capacity(order.len());
        for (d, i) in order {
            acc += mu.mass(i);
            dist.push(d);
            cum_mass.push(acc);
        }
        Self { dist, cum_mass }
    }

    /// `µ(B(x, r))` for the closed ball.
    fn mass_within(&self, r: f64) -> f64 {
        let k = self.dist.partition_point(|&d| d <= r);
        if k == 0 {
            0.0
        } else {
            self.cum_mass[k - 1]
        }
    }
}

struct CenterBest {
    ratio: f64,
    radius: f64,
    profile: Vec<f64>,
}

fn best_over(candidates: impl Iterator<Item = (f64, f64)>) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for (r, v) in candidates {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((r, v));
        }
    }
    best
}

/// Empirical growth constant `C` in `µ(B(x,r)) ≤ C r^N` over the window.
///
/// Atoms make the unrestricted supremum infinite as `r → 0`, which is why the
/// scan is confined to `r ≥ r_min`.
pub fn growth_constant_scan(
    mu: &PointMassMeasure,
    growth_exp: f64,
    scales: &ScaleRange,
    centers: &CenterPolicy,
) -> Result<GrowthReport> {
    if !(growth_exp > 0.0) {
        return Err(invalid("growth_exp", format!("{growth_exp} must be positive")));
    }
    let pts = centers.centers(mu)?;
    if pts.is_empty() {
        return Err(Error::Empty("growth scan has no centers"));
    }
    let radii = scales.radii();
    let per_center: Vec<CenterBest> = pts
        .par_iter()
        .map(|x| {
            let prof = RadialProfile::new(mu, x);
            let ratio = |r: f64| prof.mass_within(r) / r.powf(growth_exp);
            let cands = std::iter::once(scales.r_min)
                .chain(
                    prof.dist
                        .iter()
                        .copied()
                        .filter(|&d| d > scales.r_min && d <= scales.r_max),
                )
                .map(|r| (r, ratio(r)));
            let (radius, best) = best_over(cands).expect("r_min is always a candidate");
            CenterBest {
                ratio: best,
                radius,
                profile: radii.iter().map(|&r| ratio(r)).collect(),
            }
        })
        .collect();

    let (arg, best) = argmax(&per_center);
    Ok(GrowthReport {
        growth_exp,
        constant: best.ratio,
        argmax_center: pts[arg].clone(),
        argmax_radius: best.radius,
        profile: fold_profile(&radii, &per_center),
        window: scales.clone(),
        center_policy: centers.clone(),
        centers_scanned: pts.len(),
        note: "supremum restricted to r in [r_min, r_max]; atoms make the unrestricted \
               supremum infinite as r -> 0"
            .into(),
    })
}

/// Empirical doubling constant `C` in `µ(B(x,2r)) ≤ C µ(B(x,r))` over the window.
pub fn doubling_constant_scan(
    mu: &PointMassMeasure,
    scales: &ScaleRange,
    centers: &CenterPolicy,
) -> Result<DoublingReport> {
    let pts = centers.centers(mu)?;
    if pts.is_empty() {
        return Err(Error::Empty("doubling scan has no centers"));
    }
    let radii = scales.radii();
    let per_center: Vec<Option<CenterBest>> = pts
        .par_iter()
        .map(|x| {
            let prof = RadialProfile::new(mu, x);
            let ratio = |r: f64| {
                let inner = prof.mass_within(r);
                (inner > 0.0).then(|| prof.mass_within(2.0 * r) / inner)
            };
            let cands = std::iter::once(scales.r_min)
                .chain(
                    prof.dist
                        .iter()
                        .map(|d| d / 2.0)
                        .filter(|&h| h > scales.r_min && h <= scales.r_max),
                )
                .filter_map(|r| ratio(r).map(|v| (r, v)));
            best_over(cands).map(|(radius, best)| CenterBest {
                ratio: best,
                radius,
                profile: radii.iter().map(|&r| ratio(r).unwrap_or(0.0)).collect(),
            })
        })
        .collect();

    let valid: Vec<(usize, CenterBest)> = per_center
        .into_iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| (i, c)))
        .collect();
    if valid.is_empty() {
        return Err(Error::Empty("every sampled inner ball is empty"));
    }
    let (idx, bests): (Vec<usize>, Vec<CenterBest>) = valid.into_iter().unzip();
    let (arg, best) = argmax(&bests);
    Ok(DoublingReport {
        constant: best.ratio,
        argmax_center: pts[idx[arg]].clone(),
        argmax_radius: best.radius,
        profile: fold_profile(&radii, &bests),
        window: scales.clone(),
        center_policy: centers.clone(),
        centers_scanned: pts.len(),
    })
}

fn argmax(items: &[CenterBest]) -> (usize, &CenterBest) {
    let mut arg = 0;
    for (i, c) in items.iter().enumerate() {
        if c.ratio > items[arg].ratio {
            arg = i;
        }
    }
    (arg, &items[arg])
}

fn fold_profile(radii: &[f64], items: &[CenterBest]) -> Vec<ScaleSample> {
    radii
        .iter()
        .enumerate()
        .map(|(k, &radius)| ScaleSample {
            radius,
            max_ratio: items.iter().map(|c| c.profile[k]).fold(0.0, f64::max),
        })
        .collect()
}
