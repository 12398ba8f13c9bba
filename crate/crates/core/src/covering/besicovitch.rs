//! Greedy bounded-overlap selection from a family of centered cubes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::Cube;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesicovitchSelection {
    /// Indices into the candidate list, in acceptance order.
    pub selected: Vec<usize>,
    pub overlap_bound: usize,
    pub max_overlap: usize,
    /// Number of points at which the overlap was counted.
    pub points_checked: usize,
}

/// Default overlap bound `4ⁿ`.
pub fn default_overlap_bound(n: usize) -> usize {
    4usize.pow(n as u32)
}

/// Scans candidates by decreasing side (ties: center lexicographic) and
/// accepts a cube iff its center is outside every accepted closed cube.
///
/// Every candidate center ends up covered. The number of accepted closed
/// cubes containing a point is counted at all candidate centers, the
/// corners of accepted cubes and `probes`; exceeding `overlap_bound` is an
/// error carrying the offending point.
pub fn besicovitch_select(
    candidates: &[Cube],
    overlap_bound: Option<usize>,
    probes: &[Vec<f64>],
) -> Result<BesicovitchSelection> {
    let Some(first) = candidates.first() else {
        return Ok(BesicovitchSelection {
            selected: Vec::new(),
            overlap_bound: overlap_bound.unwrap_or(1),
            max_overlap: 0,
            points_checked: 0,
        });
    };
    let n = first.dim();
    if let Some(q) = candidates.iter().find(|q| q.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: q.dim() });
    }
    if let Some(q) = candidates.iter().find(|q| !(q.side() > 0.0 && q.side().is_finite())) {
        return Err(invalid("candidates", format!("cube side {} must be positive", q.side())));
    }
    let bound = overlap_bound.unwrap_or_else(|| default_overlap_bound(n));
    let centers: Vec<Vec<f64>> = candidates.iter().map(Cube::center).collect();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        candidates[b]
            .side()
            .total_cmp(&candidates[a].side())
            .then_with(|| {
                centers[a]
                    .iter()
                    .zip(&centers[b])
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .then(a.cmp(&b))
    });
    let mut selected: Vec<usize> = Vec::new();
    for &i in &order {
        if !selected.iter().any(|&j| candidates[j].contains_closed(&centers[i])) {
            selected.push(i);
        }
    }
    let mut points: Vec<Vec<f64>> = centers;
    points.extend(selected.iter().flat_map(|&j| candidates[j].corners()));
    points.extend(probes.iter().cloned());
    let mut max_overlap = 0;
    for p in &points {
        let count = selected.iter().filter(|&&j| candidates[j].contains_closed(p)).count();
        if count > bound {
            return Err(Error::OverlapViolated {
                bound,
                count,
                witness: p.clone(),
            });
        }
        max_overlap = max_overlap.max(count);
    }
    Ok(BesicovitchSelection {
        selected,
        overlap_bound: bound,
        max_overlap,
        points_checked: points.len(),
    })
}
