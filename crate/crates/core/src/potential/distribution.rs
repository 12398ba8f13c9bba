//! Distribution functions, `Lᵖ` norms and weak-type quasinorms of values
//! sampled at the atoms.
//!
//! Values are plain `&[f64]` aligned with the atoms and may contain `±∞`
//! (potentials evaluated with the diagonal term kept).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::{PointMassMeasure, SampledFunction};

/// `λ ↦ µ({g > λ})` (or the `w dµ` mass) on ascending thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionCurve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
}

fn check_values(mu: &PointMassMeasure, g: &[f64]) -> Result<()> {
    if g.len() != mu.len() {
        return Err(Error::LengthMismatch {
            what: "values",
            expected: mu.len(),
            got: g.len(),
        });
    }
    if let Some(i) = g.iter().position(|v| v.is_nan()) {
        return Err(Error::NonFinite {
            what: "values",
            index: i,
            value: f64::NAN,
        });
    }
    Ok(())
}

/// Per-atom mass `mᵢ` or `mᵢ wᵢ`.
fn atom_weights(mu: &PointMassMeasure, weight: Option<&SampledFunction>) -> Result<Vec<f64>> {
    match weight {
        None => Ok(mu.masses().to_vec()),
        Some(w) => {
            w.check_aligned(mu)?;
            if let Some(i) = w.iter().position(|&v| v < 0.0) {
                return Err(Error::NegativeWeight { index: i, value: w[i] });
            }
            Ok(mu.masses().iter().zip(w.iter()).map(|(m, w)| m * w).collect())
        }
    }
}

fn check_exponent(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("{p} must be positive and finite")))
    }
}

/// Mass of `{g > λ}` for each threshold (strict inequality, atom-order sums).
pub fn distribution_function(
    mu: &PointMassMeasure,
    g: &[f64],
    thresholds: &[f64],
    weight: Option<&SampledFunction>,
) -> Result<DistributionCurve> {
    check_values(mu, g)?;
    let wm = atom_weights(mu, weight)?;
    for (k, t) in thresholds.iter().enumerate() {
        if t.is_nan() {
            return Err(invalid("thresholds", "NaN threshold"));
        }
        if k > 0 && *t < thresholds[k - 1] {
            return Err(invalid("thresholds", "must be ascending"));
        }
    }
    let values = thresholds
        .iter()
        .map(|&t| g.iter().zip(&wm).filter(|(v, _)| **v > t).fold(0.0, |acc, (_, m)| acc + m))
        .collect();
    Ok(DistributionCurve {
        thresholds: thresholds.to_vec(),
        values,
    })
}

/// `(Σ mᵢ [wᵢ] |gᵢ|ᵖ)^{1/p}`. Infinite values on atoms of positive mass are
/// an error; apply [`truncate`] first to bound them.
pub fn lp_norm(mu: &PointMassMeasure, g: &[f64], p: f64, weight: Option<&SampledFunction>) -> Result<f64> {
    check_exponent("p", p)?;
    check_values(mu, g)?;
    let wm = atom_weights(mu, weight)?;
    let mut acc = 0.0;
    for (i, (v, m)) in g.iter().zip(&wm).enumerate() {
        if *m == 0.0 {
            continue;
        }
        if v.is_infinite() {
            return Err(Error::NonFinite {
                what: "values (truncate before taking a norm)",
                index: i,
                value: *v,
            });
        }
        acc += m * v.abs().powf(p);
    }
    Ok(acc.powf(1.0 / p))
}

/// Sorted distinct levels of `|g|` with the mass of `{|g| ≥ level}`.
fn tail_masses(g: &[f64], wm: &[f64]) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = g
        .iter()
        .zip(wm)
        .filter(|(v, m)| **m > 0.0 && **v != 0.0)
        .map(|(v, m)| (v.abs(), *m))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut tail: f64 = pairs.iter().map(|p| p.1).sum();
    let mut k = 0;
    while k < pairs.len() {
        let level = pairs[k].0;
        out.push((level, tail));
        while k < pairs.len() && pairs[k].0 == level {
            tail -= pairs[k].1;
            k += 1;
        }
    }
    out
}

/// `∫|g|ᵖ dµ` through the layer-cake formula `p∫₀^∞ t^{p-1} µ({|g| > t}) dt`,
/// integrating the step distribution piece by piece in closed form.
pub fn layer_cake_integral(
    mu: &PointMassMeasure,
    g: &[f64],
    p: f64,
    weight: Option<&SampledFunction>,
) -> Result<f64> {
    check_exponent("p", p)?;
    check_values(mu, g)?;
    let wm = atom_weights(mu, weight)?;
    let levels = tail_masses(g, &wm);
    let mut acc = 0.0;
    let mut prev = 0.0f64;
    for (v, tail) in levels {
        // on (prev, v) the distribution equals the mass with |g| ≥ v
        acc += (v.powf(p) - prev.powf(p)) * tail;
        prev = v;
    }
    Ok(acc)
}

/// `sup_λ λ µ({|g| > λ})^{1/q}`, attained as `λ ↑ v` at a value `v` of `|g|`.
pub fn lorentz_weak_quasinorm(mu: &PointMassMeasure, g: &[f64], q: f64) -> Result<f64> {
    check_exponent("q", q)?;
    check_values(mu, g)?;
    Ok(tail_masses(g, mu.masses())
        .into_iter()
        .map(|(v, tail)| v * tail.powf(1.0 / q))
        .fold(0.0, f64::max))
}

/// Clamps `g` to `[-level, level]`.
pub fn truncate(g: &[f64], level: f64) -> Vec<f64> {
    g.iter().map(|v| v.clamp(-level, level)).collect()
}
