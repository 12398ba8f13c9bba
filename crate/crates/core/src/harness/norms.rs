//! Strong-type norm comparison and weak-type bounds.

use serde::{Deserialize, Serialize};

use super::OperatorSamples;
use crate::error::{invalid, Error, Result};
use crate::measure::{OperatorParams, PointMassMeasure, SampledFunction};
use crate::potential::{layer_cake_integral, lorentz_weak_quasinorm, lp_norm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub p: f64,
    pub weighted: bool,
    pub riesz_norm: f64,
    pub maximal_norm: f64,
    /// `‖I_α f‖_p / ‖M_α f‖_p`; `None` when both vanish.
    pub ratio: Option<f64>,
    /// Set when the maximal norm vanishes but the potential norm does not.
    pub infinite_ratio: bool,
    pub riesz_layer_cake: f64,
    pub maximal_layer_cake: f64,
    /// Largest relative gap between a norm and its layer-cake evaluation.
    pub layer_cake_rel_gap: f64,
}

fn rel_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `‖I_α f‖_{L^p(w dµ)}` against `‖M_α f‖_{L^p(w dµ)}` on the atoms.
///
/// Unweighted comparisons need `1 < p < ∞`; weighted ones accept
/// `0 < p < ∞`. Infinite potentials (diagonal kept) are an error.
pub fn verify_norm_inequality(
    mu: &PointMassMeasure,
    samples: &OperatorSamples,
    p: f64,
    w: Option<&SampledFunction>,
) -> Result<NormReport> {
    samples.check(mu)?;
    let ok = match w {
        None => p > 1.0 && p.is_finite(),
        Some(_) => p > 0.0 && p.is_finite(),
    };
    if !ok {
        let range = if w.is_some() { "(0, ∞)" } else { "(1, ∞)" };
        return Err(invalid("p", format!("{p} not in {range}")));
    }
    if let Some(i) = samples.riesz.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "riesz samples",
            index: i,
            value: samples.riesz[i],
        });
    }
    let riesz_norm = lp_norm(mu, &samples.riesz, p, w)?;
    let maximal_norm = lp_norm(mu, &samples.maximal, p, w)?;
    let riesz_layer_cake = layer_cake_integral(mu, &samples.riesz, p, w)?.powf(1.0 / p);
    let maximal_layer_cake = layer_cake_integral(mu, &samples.maximal, p, w)?.powf(1.0 / p);
    let (ratio, infinite_ratio) = match (riesz_norm > 0.0, maximal_norm > 0.0) {
        (_, true) => (Some(riesz_norm / maximal_norm), false),
        (true, false) => (None, true),
        (false, false) => (None, false),
    };
    Ok(NormReport {
        p,
        weighted: w.is_some(),
        riesz_norm,
        maximal_norm,
        ratio,
        infinite_ratio,
        riesz_layer_cake,
        maximal_layer_cake,
        layer_cake_rel_gap: rel_gap(riesz_norm, riesz_layer_cake).max(rel_gap(maximal_norm, maximal_layer_cake)),
    })
}

/// Which dimension sets the weak-type exponent `1/q = 1/p - α/D`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentSource {
    /// `D = N`, the growth exponent.
    #[default]
    Growth,
    /// `D = n`, the ambient dimension.
    Ambient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeReport {
    pub p: f64,
    pub q: f64,
    pub exponent_source: ExponentSource,
    /// `‖I_α f‖_{L^{q,∞}}`
    pub quasinorm: f64,
    /// `‖f‖_{L^p}`
    pub f_norm: f64,
    /// `None` when `‖f‖_p = 0`.
    pub constant: Option<f64>,
}

/// `‖I_α f‖_{L^{q,∞}(µ)} / ‖f‖_{L^p(µ)}` for `1 ≤ p < D/α`.
pub fn verify_weak_type(
    mu: &PointMassMeasure,
    f: &SampledFunction,
    samples: &OperatorSamples,
    params: &OperatorParams,
    p: f64,
    source: ExponentSource,
) -> Result<WeakTypeReport> {
    samples.check(mu)?;
    f.check_aligned(mu)?;
    let d = match source {
        ExponentSource::Growth => params.growth_exp,
        ExponentSource::Ambient => params.ambient_dim as f64,
    };
    let upper = d / params.alpha;
    if !(p >= 1.0 && p < upper) {
        return Err(invalid("p", format!("{p} not in [1, {upper})")));
    }
    let q = 1.0 / (1.0 / p - params.alpha / d);
    let abs: Vec<f64> = samples.riesz.iter().map(|v| v.abs()).collect();
    let quasinorm = lorentz_weak_quasinorm(mu, &abs, q)?;
    let f_norm = lp_norm(mu, f, p, None)?;
    Ok(WeakTypeReport {
        p,
        q,
        exponent_source: source,
        quasinorm,
        f_norm,
        constant: (f_norm > 0.0).then(|| quasinorm / f_norm),
    })
}
