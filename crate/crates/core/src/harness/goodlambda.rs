//! Good-λ scans over `(λ, ε)` grids.

use serde::{Deserialize, Serialize};

use super::OperatorSamples;
use crate::error::{invalid, Error, Result};
use crate::measure::{OperatorParams, PointMassMeasure, SampledFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// `µ({I > kλ, M ≤ ελ}) ≤ C ε^{N/(N-α)} µ({I > λ})`
    Conditional,
    /// `µ({I > aλ}) ≤ b ε^{N/(N-α)} µ({I > λ}) + µ({M > ελ})`
    TwoTerm,
    /// `w({I > aλ}) ≤ η w({I > λ}) + w({M > ελ})`
    Weighted,
}

/// Geometric λ grid. Unset bounds default to the observed range of `I_α f`
/// at the atoms; set bounds are clipped to it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            count: 64,
            min: None,
            max: None,
        }
    }
}

/// `{2^{-j} : j = 0..=8}`
pub fn default_eps_grid() -> Vec<f64> {
    (0..=8).map(|j| 2f64.powi(-j)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodLambdaScanConfig {
    /// `k` in the conditional form, `a` in the two-term and weighted forms.
    pub k: f64,
    pub lambda_grid: LambdaGrid,
    pub eps_grid: Vec<f64>,
    pub mode: ScanMode,
    /// Use `M < ελ` instead of `M ≤ ελ` in the conditional set.
    pub strict_maximal: bool,
    /// η values probed by the weighted mode.
    pub etas: Vec<f64>,
}

impl Default for GoodLambdaScanConfig {
    fn default() -> Self {
        Self {
            k: 2.0,
            lambda_grid: LambdaGrid::default(),
            eps_grid: default_eps_grid(),
            mode: ScanMode::Conditional,
            strict_maximal: false,
            etas: vec![0.5, 0.1],
        }
    }
}

impl GoodLambdaScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 1.0 && self.k.is_finite()) {
            return Err(invalid("k", format!("{} must be >= 1", self.k)));
        }
        if self.lambda_grid.count == 0 {
            return Err(invalid("lambda_grid.count", "must be at least 1"));
        }
        for bound in [self.lambda_grid.min, self.lambda_grid.max].into_iter().flatten() {
            if !(bound > 0.0 && bound.is_finite()) {
                return Err(invalid("lambda_grid", format!("bound {bound} must be positive")));
            }
        }
        if self.eps_grid.is_empty() {
            return Err(invalid("eps_grid", "must not be empty"));
        }
        if let Some(e) = self.eps_grid.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(invalid("eps_grid", format!("{e} not in (0, 1]")));
        }
        if let Some(e) = self.etas.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(invalid("etas", format!("{e} must be positive")));
        }
        Ok(())
    }
}

/// One `(λ, ε)` row. For the weighted mode the masses are `w dµ` masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodLambdaRow {
    pub lambda: f64,
    pub eps: f64,
    pub lhs: f64,
    pub mu_e_lambda: f64,
    /// `µ({M > ελ})`; zero in the conditional mode.
    pub maximal_term: f64,
    /// Constant this row requires; `None` when the row is excluded (0/0).
    pub ratio: Option<f64>,
}

/// Fitted decay of `max_λ lhs/µ(E_λ)` in ε.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExponentFit {
    /// Least-squares slope of `log y` against `log ε` over ε rows with
    /// `y > 0`.
    Fitted { slope: f64, rows: usize },
    /// `y > 0` at a single ε and `y = 0` at every smaller one: the data fit
    /// any power.
    FasterThanAnyPower { nonzero_rows: usize },
    /// `y = 0` everywhere.
    NoData,
}

impl ExponentFit {
    /// Largest exponent the data are consistent with, `+∞` when unbounded.
    pub fn exponent(&self) -> f64 {
        match self {
            ExponentFit::Fitted { slope, .. } => *slope,
            _ => f64::INFINITY,
        }
    }
}

/// Largest admissible ε for one η, scanning ε downward from the top of the
/// grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaResult {
    pub eta: f64,
    /// `None` when no ε in the grid makes every row hold.
    pub largest_admissible_eps: Option<f64>,
    /// Position of that ε in the descending grid (halvings for the default).
    pub eps_steps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodLambdaReport {
    pub mode: ScanMode,
    pub k: f64,
    pub strict_maximal: bool,
    pub exclude_diagonal: bool,
    /// `N/(N-α)`
    pub eps_exponent: f64,
    pub lambdas: Vec<f64>,
    pub eps_grid: Vec<f64>,
    /// Row order: λ outer, ε inner, both in grid order.
    pub rows: Vec<GoodLambdaRow>,
    /// `C_emp` (conditional) or `b_emp` (two-term); `None` in weighted mode.
    pub constant: Option<f64>,
    pub exponent_fit: Option<ExponentFit>,
    pub eta_results: Vec<EtaResult>,
    /// Rows with `lhs > 0` and a zero denominator.
    pub violation_rows: usize,
    pub convention_notes: Vec<String>,
}

impl GoodLambdaReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,eps,lhs,mu_E_lambda,maximal_term,ratio\n");
        for r in &self.rows {
            let ratio = r.ratio.map(|v| format!("{v:?}")).unwrap_or_default();
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?},{:?},{ratio}\n",
                r.lambda, r.eps, r.lhs, r.mu_e_lambda, r.maximal_term
            ));
        }
        out
    }
}

fn geometric(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    if lo == hi {
        return vec![lo; count];
    }
    (0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == count - 1 {
                hi
            } else {
                lo * (hi / lo).powf(i as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

/// The λ grid for the observed values of `I_α f`.
pub fn lambda_grid(riesz: &[f64], grid: &LambdaGrid) -> Result<Vec<f64>> {
    let positive = riesz.iter().copied().filter(|v| *v > 0.0);
    let min_pos = positive.clone().fold(f64::INFINITY, f64::min);
    let max_fin = positive.filter(|v| v.is_finite()).fold(0.0, f64::max);
    if !min_pos.is_finite() || max_fin == 0.0 {
        // nothing positive and finite to clip against: every row is trivial
        let lo = grid.min.unwrap_or(1.0);
        let hi = grid.max.unwrap_or(lo).max(lo);
        return Ok(geometric(lo, hi, grid.count));
    }
    let (obs_lo, obs_hi) = (0.5 * min_pos, 1.1 * max_fin);
    let lo = grid.min.unwrap_or(obs_lo).max(obs_lo);
    let hi = grid.max.unwrap_or(obs_hi).min(obs_hi);
    if !(lo <= hi) {
        return Err(invalid(
            "lambda_grid",
            format!("range is empty after clipping to the observed [{obs_lo:?}, {obs_hi:?}]"),
        ));
    }
    Ok(geometric(lo, hi, grid.count))
}

/// `Σ wmᵢ` over atoms with `pred(i)`.
fn mass_where(wm: &[f64], pred: impl Fn(usize) -> bool) -> f64 {
    let mut acc = 0.0;
    for (i, m) in wm.iter().enumerate() {
        if pred(i) {
            acc += m;
        }
    }
    acc
}

fn atom_masses(mu: &PointMassMeasure, w: Option<&SampledFunction>) -> Result<Vec<f64>> {
    match w {
        None => Ok(mu.masses().to_vec()),
        Some(w) => {
            w.check_aligned(mu)?;
            if let Some(i) = w.iter().position(|&v| v < 0.0) {
                return Err(Error::NegativeWeight { index: i, value: w[i] });
            }
            Ok(mu.masses().iter().zip(w.iter()).map(|(m, v)| m * v).collect())
        }
    }
}

fn notes(s: &OperatorSamples, cfg: &GoodLambdaScanConfig) -> Vec<String> {
    let mut n = vec![
        format!(
            "I_alpha f at an atom {} the y = x term",
            if s.exclude_diagonal { "omits" } else { "keeps (±inf)" }
        ),
        "superlevel sets use strict >".into(),
        "constants are suprema over the finite grids: lower bounds on the true constants".into(),
    ];
    if cfg.mode == ScanMode::Conditional {
        n.push(format!(
            "conditional set uses M_alpha f {} eps*lambda",
            if cfg.strict_maximal { "<" } else { "<=" }
        ));
    }
    n
}

fn fit_exponent(eps: &[f64], worst: &[f64]) -> ExponentFit {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(worst)
        .filter(|(_, y)| **y > 0.0)
        .map(|(e, y)| (e.ln(), y.ln()))
        .collect();
    match pts.len() {
        0 => ExponentFit::NoData,
        1 => ExponentFit::FasterThanAnyPower { nonzero_rows: 1 },
        n => {
            let nf = n as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            ExponentFit::Fitted { slope: sxy / sxx, rows: n }
        }
    }
}

/// Runs the scan selected by `cfg.mode`. `w` is required in weighted mode
/// and ignored otherwise.
pub fn run_scan(
    mu: &PointMassMeasure,
    samples: &OperatorSamples,
    params: &OperatorParams,
    w: Option<&SampledFunction>,
    cfg: &GoodLambdaScanConfig,
) -> Result<GoodLambdaReport> {
    cfg.validate()?;
    samples.check(mu)?;
    let weight = match cfg.mode {
        ScanMode::Weighted => Some(w.ok_or_else(|| invalid("w", "weighted mode needs a weight"))?),
        _ => None,
    };
    let wm = atom_masses(mu, weight)?;
    let (ii, mm) = (&samples.riesz, &samples.maximal);
    let lambdas = lambda_grid(ii, &cfg.lambda_grid)?;
    let s = params.good_lambda_exponent();
    let k = cfg.k;
    let mut rows = Vec::with_capacity(lambdas.len() * cfg.eps_grid.len());
    let mut violation_rows = 0;
    for &lambda in &lambdas {
        let e_lambda = mass_where(&wm, |i| ii[i] > lambda);
        let above_k = mass_where(&wm, |i| ii[i] > k * lambda);
        for &eps in &cfg.eps_grid {
            let cap = eps * lambda;
            let (lhs, maximal_term) = match cfg.mode {
                ScanMode::Conditional => {
                    let lhs = mass_where(&wm, |i| {
                        ii[i] > k * lambda && if cfg.strict_maximal { mm[i] < cap } else { mm[i] <= cap }
                    });
                    (lhs, 0.0)
                }
                _ => (above_k, mass_where(&wm, |i| mm[i] > cap)),
            };
            let excess = match cfg.mode {
                ScanMode::Conditional => lhs,
                _ => (lhs - maximal_term).max(0.0),
            };
            let ratio = if e_lambda > 0.0 {
                Some(match cfg.mode {
                    ScanMode::Weighted => excess / e_lambda,
                    _ => excess / (eps.powf(s) * e_lambda),
                })
            } else {
                if excess > 0.0 {
                    violation_rows += 1;
                }
                None
            };
            rows.push(GoodLambdaRow {
                lambda,
                eps,
                lhs,
                mu_e_lambda: e_lambda,
                maximal_term,
                ratio,
            });
        }
    }

    let constant = match cfg.mode {
        ScanMode::Weighted => None,
        _ => Some(rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max)),
    };
    let exponent_fit = (cfg.mode == ScanMode::Conditional).then(|| {
        let ne = cfg.eps_grid.len();
        let worst: Vec<f64> = (0..ne)
            .map(|j| {
                rows.iter()
                    .skip(j)
                    .step_by(ne)
                    .filter(|r| r.mu_e_lambda > 0.0)
                    .map(|r| r.lhs / r.mu_e_lambda)
                    .fold(0.0, f64::max)
            })
            .collect();
        fit_exponent(&cfg.eps_grid, &worst)
    });
    let eta_results = if cfg.mode == ScanMode::Weighted {
        let ne = cfg.eps_grid.len();
        let mut order: Vec<usize> = (0..ne).collect();
        order.sort_by(|&a, &b| cfg.eps_grid[b].total_cmp(&cfg.eps_grid[a]));
        cfg.etas
            .iter()
            .map(|&eta| {
                let holds = |j: usize| {
                    rows.iter()
                        .skip(j)
                        .step_by(ne)
                        .all(|r| r.lhs <= eta * r.mu_e_lambda + r.maximal_term)
                };
                let found = order.iter().position(|&j| holds(j));
                EtaResult {
                    eta,
                    largest_admissible_eps: found.map(|p| cfg.eps_grid[order[p]]),
                    eps_steps: found,
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(GoodLambdaReport {
        mode: cfg.mode,
        k,
        strict_maximal: cfg.strict_maximal,
        exclude_diagonal: samples.exclude_diagonal,
        eps_exponent: s,
        lambdas,
        eps_grid: cfg.eps_grid.clone(),
        rows,
        constant,
        exponent_fit,
        eta_results,
        violation_rows,
        convention_notes: notes(samples, cfg),
    })
}

/// Conditional good-λ scan.
pub fn verify_conditional(
    mu: &PointMassMeasure,
    samples: &OperatorSamples,
    params: &OperatorParams,
    cfg: &GoodLambdaScanConfig,
) -> Result<GoodLambdaReport> {
    let cfg = GoodLambdaScanConfig {
        mode: ScanMode::Conditional,
        ..cfg.clone()
    };
    run_scan(mu, samples, params, None, &cfg)
}

/// Two-term good-λ scan.
pub fn verify_two_term(
    mu: &PointMassMeasure,
    samples: &OperatorSamples,
    params: &OperatorParams,
    cfg: &GoodLambdaScanConfig,
) -> Result<GoodLambdaReport> {
    let cfg = GoodLambdaScanConfig {
        mode: ScanMode::TwoTerm,
        ..cfg.clone()
    };
    run_scan(mu, samples, params, None, &cfg)
}

/// Weighted two-term scan with `w dµ` masses, probing each of `cfg.etas`.
pub fn verify_weighted(
    mu: &PointMassMeasure,
    samples: &OperatorSamples,
    w: &SampledFunction,
    params: &OperatorParams,
    cfg: &GoodLambdaScanConfig,
) -> Result<GoodLambdaReport> {
    let cfg = GoodLambdaScanConfig {
        mode: ScanMode::Weighted,
        ..cfg.clone()
    };
    run_scan(mu, samples, params, Some(w), &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sample_operators;
    use crate::potential::PotentialOptions;

    fn grid(count: usize) -> PointMassMeasure {
        let h = 1.0 / (count - 1) as f64;
        let pts: Vec<Vec<f64>> = (0..count).map(|i| vec![i as f64 * h]).collect();
        PointMassMeasure::new(1, &pts, &vec![h; count]).unwrap()
    }

    fn setup(count: usize) -> (PointMassMeasure, OperatorSamples, OperatorParams) {
        let mu = grid(count);
        let f = SampledFunction::from_fn(&mu, |x| if x[0] <= 0.5 { 1.0 } else { 0.0 }).unwrap();
        let p = OperatorParams::new(1, 1.0, 0.5).unwrap();
        let s = sample_operators(&mu, &f, &p, &PotentialOptions::default()).unwrap();
        (mu, s, p)
    }

    #[test]
    fn zero_function_gives_zero_constant() {
        let mu = grid(20);
        let f = SampledFunction::constant(20, 0.0);
        let p = OperatorParams::new(1, 1.0, 0.5).unwrap();
        let s = sample_operators(&mu, &f, &p, &PotentialOptions::default()).unwrap();
        let cfg = GoodLambdaScanConfig::default();
        let r = verify_conditional(&mu, &s, &p, &cfg).unwrap();
        assert_eq!(r.constant, Some(0.0));
        assert!(r.rows.iter().all(|r| r.lhs == 0.0 && r.mu_e_lambda == 0.0 && r.ratio.is_none()));
        assert_eq!(r.exponent_fit, Some(ExponentFit::NoData));
        assert_eq!(verify_two_term(&mu, &s, &p, &cfg).unwrap().constant, Some(0.0));
        let w = SampledFunction::constant(20, 1.0);
        let r = verify_weighted(&mu, &s, &w, &p, &cfg).unwrap();
        assert!(r.eta_results.iter().all(|e| e.largest_admissible_eps == Some(1.0)));
    }

    #[test]
    fn single_atom_has_empty_sets() {
        let mu = PointMassMeasure::new(1, &[vec![0.0]], &[1.0]).unwrap();
        let f = SampledFunction::constant(1, 1.0);
        let p = OperatorParams::new(1, 1.0, 0.5).unwrap();
        let s = sample_operators(&mu, &f, &p, &PotentialOptions::default()).unwrap();
        assert_eq!(s.riesz, vec![0.0]);
        let r = verify_conditional(&mu, &s, &p, &GoodLambdaScanConfig::default()).unwrap();
        assert!(r.rows.iter().all(|r| r.lhs == 0.0));
    }

    #[test]
    fn rows_respect_inclusion_and_monotonicity() {
        let (mu, s, p) = setup(257);
        let cfg = GoodLambdaScanConfig::default();
        let r = verify_conditional(&mu, &s, &p, &cfg).unwrap();
        let ne = cfg.eps_grid.len();
        for block in r.rows.chunks(ne) {
            for row in block {
                assert!(row.lhs <= row.mu_e_lambda);
            }
            // eps grid is descending: lhs is non-increasing along the block
            assert!(block.windows(2).all(|w| w[1].lhs <= w[0].lhs));
        }
        assert_eq!(r.violation_rows, 0);
        let c = r.constant.unwrap();
        for row in &r.rows {
            assert!(row.lhs <= c * row.eps.powf(2.0) * row.mu_e_lambda * (1.0 + 1e-12));
        }
        let t = verify_two_term(&mu, &s, &p, &cfg).unwrap();
        assert!(t.rows.iter().all(|r| r.lhs <= r.mu_e_lambda));
    }

    #[test]
    fn strict_switch_only_changes_ties() {
        let (mu, s, p) = setup(129);
        let mut cfg = GoodLambdaScanConfig::default();
        let a = verify_conditional(&mu, &s, &p, &cfg).unwrap();
        cfg.strict_maximal = true;
        let b = verify_conditional(&mu, &s, &p, &cfg).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!(y.lhs <= x.lhs);
            let ties = mass_where(mu.masses(), |i| s.riesz[i] > cfg.k * x.lambda && s.maximal[i] == x.eps * x.lambda);
            assert_eq!(x.lhs - y.lhs, ties);
        }
    }

    #[test]
    fn unit_weight_reduces_to_unweighted_masses() {
        let (mu, s, p) = setup(129);
        let cfg = GoodLambdaScanConfig::default();
        let w = SampledFunction::constant(mu.len(), 1.0);
        let a = verify_two_term(&mu, &s, &p, &cfg).unwrap();
        let b = verify_weighted(&mu, &s, &w, &p, &cfg).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.lhs.to_bits(), y.lhs.to_bits());
            assert_eq!(x.mu_e_lambda.to_bits(), y.mu_e_lambda.to_bits());
            assert_eq!(x.maximal_term.to_bits(), y.maximal_term.to_bits());
        }
    }

    #[test]
    fn explicit_range_outside_observed_is_an_error() {
        let (mu, s, p) = setup(65);
        let cfg = GoodLambdaScanConfig {
            lambda_grid: LambdaGrid {
                count: 8,
                min: Some(1e6),
                max: Some(1e7),
            },
            ..Default::default()
        };
        assert!(verify_conditional(&mu, &s, &p, &cfg).is_err());
    }

    #[test]
    fn exponent_fit_cases() {
        assert_eq!(fit_exponent(&[1.0, 0.5], &[0.0, 0.0]), ExponentFit::NoData);
        assert_eq!(
            fit_exponent(&[1.0, 0.5], &[0.3, 0.0]),
            ExponentFit::FasterThanAnyPower { nonzero_rows: 1 }
        );
        let eps = [1.0, 0.5, 0.25];
        let y: Vec<f64> = eps.iter().map(|e: &f64| 3.0 * e.powf(2.5)).collect();
        match fit_exponent(&eps, &y) {
            ExponentFit::Fitted { slope, rows } => {
                assert_eq!(rows, 3);
                assert!((slope - 2.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }
}
