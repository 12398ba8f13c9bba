//! Riesz potentials and maximal functions of `f dµ` for point-mass `µ`.
//!
//! `I_α f(x) = Σ mᵢ fᵢ / |x - yᵢ|^{N-α}` is evaluated either by a direct sum
//! in atom order or by a monopole tree ([`RieszTree`]). At an atom the
//! `y = x` term is singular: by default it is dropped (`exclude_diagonal`),
//! otherwise the value is reported as `±∞`.
//!
//! Both maximal functions are exact. The objective `r ↦ F(µ(B(x,r)), ∫_B|f|)`
//! only changes at the atom distances `|x - yᵢ|` (closed balls), so the sup
//! over `r > 0` is a max over those critical radii.

mod distribution;
mod tree;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measure::{distance, squared_distance, OperatorParams, PointMassMeasure, SampledFunction};

pub use distribution::{
    distribution_function, layer_cake_integral, lorentz_weak_quasinorm, lp_norm, truncate, DistributionCurve,
};
pub use tree::{riesz_potential_tree, RieszTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Tree,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialOptions {
    /// Drop the singular `y = x` term when evaluating at an atom.
    pub exclude_diagonal: bool,
    pub method: Method,
    /// Opening angle: a node is summarised by its far-field expansion iff
    /// `radius / distance ≤ tree_theta`.
    pub tree_theta: f64,
    /// Relative error the tree is expected to meet against the direct sum.
    pub tree_tol: f64,
    pub leaf_size: usize,
}

impl Default for PotentialOptions {
    fn default() -> Self {
        Self {
            exclude_diagonal: true,
            method: Method::Direct,
            tree_theta: 0.3,
            tree_tol: 1e-3,
            leaf_size: 16,
        }
    }
}

impl PotentialOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tree_theta > 0.0 && self.tree_theta <= 1.0) {
            return Err(invalid("tree_theta", format!("{} not in (0, 1]", self.tree_theta)));
        }
        if !(self.tree_tol > 0.0) {
            return Err(invalid("tree_tol", format!("{} must be positive", self.tree_tol)));
        }
        if self.leaf_size == 0 {
            return Err(invalid("leaf_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// One kernel term `m f |x-y|^{-(N-α)}` from the squared distance.
#[inline]
pub(crate) fn kernel_term(m: f64, f: f64, d2: f64, half_exp: f64) -> f64 {
    m * f * d2.powf(-half_exp)
}

#[inline]
pub(crate) fn diagonal_sentinel(f: f64) -> f64 {
    if f > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

/// Direct sum over `indices` (ascending atom order).
pub(crate) fn direct_sum(
    mu: &PointMassMeasure,
    f: &[f64],
    x: &[f64],
    half_exp: f64,
    exclude_diagonal: bool,
    indices: impl Iterator<Item = usize>,
) -> f64 {
    let mut acc = 0.0;
    for i in indices {
        let fi = f[i];
        if fi == 0.0 {
            continue;
        }
        let d2 = squared_distance(x, mu.point(i));
        if d2 == 0.0 {
            if exclude_diagonal {
                continue;
            }
            return diagonal_sentinel(fi);
        }
        acc += kernel_term(mu.mass(i), fi, d2, half_exp);
    }
    acc
}

/// `I_α f(x)` by direct summation in atom order.
pub fn riesz_potential_direct(
    mu: &PointMassMeasure,
    f: &SampledFunction,
    params: &OperatorParams,
    x: &[f64],
    opts: &PotentialOptions,
) -> Result<f64> {
    f.check_aligned(mu)?;
    mu.check_point(x)?;
    Ok(direct_sum(
        mu,
        f.values(),
        x,
        params.kernel_exponent() / 2.0,
        opts.exclude_diagonal,
        0..mu.len(),
    ))
}

/// Visits each distinct critical radius around `x` with the cumulative
/// `(µ(B), ∫_B |f| dµ)` of the closed ball.
fn sweep_critical_radii(mu: &PointMassMeasure, f: &[f64], x: &[f64], mut visit: impl FnMut(f64, f64, f64)) {
    let mut order: Vec<(f64, usize)> = mu.points().enumerate().map(|(i, p)| (distance(x, p), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut mass = 0.0;
    let mut integral = 0.0;
    for (k, &(d, i)) in order.iter().enumerate() {
        let m = mu.mass(i);
        mass += m;
        integral += m * f[i].abs();
        let last_at_radius = order.get(k + 1).is_none_or(|next| next.0 != d);
        if last_at_radius {
            visit(d, mass, integral);
        }
    }
}

/// `M_α f(x) = sup_r µ(B(x,r))^{-(N-α)/N} ∫_{B(x,r)} |f| dµ`, exact.
pub fn fractional_maximal(
    mu: &PointMassMeasure,
    f: &SampledFunction,
    params: &OperatorParams,
    x: &[f64],
) -> Result<f64> {
    f.check_aligned(mu)?;
    mu.check_point(x)?;
    Ok(fractional_maximal_unchecked(mu, f, params.maximal_exponent(), x))
}

fn fractional_maximal_unchecked(mu: &PointMassMeasure, f: &[f64], power: f64, x: &[f64]) -> f64 {
    let mut best = 0.0f64;
    sweep_critical_radii(mu, f, x, |_, mass, integral| {
        if integral > 0.0 {
            best = best.max(integral / mass.powf(power));
        }
    });
    best
}

/// Centered Hardy–Littlewood maximal function `sup_r µ(B)^{-1} ∫_B |f| dµ`, exact.
pub fn hl_maximal(mu: &PointMassMeasure, f: &SampledFunction, x: &[f64]) -> Result<f64> {
    f.check_aligned(mu)?;
    mu.check_point(x)?;
    Ok(hl_maximal_unchecked(mu, f, x))
}

fn hl_maximal_unchecked(mu: &PointMassMeasure, f: &[f64], x: &[f64]) -> f64 {
    let mut best = 0.0f64;
    sweep_critical_radii(mu, f, x, |_, mass, integral| {
        best = best.max(integral / mass);
    });
    best
}

/// `I_α f`, `M_α f` and `M f` sampled at a list of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorValues {
    pub riesz: Vec<f64>,
    pub fractional_maximal: Vec<f64>,
    pub hl_maximal: Vec<f64>,
}

/// Evaluates all three operators at `queries`. Each query is computed
/// independently with a fixed summation order, so the output does not
/// depend on the number of worker threads.
pub fn evaluate_operators(
    mu: &PointMassMeasure,
    f: &SampledFunction,
    params: &OperatorParams,
    queries: &[Vec<f64>],
    opts: &PotentialOptions,
) -> Result<OperatorValues> {
    f.check_aligned(mu)?;
    opts.validate()?;
    for q in queries {
        mu.check_point(q)?;
    }
    let riesz = match opts.method {
        Method::Direct => {
            let half = params.kernel_exponent() / 2.0;
            queries
                .par_iter()
                .map(|x| direct_sum(mu, f, x, half, opts.exclude_diagonal, 0..mu.len()))
                .collect()
        }
        Method::Tree => RieszTree::build(mu, f, params, opts)?.evaluate_many(queries),
    };
    let power = params.maximal_exponent();
    let (fractional_maximal, hl_maximal) = queries
        .par_iter()
        .map(|x| {
            (
                fractional_maximal_unchecked(mu, f, power, x),
                hl_maximal_unchecked(mu, f, x),
            )
        })
        .unzip();
    Ok(OperatorValues {
        riesz,
        fractional_maximal,
        hl_maximal,
    })
}

/// [`evaluate_operators`] at the atoms of `mu`.
pub fn evaluate_at_atoms(
    mu: &PointMassMeasure,
    f: &SampledFunction,
    params: &OperatorParams,
    opts: &PotentialOptions,
) -> Result<OperatorValues> {
    let atoms: Vec<Vec<f64>> = mu.points().map(<[f64]>::to_vec).collect();
    evaluate_operators(mu, f, params, &atoms, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{ball_integral, ball_mass, Ball};
    use proptest::prelude::*;

    fn line(xs: &[f64], ms: &[f64]) -> PointMassMeasure {
        PointMassMeasure::from_flat(1, xs.to_vec(), ms.to_vec()).unwrap()
    }

    fn f(v: &[f64]) -> SampledFunction {
        SampledFunction::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_term_riesz() {
        let mu = PointMassMeasure::new(2, &[vec![0.0, 0.0]], &[2.0]).unwrap();
        let p = OperatorParams::new(2, 2.0, 1.0).unwrap();
        let v = riesz_potential_direct(&mu, &f(&[1.0]), &p, &[3.0, 4.0], &PotentialOptions::default()).unwrap();
        assert!((v - 0.4).abs() < 1e-15, "{v}");
    }

    #[test]
    fn two_atom_riesz() {
        let mu = line(&[0.0, 3.0], &[1.0, 1.0]);
        let p = OperatorParams::new(1, 1.0, 0.5).unwrap();
        let v = riesz_potential_direct(&mu, &f(&[1.0, 1.0]), &p, &[1.0], &PotentialOptions::default()).unwrap();
        assert!((v - (1.0 + 0.5f64.sqrt())).abs() < 1e-14);
        assert!((v - 1.70710678).abs() < 1e-8);
    }

    #[test]
    fn diagonal_conventions() {
        let mu = line(&[0.0, 1.0], &[1.0, 1.0]);
        let p = OperatorParams::new(1, 1.0, 0.5).unwrap();
        let incl = PotentialOptions {
            exclude_diagonal: false,
            ..Default::default()
        };
        let v = riesz_potential_direct(&mu, &f(&[2.0, 1.0]), &p, &[0.0], &incl).unwrap();
        assert_eq!(v, f64::INFINITY);
        let v = riesz_potential_direct(&mu, &f(&[-2.0, 1.0]), &p, &[0.0], &incl).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
        let v = riesz_potential_direct(&mu, &f(&[2.0, 1.0]), &p, &[0.0], &PotentialOptions::default()).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn fractional_maximal_single_atom() {
        let p = OperatorParams::new(2, 2.0, 0.5).unwrap();
        let m = 3.5;
        let mu = PointMassMeasure::new(2, &[vec![0.2, 0.1]], &[m]).unwrap();
        for x in [[0.0, 0.0], [0.2, 0.1], [5.0, -3.0]] {
            let v = fractional_maximal(&mu, &f(&[1.0]), &p, &x).unwrap();
            assert!((v - m.powf(0.5 / 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn fractional_maximal_two_atoms() {
        let mu = line(&[0.0, 1.0], &[1.0, 1.0]);
        let p = OperatorParams::new(1, 1.0, 0.5).unwrap();
        // critical radii 0 and 1: 2/1^{1/2} and 6/2^{1/2}
        let expect = f64::max(2.0, 6.0 / 2f64.sqrt());
        let v = fractional_maximal(&mu, &f(&[2.0, 4.0]), &p, &[0.0]).unwrap();
        assert!((v - expect).abs() < 1e-14);
        assert!((v - 4.24264069).abs() < 1e-8);
        assert_eq!(fractional_maximal(&mu, &f(&[0.0, 0.0]), &p, &[0.3]).unwrap(), 0.0);
    }

    #[test]
    fn hl_maximal_examples() {
        let mu = line(&[0.0, 1.0], &[1.0, 1.0]);
        assert_eq!(hl_maximal(&mu, &f(&[2.0, 4.0]), &[0.0]).unwrap(), 3.0);
        let c = -1.25;
        let mu3 = line(&[0.0, 0.4, 2.0], &[0.3, 1.0, 2.0]);
        for x in [-1.0, 0.2, 0.4, 7.0] {
            let v = hl_maximal(&mu3, &f(&[c, c, c]), &[x]).unwrap();
            assert!((v - c.abs()).abs() < 1e-15);
        }
        let one = line(&[1.0], &[0.1]);
        assert_eq!(hl_maximal(&one, &f(&[5.0]), &[-3.0]).unwrap(), 5.0);
    }

    fn random_instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
        (1usize..30).prop_flat_map(|n| {
            (
                prop::collection::vec(-1.0f64..1.0, n),
                prop::collection::vec(0.01f64..2.0, n),
                prop::collection::vec(0.0f64..3.0, n),
                prop::collection::vec(0.0f64..3.0, n),
                -1.5f64..1.5,
            )
        })
    }

    proptest! {
        #[test]
        fn fractional_maximal_is_sublinear((xs, ms, a, b, x) in random_instance()) {
            let mu = line(&xs, &ms);
            let n = mu.len();
            let p = OperatorParams::new(1, 1.0, 0.4).unwrap();
            let fa = f(&a[..n]);
            let fb = f(&b[..n]);
            let sum = f(&a[..n].iter().zip(&b[..n]).map(|(u, v)| u + v).collect::<Vec<_>>());
            let lhs = fractional_maximal(&mu, &sum, &p, &[x]).unwrap();
            let rhs = fractional_maximal(&mu, &fa, &p, &[x]).unwrap() + fractional_maximal(&mu, &fb, &p, &[x]).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn operators_are_homogeneous((xs, ms, a, _b, x) in random_instance(), c in -4.0f64..4.0) {
            let mu = line(&xs, &ms);
            let n = mu.len();
            let p = OperatorParams::new(1, 1.0, 0.4).unwrap();
            let fa = f(&a[..n]);
            let fc = fa.scaled(c);
            let opts = PotentialOptions::default();
            let m1 = fractional_maximal(&mu, &fa, &p, &[x]).unwrap();
            let m2 = fractional_maximal(&mu, &fc, &p, &[x]).unwrap();
            prop_assert!((m2 - c.abs() * m1).abs() <= 1e-12 * m2.abs().max(1e-300));
            let h1 = hl_maximal(&mu, &fa, &[x]).unwrap();
            let h2 = hl_maximal(&mu, &fc, &[x]).unwrap();
            prop_assert!((h2 - c.abs() * h1).abs() <= 1e-12 * h2.abs().max(1e-300));
            let i1 = riesz_potential_direct(&mu, &fa, &p, &[x], &opts).unwrap();
            let i2 = riesz_potential_direct(&mu, &fc, &p, &[x], &opts).unwrap();
            prop_assert!((i2 - c * i1).abs() <= 1e-12 * i2.abs().max(1e-300));
        }

        #[test]
        fn riesz_dominates_truncated_averages((xs, ms, a, _b, x) in random_instance()) {
            let mu = line(&xs, &ms);
            let n = mu.len();
            let p = OperatorParams::new(1, 1.0, 0.3).unwrap();
            let fa = f(&a[..n]);
            let opts = PotentialOptions::default();
            let i = riesz_potential_direct(&mu, &fa, &p, &[x], &opts).unwrap();
            for y in mu.points() {
                let r = distance(&[x], y);
                if r == 0.0 { continue; }
                let b = Ball::new(vec![x], r).unwrap();
                // the excluded diagonal term is not part of I_α f
                let mut int = ball_integral(&mu, &fa, &b, false).unwrap();
                for (k, z) in mu.points().enumerate() {
                    if z[0] == x { int -= mu.mass(k) * fa[k]; }
                }
                prop_assert!(i >= r.powf(-p.kernel_exponent()) * int * (1.0 - 1e-12) - 1e-12);
            }
        }

        #[test]
        fn maximal_dominates_radius_grid((xs, ms, a, _b, x) in random_instance()) {
            let mu = line(&xs, &ms);
            let n = mu.len();
            let p = OperatorParams::new(1, 1.0, 0.6).unwrap();
            let fa = f(&a[..n]);
            let m = fractional_maximal(&mu, &fa, &p, &[x]).unwrap();
            for k in 0..=400 {
                let r = 3.0 * k as f64 / 400.0;
                let b = Ball::new(vec![x], r).unwrap();
                let mass = ball_mass(&mu, &b);
                if mass == 0.0 { continue; }
                let v = ball_integral(&mu, &fa, &b, true).unwrap() / mass.powf(p.maximal_exponent());
                prop_assert!(v <= m * (1.0 + 1e-12));
            }
        }
    }
}
