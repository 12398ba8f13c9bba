//! Both sides of the good-λ, norm and weak-type inequalities on a finite
//! measure, with empirical constants.

mod goodlambda;
mod norms;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{OperatorParams, PointMassMeasure, SampledFunction};
use crate::potential::{evaluate_at_atoms, PotentialOptions};

pub use goodlambda::{
    default_eps_grid, lambda_grid, run_scan, verify_conditional, verify_two_term, verify_weighted, EtaResult,
    ExponentFit, GoodLambdaReport, GoodLambdaRow, GoodLambdaScanConfig, LambdaGrid, ScanMode,
};
pub use norms::{verify_norm_inequality, verify_weak_type, ExponentSource, NormReport, WeakTypeReport};

/// `I_α f` and `M_α f` at every atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSamples {
    pub riesz: Vec<f64>,
    pub maximal: Vec<f64>,
    pub exclude_diagonal: bool,
}

impl OperatorSamples {
    pub(crate) fn check(&self, mu: &PointMassMeasure) -> Result<()> {
        for (what, v) in [("riesz samples", &self.riesz), ("maximal samples", &self.maximal)] {
            if v.len() != mu.len() {
                return Err(Error::LengthMismatch {
                    what,
                    expected: mu.len(),
                    got: v.len(),
                });
            }
        }
        Ok(())
    }
}

/// Evaluates `I_α f` (with the options' diagonal convention and method) and
/// `M_α f` at the atoms.
pub fn sample_operators(
    mu: &PointMassMeasure,
    f: &SampledFunction,
    params: &OperatorParams,
    opts: &PotentialOptions,
) -> Result<OperatorSamples> {
    let v = evaluate_at_atoms(mu, f, params, opts)?;
    Ok(OperatorSamples {
        riesz: v.riesz,
        maximal: v.fractional_maximal,
        exclude_diagonal: opts.exclude_diagonal,
    })
}
