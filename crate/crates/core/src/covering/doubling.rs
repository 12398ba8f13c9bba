//! Searches for `(α, β)`-doubling cubes, `µ(αQ) ≤ β µ(Q)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::{mass_in_cube, Cube, PointMassMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingSearchConfig {
    pub beta: f64,
    pub max_halvings: u32,
    pub dilation_factor: f64,
}

impl DoublingSearchConfig {
    /// `β = 2^{n + 1/2}`, at most 60 halvings, dilation 2.
    pub fn for_dim(n: usize) -> Self {
        Self {
            beta: 2f64.powf(n as f64 + 0.5),
            max_halvings: 60,
            dilation_factor: 2.0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let floor = 2f64.powi(n as i32);
        if !(self.beta > floor && self.beta.is_finite()) {
            return Err(invalid("beta", format!("{} must exceed 2^n = {floor}", self.beta)));
        }
        if self.max_halvings == 0 {
            return Err(invalid("max_halvings", "must be at least 1"));
        }
        if !(self.dilation_factor >= 1.0 && self.dilation_factor.is_finite()) {
            return Err(invalid("dilation_factor", format!("{} must be >= 1", self.dilation_factor)));
        }
        Ok(())
    }
}

/// Masses of one cube in a search sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingStep {
    pub halvings: u32,
    pub side: f64,
    pub mass: f64,
    pub dilated_mass: f64,
}

impl DoublingStep {
    fn measure(mu: &PointMassMeasure, center: &[f64], side: f64, halvings: u32, dilation: f64) -> Self {
        let q = Cube::centered(center, side);
        Self {
            halvings,
            side,
            mass: mass_in_cube(mu, &q),
            dilated_mass: mass_in_cube(mu, &q.dilate(dilation)),
        }
    }

    pub fn is_doubling(&self, beta: f64) -> bool {
        self.mass > 0.0 && self.dilated_mass <= beta * self.mass
    }

    pub fn ratio(&self) -> f64 {
        self.dilated_mass / self.mass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallDoublingCube {
    pub cube: Cube,
    pub halvings: u32,
    pub ratio: f64,
    /// Every cube tried, the returned one last. All earlier entries fail
    /// the doubling test.
    pub history: Vec<DoublingStep>,
}

impl SmallDoublingCube {
    /// Re-checks that no earlier cube in the sequence was doubling.
    pub fn certify_minimal(&self, beta: f64) -> bool {
        let (last, earlier) = match self.history.split_last() {
            Some(x) => x,
            None => return false,
        };
        last.halvings == self.halvings && last.is_doubling(beta) && earlier.iter().all(|s| !s.is_doubling(beta))
    }
}

/// First cube in `q0, q0/2, q0/4, …` (concentric halvings) that is doubling
/// with positive mass.
pub fn find_small_doubling_cube(
    mu: &PointMassMeasure,
    q0: &Cube,
    cfg: &DoublingSearchConfig,
) -> Result<SmallDoublingCube> {
    cfg.validate(mu.dim())?;
    mu.check_point(q0.lo())?;
    let center = q0.center();
    let mut history = Vec::new();
    for j in 0..=cfg.max_halvings {
        let side = q0.side() * 2f64.powi(-(j as i32));
        let step = DoublingStep::measure(mu, &center, side, j, cfg.dilation_factor);
        if step.dilated_mass == 0.0 {
            history.push(step);
            return Err(Error::DoublingNotFound {
                halvings: j,
                reason: "no mass left in the dilated cube".into(),
            });
        }
        let done = step.is_doubling(cfg.beta);
        history.push(step);
        if done {
            let last = history.last().cloned().unwrap_or_else(|| unreachable!());
            return Ok(SmallDoublingCube {
                cube: Cube::centered(&center, side),
                halvings: j,
                ratio: last.ratio(),
                history,
            });
        }
    }
    Err(Error::DoublingNotFound {
        halvings: cfg.max_halvings,
        reason: format!("no doubling cube within {} halvings", cfg.max_halvings),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BigDoublingCube {
    pub cube: Cube,
    pub doublings: u32,
    pub ratio: f64,
}

/// Grows a cube centered at `x` by factors of 2 from `min_side` until it is
/// doubling. Terminates once the cube holds every atom.
pub fn find_big_doubling_cube(
    mu: &PointMassMeasure,
    x: &[f64],
    min_side: f64,
    cfg: &DoublingSearchConfig,
) -> Result<BigDoublingCube> {
    cfg.validate(mu.dim())?;
    mu.check_point(x)?;
    if !(min_side > 0.0 && min_side.is_finite()) {
        return Err(invalid("min_side", format!("{min_side} must be positive")));
    }
    let reach = mu.max_distance_from(x);
    let mut side = min_side;
    for k in 0.. {
        let step = DoublingStep::measure(mu, x, side, k, cfg.dilation_factor);
        // past this side the cube holds all atoms and the ratio is 1
        if step.is_doubling(cfg.beta) || side > 2.0 * reach {
            debug_assert!(step.is_doubling(cfg.beta));
            return Ok(BigDoublingCube {
                cube: Cube::centered(x, side),
                doublings: k,
                ratio: step.ratio(),
            });
        }
        side *= 2.0;
    }
    unreachable!()
}
