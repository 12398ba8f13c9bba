//! Weights `w ≥ 0` on the atoms: weighted masses, `A_p(µ)` constants over
//! cube families and empirical `A∞` comparison fits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::{Ball, Cube, PointMassMeasure, SampledFunction, ScaleRange};

/// A region for [`weighted_mass`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRegion {
    Ball(Ball),
    Cube(Cube),
}

impl WeightRegion {
    fn contains(&self, x: &[f64]) -> bool {
        match self {
            WeightRegion::Ball(b) => b.contains(x),
            WeightRegion::Cube(q) => q.contains(x),
        }
    }
}

fn check_weight(mu: &PointMassMeasure, w: &SampledFunction) -> Result<()> {
    w.check_aligned(mu)?;
    match w.iter().position(|&v| v < 0.0) {
        Some(i) => Err(Error::NegativeWeight { index: i, value: w[i] }),
        None => Ok(()),
    }
}

/// `w(E) = Σ_{yᵢ ∈ E} mᵢ wᵢ`.
pub fn weighted_mass(mu: &PointMassMeasure, w: &SampledFunction, region: &WeightRegion) -> Result<f64> {
    check_weight(mu, w)?;
    let mut acc = 0.0;
    for i in 0..mu.len() {
        if region.contains(mu.point(i)) {
            acc += mu.mass(i) * w[i];
        }
    }
    Ok(acc)
}

/// A finite family of cubes together with a description of how it was built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeFamily {
    pub description: String,
    pub cubes: Vec<Cube>,
}

impl CubeFamily {
    /// Cubes of side `2r` centered at every `stride`-th atom for each radius
    /// of `scales`, plus one cube holding the whole support.
    pub fn centered_at_atoms(mu: &PointMassMeasure, scales: &ScaleRange, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(invalid("stride", "must be at least 1"));
        }
        let radii = scales.radii();
        let mut cubes = Vec::new();
        for i in (0..mu.len()).step_by(stride) {
            for r in &radii {
                cubes.push(Cube::centered(mu.point(i), 2.0 * r));
            }
        }
        let (lo, hi) = mu.bounding_box();
        let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        // pad so the half-open cube keeps the atoms on its upper faces
        cubes.push(Cube::centered(&center, extent + 2.0 * scales.r_min));
        Ok(Self {
            description: format!(
                "centered cubes of side 2r at every {stride}-th atom, {} log-spaced r in [{:?}, {:?}], plus a support cube",
                radii.len(),
                scales.r_min,
                scales.r_max
            ),
            cubes,
        })
    }

    pub fn from_cubes(description: impl Into<String>, cubes: Vec<Cube>) -> Self {
        Self {
            description: description.into(),
            cubes,
        }
    }
}

/// Default family: every atom, the scales of [`ScaleRange::for_measure`].
pub fn default_cube_family(mu: &PointMassMeasure, num_scales: usize) -> Result<CubeFamily> {
    CubeFamily::centered_at_atoms(mu, &ScaleRange::for_measure(mu, num_scales)?, 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApConstantReport {
    pub p: f64,
    pub value: f64,
    pub witness_cube: Cube,
    pub witness_index: usize,
    pub dilation: f64,
    pub cube_family: String,
    pub cubes_scanned: usize,
}

/// `sup_Q ⟨w⟩_Q ⟨w^{-1/(p-1)}⟩_Q^{p-1}` over the family, with `µ`-averages
/// over `dilation · Q`.
///
/// Each cube's averages are taken of `w / w_ref` for the first atom's
/// weight `w_ref`; the product is scale invariant and a weight constant on
/// the cube gives exactly 1.
pub fn ap_constant(
    mu: &PointMassMeasure,
    w: &SampledFunction,
    p: f64,
    family: &CubeFamily,
    dilation: f64,
) -> Result<ApConstantReport> {
    check_weight(mu, w)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("{p} must be in (1, ∞)")));
    }
    if !(dilation >= 1.0 && dilation.is_finite()) {
        return Err(invalid("dilation", format!("{dilation} must be >= 1")));
    }
    if family.cubes.is_empty() {
        return Err(Error::Empty("cube family"));
    }
    if let Some(i) = w.iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroWeight { index: i });
    }
    let dual = -1.0 / (p - 1.0);
    let values: Vec<Result<f64>> = family
        .cubes
        .par_iter()
        .map(|q| {
            let region = q.dilate(dilation);
            let mut mass = 0.0;
            let mut sum_w = 0.0;
            let mut sum_dual = 0.0;
            let mut w_ref = None;
            for i in 0..mu.len() {
                if region.contains(mu.point(i)) {
                    let r = *w_ref.get_or_insert(w[i]);
                    let v = w[i] / r;
                    let m = mu.mass(i);
                    mass += m;
                    sum_w += m * v;
                    sum_dual += m * v.powf(dual);
                }
            }
            if mass == 0.0 {
                return Err(Error::ZeroMassCube(format!("{:?}..{:?}", region.lo(), region.hi())));
            }
            Ok((sum_w / mass) * (sum_dual / mass).powf(p - 1.0))
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, v) in values.into_iter().enumerate() {
        let v = v?;
        if v > best.0 {
            best = (v, k);
        }
    }
    Ok(ApConstantReport {
        p,
        value: best.0,
        witness_cube: family.cubes[best.1].clone(),
        witness_index: best.1,
        dilation,
        cube_family: family.description.clone(),
        cubes_scanned: family.cubes.len(),
    })
}

/// How subsets `E ⊆ Q` are drawn for [`ainfty_fit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetSampler {
    /// All nonempty subsets when `Q` holds at most `max_atoms` atoms,
    /// random subsets otherwise.
    ExhaustiveUpTo { max_atoms: usize },
    /// Random subsets: an inclusion probability is drawn per subset, then
    /// each atom of `Q` joins independently.
    Random,
}

impl Default for SubsetSampler {
    fn default() -> Self {
        SubsetSampler::ExhaustiveUpTo { max_atoms: 10 }
    }
}

pub const DELTA_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// Sample-based envelope `w(E)/w(Q) ≤ C₀ (µ(E)/µ(Q))^δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AInftyFit {
    pub c0: f64,
    pub delta: f64,
    /// `(µ(E)/µ(Q), w(E)/w(Q))`
    pub samples: Vec<(f64, f64)>,
    pub max_violation: f64,
    /// `(δ, C₀(δ))` across the δ grid.
    pub curve: Vec<(f64, f64)>,
    pub sampler: SubsetSampler,
    pub samples_per_cube: usize,
    pub seed: u64,
    pub note: String,
}

fn cube_samples(
    masses: &[f64],
    weights: &[f64],
    sampler: SubsetSampler,
    per_cube: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, f64)> {
    let n = masses.len();
    let mu_q: f64 = masses.iter().sum();
    let w_q: f64 = masses.iter().zip(weights).map(|(m, w)| m * w).sum();
    let mut out = vec![(1.0, 1.0)];
    if w_q == 0.0 {
        return Vec::new();
    }
    let mut push = |mask: &dyn Fn(usize) -> bool| {
        let mut u = 0.0;
        let mut v = 0.0;
        for i in 0..n {
            if mask(i) {
                u += masses[i];
                v += masses[i] * weights[i];
            }
        }
        if u > 0.0 {
            out.push((u / mu_q, v / w_q));
        }
    };
    match sampler {
        SubsetSampler::ExhaustiveUpTo { max_atoms } if n <= max_atoms => {
            // E = Q (the full mask) is already recorded
            for bits in 1..(1u64 << n) - 1 {
                push(&|i| bits >> i & 1 == 1);
            }
        }
        _ => {
            for _ in 0..per_cube {
                let prob: f64 = rng.gen();
                let picks: Vec<bool> = (0..n).map(|_| rng.gen::<f64>() < prob).collect();
                push(&|i| picks[i]);
            }
        }
    }
    out
}

/// Fits `(C₀, δ)` on the δ grid from subsets of the family's cubes.
///
/// `C₀(δ) = max(max v/u^δ, 1)`; the reported pair minimises `C₀`, ties
/// going to the larger δ. The result is an envelope of the samples, not a
/// certified constant.
pub fn ainfty_fit(
    mu: &PointMassMeasure,
    w: &SampledFunction,
    family: &CubeFamily,
    sampler: SubsetSampler,
    samples_per_cube: usize,
    seed: u64,
) -> Result<AInftyFit> {
    check_weight(mu, w)?;
    if family.cubes.is_empty() {
        return Err(Error::Empty("cube family"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for q in &family.cubes {
        let idx: Vec<usize> = (0..mu.len()).filter(|&i| q.contains(mu.point(i))).collect();
        if idx.is_empty() {
            continue;
        }
        let masses: Vec<f64> = idx.iter().map(|&i| mu.mass(i)).collect();
        let weights: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
        samples.extend(cube_samples(&masses, &weights, sampler, samples_per_cube, &mut rng));
    }
    if samples.is_empty() {
        return Err(Error::Empty("cubes with positive mass and weight"));
    }
    let curve: Vec<(f64, f64)> = DELTA_GRID
        .iter()
        .map(|&d| {
            let c = samples.iter().map(|&(u, v)| v / u.powf(d)).fold(1.0, f64::max);
            (d, c)
        })
        .collect();
    let (delta, c0) = curve
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |best, (d, c)| if c <= best.1 { (d, c) } else { best });
    let max_violation = samples
        .iter()
        .map(|&(u, v)| v - c0 * u.powf(delta))
        .fold(0.0, f64::max);
    Ok(AInftyFit {
        c0,
        delta,
        samples,
        max_violation,
        curve,
        sampler,
        samples_per_cube,
        seed,
        note: "sample-based envelope over the scanned subsets; not a certified constant".into(),
    })
}
