#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use goodlambda::covering::{
    besicovitch_select, default_overlap_bound, find_big_doubling_cube, find_small_doubling_cube, verify_whitney,
    whitney_decompose, BallUnion, DoublingSearchConfig,
};
use goodlambda::generators::GeneratorSpec;
use goodlambda::harness::{
    sample_operators, verify_conditional, verify_norm_inequality, verify_two_term, verify_weak_type, verify_weighted,
    ExponentSource, GoodLambdaScanConfig, OperatorSamples,
};
use goodlambda::measure::{ball_mass, distance, Ball, Cube, OperatorParams, PointMassMeasure, SampledFunction, ScaleRange};
use goodlambda::potential::{
    distribution_function, fractional_maximal, hl_maximal, layer_cake_integral, riesz_potential_direct,
    riesz_potential_tree, PotentialOptions,
};
use goodlambda::weights::{ainfty_fit, CubeFamily, SubsetSampler};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn random_measure(rng: &mut ChaCha8Rng, dim: usize, max_atoms: usize) -> PointMassMeasure {
    let count = rng.gen_range(1..=max_atoms);
    // a coarse lattice half of the time, so equal distances occur
    let snap = rng.gen_bool(0.5);
    let coords: Vec<f64> = (0..count * dim)
        .map(|_| {
            let v: f64 = rng.gen();
            if snap {
                (v * 8.0).floor() / 8.0
            } else {
                v
            }
        })
        .collect();
    let masses = (0..count).map(|_| rng.gen_range(0.1..2.0)).collect();
    PointMassMeasure::from_flat(dim, coords, masses).unwrap()
}

fn random_values(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(-1.0..2.0) })
        .collect()
}

/// Maximal averages over `steps` equally spaced radii up to the farthest atom,
/// and over every atom distance, by linear scans.
fn maximal_by_scan(mu: &PointMassMeasure, f: &[f64], x: &[f64], power: f64, steps: usize) -> [(f64, f64); 2] {
    let d: Vec<f64> = mu.points().map(|p| distance(x, p)).collect();
    let reach = d.iter().copied().fold(0.0, f64::max);
    let at = |r: f64| {
        let (mut m, mut s) = (0.0, 0.0);
        for i in 0..mu.len() {
            if d[i] <= r {
                m += mu.mass(i);
                s += mu.mass(i) * f[i].abs();
            }
        }
        (m, s)
    };
    let eval = |radii: &mut dyn Iterator<Item = f64>| {
        let (mut frac, mut hl) = (0.0f64, 0.0f64);
        for r in radii {
            let (m, s) = at(r);
            if m > 0.0 {
                hl = hl.max(s / m);
                if s > 0.0 {
                    frac = frac.max(s / m.powf(power));
                }
            }
        }
        (frac, hl)
    };
    let grid = eval(&mut (1..=steps).map(|j| reach * j as f64 / steps as f64));
    let critical = eval(&mut d.iter().copied());
    [grid, critical]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut queries_checked = 0;
    for inst in 0..200 {
        let dim = 1 + inst % 2;
        let mu = random_measure(&mut rng, dim, 100);
        let f = SampledFunction::new(random_values(&mut rng, mu.len())).unwrap();
        let params = OperatorParams::new(dim, dim as f64, rng.gen_range(0.1..0.9) * dim as f64).unwrap();
        let mut queries: Vec<Vec<f64>> = (0..2).map(|_| (0..dim).map(|_| rng.gen_range(-0.2..1.2)).collect()).collect();
        queries.push(mu.point(rng.gen_range(0..mu.len())).to_vec());

        for x in &queries {
            for r in [0.0, rng.gen_range(0.0..0.5), distance(x, mu.point(0))] {
                let brute: f64 = (0..mu.len())
                    .filter(|&i| distance(x, mu.point(i)) <= r)
                    .fold(0.0, |acc, i| acc + mu.mass(i));
                let got = ball_mass(&mu, &Ball::new(x.clone(), r).unwrap());
                ensure!(got.to_bits() == brute.to_bits(), "instance {inst}: ball mass {got} vs {brute}");
            }
            let frac = fractional_maximal(&mu, &f, &params, x).unwrap();
            let hl = hl_maximal(&mu, &f, x).unwrap();
            let [grid, critical] = maximal_by_scan(&mu, &f, x, params.maximal_exponent(), 10_000);
            ensure!(grid.0 <= frac * (1.0 + 1e-12), "instance {inst}: grid M_a {} above {frac}", grid.0);
            ensure!(grid.1 <= hl * (1.0 + 1e-12), "instance {inst}: grid M {} above {hl}", grid.1);
            ensure!(rel(critical.0, frac) <= 1e-12, "instance {inst}: M_a {frac} vs critical {}", critical.0);
            ensure!(rel(critical.1, hl) <= 1e-12, "instance {inst}: M {hl} vs critical {}", critical.1);
            queries_checked += 1;
        }

        let mut thresholds: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.5..2.5)).collect();
        thresholds.push(f[0]);
        thresholds.sort_by(f64::total_cmp);
        let curve = distribution_function(&mu, &f, &thresholds, None).unwrap();
        for (t, v) in thresholds.iter().zip(&curve.values) {
            let brute = (0..mu.len()).filter(|&i| f[i] > *t).fold(0.0, |acc, i| acc + mu.mass(i));
            ensure!(v.to_bits() == brute.to_bits(), "instance {inst}: distribution at {t}: {v} vs {brute}");
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("200 instances, {queries_checked} maximal queries, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for inst in 0..100 {
        let dim = 1 + inst % 2;
        let mu = random_measure(&mut rng, dim, 100);
        let g = random_values(&mut rng, mu.len());
        for p in [1.0, 1.5, 2.0, 3.0] {
            let direct: f64 = (0..mu.len()).map(|i| mu.mass(i) * g[i].abs().powf(p)).sum();
            let cake = layer_cake_integral(&mu, &g, p, None).unwrap();
            let e = rel(direct, cake);
            worst = worst.max(e);
            ensure!(e <= 1e-10, "instance {inst}, p = {p}: {direct} vs {cake}");
        }
    }
    Ok(format!("100 instances x 4 exponents, worst relative gap {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut cubes, mut worst_neighbors, mut worst_overlap) = (0, 0, 0);
    for inst in 0..50 {
        let dim = 1 + inst % 2;
        let balls = rng.gen_range(1..=5);
        let centers: Vec<Vec<f64>> = (0..balls).map(|_| (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let radii: Vec<f64> = (0..balls).map(|_| rng.gen_range(0.05..0.4)).collect();
        let floor = if dim == 1 { 1.0 / 4096.0 } else { 1.0 / 256.0 };
        let oracle = BallUnion::new(dim, centers, radii, floor).unwrap();
        let d = whitney_decompose(&oracle).map_err(|e| format!("instance {inst}: {e}"))?;
        let check = verify_whitney(&d, &oracle, &[], 1000, inst as u64);
        let bound = 12usize.pow(dim as u32);
        ensure!(check.overlapping_pairs == 0, "instance {inst}: {} overlapping pairs", check.overlapping_pairs);
        ensure!(check.distance_violations == 0, "instance {inst}: {} distance violations", check.distance_violations);
        ensure!(
            check.min_neighbor_side_ratio >= 0.25 && check.max_neighbor_side_ratio <= 4.0,
            "instance {inst}: neighbour side ratios {}..{}",
            check.min_neighbor_side_ratio,
            check.max_neighbor_side_ratio
        );
        ensure!(check.max_neighbors <= bound, "instance {inst}: {} neighbours", check.max_neighbors);
        ensure!(check.max_dilated_overlap <= bound, "instance {inst}: overlap {}", check.max_dilated_overlap);
        ensure!(check.overlap_points >= 1000, "instance {inst}: only {} sample points", check.overlap_points);
        ensure!(check.passed, "instance {inst}: {check:?}");
        cubes += check.cubes;
        worst_neighbors = worst_neighbors.max(check.max_neighbors);
        worst_overlap = worst_overlap.max(check.max_dilated_overlap);
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "50 sets, {cubes} cubes, max neighbours {worst_neighbors}, max overlap {worst_overlap}, {elapsed:.2?}"
    ))
}

fn half_open_mass(mu: &PointMassMeasure, center: &[f64], side: f64) -> f64 {
    (0..mu.len())
        .filter(|&i| {
            mu.point(i)
                .iter()
                .zip(center)
                .all(|(p, c)| c - side / 2.0 <= *p && *p < c + side / 2.0)
        })
        .map(|i| mu.mass(i))
        .sum()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut found, mut big) = (0, 0);
    for inst in 0..100 {
        let dim = 1 + inst % 2;
        let mu = random_measure(&mut rng, dim, 100);
        let cfg = DoublingSearchConfig::for_dim(dim);
        let center = mu.point(rng.gen_range(0..mu.len())).to_vec();
        let q0 = Cube::centered(&center, rng.gen_range(0.1..2.0));
        let r = find_small_doubling_cube(&mu, &q0, &cfg).map_err(|e| format!("instance {inst}: {e}"))?;
        ensure!(r.certify_minimal(cfg.beta), "instance {inst}: minimality not certified");
        for j in 0..=r.halvings {
            let side = q0.side() * 2f64.powi(-(j as i32));
            let (m, m2) = (half_open_mass(&mu, &center, side), half_open_mass(&mu, &center, 2.0 * side));
            let doubling = m > 0.0 && m2 <= cfg.beta * m;
            ensure!(doubling == (j == r.halvings), "instance {inst}: halving {j} of {} misjudged", r.halvings);
        }
        found += 1;

        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let b = find_big_doubling_cube(&mu, &x, rng.gen_range(1e-4..0.1), &cfg).map_err(|e| format!("instance {inst}: {e}"))?;
        let q = &b.cube;
        let (m, m2) = (half_open_mass(&mu, &x, q.side()), half_open_mass(&mu, &x, 2.0 * q.side()));
        ensure!(m > 0.0 && m2 <= cfg.beta * m, "instance {inst}: big cube is not doubling");
        big += 1;
    }
    Ok(format!("{found} small searches certified minimal, {big} big searches terminated"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0;
    for inst in 0..200 {
        let dim = 1 + inst % 2;
        let count = rng.gen_range(1..=80);
        let cands: Vec<Cube> = (0..count)
            .map(|_| {
                let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
                Cube::centered(&c, rng.gen_range(0.01..0.5))
            })
            .collect();
        let probes: Vec<Vec<f64>> = (0..200).map(|_| (0..dim).map(|_| rng.gen_range(-0.3..1.3)).collect()).collect();
        let sel = besicovitch_select(&cands, None, &probes).map_err(|e| format!("instance {inst}: {e}"))?;
        let bound = default_overlap_bound(dim);
        ensure!(bound == 4usize.pow(dim as u32), "bound {bound}");
        for q in &cands {
            let c = q.center();
            ensure!(
                sel.selected.iter().any(|&s| cands[s].contains_closed(&c)),
                "instance {inst}: center {c:?} uncovered"
            );
        }
        for p in probes.iter().chain(cands.iter().map(|q| q.center()).collect::<Vec<_>>().iter()) {
            let k = sel.selected.iter().filter(|&&s| cands[s].contains_closed(p)).count();
            ensure!(k <= bound, "instance {inst}: {k} cubes over {p:?}");
            worst = worst.max(k);
        }
    }
    Ok(format!("200 families, max overlap {worst} (bound 4^n)"))
}

struct Instance {
    mu: PointMassMeasure,
    f: SampledFunction,
    params: OperatorParams,
    samples: OperatorSamples,
}

impl Instance {
    fn new(mu: PointMassMeasure, growth_exp: f64) -> Self {
        let (lo, hi) = mu.bounding_box();
        let mid = 0.5 * (lo[0] + hi[0]);
        let f = SampledFunction::from_fn(&mu, |x| if x[0] <= mid { 1.0 } else { 0.0 }).unwrap();
        let params = OperatorParams::new(mu.dim(), growth_exp, 0.5).unwrap();
        let samples = sample_operators(&mu, &f, &params, &PotentialOptions::default()).unwrap();
        Self { mu, f, params, samples }
    }

    fn weight(&self) -> SampledFunction {
        SampledFunction::from_fn(&self.mu, |x| 1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt()).unwrap()
    }
}

fn lebesgue(level: i32) -> Instance {
    let mu = GeneratorSpec::LebesgueGrid {
        lo: vec![0.0],
        hi: vec![1.0],
        h: 2f64.powi(-level),
        max_nodes: 1 << 20,
    }
    .build()
    .unwrap();
    Instance::new(mu, 1.0)
}

fn cantor(levels: u32) -> Instance {
    let mu = GeneratorSpec::CantorLike {
        levels,
        ratio: 1.0 / 3.0,
        left_share: 0.8,
    }
    .build()
    .unwrap();
    Instance::new(mu, 2f64.ln() / 3f64.ln())
}

fn segment(level: i32) -> Instance {
    let mu = GeneratorSpec::SegmentInPlane {
        length: 1.0,
        h: 2f64.powi(-level),
        plane_lo: [-1.0, -1.0],
        plane_hi: [2.0, 1.0],
        plane_mass: 0.5,
        plane_spacing: None,
        max_nodes: 1 << 20,
    }
    .build()
    .unwrap();
    Instance::new(mu, 1.0)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let cfg = GoodLambdaScanConfig::default();
    let (coarse, fine) = (lebesgue(10), lebesgue(11));
    let a = verify_conditional(&coarse.mu, &coarse.samples, &coarse.params, &cfg).map_err(|e| e.to_string())?;
    let b = verify_conditional(&fine.mu, &fine.samples, &fine.params, &cfg).map_err(|e| e.to_string())?;
    let (ca, cb) = (a.constant.unwrap(), b.constant.unwrap());
    ensure!(ca.is_finite(), "C_emp = {ca}");
    let s = a.eps_exponent;
    ensure!(s == 2.0, "ε-exponent {s}");
    for r in &a.rows {
        ensure!(r.lhs <= r.mu_e_lambda, "row {r:?} breaks set inclusion");
        ensure!(r.lhs <= ca * r.eps.powf(s) * r.mu_e_lambda * (1.0 + 1e-12), "row {r:?} above C_emp");
    }
    let fit = a.exponent_fit.clone().unwrap();
    ensure!(fit.exponent() >= 1.5, "fitted exponent {fit:?}");
    let dense = GoodLambdaScanConfig {
        eps_grid: (0..=16).map(|j| 2f64.powf(-j as f64 / 8.0)).collect(),
        ..cfg
    };
    let d = verify_conditional(&coarse.mu, &coarse.samples, &coarse.params, &dense).map_err(|e| e.to_string())?;
    let slope = d.exponent_fit.unwrap().exponent();
    ensure!(slope.is_finite() && slope >= 1.5, "dense-grid slope {slope}");
    let change = rel(ca, cb);
    ensure!(change < 0.2, "C_emp {ca} -> {cb}");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!(
        "C_emp {ca:.4} (h=2^-10) {cb:.4} (h=2^-11), change {:.1}%, exponent {:?} on the default grid, slope {slope:.2} on 2^(-j/8), {elapsed:.2?}",
        100.0 * change,
        fit
    ))
}

fn criterion_7() -> Outcome {
    let inst = lebesgue(10);
    let cfg = GoodLambdaScanConfig::default();
    let two = verify_two_term(&inst.mu, &inst.samples, &inst.params, &cfg).map_err(|e| e.to_string())?;
    let b = two.constant.unwrap();
    ensure!(b.is_finite(), "b_emp = {b}");
    let w = inst.weight();
    let family = CubeFamily::centered_at_atoms(&inst.mu, &ScaleRange::for_measure(&inst.mu, 8).unwrap(), 8).unwrap();
    let fit = ainfty_fit(&inst.mu, &w, &family, SubsetSampler::default(), 16, 7).map_err(|e| e.to_string())?;
    ensure!(fit.c0.is_finite() && fit.delta > 0.0, "A∞ fit {} {}", fit.c0, fit.delta);
    let weighted = verify_weighted(&inst.mu, &inst.samples, &w, &inst.params, &cfg).map_err(|e| e.to_string())?;
    let mut found = Vec::new();
    for eta in [0.5, 0.1] {
        let r = weighted.eta_results.iter().find(|r| r.eta == eta).ok_or(format!("η = {eta} missing"))?;
        let eps = r.largest_admissible_eps.ok_or(format!("no ε works for η = {eta}"))?;
        found.push(format!("η={eta}: ε={eps}"));
    }
    Ok(format!("b_emp {b:.4}, A∞ fit C0={:.3} δ={}, {}", fit.c0, fit.delta, found.join(", ")))
}

fn family() -> Vec<(&'static str, Instance, Instance)> {
    vec![
        ("lebesgue_grid", lebesgue(10), lebesgue(11)),
        ("cantor_like", cantor(9), cantor(10)),
        ("segment_in_plane", segment(8), segment(9)),
    ]
}

fn criterion_8() -> Outcome {
    let mut parts = Vec::new();
    for (name, a, b) in family() {
        for weighted in [false, true] {
            let ratio = |i: &Instance| -> Result<f64, String> {
                let w = weighted.then(|| i.weight());
                let r = verify_norm_inequality(&i.mu, &i.samples, 2.0, w.as_ref()).map_err(|e| e.to_string())?;
                ensure!(r.layer_cake_rel_gap <= 1e-10, "{name}: layer-cake gap {}", r.layer_cake_rel_gap);
                r.ratio.ok_or(format!("{name}: no ratio"))
            };
            let (x, y) = (ratio(&a)?, ratio(&b)?);
            ensure!(x.is_finite() && y.is_finite(), "{name}: A_emp {x}, {y}");
            ensure!(rel(x, y) < 0.2, "{name} (weighted {weighted}): {x} -> {y}");
            parts.push(format!("{name}{} {x:.3}->{y:.3}", if weighted { " weighted" } else { "" }));
        }
    }
    Ok(parts.join("; "))
}

fn criterion_9() -> Outcome {
    let mut parts = Vec::new();
    for (name, a, b) in family() {
        for i in [&a, &b] {
            let r = verify_weak_type(&i.mu, &i.f, &i.samples, &i.params, 1.0, ExponentSource::Growth).map_err(|e| e.to_string())?;
            let expect_q = 1.0 / (1.0 - i.params.alpha / i.params.growth_exp);
            ensure!(rel(r.q, expect_q) <= 1e-15, "{name}: q = {}", r.q);
            let c = r.constant.ok_or(format!("{name}: zero ‖f‖"))?;
            ensure!(c.is_finite(), "{name}: C_emp = {c}");
            if std::ptr::eq(i, &a) {
                parts.push(format!("{name} C_emp {c:.3} (q={:.3})", r.q));
            }
        }
    }
    Ok(parts.join("; "))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 100_000;
    let coords: Vec<f64> = (0..2 * n).map(|_| rng.gen()).collect();
    let mu = PointMassMeasure::from_flat(2, coords, vec![1.0 / n as f64; n]).unwrap();
    let f = SampledFunction::constant(mu.len(), 1.0);
    let params = OperatorParams::new(2, 2.0, 1.0).unwrap();
    let opts = PotentialOptions {
        tree_theta: 0.3,
        ..Default::default()
    };
    let queries: Vec<Vec<f64>> = (0..10_000).map(|_| vec![rng.gen(), rng.gen()]).collect();
    let direct = |qs: &[Vec<f64>]| -> Vec<f64> {
        qs.par_iter()
            .map(|x| riesz_potential_direct(&mu, &f, &params, x, &opts).unwrap())
            .collect()
    };

    let t = Instant::now();
    let exact = direct(&queries);
    let t_direct = t.elapsed();
    let t = Instant::now();
    let approx = riesz_potential_tree(&mu, &f, &params, &queries, &opts).map_err(|e| e.to_string())?;
    let t_tree = t.elapsed();

    let worst = exact[..100]
        .iter()
        .zip(&approx[..100])
        .map(|(a, b)| rel(*a, *b))
        .fold(0.0, f64::max);
    let all = exact.iter().zip(&approx).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
    let speedup = t_direct.as_secs_f64() / t_tree.as_secs_f64();
    ensure!(worst <= 1e-3, "max relative error {worst:.2e} over 100 queries");
    ensure!(speedup >= 5.0, "speedup {speedup:.1}x ({t_direct:?} vs {t_tree:?})");
    Ok(format!(
        "max rel error {worst:.2e} (100 queries), {all:.2e} (10^4 queries), direct {t_direct:.2?}, tree {t_tree:.2?}, speedup {speedup:.0}x"
    ))
}

fn run_cli(args: &[&str], dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_goodlambda"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = dir.path();
    run_cli(&["gen", "--kind", "lebesgue_grid", "--h", "0.0009765625", "--box", "0,1", "--f", "indicator:0,0.5", "-o", "grid.txt"], dir)?;
    run_cli(&["gen", "--kind", "segment_in_plane", "--h", "0.00390625", "--f", "indicator:-1,0.5", "-o", "seg.txt"], dir)?;
    run_cli(&["gen", "--kind", "random_atoms", "--count", "3000", "--box", "0,1,0,1", "--seed", "11", "-o", "rand.txt"], dir)?;
    let grid = ["--measure", "grid.txt", "--alpha", "0.5", "--N", "1"];
    let with = |extra: &[&'static str], base: &[&'static str]| -> Vec<&'static str> { extra.iter().chain(base).copied().collect() };
    let runs: Vec<Vec<&str>> = vec![
        vec!["gen", "--kind", "random_atoms", "--count", "500", "--box", "0,1,0,1", "--seed", "3", "--mass-max", "2"],
        vec!["gen", "--kind", "cantor_like", "--levels", "12", "--left-share", "0.8"],
        with(&["potential", "--method", "tree", "--theta", "0.3"], &["--measure", "rand.txt", "--alpha", "1"]),
        with(&["potential", "--format", "csv"], &["--measure", "rand.txt", "--alpha", "1"]),
        with(&["maximal"], &["--measure", "seg.txt", "--alpha", "0.5", "--N", "1"]),
        with(&["goodlambda", "--mode", "conditional", "--k", "2"], &grid),
        with(&["goodlambda", "--mode", "two_term", "--format", "csv"], &grid),
        with(&["goodlambda", "--mode", "weighted", "--w", "one_plus_norm"], &grid),
        with(&["normineq", "--p", "2", "--w", "one_plus_norm"], &grid),
        with(&["weaktype", "--p", "1"], &grid),
        vec!["whitney", "--balls", "0.2,0.3,0.25;0.6,0.5,0.3;0.9,0.1,0.2", "--floor", "0.004", "--samples", "500"],
        vec!["whitney", "--measure", "seg.txt", "--alpha", "0.5", "--N", "1", "--lambda", "3", "--floor", "0.02"],
        vec!["doubling", "--measure", "seg.txt", "--search", "scan"],
        vec!["doubling", "--measure", "seg.txt", "--search", "small", "--center", "1,0", "--side", "1"],
        vec!["weights", "--measure", "grid.txt", "--w", "one_plus_norm", "--stride", "4"],
    ];
    let mut total_bytes = 0;
    for args in &runs {
        let one = run_cli(&[&["--threads", "1"], &args[..]].concat(), dir)?;
        let eight = run_cli(&[&["--threads", "8"], &args[..]].concat(), dir)?;
        ensure!(!one.is_empty(), "{args:?}: empty report");
        ensure!(one == eight, "{args:?}: reports differ between 1 and 8 threads");
        total_bytes += one.len();
    }
    // file outputs and the embedded-config replay
    run_cli(&["--threads", "1", "goodlambda", "--measure", "grid.txt", "--alpha", "0.5", "--N", "1", "-o", "a.json"], dir)?;
    run_cli(&["--threads", "8", "goodlambda", "--measure", "grid.txt", "--alpha", "0.5", "--N", "1", "-o", "b.json"], dir)?;
    let (a, b) = (std::fs::read(dir.join("a.json")), std::fs::read(dir.join("b.json")));
    ensure!(a.map_err(|e| e.to_string())? == b.map_err(|e| e.to_string())?, "written reports differ");
    run_cli(&["--threads", "3", "report", "--input", "a.json"], dir)?;
    Ok(format!("{} reports byte-identical at 1 and 8 threads ({total_bytes} bytes), replay reproduces", runs.len() + 1))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "oracle equivalence", criterion_1),
        (2, "layer-cake identity", criterion_2),
        (3, "Whitney properties", criterion_3),
        (4, "doubling-cube search", criterion_4),
        (5, "Besicovitch selection", criterion_5),
        (6, "conditional good-lambda", criterion_6),
        (7, "two-term and weighted good-lambda", criterion_7),
        (8, "norm inequality", criterion_8),
        (9, "weak type", criterion_9),
        (10, "tree kernel", criterion_10),
        (11, "determinism", criterion_11),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} [{secs:.1}s]: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
