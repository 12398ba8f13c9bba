use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use goodlambda::covering::{
    find_big_doubling_cube, find_small_doubling_cube, verify_whitney, whitney_decompose_capped, BallUnion,
    DoublingSearchConfig, OpenSetOracle, SuperlevelOracle,
};
use goodlambda::generators::{GeneratorSpec, MassDistribution};
use goodlambda::harness::{
    run_scan, sample_operators, verify_norm_inequality, verify_weak_type, ExponentSource, GoodLambdaScanConfig,
    LambdaGrid, ScanMode,
};
use goodlambda::measure::io::{parse_measure, parse_queries, write_measure, MeasureFile};
use goodlambda::measure::{
    doubling_constant_scan, growth_constant_scan, CenterPolicy, Cube, OperatorParams, PointMassMeasure,
    SampledFunction, ScaleRange,
};
use goodlambda::potential::{evaluate_operators, fractional_maximal, hl_maximal, Method, PotentialOptions};
use goodlambda::weights::{ainfty_fit, ap_constant, CubeFamily, SubsetSampler};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::Failure;

const LAYER_CAKE_TOL: f64 = 1e-10;

/// What a subcommand produced.
#[derive(Default)]
pub struct Outcome {
    pub result: Value,
    pub csv: String,
    /// Output written verbatim regardless of `--format`.
    pub raw: Option<String>,
    pub extra_files: Vec<(PathBuf, String)>,
    pub violation: Option<String>,
}

pub fn render(cmd: &Command, out: &Outcome, format: Format) -> Result<String, Failure> {
    if let Some(raw) = &out.raw {
        return Ok(raw.clone());
    }
    Ok(match format {
        Format::Json => {
            let doc = json!({
                "tool": "goodlambda",
                "version": env!("CARGO_PKG_VERSION"),
                "config": cmd,
                "result": out.result,
            });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Input(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => out.csv.clone(),
    })
}

pub fn execute(cmd: &Command) -> Result<Outcome, Failure> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Potential(a) => potential(a),
        Command::Maximal(a) => maximal(a),
        Command::Whitney(a) => whitney(a),
        Command::Doubling(a) => doubling(a),
        Command::Goodlambda(a) => good_lambda(a),
        Command::Normineq(a) => norm_inequality(a),
        Command::Weaktype(a) => weak_type(a),
        Command::Weights(a) => weights(a),
        Command::Report(a) => report(a),
    }
}

fn input_err(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn with_path(path: &Path) -> impl Fn(goodlambda::Error) -> Failure + '_ {
    move |e| input_err(format!("{}: {e}", path.display()))
}

fn load_measure(path: &Path) -> Result<MeasureFile, Failure> {
    parse_measure(&read_text(path)?).map_err(with_path(path))
}

fn parse_list(text: &str, name: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| input_err(format!("--{name}: not a number: {t:?}")))
        })
        .collect()
}

/// `file`, `ones`, `const:V` or `indicator:LO,HI`.
fn function_from(spec: &str, mu: &PointMassMeasure, column: Option<&SampledFunction>) -> Result<SampledFunction, Failure> {
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match head {
        "file" => Ok(column.cloned().unwrap_or_else(|| SampledFunction::constant(mu.len(), 1.0))),
        "ones" => Ok(SampledFunction::constant(mu.len(), 1.0)),
        "const" => {
            let v = parse_list(rest, "f")?;
            match v[..] {
                [c] => Ok(SampledFunction::new(vec![c; mu.len()])?),
                _ => Err(input_err("--f const:V takes one value")),
            }
        }
        "indicator" => match parse_list(rest, "f")?[..] {
            [lo, hi] => Ok(SampledFunction::from_fn(mu, |x| if lo <= x[0] && x[0] <= hi { 1.0 } else { 0.0 })?),
            _ => Err(input_err("--f indicator:LO,HI takes two values")),
        },
        _ => Err(input_err(format!("unknown function {spec:?}"))),
    }
}

/// `file`, `ones`, `one_plus_norm` or `power:G`.
fn weight_from(spec: &str, mu: &PointMassMeasure, column: Option<&SampledFunction>) -> Result<SampledFunction, Failure> {
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match head {
        "file" => column
            .cloned()
            .ok_or_else(|| input_err("measure file has no w column; pass --w explicitly")),
        "ones" => Ok(SampledFunction::constant(mu.len(), 1.0)),
        "one_plus_norm" => Ok(SampledFunction::from_fn(mu, |x| 1.0 + norm(x))?),
        "power" => match parse_list(rest, "w")?[..] {
            [g] => Ok(SampledFunction::from_fn(mu, |x| norm(x).powf(g))?),
            _ => Err(input_err("--w power:G takes one value")),
        },
        _ => Err(input_err(format!("unknown weight {spec:?}"))),
    }
}

struct Loaded {
    file: MeasureFile,
    f: SampledFunction,
}

impl Loaded {
    fn mu(&self) -> &PointMassMeasure {
        &self.file.measure
    }
}

fn load(input: &InputArgs) -> Result<Loaded, Failure> {
    let file = load_measure(&input.measure)?;
    let f = function_from(&input.f, &file.measure, file.f.as_ref())?;
    Ok(Loaded { file, f })
}

fn params(op: &OperatorArgs, dim: usize) -> Result<OperatorParams, Failure> {
    Ok(OperatorParams::new(dim, op.n.unwrap_or(dim as f64), op.alpha)?)
}

fn options(k: &KernelArgs) -> Result<PotentialOptions, Failure> {
    let opts = PotentialOptions {
        exclude_diagonal: !k.include_diagonal,
        method: match k.method {
            MethodArg::Direct => Method::Direct,
            MethodArg::Tree => Method::Tree,
        },
        tree_theta: k.theta,
        tree_tol: k.tree_tol,
        leaf_size: k.leaf_size,
    };
    opts.validate()?;
    Ok(opts)
}

fn queries_for(path: Option<&Path>, mu: &PointMassMeasure) -> Result<Vec<Vec<f64>>, Failure> {
    match path {
        None => Ok(mu.points().map(<[f64]>::to_vec).collect()),
        Some(p) => {
            let (dim, q) = parse_queries(&read_text(p)?).map_err(with_path(p))?;
            if dim != mu.dim() {
                return Err(input_err(format!(
                    "{}: query dimension {dim} does not match measure dimension {}",
                    p.display(),
                    mu.dim()
                )));
            }
            Ok(q)
        }
    }
}

fn csv_table(dim: usize, queries: &[Vec<f64>], columns: &[(&str, &[f64])]) -> String {
    let mut out = String::new();
    let names: Vec<String> = (1..=dim).map(|k| format!("x{k}")).chain(columns.iter().map(|c| c.0.to_string())).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for (i, q) in queries.iter().enumerate() {
        let cells: Vec<String> = q.iter().chain(columns.iter().map(|c| &c.1[i])).map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn key_value_csv(pairs: &[(&str, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in pairs {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn parse_box(text: &str, name: &str) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let v = parse_list(text, name)?;
    if v.is_empty() || v.len() % 2 != 0 {
        return Err(input_err(format!("--{name} needs lo,hi pairs, got {} values", v.len())));
    }
    Ok((v.iter().step_by(2).copied().collect(), v.iter().skip(1).step_by(2).copied().collect()))
}

fn gen(a: &GenArgs) -> Result<Outcome, Failure> {
    let need_h = || a.h.ok_or_else(|| input_err("--h is required for this kind"));
    let spec = match a.kind {
        GenKind::LebesgueGrid => {
            let (lo, hi) = parse_box(&a.bbox, "box")?;
            GeneratorSpec::LebesgueGrid {
                lo,
                hi,
                h: need_h()?,
                max_nodes: a.max_nodes,
            }
        }
        GenKind::PowerDensity => {
            let (lo, hi) = parse_box(&a.bbox, "box")?;
            GeneratorSpec::PowerDensity {
                lo,
                hi,
                h: need_h()?,
                gamma: a.gamma,
                max_nodes: a.max_nodes,
            }
        }
        GenKind::SegmentInPlane => {
            let (lo, hi) = parse_box(&a.plane_box, "plane-box")?;
            if lo.len() != 2 {
                return Err(input_err("--plane-box needs x0,x1,y0,y1"));
            }
            GeneratorSpec::SegmentInPlane {
                length: a.length,
                h: need_h()?,
                plane_lo: [lo[0], lo[1]],
                plane_hi: [hi[0], hi[1]],
                plane_mass: a.plane_mass,
                plane_spacing: a.plane_spacing,
                max_nodes: a.max_nodes,
            }
        }
        GenKind::CantorLike => GeneratorSpec::CantorLike {
            levels: a.levels,
            ratio: a.ratio,
            left_share: a.left_share,
        },
        GenKind::RandomAtoms => {
            let (lo, hi) = parse_box(&a.bbox, "box")?;
            GeneratorSpec::RandomAtoms {
                count: a.count,
                lo,
                hi,
                masses: match a.mass_max {
                    Some(max) => MassDistribution::Uniform { min: a.mass_min, max },
                    None => MassDistribution::Constant { value: a.mass_min },
                },
                seed: a.seed,
            }
        }
    };
    let mu = spec.build()?;
    let f = match &a.f {
        Some(s) if s.starts_with("file") => return Err(input_err("gen --f cannot read from a file")),
        Some(s) => Some(function_from(s, &mu, None)?),
        None => None,
    };
    let spec_json = serde_json::to_string(&spec).map_err(|e| input_err(e.to_string()))?;
    let mut text = format!("# goodlambda gen {}\n# spec {spec_json}\n", env!("CARGO_PKG_VERSION"));
    text.push_str(&write_measure(&mu, f.as_ref(), None)?);
    Ok(Outcome {
        result: json!({ "atoms": mu.len(), "total_mass": mu.total_mass() }),
        raw: Some(text),
        ..Default::default()
    })
}

fn potential(a: &PotentialArgs) -> Result<Outcome, Failure> {
    let l = load(&a.input)?;
    let mu = l.mu();
    let p = params(&a.operator, mu.dim())?;
    let opts = options(&a.kernel)?;
    let queries = queries_for(a.queries.as_deref(), mu)?;
    let v = evaluate_operators(mu, &l.f, &p, &queries, &opts)?;
    let csv = csv_table(
        mu.dim(),
        &queries,
        &[
            ("riesz", &v.riesz),
            ("fractional_maximal", &v.fractional_maximal),
            ("hl_maximal", &v.hl_maximal),
        ],
    );
    Ok(Outcome {
        result: json!({ "params": p, "options": opts, "queries": queries, "values": v }),
        csv,
        ..Default::default()
    })
}

fn maximal(a: &MaximalArgs) -> Result<Outcome, Failure> {
    let l = load(&a.input)?;
    let mu = l.mu();
    let p = params(&a.operator, mu.dim())?;
    let queries = queries_for(a.queries.as_deref(), mu)?;
    let pairs = queries
        .par_iter()
        .map(|x| Ok((fractional_maximal(mu, &l.f, &p, x)?, hl_maximal(mu, &l.f, x)?)))
        .collect::<goodlambda::Result<Vec<(f64, f64)>>>()?;
    let (frac, hl): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let csv = csv_table(mu.dim(), &queries, &[("fractional_maximal", &frac), ("hl_maximal", &hl)]);
    Ok(Outcome {
        result: json!({ "params": p, "queries": queries, "fractional_maximal": frac, "hl_maximal": hl }),
        csv,
        ..Default::default()
    })
}

fn parse_balls(text: &str) -> Result<(usize, Vec<Vec<f64>>, Vec<f64>), Failure> {
    let mut dim = None;
    let (mut centers, mut radii) = (Vec::new(), Vec::new());
    for part in text.split(';').filter(|s| !s.trim().is_empty()) {
        let v = parse_list(part, "balls")?;
        if v.len() < 2 {
            return Err(input_err(format!("--balls entry {part:?} needs a center and a radius")));
        }
        let d = v.len() - 1;
        if *dim.get_or_insert(d) != d {
            return Err(input_err("--balls entries have different dimensions"));
        }
        centers.push(v[..d].to_vec());
        radii.push(v[d]);
    }
    let dim = dim.ok_or_else(|| input_err("--balls is empty"))?;
    Ok((dim, centers, radii))
}

fn whitney(a: &WhitneyArgs) -> Result<Outcome, Failure> {
    let run = |oracle: &dyn OpenSetOracle, mu: Option<&PointMassMeasure>| -> Result<Outcome, Failure> {
        let d = whitney_decompose_capped(oracle, a.node_cap)?;
        let atoms: Vec<Vec<f64>> = mu.map(|m| m.points().map(<[f64]>::to_vec).collect()).unwrap_or_default();
        let check = verify_whitney(&d, oracle, &atoms, a.samples, a.seed);
        let uncovered_mass = mu.map(|m| d.uncovered_mass_bound(m));
        let violation = (!check.passed).then(|| format!("Whitney check failed: {check:?}"));
        Ok(Outcome {
            result: json!({ "check": check, "uncovered_mass_bound": uncovered_mass, "decomposition": d }),
            csv: d.to_csv(),
            violation,
            ..Default::default()
        })
    };
    match (&a.balls, &a.measure) {
        (Some(b), None) => {
            let (dim, centers, radii) = parse_balls(b)?;
            let oracle = BallUnion::new(dim, centers, radii, a.floor)?;
            run(&oracle, None)
        }
        (None, Some(path)) => {
            let file = load_measure(path)?;
            let mu = &file.measure;
            let f = function_from(&a.f, mu, file.f.as_ref())?;
            let alpha = a.alpha.ok_or_else(|| input_err("--alpha is required with --measure"))?;
            let lambda = a.lambda.ok_or_else(|| input_err("--lambda is required with --measure"))?;
            let p = OperatorParams::new(mu.dim(), a.n.unwrap_or(mu.dim() as f64), alpha)?;
            let oracle = SuperlevelOracle::new(mu, &f, p, lambda, a.floor)?;
            run(&oracle, Some(mu))
        }
        _ => Err(input_err("give exactly one of --balls or --measure")),
    }
}

fn doubling(a: &DoublingArgs) -> Result<Outcome, Failure> {
    let file = load_measure(&a.measure)?;
    let mu = &file.measure;
    let n = mu.dim();
    let (lo, hi) = mu.bounding_box();
    let center = match &a.center {
        Some(c) => parse_list(c, "center")?,
        None => lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect(),
    };
    if center.len() != n {
        return Err(input_err(format!("--center has {} coordinates, measure has dimension {n}", center.len())));
    }
    let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let cfg = DoublingSearchConfig {
        beta: a.beta.unwrap_or_else(|| DoublingSearchConfig::for_dim(n).beta),
        max_halvings: a.max_halvings,
        dilation_factor: a.dilation,
    };
    match a.search {
        DoublingSearch::Scan => {
            let mut scales = ScaleRange::for_measure(mu, a.num_samples)?;
            if a.r_min.is_some() || a.r_max.is_some() {
                scales = ScaleRange::new(a.r_min.unwrap_or(scales.r_min), a.r_max.unwrap_or(scales.r_max), a.num_samples)?;
            }
            let growth_exp = a.n.unwrap_or(n as f64);
            let g = growth_constant_scan(mu, growth_exp, &scales, &CenterPolicy::AtomsOnly)?;
            let d = doubling_constant_scan(mu, &scales, &CenterPolicy::AtomsOnly)?;
            let mut csv = String::from("radius,growth_ratio,doubling_ratio\n");
            for (x, y) in g.profile.iter().zip(&d.profile) {
                let _ = writeln!(csv, "{:?},{:?},{:?}", x.radius, x.max_ratio, y.max_ratio);
            }
            Ok(Outcome {
                result: json!({ "growth": g, "doubling": d }),
                csv,
                ..Default::default()
            })
        }
        DoublingSearch::Small => {
            let side = a.side.unwrap_or(if extent > 0.0 { 2.0 * extent } else { 1.0 });
            let q0 = Cube::centered(&center, side);
            let r = find_small_doubling_cube(mu, &q0, &cfg)?;
            let certified = r.certify_minimal(cfg.beta);
            let mut csv = String::from("halvings,side,mass,dilated_mass\n");
            for s in &r.history {
                let _ = writeln!(csv, "{},{:?},{:?},{:?}", s.halvings, s.side, s.mass, s.dilated_mass);
            }
            Ok(Outcome {
                result: json!({ "config": cfg, "start": q0, "cube": r, "minimality_certified": certified }),
                csv,
                violation: (!certified).then(|| "doubling cube is not the first in its sequence".to_string()),
                ..Default::default()
            })
        }
        DoublingSearch::Big => {
            let side = a.side.unwrap_or_else(|| mu.min_separation().unwrap_or(1.0));
            let r = find_big_doubling_cube(mu, &center, side, &cfg)?;
            let csv = key_value_csv(&[
                ("doublings", r.doublings.to_string()),
                ("side", format!("{:?}", r.cube.side())),
                ("ratio", format!("{:?}", r.ratio)),
            ]);
            Ok(Outcome {
                result: json!({ "config": cfg, "cube": r }),
                csv,
                ..Default::default()
            })
        }
    }
}

fn good_lambda(a: &GoodLambdaArgs) -> Result<Outcome, Failure> {
    let l = load(&a.input)?;
    let mu = l.mu();
    let p = params(&a.operator, mu.dim())?;
    let opts = options(&a.kernel)?;
    let mode = match a.mode {
        ModeArg::Conditional => ScanMode::Conditional,
        ModeArg::TwoTerm => ScanMode::TwoTerm,
        ModeArg::Weighted => ScanMode::Weighted,
    };
    let defaults = GoodLambdaScanConfig::default();
    let cfg = GoodLambdaScanConfig {
        k: a.k,
        lambda_grid: LambdaGrid {
            count: a.lambda_count,
            min: a.lambda_min,
            max: a.lambda_max,
        },
        eps_grid: match &a.eps {
            Some(e) => parse_list(e, "eps")?,
            None => defaults.eps_grid,
        },
        mode,
        strict_maximal: a.strict_maximal,
        etas: parse_list(&a.etas, "etas")?,
    };
    let w = match mode {
        ScanMode::Weighted => Some(weight_from(&a.w, mu, l.file.w.as_ref())?),
        _ => None,
    };
    let samples = sample_operators(mu, &l.f, &p, &opts)?;
    let r = run_scan(mu, &samples, &p, w.as_ref(), &cfg)?;
    let mut violation = (r.violation_rows > 0).then(|| format!("{} rows exceed the bound with µ(E_λ) = 0", r.violation_rows));
    if mode == ScanMode::Conditional && r.rows.iter().any(|row| row.lhs > row.mu_e_lambda) {
        violation = Some("a conditional set is larger than its superlevel set".into());
    }
    let csv = r.to_csv();
    let extra_files = a.csv_output.iter().map(|path| (path.clone(), csv.clone())).collect();
    Ok(Outcome {
        result: json!({ "params": p, "options": opts, "scan": cfg, "report": r }),
        csv,
        extra_files,
        violation,
        ..Default::default()
    })
}

fn norm_inequality(a: &NormArgs) -> Result<Outcome, Failure> {
    let l = load(&a.input)?;
    let mu = l.mu();
    let p = params(&a.operator, mu.dim())?;
    let opts = options(&a.kernel)?;
    let w = a.w.as_deref().map(|s| weight_from(s, mu, l.file.w.as_ref())).transpose()?;
    let samples = sample_operators(mu, &l.f, &p, &opts)?;
    let r = verify_norm_inequality(mu, &samples, a.p, w.as_ref())?;
    let violation = if r.infinite_ratio {
        Some("‖M_α f‖ vanishes while ‖I_α f‖ does not".to_string())
    } else if r.layer_cake_rel_gap > LAYER_CAKE_TOL {
        Some(format!("layer-cake gap {} exceeds {LAYER_CAKE_TOL}", r.layer_cake_rel_gap))
    } else {
        None
    };
    let csv = key_value_csv(&[
        ("p", format!("{:?}", r.p)),
        ("weighted", r.weighted.to_string()),
        ("riesz_norm", format!("{:?}", r.riesz_norm)),
        ("maximal_norm", format!("{:?}", r.maximal_norm)),
        ("ratio", opt_num(r.ratio)),
        ("layer_cake_rel_gap", format!("{:?}", r.layer_cake_rel_gap)),
    ]);
    Ok(Outcome {
        result: json!({ "params": p, "options": opts, "report": r }),
        csv,
        violation,
        ..Default::default()
    })
}

fn weak_type(a: &WeakTypeArgs) -> Result<Outcome, Failure> {
    let l = load(&a.input)?;
    let mu = l.mu();
    let p = params(&a.operator, mu.dim())?;
    let opts = options(&a.kernel)?;
    let source = match a.exponent_source {
        SourceArg::Growth => ExponentSource::Growth,
        SourceArg::Ambient => ExponentSource::Ambient,
    };
    let samples = sample_operators(mu, &l.f, &p, &opts)?;
    let r = verify_weak_type(mu, &l.f, &samples, &p, a.p, source)?;
    let csv = key_value_csv(&[
        ("p", format!("{:?}", r.p)),
        ("q", format!("{:?}", r.q)),
        ("quasinorm", format!("{:?}", r.quasinorm)),
        ("f_norm", format!("{:?}", r.f_norm)),
        ("constant", opt_num(r.constant)),
    ]);
    Ok(Outcome {
        result: json!({ "params": p, "options": opts, "report": r }),
        csv,
        ..Default::default()
    })
}

fn weights(a: &WeightsArgs) -> Result<Outcome, Failure> {
    let file = load_measure(&a.measure)?;
    let mu = &file.measure;
    let w = weight_from(&a.w, mu, file.w.as_ref())?;
    let family = CubeFamily::centered_at_atoms(mu, &ScaleRange::for_measure(mu, a.num_scales)?, a.stride)?;
    let ap = ap_constant(mu, &w, a.p, &family, a.dilation)?;
    let sampler = match a.sampler {
        SamplerArg::Exhaustive => SubsetSampler::ExhaustiveUpTo { max_atoms: a.max_atoms },
        SamplerArg::Random => SubsetSampler::Random,
    };
    let fit = ainfty_fit(mu, &w, &family, sampler, a.samples_per_cube, a.seed)?;
    let violation = (ap.value < 1.0 - 1e-12).then(|| format!("A_p constant {} below 1", ap.value));
    let csv = key_value_csv(&[
        ("p", format!("{:?}", ap.p)),
        ("ap_constant", format!("{:?}", ap.value)),
        ("cubes_scanned", ap.cubes_scanned.to_string()),
        ("ainfty_c0", format!("{:?}", fit.c0)),
        ("ainfty_delta", format!("{:?}", fit.delta)),
        ("ainfty_samples", fit.samples.len().to_string()),
    ]);
    Ok(Outcome {
        result: json!({ "ap": ap, "ainfty": fit }),
        csv,
        violation,
        ..Default::default()
    })
}

fn report(a: &ReportArgs) -> Result<Outcome, Failure> {
    let text = read_text(&a.input)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| input_err(format!("{}: {e}", a.input.display())))?;
    let config = doc
        .get("config")
        .ok_or_else(|| input_err(format!("{}: no embedded config", a.input.display())))?;
    let cmd: Command =
        serde_json::from_value(config.clone()).map_err(|e| input_err(format!("{}: bad config: {e}", a.input.display())))?;
    if matches!(cmd, Command::Report(_) | Command::Gen(_)) {
        return Err(input_err("only analysis reports can be reproduced"));
    }
    let rerun = execute(&cmd)?;
    let reproduced = render(&cmd, &rerun, Format::Json)? == text;
    let name = config.get("command").cloned().unwrap_or(Value::Null);
    Ok(Outcome {
        result: json!({ "input": a.input, "command": name, "reproduced": reproduced }),
        csv: key_value_csv(&[("reproduced", reproduced.to_string())]),
        violation: (!reproduced).then(|| format!("{} does not reproduce", a.input.display())),
        ..Default::default()
    })
}
