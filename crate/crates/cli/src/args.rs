use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use goodlambda::generators::DEFAULT_MAX_NODES;
use goodlambda::covering::DEFAULT_NODE_CAP;
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "goodlambda", version, about = "Riesz potentials, coverings and good-λ scans on point-mass measures")]
pub struct Cli {
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report destination; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Generate a measure file.
    Gen(GenArgs),
    /// I_α f, M_α f and M f at query points.
    Potential(PotentialArgs),
    /// M_α f and M f at query points.
    Maximal(MaximalArgs),
    /// Whitney decomposition of a ball union or a superlevel set.
    Whitney(WhitneyArgs),
    /// Doubling-cube searches and growth/doubling scans.
    Doubling(DoublingArgs),
    /// Good-λ scan over a (λ, ε) grid.
    Goodlambda(GoodLambdaArgs),
    /// Compare ‖I_α f‖_p with ‖M_α f‖_p.
    Normineq(NormArgs),
    /// Weak-type constant of I_α.
    Weaktype(WeakTypeArgs),
    /// A_p constant and A∞ envelope of a weight.
    Weights(WeightsArgs),
    /// Re-run a JSON report from its embedded config and compare.
    Report(ReportArgs),
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct InputArgs {
    /// Measure file.
    #[arg(long)]
    pub measure: PathBuf,
    /// `file` (the file's f column, else 1), `ones`, `const:V` or
    /// `indicator:LO,HI` on the first coordinate.
    #[arg(long, default_value = "file")]
    pub f: String,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct OperatorArgs {
    #[arg(long)]
    pub alpha: f64,
    /// Growth exponent N; the ambient dimension when absent.
    #[arg(long = "N", alias = "growth-exp")]
    pub n: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum MethodArg {
    Direct,
    Tree,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 0.3)]
    pub theta: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tree_tol: f64,
    #[arg(long, default_value_t = 16)]
    pub leaf_size: usize,
    /// Keep the singular self term when evaluating at atoms.
    #[arg(long)]
    pub include_diagonal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum GenKind {
    LebesgueGrid,
    PowerDensity,
    SegmentInPlane,
    CantorLike,
    RandomAtoms,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Grid spacing.
    #[arg(long)]
    pub h: Option<f64>,
    /// Box as `lo,hi` per axis, e.g. `0,1,0,1`.
    #[arg(long = "box", default_value = "0,1")]
    pub bbox: String,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub length: f64,
    #[arg(long, default_value = "-1,2,-1,1")]
    pub plane_box: String,
    #[arg(long, default_value_t = 0.5)]
    pub plane_mass: f64,
    #[arg(long)]
    pub plane_spacing: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub levels: u32,
    #[arg(long, default_value = "0.3333333333333333")]
    pub ratio: f64,
    #[arg(long, default_value_t = 0.5)]
    pub left_share: f64,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Atom mass, or the lower end of a uniform range with `--mass-max`.
    #[arg(long, default_value_t = 1.0)]
    pub mass_min: f64,
    #[arg(long)]
    pub mass_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    pub max_nodes: usize,
    /// Append an f column (same syntax as `--f` elsewhere, minus `file`).
    #[arg(long)]
    pub f: Option<String>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct PotentialArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Query-point file; the atoms when absent.
    #[arg(long)]
    pub queries: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct MaximalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[arg(long)]
    pub queries: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct WhitneyArgs {
    /// Open set as a union of balls `c1[,c2],r;...`.
    #[arg(long)]
    pub balls: Option<String>,
    /// Open set `{I_α f > λ}` of this measure instead.
    #[arg(long, conflicts_with = "balls")]
    pub measure: Option<PathBuf>,
    #[arg(long, default_value = "file")]
    pub f: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "N")]
    pub n: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Smallest cube side examined.
    #[arg(long, default_value_t = 1.0 / 1024.0)]
    pub floor: f64,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    pub node_cap: usize,
    /// Random points of the set used for the overlap check.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum DoublingSearch {
    /// Growth and doubling constants over a window of scales.
    Scan,
    /// First doubling cube among concentric halvings.
    Small,
    /// First doubling cube among concentric doublings.
    Big,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct DoublingArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, value_enum, default_value_t = DoublingSearch::Scan)]
    pub search: DoublingSearch,
    /// Cube center `x[,y,...]`; the bounding-box center when absent.
    #[arg(long)]
    pub center: Option<String>,
    /// Initial side (small) or minimal side (big).
    #[arg(long)]
    pub side: Option<f64>,
    /// Doubling threshold; 2^(n+1/2) when absent.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 60)]
    pub max_halvings: u32,
    #[arg(long, default_value_t = 2.0)]
    pub dilation: f64,
    /// Growth exponent for the scan; the ambient dimension when absent.
    #[arg(long = "N")]
    pub n: Option<f64>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, default_value_t = 16)]
    pub num_samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    Conditional,
    TwoTerm,
    Weighted,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct GoodLambdaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Conditional)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    #[arg(long, default_value_t = 64)]
    pub lambda_count: usize,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Comma-separated ε values; 2^-j for j = 0..8 when absent.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long, default_value = "0.5,0.1")]
    pub etas: String,
    /// Use M_α f < ελ in the conditional set.
    #[arg(long)]
    pub strict_maximal: bool,
    /// Weight for the weighted mode: `file`, `ones`, `one_plus_norm` or `power:G`.
    #[arg(long, default_value = "file")]
    pub w: String,
    /// Also write the rows as CSV to this path.
    #[arg(long)]
    #[serde(skip)]
    pub csv_output: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct NormArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Weight (`file`, `ones`, `one_plus_norm`, `power:G`); unweighted when absent.
    #[arg(long)]
    pub w: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SourceArg {
    Growth,
    Ambient,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct WeakTypeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t = SourceArg::Growth)]
    pub exponent_source: SourceArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SamplerArg {
    Exhaustive,
    Random,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct WeightsArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, default_value = "file")]
    pub w: String,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 8)]
    pub num_scales: usize,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    #[arg(long, default_value_t = 1.0)]
    pub dilation: f64,
    #[arg(long, value_enum, default_value_t = SamplerArg::Exhaustive)]
    pub sampler: SamplerArg,
    /// Exhaustive subsets for cubes with at most this many atoms.
    #[arg(long, default_value_t = 10)]
    pub max_atoms: usize,
    #[arg(long, default_value_t = 32)]
    pub samples_per_cube: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ReportArgs {
    /// JSON report to reproduce.
    #[arg(long)]
    pub input: PathBuf,
}
