use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cww::wavelet::{parse_wavelet_name, Boundary, Family, WaveletSpec};

use crate::usage;

#[derive(Debug, Parser)]
#[command(
    name = "cww",
    version,
    about = "Fast Walsh-to-wavelet change of basis and reconstruction"
)]
pub struct Cli {
    /// Worker threads for the two-dimensional operators (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Omit the timestamp comment line at the top of CSV output.
    #[arg(long, global = true)]
    pub no_header: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute and cache kernel tables.
    Precompute(PrecomputeArgs),
    /// Apply the operator or its adjoint to a vector or matrix.
    Apply(ApplyArgs),
    /// Subspace-angle table for a set of wavelets.
    Table1(Table1Args),
    /// Reconstruct a function from its Walsh samples.
    Reconstruct(ReconstructArgs),
    /// Time forward and adjoint applications across sizes.
    Bench(BenchArgs),
    /// List the built-in test functions.
    Functions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Periodic,
    Vmp,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Periodic => Boundary::Periodic,
            BoundaryArg::Vmp => Boundary::Vmp,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct WaveletArgs {
    /// Wavelet such as `db4` or `sym5`, or a bare family (`db`, `sym`) with --nu.
    #[arg(long, default_value = "db4")]
    pub wavelet: String,

    /// Vanishing moments; overrides the order given in --wavelet.
    #[arg(long)]
    pub nu: Option<usize>,

    #[arg(long, value_enum, default_value = "vmp")]
    pub boundary: BoundaryArg,
}

impl WaveletArgs {
    pub fn spec(&self) -> anyhow::Result<WaveletSpec> {
        resolve_spec(&self.wavelet, self.nu, self.boundary.into())
    }
}

pub fn resolve_spec(
    name: &str,
    nu: Option<usize>,
    boundary: Boundary,
) -> anyhow::Result<WaveletSpec> {
    let (family, order) =
        if name.chars().any(|c| c.is_ascii_digit()) || name.eq_ignore_ascii_case("haar") {
            let (f, n) = parse_wavelet_name(name).map_err(|e| usage(e.to_string()))?;
            (f, Some(n))
        } else {
            (
                name.parse::<Family>().map_err(|e| usage(e.to_string()))?,
                None,
            )
        };
    let nu = nu.or(order).ok_or_else(|| {
        usage(format!(
            "wavelet {name:?} needs an order, e.g. {name}4 or --nu 4"
        ))
    })?;
    WaveletSpec::new(family, nu, boundary).map_err(|e| usage(e.to_string()))
}

#[derive(Debug, Clone, Args)]
pub struct CacheArgs {
    /// Directory holding kernel tables.
    #[arg(long, env = "CWW_CACHE_DIR", default_value = "cww-cache")]
    pub kernel_cache_dir: PathBuf,

    /// Fail instead of computing a missing kernel table.
    #[arg(long)]
    pub no_auto: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PrecomputeArgs {
    /// Comma-separated wavelets.
    #[arg(long, value_delimiter = ',', default_value = "db2,db3,db4,db5,db6")]
    pub wavelet: Vec<String>,

    #[arg(long, value_enum, default_value = "vmp")]
    pub boundary: BoundaryArg,

    /// Largest q; tables are written for every q from 1 up to this.
    #[arg(long, default_value_t = 4)]
    pub q: u32,

    /// Directory for the kernel tables.
    #[arg(long, env = "CWW_CACHE_DIR", default_value = "cww-cache")]
    pub kernel_cache_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ApplyArgs {
    #[command(flatten)]
    pub wavelet: WaveletArgs,

    #[arg(long)]
    pub j: u32,

    #[arg(long, default_value_t = 1)]
    pub q: u32,

    #[arg(long, default_value_t = 1)]
    pub dim: usize,

    /// Input CSV; a seeded random input is used when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Apply the adjoint instead of the forward operator.
    #[arg(long)]
    pub adjoint: bool,

    /// Measure the adjoint identity on 100 random pairs and print the defect.
    #[arg(long)]
    pub check_adjoint: bool,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output CSV (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Table1Args {
    /// Comma-separated wavelets.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "db2,db3,db4,db5,db6,sym2,sym3,sym4,sym5,sym6"
    )]
    pub wavelet: Vec<String>,

    #[arg(long, value_enum, default_value = "vmp")]
    pub boundary: BoundaryArg,

    /// Level of the one-dimensional panel.
    #[arg(long, default_value_t = 7)]
    pub j: u32,

    /// Level per axis of the two-dimensional panel.
    #[arg(long, default_value_t = 5)]
    pub j2d: u32,

    /// Largest q; rows are produced for every q from 1 up to this.
    #[arg(long, default_value_t = 4)]
    pub q: u32,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Truncated Walsh series.
    Tw,
    /// Generalised sampling.
    Gs,
    Pbdw,
    /// Compressive sensing (l1 minimisation over wavelet coefficients).
    Cs,
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    #[arg(long, value_enum)]
    pub method: Method,

    #[command(flatten)]
    pub wavelet: WaveletArgs,

    #[arg(long)]
    pub j: u32,

    #[arg(long, default_value_t = 1)]
    pub q: u32,

    /// Defaults to the dimension of the reference function, else 1.
    #[arg(long)]
    pub dim: Option<usize>,

    /// Built-in test function to sample and to measure the error against.
    #[arg(long)]
    pub reference_function: Option<String>,

    /// Walsh samples as CSV instead of sampling the reference function.
    #[arg(long)]
    pub samples: Option<PathBuf>,

    /// Dyadic level of the acquisition grid (default j + q + 4).
    #[arg(long)]
    pub acquisition_resolution: Option<u32>,

    /// Dyadic level of the evaluation grid (default 14 in 1D, 10 in 2D).
    #[arg(long)]
    pub eval_resolution: Option<u32>,

    /// PBDW truncation (default 4N).
    #[arg(long = "K")]
    pub k: Option<usize>,

    /// Constraint level of the l1 problem.
    #[arg(long, default_value_t = 1e-3)]
    pub eta: f64,

    /// Iteration cap for the solver in use.
    #[arg(long)]
    pub max_iters: Option<usize>,

    /// Sampling mask for cs, one index per line.
    #[arg(long)]
    pub mask_file: Option<PathBuf>,

    /// Number of samples kept by the generated mask (default a quarter).
    #[arg(long)]
    pub m: Option<usize>,

    /// Indices below this (per axis) are always sampled.
    #[arg(long, default_value_t = 8)]
    pub floor: usize,

    /// Per-band decay exponent of the generated mask.
    #[arg(long, default_value_t = 1.0)]
    pub decay: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Coefficients of the reconstruction as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Reconstruction evaluated on the evaluation grid as CSV.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,

    /// Sampling mask actually used, one index per line.
    #[arg(long)]
    pub mask_out: Option<PathBuf>,

    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub wavelet: WaveletArgs,

    #[arg(long, default_value_t = 1)]
    pub q: u32,

    #[arg(long, default_value_t = 1)]
    pub dim: usize,

    /// Smallest log2 N (default 10 in 1D, 8 in 2D).
    #[arg(long)]
    pub min_log: Option<u32>,

    /// Largest log2 N (default 22 in 1D, 12 in 2D).
    #[arg(long)]
    pub max_log: Option<u32>,

    /// Timed calls per size; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,

    /// Also time a dense product at N = 4096 (1D only).
    #[arg(long)]
    pub dense_baseline: bool,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub cache: CacheArgs,
}
