use std::io::Write;
use std::time::Instant;

use anyhow::Context;
use cww::fastop::{FastOp, LinearOperator};
use cww::kernel::KernelTable;
use cww::oracle::dense_from_operator;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::apply::random_vector;
use crate::args::BenchArgs;
use crate::precompute::load_kernels;
use crate::{alloc, output, usage};

/// Timings at one size. For `dense` rows the ratio columns hold the
/// dense-to-fast speedup at the same size instead of doubling ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub kind: &'static str,
    pub dim: usize,
    /// Samples per axis.
    pub n: usize,
    pub m: usize,
    pub forward_s: f64,
    pub adjoint_s: f64,
    pub forward_ratio: Option<f64>,
    pub adjoint_ratio: Option<f64>,
    /// Allocation high-water of one forward call beyond the live input.
    pub peak_bytes: usize,
}

/// Median of the samples; `t` must be non-empty.
pub fn median(mut t: Vec<f64>) -> f64 {
    t.sort_by(f64::total_cmp);
    t[t.len() / 2]
}

fn seconds(f: impl FnOnce() -> cww::Result<()>) -> cww::Result<f64> {
    let start = Instant::now();
    f()?;
    Ok(start.elapsed().as_secs_f64())
}

struct Case {
    op: FastOp,
    x: Vec<f64>,
    a: Vec<f64>,
    forward: Vec<f64>,
    adjoint: Vec<f64>,
}

impl Case {
    fn new(op: FastOp, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_vector(&mut rng, op.cols());
        let a = random_vector(&mut rng, op.rows());
        Case {
            op,
            x,
            a,
            forward: Vec::new(),
            adjoint: Vec::new(),
        }
    }

    fn time(&mut self) -> cww::Result<()> {
        let (op, x, a) = (&self.op, &self.x, &self.a);
        self.forward.push(seconds(|| op.apply(x).map(drop))?);
        self.adjoint
            .push(seconds(|| op.apply_adjoint(a).map(drop))?);
        Ok(())
    }

    /// One untimed call of each direction.
    fn warm_up(&mut self) -> cww::Result<()> {
        self.time()?;
        self.forward.clear();
        self.adjoint.clear();
        Ok(())
    }
}

/// Median wall times over `repeats` calls for `log2 N` in `logs`, plus the
/// dense baseline at `N = 4096` when asked (1D only). Sizes are visited in
/// rounds, one call each per round, so a slow stretch on a shared machine
/// lands in one sample of many sizes rather than in every sample of one.
pub fn measure(
    kernels: &KernelTable,
    q: u32,
    dim: usize,
    logs: std::ops::RangeInclusive<u32>,
    repeats: usize,
    dense: bool,
    seed: u64,
) -> cww::Result<Vec<BenchRow>> {
    let spec = kernels.spec;
    let mut cases = Vec::new();
    let mut peaks = Vec::new();
    for log in logs {
        let case = Case::new(FastOp::new(&spec, log - q, q, dim, kernels)?, seed);
        let base = alloc::reset_peak();
        drop(case.op.apply(&case.x)?);
        peaks.push(alloc::peak() - base);
        cases.push(case);
    }
    for case in &mut cases {
        case.warm_up()?;
    }
    for _ in 0..repeats.max(1) {
        for case in &mut cases {
            case.time()?;
        }
    }
    let mut rows: Vec<BenchRow> = Vec::new();
    for (case, peak) in cases.into_iter().zip(peaks) {
        let (forward, adjoint) = (median(case.forward), median(case.adjoint));
        let prev = rows.last().filter(|r| r.n * 2 == case.op.n());
        rows.push(BenchRow {
            kind: "fast",
            dim,
            n: case.op.n(),
            m: case.op.m(),
            forward_s: forward,
            adjoint_s: adjoint,
            forward_ratio: prev.map(|p| forward / p.forward_s),
            adjoint_ratio: prev.map(|p| adjoint / p.adjoint_s),
            peak_bytes: peak,
        });
    }
    if dense {
        let mut case = Case::new(FastOp::new(&spec, 12 - q, q, 1, kernels)?, seed);
        let d = dense_from_operator(&case.op)?;
        let (mut dense_fwd, mut dense_adj) = (Vec::new(), Vec::new());
        case.warm_up()?;
        for _ in 0..repeats.max(1) {
            case.time()?;
            let (x, a) = (&case.x, &case.a);
            dense_fwd.push(seconds(|| {
                let y: Vec<f64> = d
                    .matrix
                    .iter()
                    .map(|r| r.iter().zip(x).map(|(p, v)| p * v).sum())
                    .collect();
                std::hint::black_box(y);
                Ok(())
            })?);
            dense_adj.push(seconds(|| {
                let mut y = vec![0.0; x.len()];
                for (r, ai) in d.matrix.iter().zip(a) {
                    for (o, p) in y.iter_mut().zip(r) {
                        *o += p * ai;
                    }
                }
                std::hint::black_box(y);
                Ok(())
            })?);
        }
        let (dense_fwd, dense_adj) = (median(dense_fwd), median(dense_adj));
        let (fwd, adj) = (median(case.forward), median(case.adjoint));
        rows.push(BenchRow {
            kind: "dense",
            dim: 1,
            n: case.op.n(),
            m: case.op.m(),
            forward_s: dense_fwd,
            adjoint_s: dense_adj,
            forward_ratio: Some(dense_fwd / fwd),
            adjoint_ratio: Some(dense_adj / adj),
            peak_bytes: 0,
        });
    }
    Ok(rows)
}

pub fn write_csv(out: &mut dyn Write, rows: &[BenchRow]) -> std::io::Result<()> {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.4}"));
    writeln!(
        out,
        "kind,dim,n,m,forward_s,adjoint_s,forward_ratio,adjoint_ratio,peak_bytes"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6e},{:.6e},{},{},{}",
            r.kind,
            r.dim,
            r.n,
            r.m,
            r.forward_s,
            r.adjoint_s,
            opt(r.forward_ratio),
            opt(r.adjoint_ratio),
            r.peak_bytes
        )?;
    }
    Ok(())
}

pub fn run(args: &BenchArgs, header: bool) -> anyhow::Result<()> {
    let spec = args.wavelet.spec()?;
    let (lo, hi) = match args.dim {
        1 => (args.min_log.unwrap_or(10), args.max_log.unwrap_or(22)),
        2 => (args.min_log.unwrap_or(8), args.max_log.unwrap_or(12)),
        d => return Err(usage(format!("--dim must be 1 or 2, got {d}"))),
    };
    if lo > hi || lo < args.q + spec.j0() || hi > 30 {
        return Err(usage(format!(
            "size range 2^{lo}..2^{hi} is empty or outside 2^{}..2^30",
            args.q + spec.j0()
        )));
    }
    if args.dense_baseline && 12 < args.q + spec.j0() {
        return Err(usage("the dense baseline needs q + j0 <= 12"));
    }
    let kernels = load_kernels(&args.cache, &spec, args.q)?;
    let rows = measure(
        &kernels,
        args.q,
        args.dim,
        lo..=hi,
        args.repeats,
        args.dense_baseline,
        args.seed,
    )?;
    let mut out = output::open(args.out.as_deref())?;
    let what = format!("bench {spec} q={} dim={}", args.q, args.dim);
    (|| -> std::io::Result<()> {
        output::header(&mut out, header, &what)?;
        write_csv(&mut out, &rows)?;
        out.flush()
    })()
    .context("cannot write the benchmark table")
}
