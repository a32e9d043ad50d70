use std::fs::File;
use std::io::{BufReader, Write};

use anyhow::Context;
use cww::fastop::{compose_cs, FastOp, SamplingMask, WaveletSynthesis};
use cww::functions::{lookup, TestFunction};
use cww::reconstruct::{
    acquire_samples, cs_solve, gs_solve, pbdw_solve, read_csv, read_mask, relative_l2_error,
    sample_on_grid, variable_density_mask, walsh_synthesize, write_mask, BasisSamples,
    DensityParams, PdParams, SolverParams,
};

use crate::args::{Method, ReconstructArgs};
use crate::precompute::load_kernels;
use crate::{output, usage};

/// Everything a reconstruction run produces.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Scaling coefficients (gs, cs) or Walsh coefficients (tw, pbdw).
    pub coefficients: Vec<f64>,
    /// Per-axis length of `coefficients`.
    pub side: usize,
    pub dim: usize,
    /// Reconstruction at `p / 2^resolution`.
    pub grid: Vec<f64>,
    pub resolution: u32,
    pub samples_used: usize,
    pub iterations: Option<usize>,
    pub relative_error: Option<f64>,
    pub mask: Option<SamplingMask>,
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn synthesize(basis: &BasisSamples, c: &[f64], dim: usize) -> cww::Result<Vec<f64>> {
    if dim == 1 {
        basis.synthesize_1d(c)
    } else {
        basis.synthesize_2d(c)
    }
}

pub fn execute(args: &ReconstructArgs) -> anyhow::Result<Outcome> {
    let function: Option<TestFunction> = args
        .reference_function
        .as_deref()
        .map(lookup)
        .transpose()
        .map_err(|e| usage(e.to_string()))?;
    let dim = args.dim.or(function.map(|f| f.dim())).unwrap_or(1);
    if !(dim == 1 || dim == 2) {
        return Err(usage(format!("--dim must be 1 or 2, got {dim}")));
    }
    if let Some(f) = function {
        if f.dim() != dim {
            return Err(usage(format!(
                "{} is {}-dimensional but --dim is {dim}",
                args.reference_function.as_deref().unwrap_or_default(),
                f.dim()
            )));
        }
    }
    let (j, q) = (args.j, args.q);
    if j + q > 24 {
        return Err(usage("j + q must not exceed 24"));
    }
    let n = 1usize << (j + q);
    let total = n.pow(dim as u32);

    let samples = match (&args.samples, function) {
        (Some(path), _) => {
            let file =
                File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            read_csv(BufReader::new(file))
                .with_context(|| format!("reading {}", path.display()))?
                .0
        }
        (None, Some(f)) => {
            acquire_samples(&f, n, args.acquisition_resolution.unwrap_or(j + q + 4))?.values
        }
        (None, None) => return Err(usage("give --reference-function or --samples")),
    };
    let partial = args.method == Method::Cs && samples.len() != total;
    if samples.len() != total && !partial {
        return Err(cww::Error::DimensionMismatch {
            expected: total,
            got: samples.len(),
        })
        .context("sample count does not match N = 2^(j+q) per axis");
    }

    let resolution = args
        .eval_resolution
        .unwrap_or(if dim == 1 { 14 } else { 10 })
        .max(j + q);
    if resolution > 24 || (dim == 2 && resolution > 12) {
        return Err(usage(format!(
            "evaluation resolution {resolution} is too fine"
        )));
    }
    let mut params = SolverParams::default();
    if let Some(it) = args.max_iters {
        params.cg.max_iters = it;
        params.pd.max_iters = it;
    }
    params.pd = PdParams {
        eta: args.eta,
        ..params.pd
    };
    params.pbdw_k = args.k;

    let mut iterations = None;
    let mut mask = None;
    let (coefficients, side, grid) = match args.method {
        Method::Tw => {
            let grid = walsh_synthesize(&samples, dim, resolution)?;
            (samples.clone(), n, grid)
        }
        Method::Gs => {
            let spec = args.wavelet.spec()?;
            let kernels = load_kernels(&args.cache, &spec, q)?;
            let op = FastOp::new(&spec, j, q, dim, &kernels)?;
            let rep = gs_solve(&op, &samples, &params.cg)?;
            iterations = Some(rep.iterations);
            let basis = BasisSamples::new(&spec, j, resolution)?;
            let grid = synthesize(&basis, &rep.x, dim)?;
            (rep.x, op.m(), grid)
        }
        Method::Pbdw => {
            let spec = args.wavelet.spec()?;
            let k = args.k.unwrap_or(4 * n);
            if k < n || !k.is_power_of_two() {
                return Err(usage(format!(
                    "--K = {k} must be a power of two no smaller than N = {n}"
                )));
            }
            let tall_q = q + (k / n).trailing_zeros();
            let kernels = load_kernels(&args.cache, &spec, tall_q)?;
            let op = FastOp::new(&spec, j, q, dim, &kernels)?;
            let res = pbdw_solve(&op, &samples, &params, Some(&kernels))?;
            iterations = Some(res.gs.iterations);
            let basis = BasisSamples::new(&spec, j, resolution)?;
            let grid = add(
                &synthesize(&basis, &res.gs.x, dim)?,
                &walsh_synthesize(&res.correction, dim, resolution)?,
            );
            (res.coefficients, res.k, grid)
        }
        Method::Cs => {
            let spec = args.wavelet.spec()?;
            let kernels = load_kernels(&args.cache, &spec, q)?;
            let op = FastOp::new(&spec, j, q, dim, &kernels)?;
            let pattern = match &args.mask_file {
                Some(path) => {
                    let file = File::open(path)
                        .with_context(|| format!("cannot open {}", path.display()))?;
                    read_mask(BufReader::new(file), total)
                        .with_context(|| format!("reading {}", path.display()))?
                }
                None => {
                    let density = DensityParams {
                        floor: args.floor,
                        decay: args.decay,
                    };
                    variable_density_mask(n, dim, args.m.unwrap_or(total / 4), args.seed, &density)
                        .map_err(|e| usage(e.to_string()))?
                }
            };
            let y = if partial {
                if samples.len() != pattern.len() {
                    return Err(cww::Error::DimensionMismatch {
                        expected: pattern.len(),
                        got: samples.len(),
                    })
                    .context("subsampled data must have one value per mask index");
                }
                samples.clone()
            } else {
                pattern.restrict(&samples)
            };
            let a = compose_cs(&op, pattern.clone(), true)?;
            let rep = cs_solve(&a, &y, &params.pd)?;
            iterations = Some(rep.iterations);
            let c = WaveletSynthesis::new(&spec, j, dim)?.synthesize(&rep.x)?;
            let basis = BasisSamples::new(&spec, j, resolution)?;
            let grid = synthesize(&basis, &c, dim)?;
            mask = Some(pattern);
            (c, op.m(), grid)
        }
    };
    let relative_error =
        function.map(|f| relative_l2_error(&sample_on_grid(&f, resolution), &grid));
    Ok(Outcome {
        coefficients,
        side,
        dim,
        grid,
        resolution,
        samples_used: mask.as_ref().map_or(total, SamplingMask::len),
        iterations,
        relative_error,
        mask,
    })
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Tw => "tw",
        Method::Gs => "gs",
        Method::Pbdw => "pbdw",
        Method::Cs => "cs",
    }
}

pub fn run(args: &ReconstructArgs, header: bool) -> anyhow::Result<()> {
    let outcome = execute(args)?;
    let method = method_name(args.method);
    let what = format!(
        "reconstruct {method} j={} q={} dim={}",
        args.j, args.q, outcome.dim
    );
    if let Some(path) = &args.out {
        output::write_values(
            Some(path),
            header,
            &what,
            &outcome.coefficients,
            outcome.dim,
            outcome.side,
        )?;
    }
    if let Some(path) = &args.grid_out {
        let side = 1usize << outcome.resolution;
        output::write_values(Some(path), header, &what, &outcome.grid, outcome.dim, side)?;
    }
    if let (Some(path), Some(mask)) = (&args.mask_out, &outcome.mask) {
        let mut out = output::open(Some(path))?;
        (|| -> std::io::Result<()> {
            output::header(&mut out, header, &what)?;
            write_mask(&mut out, mask)?;
            out.flush()
        })()
        .with_context(|| format!("cannot write {}", path.display()))?;
    }
    println!("method={method}");
    if args.method != Method::Tw {
        println!("wavelet={}", args.wavelet.spec()?);
    }
    println!("N={}", 1usize << (args.j + args.q));
    println!("samples={}", outcome.samples_used);
    if let Some(it) = outcome.iterations {
        println!("iterations={it}");
    }
    if let Some(e) = outcome.relative_error {
        println!("relative_error={e:e}");
    }
    Ok(())
}
