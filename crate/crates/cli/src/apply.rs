use std::fs::File;
use std::io::BufReader;

use anyhow::Context;
use cww::fastop::{FastOp, LinearOperator};
use cww::reconstruct::read_csv;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::ApplyArgs;
use crate::precompute::load_kernels;
use crate::{output, Failure, EXIT_NUMERICAL};

/// Largest accepted adjoint defect.
pub const ADJOINT_TOLERANCE: f64 = 1e-12;

pub fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest `|<A x, a> - <x, A^T a>| / (|A x| |a|)` over seeded random pairs.
pub fn adjoint_defect(op: &dyn LinearOperator, pairs: usize, seed: u64) -> cww::Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let x = random_vector(&mut rng, op.cols());
        let a = random_vector(&mut rng, op.rows());
        let ax = op.apply(&x)?;
        let ata = op.apply_adjoint(&a)?;
        let denom = dot(&ax, &ax).sqrt() * dot(&a, &a).sqrt();
        if denom > 0.0 {
            worst = worst.max((dot(&ax, &a) - dot(&x, &ata)).abs() / denom);
        }
    }
    Ok(worst)
}

pub fn run(args: &ApplyArgs, header: bool) -> anyhow::Result<()> {
    let spec = args.wavelet.spec()?;
    let kernels = load_kernels(&args.cache, &spec, args.q)?;
    let op = FastOp::new(&spec, args.j, args.q, args.dim, &kernels)?;
    if args.check_adjoint {
        let defect = adjoint_defect(&op, 100, args.seed)?;
        println!("adjoint_defect={defect:e}");
        if defect > ADJOINT_TOLERANCE {
            return Err(Failure {
                code: EXIT_NUMERICAL,
                message: format!("adjoint defect {defect:e} exceeds {ADJOINT_TOLERANCE:e}"),
            }
            .into());
        }
        if args.input.is_none() && args.out.is_none() {
            return Ok(());
        }
    }
    let (side_in, side_out) = if args.adjoint {
        (op.n(), op.m())
    } else {
        (op.m(), op.n())
    };
    let expected = side_in.pow(args.dim as u32);
    let input = match &args.input {
        Some(path) => {
            let file =
                File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            let (values, cols) = read_csv(BufReader::new(file))
                .with_context(|| format!("reading {}", path.display()))?;
            let expected_cols = if args.dim == 1 { 1 } else { side_in };
            if cols != expected_cols || values.len() != expected {
                return Err(cww::Error::DimensionMismatch {
                    expected,
                    got: values.len(),
                })
                .with_context(|| {
                    format!(
                        "{} does not match j = {}, q = {}, dim = {}",
                        path.display(),
                        args.j,
                        args.q,
                        args.dim
                    )
                });
            }
            values
        }
        None => random_vector(&mut ChaCha8Rng::seed_from_u64(args.seed), expected),
    };
    let result = if args.adjoint {
        op.apply_adjoint(&input)?
    } else {
        op.apply(&input)?
    };
    let what = format!(
        "apply {} {spec} j={} q={} dim={}",
        if args.adjoint { "adjoint" } else { "forward" },
        args.j,
        args.q,
        args.dim
    );
    output::write_values(
        args.out.as_deref(),
        header,
        &what,
        &result,
        args.dim,
        side_out,
    )
}
