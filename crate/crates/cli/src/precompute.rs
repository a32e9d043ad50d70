use std::io::Write;
use std::path::Path;

use anyhow::Context;
use cww::kernel::{cache_file_name, load_or_compute, CacheStatus, KernelTable};
use cww::wavelet::{WaveletSpec, DEFAULT_RESOLUTION};

use crate::args::{resolve_spec, CacheArgs, PrecomputeArgs};
use crate::{usage, Failure, EXIT_IO};

pub fn run(args: &PrecomputeArgs) -> anyhow::Result<()> {
    if args.q == 0 {
        return Err(usage("--q must be at least 1"));
    }
    let specs = args
        .wavelet
        .iter()
        .map(|w| resolve_spec(w, None, args.boundary.into()))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut out = std::io::stdout().lock();
    for spec in &specs {
        for q in 1..=args.q {
            let (_, status, path) =
                load_or_compute(&args.kernel_cache_dir, spec, q, DEFAULT_RESOLUTION)
                    .with_context(|| format!("kernel table for {spec}, q = {q}"))?;
            writeln!(out, "{} {}", status_word(&status), path.display())?;
        }
    }
    Ok(())
}

fn status_word(status: &CacheStatus) -> String {
    match status {
        CacheStatus::Cached => "cached".into(),
        CacheStatus::Computed => "computed".into(),
        CacheStatus::Recomputed(why) => format!("recomputed ({why})"),
    }
}

/// Kernel table for `spec` at `q` from the cache, computing it on a miss
/// unless `--no-auto` was given.
pub fn load_kernels(cache: &CacheArgs, spec: &WaveletSpec, q: u32) -> anyhow::Result<KernelTable> {
    let dir: &Path = &cache.kernel_cache_dir;
    if cache.no_auto {
        let path = dir.join(cache_file_name(spec, q, DEFAULT_RESOLUTION));
        if !path.exists() {
            return Err(Failure {
                code: EXIT_IO,
                message: format!(
                    "kernel table {} is missing; run `cww precompute` or drop --no-auto",
                    path.display()
                ),
            }
            .into());
        }
        return Ok(KernelTable::load_expect(
            &path,
            spec,
            q,
            DEFAULT_RESOLUTION,
        )?);
    }
    let (table, status, path) = load_or_compute(dir, spec, q, DEFAULT_RESOLUTION)
        .with_context(|| format!("kernel table for {spec}, q = {q}"))?;
    if status != CacheStatus::Cached {
        eprintln!("{} {}", status_word(&status), path.display());
    }
    Ok(table)
}
