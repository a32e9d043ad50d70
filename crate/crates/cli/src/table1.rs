use std::io::Write;

use anyhow::Context;
use cww::kernel::KernelTable;
use cww::oracle::{build_dense_lemma, subspace_angle, tensor_mu, AngleReport};
use cww::wavelet::{WaveletSpec, DEFAULT_RESOLUTION};
use rayon::prelude::*;

use crate::args::{resolve_spec, Table1Args};
use crate::{output, usage};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub spec: WaveletSpec,
    pub dim: usize,
    /// Level per axis.
    pub j: u32,
    pub q: u32,
    pub mu: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// One-dimensional rows at level `j` followed by the tensor rows at `j2d`,
/// each for `q = 1..=q_max`, grouped by wavelet.
pub fn compute(specs: &[WaveletSpec], j: u32, j2d: u32, q_max: u32) -> cww::Result<Vec<Row>> {
    let tables: Vec<KernelTable> = specs
        .par_iter()
        .map(|s| KernelTable::compute(s, q_max, DEFAULT_RESOLUTION))
        .collect::<cww::Result<_>>()?;
    let tasks: Vec<(usize, u32, u32)> = (0..specs.len())
        .flat_map(|i| (1..=q_max).flat_map(move |q| [(i, j, q), (i, j2d, q)]))
        .collect();
    let reports: Vec<AngleReport> = tasks
        .par_iter()
        .map(|&(i, level, q)| subspace_angle(&build_dense_lemma(&tables[i], level, q)?))
        .collect::<cww::Result<_>>()?;
    let mut rows = Vec::with_capacity(tasks.len());
    for (i, spec) in specs.iter().enumerate() {
        let mine: Vec<_> = tasks
            .iter()
            .zip(&reports)
            .filter(|(t, _)| t.0 == i)
            .collect();
        for (&(_, level, q), r) in mine.iter().step_by(2) {
            rows.push(Row {
                spec: *spec,
                dim: 1,
                j: level,
                q,
                mu: r.mu,
                sigma_min: r.sigma_min,
                sigma_max: r.sigma_max,
            });
        }
        for (&(_, level, q), r) in mine.iter().skip(1).step_by(2) {
            rows.push(Row {
                spec: *spec,
                dim: 2,
                j: level,
                q,
                mu: tensor_mu(r),
                sigma_min: r.sigma_min * r.sigma_min,
                sigma_max: r.sigma_max * r.sigma_max,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv(out: &mut dyn Write, rows: &[Row]) -> std::io::Result<()> {
    writeln!(out, "wavelet,boundary,dim,j,q,mu,sigma_min,sigma_max")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6}",
            r.spec.name(),
            r.spec.boundary,
            r.dim,
            r.j,
            r.q,
            r.mu,
            r.sigma_min,
            r.sigma_max
        )?;
    }
    Ok(())
}

pub fn run(args: &Table1Args, header: bool) -> anyhow::Result<()> {
    if args.q == 0 {
        return Err(usage("--q must be at least 1"));
    }
    let specs = args
        .wavelet
        .iter()
        .map(|w| resolve_spec(w, None, args.boundary.into()))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let rows = compute(&specs, args.j, args.j2d, args.q)?;
    let mut out = output::open(args.out.as_deref())?;
    let what = format!("table1 j={} j2d={} q<={}", args.j, args.j2d, args.q);
    (|| -> std::io::Result<()> {
        output::header(&mut out, header, &what)?;
        write_csv(&mut out, &rows)?;
        out.flush()
    })()
    .context("cannot write the table")
}
