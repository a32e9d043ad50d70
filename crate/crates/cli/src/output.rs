//! Output files and the optional header line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;

pub fn open(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes `# cww <what>, <timestamp>` unless suppressed.
pub fn header(out: &mut dyn Write, enabled: bool, what: &str) -> io::Result<()> {
    if enabled {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        writeln!(
            out,
            "# cww {} {what}, unix time {secs}",
            env!("CARGO_PKG_VERSION")
        )?;
    }
    Ok(())
}

/// Writes a vector as `index,value` or a square matrix with `cols` columns.
pub fn write_values(
    path: Option<&Path>,
    header_on: bool,
    what: &str,
    values: &[f64],
    dim: usize,
    cols: usize,
) -> anyhow::Result<()> {
    let mut out = open(path)?;
    let name = path.map_or("standard output".to_string(), |p| p.display().to_string());
    let result = (|| -> io::Result<()> {
        header(&mut out, header_on, what)?;
        if dim == 1 {
            cww::reconstruct::write_vector_csv(&mut out, values)?;
        } else {
            cww::reconstruct::write_matrix_csv(&mut out, values, cols)?;
        }
        out.flush()
    })();
    result.with_context(|| format!("cannot write {name}"))
}
