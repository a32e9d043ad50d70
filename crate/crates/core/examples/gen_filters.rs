//! Regenerates the shipped boundary filter files in `crates/core/data`.

use std::path::PathBuf;

use cww::wavelet::construct::build_filter_set;
use cww::wavelet::{write_filter_file, Family};

fn main() -> cww::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    for family in [Family::Daubechies, Family::Symlet] {
        for nu in 1..=6 {
            let set = build_filter_set(family, nu)?;
            let path = dir.join(cww::wavelet::data_file_name(family, nu));
            write_filter_file(&set, &path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
