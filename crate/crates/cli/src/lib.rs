//! Implementation of the `cww` command-line tool.

pub mod alloc;
pub mod apply;
pub mod args;
pub mod bench;
pub mod output;
pub mod precompute;
pub mod reconstruct;
pub mod table1;

use std::fmt;

pub use args::{Cli, Command};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// An error carrying its own exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
    .into()
}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        if let Some(e) = cause.downcast_ref::<cww::Error>() {
            return if e.is_numerical() {
                EXIT_NUMERICAL
            } else if e.is_io() {
                EXIT_IO
            } else {
                EXIT_USAGE
            };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_USAGE
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let header = !cli.no_header;
    match cli.command {
        Command::Precompute(a) => precompute::run(&a),
        Command::Apply(a) => apply::run(&a, header),
        Command::Table1(a) => table1::run(&a, header),
        Command::Reconstruct(a) => reconstruct::run(&a, header),
        Command::Bench(a) => bench::run(&a, header),
        Command::Functions => {
            for (name, description) in cww::functions::REGISTRY {
                println!("{name:<10} {description}");
            }
            Ok(())
        }
    }
}
