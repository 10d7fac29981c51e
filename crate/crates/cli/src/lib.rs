//! Command-line front end for `paneitz-core`: configuration, dispatch and report files.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use config::{parse_args, Command, Domain, RunConfig};
pub use error::CliError;
pub use report::{Report, Status};

/// Sizes the rayon pool from `PANEITZ_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PANEITZ_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| CliError::Usage(format!("PANEITZ_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

/// Parses, runs and writes; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let outcome = init_threads()
        .and_then(|_| parse_args(args))
        .and_then(|config| {
            let report = commands::run(&config)?;
            let written = report.write(&config)?;
            Ok((report.status(), written))
        });
    match outcome {
        Ok((status, written)) => {
            for path in written {
                println!("{}", path.display());
            }
            if status != Status::Ok {
                eprintln!("status: {status:?}");
            }
            status.exit_code()
        }
        Err(e @ CliError::Clap(_)) => {
            if let CliError::Clap(inner) = &e {
                let _ = inner.print();
            }
            e.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
