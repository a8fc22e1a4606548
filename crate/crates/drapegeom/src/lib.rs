//! File formats, configuration, scene descriptions and the command-line
//! front end over `drapegeom-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod report;
pub mod scenespec;

pub use error::{Error, Result};

pub const TOOL_NAME: &str = "drapegeom";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable capping internal worker threads.
pub const THREADS_ENV: &str = "DRAPEGEOM_THREADS";

/// Worker threads allowed for this process: the machine's parallelism,
/// lowered by `DRAPEGEOM_THREADS` when set.
pub fn thread_cap() -> Result<usize> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(available),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n.min(available)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(e) => Err(Error::Config(format!("{THREADS_ENV}: {e}"))),
    }
}
