//! IO, file formats and the `fairsel` command-line interface. All the math
//! lives in `fairsel-core`; this crate translates between files and the
//! core types and renders reports.

pub mod cli;
pub mod io;
pub mod report;
pub mod synth;

use std::time::Instant;

/// Exit codes: 0 optimal / success, 1 usage or data error, 2 infeasible,
/// 3 limit reached before proving optimality.
pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_LIMIT: u8 = 3;

/// Wall clock for solver time limits.
pub struct WallClock(Instant);

impl WallClock {
    pub fn new() -> Self {
        WallClock(Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl fairsel_core::Clock for WallClock {
    fn elapsed_secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

pub fn run() {
    let code = match cli::main() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            EXIT_ERROR
        }
    };
    std::process::exit(code as i32);
}
