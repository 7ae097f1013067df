//! Sweep harness for the `fracbern` estimators: JSON sweep configs in,
//! deterministic CSV / JSON report tables out.

pub mod config;
pub mod report;
pub mod sweep;

pub use config::{ConfigError, Format, SweepConfig, SweepPlan, Task};
pub use report::{emit_report, ReportError, ReportTable, Row};
pub use sweep::{run_plan, run_plan_with_workers, run_sweep, Cell};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "FRACBERN_WORKERS";

/// Worker count from [`WORKERS_ENV`], defaulting to the available parallelism.
pub fn workers_from_env() -> Result<usize, String> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}
