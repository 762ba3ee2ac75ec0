//! Config-driven batch verification of connection curvature identities.
//!
//! A suite is a JSON document (see `docs/config.md`) naming bundle patches,
//! connections, sections, Lie algebras and gauge potentials, plus a list of
//! checks to run against them. [`run`] executes the checks and returns a
//! [`RunReport`] that serializes to a stable JSON layout.

pub mod config;
pub mod report;
pub mod run;

pub use config::{load_config, parse_config, CheckKind, ConfigError, SuiteConfig};
pub use report::{Format, RunReport, Verdict};
pub use run::{run, run_check};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const CONFIG: i32 = 2;
}
