//! Command-line front end: job parsing, execution and CSV output.

pub mod csv_out;
pub mod error;
pub mod grid;
pub mod job;
pub mod run;

pub use csv_out::{emit_csv, ResultRow, Source, RESULT_HEADER};
pub use error::{CliError, CliResult};
pub use job::{parse_job, Command, JobSpec};
pub use run::{run_job, run_to};
