//! Set generators, pipeline runs, sweeps and reports for the `sumset` tool.

pub mod run;
pub mod spec;
pub mod sweep;

pub use run::{run, write_outputs, QueryMeters, RunConfig, RunReport};
pub use spec::{generate, Generated, SetSpec};
pub use sweep::{sweep, write_csv, SweepGrid, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sumset_core::Error),
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for an exhausted budget, 3 for a rejection-sampling stall, else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(sumset_core::Error::BudgetExhausted(_)) => 2,
            CliError::Core(sumset_core::Error::RejectionStall(_)) => 3,
            _ => 1,
        }
    }
}
