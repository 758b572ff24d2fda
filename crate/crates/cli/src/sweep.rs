use serde::{Deserialize, Serialize};
use sumset_core::Mode;

use crate::run::{run, RunConfig};
use crate::spec::SetSpec;
use crate::CliError;

/// Cartesian grid of runs over one spec family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub ns: Vec<usize>,
    pub eps: Vec<f64>,
    pub tau: Vec<f64>,
    pub modes: Vec<Mode>,
}

/// One CSV row. `dist`, `eps_hat` and `bound` come from the audit and are
/// empty when it could not run; `status` is `ok` or the error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub eps: f64,
    pub tau: f64,
    pub mode: Mode,
    pub queries: Option<u64>,
    pub dist: Option<f64>,
    pub volume: Option<f64>,
    pub eps_hat: Option<f64>,
    pub bound: Option<f64>,
    pub status: String,
}

/// Worker threads: `SUMSET_THREADS` if set, else rayon's default.
pub fn thread_count() -> usize {
    std::env::var("SUMSET_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// Runs every grid cell (in parallel) and returns rows in grid order:
/// n, then ε, τ, mode.
pub fn sweep(spec: &SetSpec, grid: &SweepGrid, base: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    use rayon::prelude::*;
    let mut cells = vec![];
    for &n in &grid.ns {
        for &eps in &grid.eps {
            for &tau in &grid.tau {
                for &mode in &grid.modes {
                    cells.push((n, eps, tau, mode));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| CliError::Spec(e.to_string()))?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .map(|&(n, eps, tau, mode)| {
                let config = RunConfig { eps, tau, mode, ..base.clone() };
                let mut row =
                    SweepRow { n, eps, tau, mode, queries: None, dist: None, volume: None, eps_hat: None, bound: None, status: "ok".into() };
                match run(&spec.with_n(n), &config) {
                    Ok((report, _)) => {
                        row.queries = Some(report.queries.total);
                        row.volume = Some(report.volume.sumset.value);
                        if let Some(a) = &report.audit {
                            row.dist = Some(a.sumset_distance);
                            row.eps_hat = Some(a.eps_hat);
                            row.bound = Some(a.sumset_bound);
                        }
                    }
                    Err(e) => row.status = e.to_string(),
                }
                row
            })
            .collect()
    }))
}

pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
