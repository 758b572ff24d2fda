use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sumset_core::fourier::brute_sumset;
use sumset_core::sumset::{audit, estimate_volume, AuditReport};
use sumset_core::{simulate_sumset, Mode, RandomSource, RegularityBudget, SumsetRun, VolumeEstimate};

use crate::spec::{generate, SetSpec};
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub eps: f64,
    pub tau: f64,
    /// Volume-estimate precision and confidence.
    pub gamma: f64,
    pub delta: f64,
    pub mode: Mode,
    pub k_max: Option<usize>,
    pub i_max: Option<usize>,
    pub seed: u64,
    /// Constant of the sumset-distance audit clause.
    pub c: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eps: 0.1,
            tau: 0.1,
            gamma: 0.05,
            delta: 0.05,
            mode: Mode::Explicit,
            k_max: None,
            i_max: None,
            seed: 0,
            c: 16.0,
        }
    }
}

impl RunConfig {
    pub fn budget(&self) -> Result<RegularityBudget, CliError> {
        let mut b = RegularityBudget::new(self.eps, self.tau)?;
        if let Some(k) = self.k_max {
            b.k_max = k;
        }
        if let Some(i) = self.i_max {
            b.i_max = i;
        }
        b.validate()?;
        Ok(b)
    }
}

/// A-queries by phase; `total` is their sum.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryMeters {
    pub gl: u64,
    pub prune: u64,
    pub independence: u64,
    pub leaves: u64,
    pub volume_a_prime: u64,
    pub volume_sumset: u64,
    pub total: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Volumes {
    pub a_prime: VolumeEstimate,
    pub sumset: VolumeEstimate,
}

/// Exhaustive volumes, when a stored twin exists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub volume_a: f64,
    pub volume_a_prime: Option<f64>,
    pub volume_sumset: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub spec: SetSpec,
    pub config: RunConfig,
    pub n: usize,
    pub mode: Mode,
    pub queries: QueryMeters,
    pub depth: usize,
    pub stages: usize,
    pub keep_leaves: Vec<String>,
    pub volume: Volumes,
    pub truth: Option<Truth>,
    pub audit: Option<AuditReport>,
    pub wall_time_ms: f64,
}

/// Runs the pipeline: regularity tree, sum tree, volume estimates for 𝒪_{A′}
/// and 𝒪_{A′+A′}, and — for explicit runs with a stored twin of dimension at
/// most 20 — the exhaustive audit.
pub fn run(spec: &SetSpec, config: &RunConfig) -> Result<(RunReport, SumsetRun), CliError> {
    let start = Instant::now();
    let budget = config.budget()?;
    let generated = generate(spec)?;
    let a = &generated.oracle;
    let root = RandomSource::new(config.seed);
    let sim = simulate_sumset(a, &budget, config.mode, &mut root.split("simulate"))?;
    let rq = &sim.regularity.queries;

    let q0 = a.query_count();
    let a_prime = estimate_volume(&sim.a_prime_oracle(a), config.gamma, config.delta, &mut root.split("volume_a_prime"))?;
    let q1 = a.query_count();
    let sumset = estimate_volume(&sim.sumset_oracle(a), config.gamma, config.delta, &mut root.split("volume_sumset"))?;
    let q2 = a.query_count();
    let queries = QueryMeters {
        gl: rq.gl,
        prune: rq.prune,
        independence: rq.independence,
        leaves: rq.leaves,
        volume_a_prime: q1 - q0,
        volume_sumset: q2 - q1,
        total: q2,
    };
    debug_assert_eq!(queries.total, rq.total() + queries.volume_a_prime + queries.volume_sumset);

    let tree = sim.tree();
    let explicit = tree.is_explicit();
    let truth = generated.twin.as_ref().map(|twin| {
        let ap = explicit.then(|| tree.a_prime_set(twin));
        Truth {
            volume_a: twin.volume(),
            volume_a_prime: ap.as_ref().map(|s| s.volume()),
            volume_sumset: ap.as_ref().filter(|s| s.dim() <= 20).map(|s| brute_sumset(s).volume()),
        }
    });
    let audit = match &generated.twin {
        Some(twin) if explicit && twin.dim() <= 20 => Some(audit(twin, config.eps, config.tau, &sim, config.c)?),
        _ => None,
    };
    let report = RunReport {
        spec: spec.clone(),
        config: config.clone(),
        n: spec.n(),
        mode: config.mode,
        queries,
        depth: tree.depth(),
        stages: sim.regularity.stages(),
        keep_leaves: tree.leaves.iter().filter(|l| l.verdict == sumset_core::regularity::Verdict::Keep).map(|l| l.address.clone()).collect(),
        volume: Volumes { a_prime, sumset },
        truth,
        audit,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((report, sim))
}

/// Writes `report.json`, `tree.json` and `transcript.jsonl` into `dir`.
pub fn write_outputs(dir: &Path, report: &RunReport, sim: &SumsetRun) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    std::fs::write(dir.join("tree.json"), serde_json::to_string_pretty(sim.tree())?)?;
    std::fs::write(dir.join("transcript.jsonl"), sim.regularity.transcript_jsonl())?;
    Ok(())
}
