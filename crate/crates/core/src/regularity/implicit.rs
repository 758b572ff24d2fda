use super::{
    address_string, restriction, sample_in_coset, Labels, Leaf, ParityDecisionTree, PhaseQueries, RegularityBudget,
    RegularityRun, StageRecord, Survivor, Verdict,
};
use crate::error::{Error, Result};
use crate::gf2::GF2Matrix;
use crate::oracle::SetOracle;
use crate::parity::{estimate_samples, implicit_gl, mask, GlParams, ParityOracle, Restriction};
use crate::point::Point;
use crate::rng::RandomSource;

/// Sampling rank test for implicit labels. N shared uniform points are routed
/// through the existing levels with amplified evaluation (row i is level i's
/// value at every point); a candidate passes iff its row raises the rank.
pub struct ImplicitRankCheck {
    points: Vec<Point>,
    rows: Vec<Point>,
}

impl ImplicitRankCheck {
    pub fn new(base: &SetOracle, levels: &[ParityOracle], n_points: usize, rng: &mut RandomSource) -> Self {
        let points = (0..n_points).map(|_| Point::random(base.dim(), rng)).collect();
        let mut check = ImplicitRankCheck { points, rows: vec![] };
        for (i, lvl) in levels.iter().enumerate() {
            debug_assert!(lvl.home_depth <= i);
            let row = check.row(base, levels, lvl, rng);
            check.rows.push(row);
        }
        check
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    fn prefix(&self, j: usize, depth: usize) -> u64 {
        self.rows[..depth].iter().enumerate().fold(0, |r, (i, row)| r | ((row.bit(j) as u64) << i))
    }

    /// Amplified values of `o` at the shared points. `o` may only depend on
    /// levels whose rows are already present.
    pub fn row(&self, base: &SetOracle, levels: &[ParityOracle], o: &ParityOracle, rng: &mut RandomSource) -> Point {
        let target = restriction(base, levels, o);
        let mut row = Point::zero(self.points.len());
        for (j, x) in self.points.iter().enumerate() {
            let ctx = self.prefix(j, o.home_depth);
            row.set_bit(j, o.eval_amplified(&target, x, ctx, o.m, rng));
        }
        row
    }

    pub fn accepts(&self, row: &Point) -> bool {
        let mut rows = self.rows.clone();
        rows.push(row.clone());
        GF2Matrix::new(self.points.len(), rows).expect("rows have length N").rank() == self.rows.len() + 1
    }

    pub fn push(&mut self, row: Point) {
        self.rows.push(row);
    }
}

/// Density of A on coset `addr` of the implicit tree `levels`, estimated from
/// rejection-sampled coset points (at most 2^{k+7} draws per sample).
fn coset_density(
    a: &SetOracle,
    levels: &[ParityOracle],
    addr: u64,
    samples: usize,
    rng: &mut RandomSource,
) -> Result<f64> {
    let cap = 1u64 << (levels.len() + 7);
    let mut hits = 0usize;
    for _ in 0..samples {
        hits += a.query(&sample_in_coset(a, levels, addr, cap, rng)?) as usize;
    }
    Ok(hits as f64 / samples as f64)
}

/// Â_{Hᵢ}(α) for an oracle of α homed at coset `addr`, from rejection samples.
fn coset_correlation(
    a: &SetOracle,
    levels: &[ParityOracle],
    addr: u64,
    o: &ParityOracle,
    samples: usize,
    rng: &mut RandomSource,
) -> Result<f64> {
    let k = levels.len();
    let cap = 1u64 << (k + 7);
    let target = Restriction::new(a, levels, addr);
    let mut sum = 0i64;
    for _ in 0..samples {
        let x = sample_in_coset(a, levels, addr, cap, rng)?;
        if a.query(&x) {
            sum += if o.eval_fixed(&target, &x, addr & mask(k)) { -1 } else { 1 };
        }
    }
    Ok(sum as f64 / samples as f64)
}

/// The regularity construction with parity-oracle labels: the same stage
/// structure as [`construct_dt`](super::construct_dt), but Goldreich–Levin runs
/// implicitly on f = A·1_{Hᵢ} at threshold ε/2^k, trivial candidates are
/// removed by a sampling rank test, and all coset samples come from
/// rejection sampling through the implicit routes.
pub fn construct_implicit_dt(a: &SetOracle, budget: &RegularityBudget, rng: &mut RandomSource) -> Result<RegularityRun> {
    budget.validate()?;
    let n = a.dim();
    let eps = budget.eps;
    let delta = budget.delta();
    let prune_samples = estimate_samples(eps / 4.0, delta);
    let n_points = budget.k_max + 41;
    let mut levels: Vec<ParityOracle> = vec![];
    let mut transcript = vec![];
    let mut queries = PhaseQueries::default();

    for stage in 1..=budget.i_max {
        let k = levels.len();
        let cosets = 1usize << k;
        let before = a.query_count();
        let gl = GlParams::new(eps / cosets as f64, delta)?;
        let srng = rng.split_indexed("stage", stage as u64);
        let q0 = a.query_count();
        let mut check = ImplicitRankCheck::new(a, &levels, n_points, &mut srng.split("rank"));
        queries.independence += a.query_count() - q0;
        // per coset: (survivor record, oracle, rank row)
        let mut survivors: Vec<Vec<(Survivor, ParityOracle, Point)>> = vec![];
        for addr in 0..cosets as u64 {
            let crng = srng.split_indexed("coset", addr);
            let q0 = a.query_count();
            let res = implicit_gl(&Restriction::new(a, &levels, addr), &gl, &mut crng.split("gl"))?;
            let q1 = a.query_count();
            queries.gl += q1 - q0;
            let mut irng = crng.split("trivial");
            let mut prng = crng.split("prune");
            let mut kept = vec![];
            for o in res.oracles.into_iter().filter(|o| !o.constant) {
                let q0 = a.query_count();
                let row = check.row(a, &levels, &o, &mut irng);
                let q1 = a.query_count();
                queries.independence += q1 - q0;
                if !check.accepts(&row) {
                    continue;
                }
                let est = coset_correlation(a, &levels, addr, &o, prune_samples, &mut prng)?;
                queries.prune += a.query_count() - q1;
                if est.abs() >= 0.75 * eps {
                    let s = Survivor { address: addr, frequency: None, oracle_b: Some(o.b), estimate: est };
                    kept.push((s, o, row));
                }
            }
            survivors.push(kept);
        }
        let empty = survivors.iter().filter(|s| s.is_empty()).count();
        let stopped = empty as f64 >= (1.0 - budget.gamma) * cosets as f64;
        let records: Vec<Survivor> = survivors.iter().flatten().map(|(s, _, _)| s.clone()).collect();
        let mut split_from = vec![];
        if !stopped {
            for (s, o, row) in survivors.iter().filter_map(|v| v.first()) {
                if !check.accepts(row) {
                    continue;
                }
                if levels.len() == budget.k_max {
                    return Err(Error::BudgetExhausted(format!("depth would exceed K_max = {}", budget.k_max)));
                }
                check.push(row.clone());
                levels.push(o.clone());
                split_from.push(s.address);
            }
        }
        transcript.push(StageRecord {
            stage,
            depth: k,
            cosets,
            empty_cosets: empty,
            survivors: records,
            stopped,
            split_from,
            labels: vec![],
            depth_after: levels.len(),
            queries: a.query_count() - before,
        });
        if stopped {
            let q0 = a.query_count();
            let samples = estimate_samples(budget.tau / 4.0, delta);
            let mut lrng = rng.split("leaves");
            let mut leaves = vec![];
            for (addr, s) in survivors.iter().enumerate() {
                let density = coset_density(a, &levels, addr as u64, samples, &mut lrng)?;
                let keep = density >= 0.75 * budget.tau && s.is_empty();
                leaves.push(Leaf {
                    address: address_string(addr as u64, k),
                    verdict: if keep { Verdict::Keep } else { Verdict::Zero },
                    density_estimate: density,
                });
            }
            queries.leaves += a.query_count() - q0;
            let tree = ParityDecisionTree { n, labels: Labels::Implicit { oracles: levels }, leaves };
            return Ok(RegularityRun { tree, transcript, budget: budget.clone(), delta, queries });
        }
    }
    Err(Error::BudgetExhausted(format!("no stop within I_max = {} stages", budget.i_max)))
}
