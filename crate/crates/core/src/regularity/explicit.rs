use super::{
    address_bits, address_string, Labels, Leaf, ParityDecisionTree, PhaseQueries, RegularityBudget, RegularityRun,
    StageRecord, Survivor, Verdict,
};
use crate::error::{Error, Result};
use crate::gf2::{particular_solution, CosetParam, EchelonBasis};
use crate::oracle::SetOracle;
use crate::parity::{estimate_samples, explicit_gl, CosetTarget, ExplicitGlParams};
use crate::point::Point;
use crate::rng::RandomSource;

/// Estimate of Â_{H}(β) on the coset parametrized by `param`.
fn coset_coefficient(a: &SetOracle, param: &CosetParam, beta: &Point, samples: usize, rng: &mut RandomSource) -> f64 {
    let mut sum = 0i64;
    for _ in 0..samples {
        let x = param.sample(rng);
        if a.query(&x) {
            sum += if beta.dot(&x) { -1 } else { 1 };
        }
    }
    sum as f64 / samples as f64
}

/// Builds an ε-regular nonadaptive PDT for A with explicit labels.
///
/// Each stage runs Goldreich–Levin on A↾Hᵢ for every leaf, drops trivial
/// frequencies (those in span of the labels), prunes the rest with a fresh
/// ±ε/4 estimate, and stops once at least a (1 − γ) fraction of leaves have no
/// survivor. Otherwise each leaf with survivors, in increasing address order,
/// contributes its first survivor as a new label when that keeps the labels
/// independent. Leaves are kept iff their estimated density is ≥ 3τ/4 and they
/// had no survivor at the final stage.
pub fn construct_dt(a: &SetOracle, budget: &RegularityBudget, rng: &mut RandomSource) -> Result<RegularityRun> {
    budget.validate()?;
    let n = a.dim();
    let eps = budget.eps;
    let delta = budget.delta();
    let gl = ExplicitGlParams::new(eps, delta)?;
    let prune_samples = estimate_samples(eps / 4.0, delta);
    let mut labels: Vec<Point> = vec![];
    let mut basis = EchelonBasis::new(n);
    let mut transcript = vec![];
    let mut queries = PhaseQueries::default();

    for stage in 1..=budget.i_max {
        let k = labels.len();
        let before = a.query_count();
        let mut survivors: Vec<Vec<Survivor>> = vec![];
        for addr in 0..1u64 << k {
            let param = CosetParam::new(&labels, &address_bits(addr, k), n)?;
            let srng = rng.split_indexed("stage", stage as u64).split_indexed("coset", addr);
            let q0 = a.query_count();
            let hits = explicit_gl(&CosetTarget { base: a, param: &param }, &gl, &mut srng.split("gl"))?;
            let q1 = a.query_count();
            let mut prng = srng.split("prune");
            let mut kept = vec![];
            for hit in hits.iter().filter(|h| !h.alpha.is_zero()) {
                let bits: Vec<bool> = (0..param.dim()).map(|j| hit.alpha.bit(j)).collect();
                let beta = particular_solution(param.basis(), &bits, n)?;
                let est = coset_coefficient(a, &param, &beta, prune_samples, &mut prng);
                if est.abs() >= 0.75 * eps {
                    kept.push(Survivor { address: addr, frequency: Some(beta), oracle_b: None, estimate: est });
                }
            }
            queries.gl += q1 - q0;
            queries.prune += a.query_count() - q1;
            survivors.push(kept);
        }
        let cosets = survivors.len();
        let empty = survivors.iter().filter(|s| s.is_empty()).count();
        let stopped = empty as f64 >= (1.0 - budget.gamma) * cosets as f64;
        let mut split_from = vec![];
        if !stopped {
            for s in &survivors {
                let Some(first) = s.first() else { continue };
                let beta = first.frequency.as_ref().expect("explicit survivor");
                if basis.contains(beta) {
                    continue;
                }
                if labels.len() == budget.k_max {
                    return Err(Error::BudgetExhausted(format!("depth would exceed K_max = {}", budget.k_max)));
                }
                basis.insert(beta);
                labels.push(beta.clone());
                split_from.push(first.address);
            }
        }
        transcript.push(StageRecord {
            stage,
            depth: k,
            cosets,
            empty_cosets: empty,
            survivors: survivors.iter().flatten().cloned().collect(),
            stopped,
            split_from,
            labels: labels.clone(),
            depth_after: labels.len(),
            queries: a.query_count() - before,
        });
        if stopped {
            let leaves = final_leaves(a, &labels, &survivors, budget, delta, &mut rng.split("leaves"), &mut queries)?;
            let tree = ParityDecisionTree { n, labels: Labels::Explicit { alphas: labels }, leaves };
            return Ok(RegularityRun { tree, transcript, budget: budget.clone(), delta, queries });
        }
    }
    Err(Error::BudgetExhausted(format!("no stop within I_max = {} stages", budget.i_max)))
}

fn final_leaves(
    a: &SetOracle,
    labels: &[Point],
    survivors: &[Vec<Survivor>],
    budget: &RegularityBudget,
    delta: f64,
    rng: &mut RandomSource,
    queries: &mut PhaseQueries,
) -> Result<Vec<Leaf>> {
    let k = labels.len();
    let samples = estimate_samples(budget.tau / 4.0, delta);
    let q0 = a.query_count();
    let mut leaves = vec![];
    for (addr, s) in survivors.iter().enumerate() {
        let param = CosetParam::new(labels, &address_bits(addr as u64, k), a.dim())?;
        let density = (0..samples).filter(|_| a.query(&param.sample(rng))).count() as f64 / samples as f64;
        let keep = density >= 0.75 * budget.tau && s.is_empty();
        leaves.push(Leaf {
            address: address_string(addr as u64, k),
            verdict: if keep { Verdict::Keep } else { Verdict::Zero },
            density_estimate: density,
        });
    }
    queries.leaves += a.query_count() - q0;
    Ok(leaves)
}
