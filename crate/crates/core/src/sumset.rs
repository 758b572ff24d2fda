//! Sumset oracles from a regular decision tree, volume estimation, and an
//! exhaustive audit against ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{brute_sumset, restricted_spectrum};
use crate::oracle::{BitFn, SetOracle, StoredSet};
use crate::point::Point;
use crate::regularity::{
    construct_dt, construct_implicit_dt, route_explicit, ParityDecisionTree, RegularityBudget, RegularityRun, Verdict,
};
use crate::rng::RandomSource;

/// Leaf c of the sum tree is 1 iff c = b + b' for keep-leaves b, b'.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumTree {
    pub depth: usize,
    pub ones: Vec<bool>,
}

impl SumTree {
    pub fn from_keep(depth: usize, keep: &[u64]) -> Self {
        let mut ones = vec![false; 1 << depth];
        for &b in keep {
            for &c in keep {
                ones[(b ^ c) as usize] = true;
            }
        }
        SumTree { depth, ones }
    }

    pub fn from_tree(tree: &ParityDecisionTree) -> Self {
        Self::from_keep(tree.depth(), &tree.keep_addresses())
    }

    pub fn verdict(&self, addr: u64) -> bool {
        self.ones[addr as usize]
    }

    pub fn one_leaves(&self) -> usize {
        self.ones.iter().filter(|&&v| v).count()
    }

    /// Vol of the sumset oracle: one-leaves over all leaves.
    pub fn volume(&self) -> f64 {
        self.one_leaves() as f64 / self.ones.len() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Explicit,
    Implicit,
}

/// Output of [`simulate_sumset`]: the regularity run and its sum tree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SumsetRun {
    pub mode: Mode,
    pub regularity: RegularityRun,
    pub sum_tree: SumTree,
}

impl SumsetRun {
    pub fn tree(&self) -> &ParityDecisionTree {
        &self.regularity.tree
    }

    /// 𝒪_{A′+A′}(x): route x and read the sum tree. No A-queries with
    /// explicit labels; routing queries only with implicit ones.
    pub fn sumset(&self, base: &SetOracle, x: &Point, rng: &mut RandomSource) -> bool {
        self.sum_tree.verdict(self.tree().route(base, x, rng))
    }

    pub fn a_prime(&self, base: &SetOracle, x: &Point, rng: &mut RandomSource) -> bool {
        self.tree().a_prime(base, x, rng)
    }

    pub fn sumset_oracle<'a>(&'a self, base: &'a SetOracle) -> SumsetOracle<'a> {
        SumsetOracle { run: self, base }
    }

    pub fn a_prime_oracle<'a>(&'a self, base: &'a SetOracle) -> crate::regularity::APrimeOracle<'a> {
        crate::regularity::APrimeOracle { tree: self.tree(), base }
    }
}

pub struct SumsetOracle<'a> {
    run: &'a SumsetRun,
    base: &'a SetOracle,
}

impl BitFn for SumsetOracle<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &Point, rng: &mut RandomSource) -> bool {
        self.run.sumset(self.base, x, rng)
    }
}

/// Builds the regular tree (explicitly or with parity-oracle labels) and the
/// sum tree over its keep-leaves.
pub fn simulate_sumset(
    a: &SetOracle,
    budget: &RegularityBudget,
    mode: Mode,
    rng: &mut RandomSource,
) -> Result<SumsetRun> {
    let regularity = match mode {
        Mode::Explicit => construct_dt(a, budget, &mut rng.split("regularity"))?,
        Mode::Implicit => construct_implicit_dt(a, budget, &mut rng.split("regularity"))?,
    };
    let sum_tree = SumTree::from_tree(&regularity.tree);
    Ok(SumsetRun { mode, regularity, sum_tree })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub precision: f64,
    pub confidence: f64,
    pub samples: usize,
}

/// Vol(O) to ±γ with probability 1 − δ from ⌈2 ln(2/δ)/γ²⌉ uniform samples.
pub fn estimate_volume(o: &dyn BitFn, gamma: f64, delta: f64, rng: &mut RandomSource) -> Result<VolumeEstimate> {
    if !(gamma > 0.0 && gamma < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("γ = {gamma}, δ = {delta}")));
    }
    let samples = crate::parity::estimate_samples(gamma, delta);
    let n = o.dim();
    let hits = (0..samples).filter(|_| o.eval(&Point::random(n, rng), rng)).count();
    Ok(VolumeEstimate { value: hits as f64 / samples as f64, precision: gamma, confidence: delta, samples })
}

/// Exhaustive facts about one leaf of an explicit tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosetAudit {
    pub address: String,
    pub verdict: Verdict,
    pub density_estimate: f64,
    pub density: f64,
    /// Largest nontrivial |Â_{Hᵢ}(β)|.
    pub max_nontrivial: f64,
    pub witness: Option<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub eps: f64,
    pub tau: f64,
    pub c: f64,
    pub a_prime_subset: bool,
    pub loss: f64,
    /// max nontrivial coefficient over kept cosets (0 when nothing is kept).
    pub eps_hat: f64,
    /// min exact density over kept cosets (1 when nothing is kept).
    pub tau_hat: f64,
    pub sumset_distance: f64,
    pub sumset_bound: f64,
    pub cosets: Vec<CosetAudit>,
    pub clauses: Vec<Clause>,
    pub pass: bool,
}

impl AuditReport {
    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

/// Checks a run against ground truth by exhaustive computation (n ≤ 20;
/// explicit trees). Clauses:
/// - `a_prime_subset`: A′ ⊆ A;
/// - `loss`: Vol(A ∖ A′) ≤ ε + τ;
/// - `kept_density`: every kept coset has exact density ≥ τ/2;
/// - `kept_quasirandom`: every kept coset is ε-quasirandom;
/// - `zeroed_legal`: every zeroed coset has density < τ or a nontrivial
///   coefficient ≥ ε/2 (anything inside the estimation bands is legal);
/// - `sumset_distance`: dist(𝒪_{A′+A′}, A′+A′) ≤ C·ε̂²/τ̂⁴, with ε̂ and τ̂ the
///   measured quasirandomness and minimum density of the kept cosets.
pub fn audit(a: &StoredSet, eps: f64, tau: f64, run: &SumsetRun, c: f64) -> Result<AuditReport> {
    let n = a.dim();
    if n > 20 {
        return Err(Error::TooLarge { n, cap: 20 });
    }
    let tree = run.tree();
    let Some(alphas) = tree.alphas() else {
        return Err(Error::InvalidParameter("audit needs explicit labels".into()));
    };
    let ind: Vec<f64> = a.indicator();
    let mut cosets = vec![];
    for (addr, leaf) in tree.leaves.iter().enumerate() {
        let spec = tree.coset(addr as u64);
        let rs = restricted_spectrum(&ind, &spec)?;
        let (u, max) = rs.local.max_nontrivial();
        cosets.push(CosetAudit {
            address: leaf.address.clone(),
            verdict: leaf.verdict,
            density_estimate: leaf.density_estimate,
            density: rs.density(),
            max_nontrivial: max,
            witness: (max > 0.0).then(|| rs.frequency(u)),
        });
    }
    let a_prime = tree.a_prime_set(a);
    let a_prime_subset = a_prime.is_subset(a);
    let loss = a.difference(&a_prime).volume();
    let kept: Vec<&CosetAudit> = cosets.iter().filter(|c| c.verdict == Verdict::Keep).collect();
    let eps_hat = kept.iter().map(|c| c.max_nontrivial).fold(0.0, f64::max);
    let tau_hat = kept.iter().map(|c| c.density).fold(1.0, f64::min);

    let truth = brute_sumset(&a_prime);
    let mut mismatches = 0u64;
    for x in 0..1u64 << n {
        let p = Point::from_u64(n, x);
        if run.sum_tree.verdict(route_explicit(alphas, &p)) != truth.contains_index(x as usize) {
            mismatches += 1;
        }
    }
    let sumset_distance = mismatches as f64 / (1u64 << n) as f64;
    let sumset_bound = if kept.is_empty() { 0.0 } else { c * eps_hat * eps_hat / tau_hat.powi(4) };

    let tol = 1e-12;
    let mut clauses = vec![
        Clause { name: "a_prime_subset".into(), pass: a_prime_subset, detail: format!("|A′| = {}", a_prime.len()) },
        Clause { name: "loss".into(), pass: loss <= eps + tau + tol, detail: format!("Vol(A∖A′) = {loss}") },
    ];
    let bad_density: Vec<&str> =
        kept.iter().filter(|c| c.density < tau / 2.0 - tol).map(|c| c.address.as_str()).collect();
    clauses.push(Clause {
        name: "kept_density".into(),
        pass: bad_density.is_empty(),
        detail: format!("below τ/2: {bad_density:?}"),
    });
    let bad_qr: Vec<&str> = kept.iter().filter(|c| c.max_nontrivial > eps + tol).map(|c| c.address.as_str()).collect();
    clauses.push(Clause {
        name: "kept_quasirandom".into(),
        pass: bad_qr.is_empty(),
        detail: format!("ε̂ = {eps_hat}; not ε-quasirandom: {bad_qr:?}"),
    });
    let bad_zero: Vec<&str> = cosets
        .iter()
        .filter(|c| c.verdict == Verdict::Zero && c.density >= tau - tol && c.max_nontrivial < eps / 2.0 - tol)
        .map(|c| c.address.as_str())
        .collect();
    clauses.push(Clause {
        name: "zeroed_legal".into(),
        pass: bad_zero.is_empty(),
        detail: format!("dense quasirandom cosets zeroed: {bad_zero:?}"),
    });
    clauses.push(Clause {
        name: "sumset_distance".into(),
        pass: sumset_distance <= sumset_bound + tol,
        detail: format!("dist = {sumset_distance}, bound C·ε̂²/τ̂⁴ = {sumset_bound}"),
    });
    let pass = clauses.iter().all(|c| c.pass);
    Ok(AuditReport {
        eps,
        tau,
        c,
        a_prime_subset,
        loss,
        eps_hat,
        tau_hat,
        sumset_distance,
        sumset_bound,
        cosets,
        clauses,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_matches_definition() {
        for k in 0..5usize {
            for mask in 0..1u64 << (1 << k).min(8) {
                let keep: Vec<u64> = (0..1u64 << k).filter(|&b| (mask >> (b % 8)) & 1 == 1 && b < 8).collect();
                let t = SumTree::from_keep(k, &keep);
                for cc in 0..1u64 << k {
                    let expect = keep.iter().any(|&b| keep.iter().any(|&b2| b ^ b2 == cc));
                    assert_eq!(t.verdict(cc), expect);
                }
            }
        }
    }

    #[test]
    fn closure_is_monotone() {
        let small = SumTree::from_keep(3, &[1, 2]);
        let big = SumTree::from_keep(3, &[1, 2, 6]);
        assert!(small.ones.iter().zip(&big.ones).all(|(&s, &b)| !s || b));
        assert_eq!(SumTree::from_keep(3, &[]).one_leaves(), 0);
    }

    #[test]
    fn volume_of_constant_one_is_exact() {
        let full = StoredSet::full(10).unwrap();
        let v = estimate_volume(&full, 0.05, 0.05, &mut RandomSource::new(1)).unwrap();
        assert_eq!(v.value, 1.0);
        assert_eq!(v.samples, (2.0 * 40f64.ln() / 0.0025).ceil() as usize);
        assert!(estimate_volume(&full, 0.0, 0.05, &mut RandomSource::new(1)).is_err());
    }
}
