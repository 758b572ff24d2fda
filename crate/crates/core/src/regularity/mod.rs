//! Nonadaptive parity decision trees and the constructive regularity
//! decomposition, with explicit and implicit (parity-oracle) labels.

mod explicit;
mod implicit;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::CosetSpec;
use crate::gf2::{EchelonBasis, GF2Matrix};
use crate::oracle::{BitFn, SetOracle, StoredSet};
use crate::parity::{mask, route_amplified, route_fixed, ParityOracle, Restriction};
use crate::point::Point;
use crate::rng::RandomSource;

pub use explicit::construct_dt;
pub use implicit::{construct_implicit_dt, ImplicitRankCheck};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Keep,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    /// b₁…b_k as a bit string.
    pub address: String,
    pub verdict: Verdict,
    pub density_estimate: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Labels {
    Explicit { alphas: Vec<Point> },
    Implicit { oracles: Vec<ParityOracle> },
}

/// A nonadaptive PDT: level i is labelled by one parity, and leaf
/// `address` (bit i − 1 = bᵢ) is the coset {x : ⟨αᵢ, x⟩ = bᵢ for all i}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParityDecisionTree {
    pub n: usize,
    pub labels: Labels,
    pub leaves: Vec<Leaf>,
}

pub fn address_string(addr: u64, k: usize) -> String {
    (0..k).map(|i| if (addr >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn address_bits(addr: u64, k: usize) -> Vec<bool> {
    (0..k).map(|i| (addr >> i) & 1 == 1).collect()
}

impl ParityDecisionTree {
    pub fn depth(&self) -> usize {
        match &self.labels {
            Labels::Explicit { alphas } => alphas.len(),
            Labels::Implicit { oracles } => oracles.len(),
        }
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.labels, Labels::Explicit { .. })
    }

    pub fn alphas(&self) -> Option<&[Point]> {
        match &self.labels {
            Labels::Explicit { alphas } => Some(alphas),
            Labels::Implicit { .. } => None,
        }
    }

    pub fn oracles(&self) -> Option<&[ParityOracle]> {
        match &self.labels {
            Labels::Implicit { oracles } => Some(oracles),
            Labels::Explicit { .. } => None,
        }
    }

    /// bᵢ = ⟨αᵢ, x⟩; explicit trees only.
    pub fn route_explicit(&self, x: &Point) -> u64 {
        route_explicit(self.alphas().expect("explicit tree"), x)
    }

    /// Explicit routing, or amplified oracle routing for implicit labels.
    pub fn route(&self, base: &SetOracle, x: &Point, rng: &mut RandomSource) -> u64 {
        match &self.labels {
            Labels::Explicit { alphas } => route_explicit(alphas, x),
            Labels::Implicit { oracles } => route_amplified(base, oracles, x, rng),
        }
    }

    /// Routing with deterministic (anchor-fixed) oracle evaluation.
    pub fn route_fixed(&self, base: &SetOracle, x: &Point) -> u64 {
        match &self.labels {
            Labels::Explicit { alphas } => route_explicit(alphas, x),
            Labels::Implicit { oracles } => route_fixed(base, oracles, x),
        }
    }

    pub fn keep(&self, addr: u64) -> bool {
        self.leaves[addr as usize].verdict == Verdict::Keep
    }

    pub fn keep_addresses(&self) -> Vec<u64> {
        (0..self.leaves.len() as u64).filter(|&a| self.keep(a)).collect()
    }

    /// 𝒪_{A′}(x) = verdict(route(x))·A(x). Always makes exactly one query
    /// to A, plus routing queries for implicit labels.
    pub fn a_prime(&self, base: &SetOracle, x: &Point, rng: &mut RandomSource) -> bool {
        let keep = self.keep(self.route(base, x, rng));
        base.query(x) && keep
    }

    /// The coset of leaf `addr`; explicit trees only.
    pub fn coset(&self, addr: u64) -> CosetSpec {
        let alphas = self.alphas().expect("explicit tree").to_vec();
        let k = alphas.len();
        CosetSpec::new(self.n, alphas, address_bits(addr, k)).expect("labels are independent")
    }

    /// The set A′ ⊆ A computed exhaustively with explicit routing.
    pub fn a_prime_set(&self, a: &StoredSet) -> StoredSet {
        let alphas = self.alphas().expect("explicit tree");
        let mut out = StoredSet::empty(a.dim()).expect("same dimension");
        for i in a.indices() {
            if self.keep(route_explicit(alphas, &Point::from_u64(a.dim(), i as u64))) {
                out.insert_index(i);
            }
        }
        out
    }
}

pub fn route_explicit(alphas: &[Point], x: &Point) -> u64 {
    alphas.iter().enumerate().fold(0, |r, (i, a)| r | ((a.dot(x) as u64) << i))
}

/// 𝒪_{A′} as a bit function.
pub struct APrimeOracle<'a> {
    pub tree: &'a ParityDecisionTree,
    pub base: &'a SetOracle,
}

impl BitFn for APrimeOracle<'_> {
    fn dim(&self) -> usize {
        self.tree.n
    }
    fn eval(&self, x: &Point, rng: &mut RandomSource) -> bool {
        self.tree.a_prime(self.base, x, rng)
    }
}

/// Caps and accuracy parameters of the decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityBudget {
    pub k_max: usize,
    pub i_max: usize,
    pub eps: f64,
    pub tau: f64,
    pub gamma: f64,
}

impl RegularityBudget {
    /// Defaults: K_max = 12, I_max = ⌈4/ε³⌉, γ = ε.
    pub fn new(eps: f64, tau: f64) -> Result<Self> {
        let b = RegularityBudget { k_max: 12, i_max: (4.0 / eps.powi(3)).ceil() as usize, eps, tau, gamma: eps };
        b.validate()?;
        Ok(b)
    }

    pub fn with_caps(mut self, k_max: usize, i_max: usize) -> Self {
        self.k_max = k_max;
        self.i_max = i_max;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !(unit(self.eps) && unit(self.tau) && unit(self.gamma)) || self.i_max == 0 || self.k_max > 60 {
            return Err(Error::InvalidParameter(format!("{self:?}")));
        }
        Ok(())
    }

    /// Number of GL calls and estimates a run can make:
    /// stages·2^K·(1 + ⌈4/ε²⌉) + 2^K, with stages ≤ min(I_max, K_max + 1).
    pub fn estimate_count(&self) -> f64 {
        let stages = self.i_max.min(self.k_max + 1) as f64;
        let leaves = 2f64.powi(self.k_max as i32);
        stages * leaves * (1.0 + (4.0 / (self.eps * self.eps)).ceil()) + leaves
    }

    /// Per-estimate confidence δ = 1/(30·B).
    pub fn delta(&self) -> f64 {
        1.0 / (30.0 * self.estimate_count())
    }
}

/// (1/M) Σᵢ Vol_{Hᵢ}(A)² over the cosets of the labels.
pub fn expimb(a: &StoredSet, alphas: &[Point]) -> f64 {
    let k = alphas.len();
    let mut counts = vec![0u64; 1 << k];
    for x in a.points() {
        counts[route_explicit(alphas, &x) as usize] += 1;
    }
    let size = (1u64 << (a.dim() - k)) as f64;
    counts.iter().map(|&c| (c as f64 / size).powi(2)).sum::<f64>() / (1u64 << k) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Survivor {
    pub address: u64,
    /// Explicit frequency, or the decoder offset of an implicit oracle.
    pub frequency: Option<Point>,
    pub oracle_b: Option<u64>,
    pub estimate: f64,
}

/// One line of the run transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub depth: usize,
    pub cosets: usize,
    pub empty_cosets: usize,
    pub survivors: Vec<Survivor>,
    pub stopped: bool,
    /// Addresses whose chosen survivor became a new label.
    pub split_from: Vec<u64>,
    /// Explicit labels after the stage (empty for implicit runs).
    pub labels: Vec<Point>,
    pub depth_after: usize,
    pub queries: u64,
}

/// A-queries by phase of a construction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseQueries {
    pub gl: u64,
    pub prune: u64,
    pub independence: u64,
    pub leaves: u64,
}

impl PhaseQueries {
    pub fn total(&self) -> u64 {
        self.gl + self.prune + self.independence + self.leaves
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityRun {
    pub tree: ParityDecisionTree,
    pub transcript: Vec<StageRecord>,
    pub budget: RegularityBudget,
    pub delta: f64,
    pub queries: PhaseQueries,
}

impl RegularityRun {
    pub fn transcript_jsonl(&self) -> String {
        self.transcript.iter().map(|r| serde_json::to_string(r).expect("serializable") + "\n").collect()
    }

    pub fn stages(&self) -> usize {
        self.transcript.len()
    }
}

/// ExpImb before and after one splitting stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpImbStep {
    pub stage: usize,
    pub before: f64,
    pub after: f64,
    pub required: f64,
    pub ok: bool,
}

/// Recomputes ExpImb across the stages of an explicit transcript and checks
/// an increase of at least ε³/4 at every stage that split.
pub fn expimb_audit(a: &StoredSet, transcript: &[StageRecord], eps: f64) -> Vec<ExpImbStep> {
    let required = eps.powi(3) / 4.0;
    let mut prev: Vec<Point> = vec![];
    let mut steps = vec![];
    for rec in transcript {
        if rec.depth_after > rec.depth {
            let before = expimb(a, &prev);
            let after = expimb(a, &rec.labels);
            steps.push(ExpImbStep { stage: rec.stage, before, after, required, ok: after - before >= required - 1e-12 });
        }
        prev = rec.labels.clone();
    }
    steps
}

/// Exact GF(2) check that `candidates` ∪ `existing` is linearly independent.
pub fn independence_check_explicit(candidates: &[Point], existing: &[Point]) -> bool {
    let Some(n) = candidates.first().or(existing.first()).map(Point::dim) else { return true };
    let mut basis = EchelonBasis::new(n);
    existing.iter().chain(candidates).all(|p| basis.insert(p))
}

/// Sampling rank check for parities given only as bit functions: evaluate
/// all k of them on N uniform points and accept iff the k × N matrix has
/// rank k. Dependent parities can only pass through evaluation errors;
/// independent ones are rejected with probability at most 2^{k²−N}.
pub fn independence_check_fns(fns: &[&dyn BitFn], n_points: usize, rng: &mut RandomSource) -> bool {
    let Some(first) = fns.first() else { return true };
    let n = first.dim();
    let pts: Vec<Point> = (0..n_points).map(|_| Point::random(n, rng)).collect();
    let mut rows = Vec::with_capacity(fns.len());
    for f in fns {
        let mut row = Point::zero(n_points);
        for (j, x) in pts.iter().enumerate() {
            row.set_bit(j, f.eval(x, rng));
        }
        rows.push(row);
    }
    GF2Matrix::new(n_points, rows).expect("rows have length N").rank() == fns.len()
}

/// Estimates the density of the coset `addr` of an implicit tree by rejection
/// sampling: draw uniform points until one routes to `addr`.
pub(crate) fn sample_in_coset(
    base: &SetOracle,
    levels: &[ParityOracle],
    addr: u64,
    cap: u64,
    rng: &mut RandomSource,
) -> Result<Point> {
    let n = base.dim();
    for _ in 0..cap {
        let x = Point::random(n, rng);
        if route_fixed(base, levels, &x) == addr & mask(levels.len()) {
            return Ok(x);
        }
    }
    Err(Error::RejectionStall(cap))
}

pub(crate) fn restriction<'a>(base: &'a SetOracle, levels: &'a [ParityOracle], o: &ParityOracle) -> Restriction<'a> {
    Restriction::new(base, &levels[..o.home_depth], o.home)
}
