//! Linearity testing, implicit Goldreich–Levin and its explicit counterpart.
//!
//! Every algorithm here reads its input through a [`GlTarget`]: a 0/1
//! function on F₂ᵐ, optionally carrying a linear "context" per point. For a
//! plain set the context is always zero. For a set restricted to a coset of an
//! implicit decision tree the context is the route of the point through the
//! tree; routes are linear, so the route of X ⊕ z is the XOR of the routes of
//! X and z and each decode point needs to be routed only once.

mod explicit;
mod implicit;
mod linearity;

use std::sync::OnceLock;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::gf2::CosetParam;
use crate::oracle::{BitFn, SetOracle};
use crate::point::Point;
use crate::rng::RandomSource;

pub use explicit::{explicit_gl, ExplicitGlParams, ExplicitHit};
pub use implicit::{
    build_candidates, correlation_filter, estimate_samples, implicit_gl, table_size, local_correct, Candidates, Decoder,
    GLResult, GlParams, LocalCorrector,
};
pub use linearity::{linearity_test, LinearityOutcome};

/// A 0/1 function read by the Goldreich–Levin routines.
pub trait GlTarget: Sync {
    fn dim(&self) -> usize;

    /// Linear side information for `x` (a route prefix); may cost queries.
    fn context(&self, _x: &Point) -> u64 {
        0
    }

    /// The function value at `x`, given `x`'s context.
    fn query(&self, x: &Point, ctx: u64) -> bool;

    /// (coset address, tree depth) the queries are restricted to.
    fn home(&self) -> (u64, usize) {
        (0, 0)
    }
}

impl GlTarget for SetOracle {
    fn dim(&self) -> usize {
        SetOracle::dim(self)
    }
    #[inline]
    fn query(&self, x: &Point, _ctx: u64) -> bool {
        SetOracle::query(self, x)
    }
}

/// A set read through a coset parametrization: g(c) = A(p ⊕ Σ cⱼhⱼ).
pub struct CosetTarget<'a> {
    pub base: &'a SetOracle,
    pub param: &'a CosetParam,
}

impl GlTarget for CosetTarget<'_> {
    fn dim(&self) -> usize {
        self.param.dim()
    }
    fn query(&self, c: &Point, _ctx: u64) -> bool {
        self.base.query(&self.param.map(c))
    }
}

/// A set restricted to one coset of an implicit decision tree:
/// f(x) = A(x)·[route(x) = address], routing through `levels`.
pub struct Restriction<'a> {
    pub base: &'a SetOracle,
    pub levels: &'a [ParityOracle],
    pub address: u64,
}

impl<'a> Restriction<'a> {
    pub fn new(base: &'a SetOracle, levels: &'a [ParityOracle], address: u64) -> Self {
        Restriction { base, levels, address }
    }
}

/// Deterministic route of `x` through implicit labels (anchor-fixed evaluation).
pub fn route_fixed(base: &SetOracle, levels: &[ParityOracle], x: &Point) -> u64 {
    let mut r = 0u64;
    for (i, lvl) in levels.iter().enumerate() {
        let home = Restriction::new(base, &levels[..lvl.home_depth], lvl.home);
        if lvl.eval_fixed(&home, x, r & mask(lvl.home_depth)) {
            r |= 1 << i;
        }
    }
    r
}

/// Route of `x` with every level evaluated by its amplified machine.
pub fn route_amplified(base: &SetOracle, levels: &[ParityOracle], x: &Point, rng: &mut RandomSource) -> u64 {
    let mut r = 0u64;
    for (i, lvl) in levels.iter().enumerate() {
        let home = Restriction::new(base, &levels[..lvl.home_depth], lvl.home);
        if lvl.eval_amplified(&home, x, r & mask(lvl.home_depth), lvl.m, rng) {
            r |= 1 << i;
        }
    }
    r
}

#[inline]
pub(crate) fn mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl GlTarget for Restriction<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn context(&self, x: &Point) -> u64 {
        route_fixed(self.base, self.levels, x)
    }
    #[inline]
    fn query(&self, x: &Point, ctx: u64) -> bool {
        ctx == self.address && self.base.query(x)
    }
    fn home(&self) -> (u64, usize) {
        (self.address, self.levels.len())
    }
}

/// The subset sums X^S = Σ_{i∈S} Xᵢ of a voting table, with their contexts.
#[derive(Clone, Debug)]
pub struct VotingTable {
    pub t: usize,
    pub sums: Vec<Point>,
    pub ctx: Vec<u64>,
}

impl VotingTable {
    pub fn new(xs: &[Point], xs_ctx: &[u64]) -> Self {
        let t = xs.len();
        let n = xs.first().map_or(0, Point::dim);
        let mut sums = vec![Point::zero(n); 1 << t];
        let mut ctx = vec![0u64; 1 << t];
        for s in 1..1usize << t {
            let low = s.trailing_zeros() as usize;
            sums[s] = &sums[s & (s - 1)] ^ &xs[low];
            ctx[s] = ctx[s & (s - 1)] ^ xs_ctx[low];
        }
        VotingTable { t, sums, ctx }
    }

    pub fn voters(&self) -> usize {
        (1 << self.t) - 1
    }

    /// W[b] = Σ_{S≠∅} (−1)^{f(X^S+z) + ⟨b,S⟩}; the decoder bit D_b(z) is W[b] < 0.
    /// Makes 2^t − 1 target queries.
    pub fn decode_all(&self, target: &dyn GlTarget, z: &Point, zctx: u64, w: &mut Vec<i32>) {
        w.clear();
        w.resize(self.sums.len(), 0);
        let mut x = z.clone();
        for s in 1..self.sums.len() {
            x.assign_xor_of(&self.sums[s], z);
            w[s] = if target.query(&x, self.ctx[s] ^ zctx) { -1 } else { 1 };
        }
        crate::fourier::wht_in_place(w.as_mut_slice());
    }

    /// D_b(z) alone: majority over S ≠ ∅ of f(X^S + z) + ⟨b, S⟩.
    pub fn decode(&self, target: &dyn GlTarget, b: u64, z: &Point, zctx: u64) -> bool {
        let mut x = z.clone();
        let mut ones = 0usize;
        for s in 1..self.sums.len() {
            x.assign_xor_of(&self.sums[s], z);
            let v = target.query(&x, self.ctx[s] ^ zctx) ^ ((s as u64 & b).count_ones() & 1 == 1);
            ones += v as usize;
        }
        2 * ones > self.voters()
    }
}

/// A probabilistic oracle machine for a hidden parity χ_α, produced by
/// [`implicit_gl`]. It never learns α; it evaluates
/// 𝒪(x) = maj_j D_b(x + Yⱼ) + D_b(Yⱼ), where D_b is the majority decoder over
/// the voting table X₁…X_t with offsets b.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParityOracle {
    pub n: usize,
    /// The identically-zero parity: no queries at all.
    pub constant: bool,
    pub table: Vec<Point>,
    pub b: u64,
    pub anchors: Vec<Point>,
    /// Cached D_b(Yⱼ).
    pub anchor_bits: Vec<bool>,
    pub r: usize,
    pub m: usize,
    pub estimate: f64,
    /// Coset (of the first `home_depth` tree levels) the oracle's queries are restricted to.
    pub home: u64,
    pub home_depth: usize,
    pub table_routes: Vec<u64>,
    pub anchor_routes: Vec<u64>,
    #[serde(skip)]
    voting: OnceLock<VotingTable>,
}

impl ParityOracle {
    pub fn zero(n: usize, m: usize, estimate: f64) -> Self {
        ParityOracle {
            n,
            constant: true,
            table: vec![],
            b: 0,
            anchors: vec![],
            anchor_bits: vec![],
            r: 0,
            m,
            estimate,
            home: 0,
            home_depth: 0,
            table_routes: vec![],
            anchor_routes: vec![],
            voting: OnceLock::new(),
        }
    }

    pub fn voting(&self) -> &VotingTable {
        self.voting.get_or_init(|| VotingTable::new(&self.table, &self.table_routes))
    }

    /// A-queries of one [`eval_fixed`](Self::eval_fixed) call.
    pub fn fixed_cost(&self) -> u64 {
        if self.constant {
            0
        } else {
            ((1u64 << self.table.len()) - 1) * self.r as u64
        }
    }

    /// Deterministic evaluation with the stored anchors.
    pub fn eval_fixed(&self, target: &dyn GlTarget, x: &Point, ctx: u64) -> bool {
        if self.constant {
            return false;
        }
        let v = self.voting();
        let mut z = x.clone();
        let mut ones = 0;
        for (j, y) in self.anchors.iter().enumerate() {
            z.assign_xor_of(x, y);
            ones += (v.decode(target, self.b, &z, ctx ^ self.anchor_routes[j]) ^ self.anchor_bits[j]) as usize;
        }
        2 * ones > self.anchors.len()
    }

    /// One self-correction vote with a fresh anchor y: D_b(x + y) + D_b(y).
    pub fn vote(&self, target: &dyn GlTarget, x: &Point, ctx: u64, rng: &mut RandomSource) -> bool {
        if self.constant {
            return false;
        }
        let v = self.voting();
        let y = Point::random(self.n, rng);
        let yctx = target.context(&y);
        let xy = x ^ &y;
        v.decode(target, self.b, &xy, ctx ^ yctx) ^ v.decode(target, self.b, &y, yctx)
    }

    /// The probabilistic machine: majority of R fresh votes.
    pub fn eval(&self, target: &dyn GlTarget, x: &Point, ctx: u64, rng: &mut RandomSource) -> bool {
        self.majority(target, x, ctx, self.r, rng)
    }

    /// Majority of `m` fresh votes; per-point error below δ_point when
    /// m = 2⌈6 ln(1/δ_point)⌉ + 1.
    pub fn eval_amplified(&self, target: &dyn GlTarget, x: &Point, ctx: u64, m: usize, rng: &mut RandomSource) -> bool {
        self.majority(target, x, ctx, m, rng)
    }

    fn majority(&self, target: &dyn GlTarget, x: &Point, ctx: u64, k: usize, rng: &mut RandomSource) -> bool {
        if self.constant {
            return false;
        }
        let ones = (0..k).filter(|_| self.vote(target, x, ctx, rng)).count();
        2 * ones > k
    }

    /// Binds the oracle to a whole-space target as a [`BitFn`].
    pub fn bind<'a>(&'a self, target: &'a dyn GlTarget, mode: EvalMode) -> BoundOracle<'a> {
        BoundOracle { oracle: self, target, mode }
    }
}

/// Number of majority votes giving per-point confidence 1 − δ_point.
pub fn amplification(delta_point: f64) -> usize {
    2 * (6.0 * (1.0 / delta_point).ln()).ceil() as usize + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Fixed,
    Probabilistic,
    Amplified,
}

pub struct BoundOracle<'a> {
    oracle: &'a ParityOracle,
    target: &'a dyn GlTarget,
    mode: EvalMode,
}

impl BitFn for BoundOracle<'_> {
    fn dim(&self) -> usize {
        self.oracle.n
    }
    fn eval(&self, x: &Point, rng: &mut RandomSource) -> bool {
        let ctx = self.target.context(x);
        match self.mode {
            EvalMode::Fixed => self.oracle.eval_fixed(self.target, x, ctx),
            EvalMode::Probabilistic => self.oracle.eval(self.target, x, ctx, rng),
            EvalMode::Amplified => self.oracle.eval_amplified(self.target, x, ctx, self.oracle.m, rng),
        }
    }
}

pub(crate) fn random_points<R: RngCore + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<Point> {
    (0..k).map(|_| Point::random(n, rng)).collect()
}

/// Smallest odd integer ≥ x.
pub(crate) fn odd_ceil(x: f64) -> usize {
    let c = x.ceil().max(1.0) as usize;
    if c.is_multiple_of(2) {
        c + 1
    } else {
        c
    }
}
