use serde::{Deserialize, Serialize};

use super::linearity::blr_trials;
use super::{amplification, odd_ceil, random_points, GlTarget, ParityOracle, VotingTable};
use crate::error::{Error, Result};
use crate::oracle::BitFn;
use crate::point::Point;
use crate::rng::RandomSource;

/// Parameters of one implicit Goldreich–Levin run, all derived from (θ, δ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlParams {
    pub theta: f64,
    pub delta: f64,
    /// Voting table size; 2^t − 1 voters.
    pub t: usize,
    /// Self-correction anchors per evaluation (odd).
    pub r: usize,
    /// Votes per amplified evaluation (odd).
    pub m: usize,
    pub delta_point: f64,
    /// δ₁ = δθ²/4: confidence of each linearity test and correlation estimate.
    pub delta1: f64,
    pub tau_c: f64,
    pub tau_l: f64,
    pub blr_trials: usize,
    pub corr_samples: usize,
    pub dedup_points: usize,
    pub dedup_tolerance: u32,
}

/// Extra voting-table bits beyond log₂(1/θ²).
pub const TABLE_SLACK: usize = 5;
/// Largest voting table accepted (2²⁰ voters).
pub const MAX_TABLE: usize = 20;

impl GlParams {
    pub fn new(theta: f64, delta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("θ = {theta}, δ = {delta}")));
        }
        let t = table_size(theta);
        if t > MAX_TABLE {
            return Err(Error::InvalidParameter(format!("θ = {theta} needs a 2^{t} voting table")));
        }
        let delta1 = delta * theta * theta / 4.0;
        let (tau_c, tau_l) = (1.0 / 20.0, 1.0 / 5.0);
        let delta_point = 2f64.powi(-20);
        Ok(GlParams {
            theta,
            delta,
            t,
            // a D_b within 1/10 of a parity gives votes wrong w.p. ≤ 1/5;
            // Hoeffding then needs R ≥ ln(1/δ) / (2·0.3²)
            r: odd_ceil((1.0 / delta).ln() / 0.18),
            m: amplification(delta_point),
            delta_point,
            delta1,
            tau_c,
            tau_l,
            blr_trials: blr_trials(tau_c, tau_l, delta1)?,
            corr_samples: estimate_samples(theta / 4.0, delta1),
            dedup_points: 64,
            dedup_tolerance: 4,
        })
    }

    pub fn with_delta_point(mut self, delta_point: f64) -> Self {
        self.delta_point = delta_point;
        self.m = amplification(delta_point);
        self
    }

    pub fn max_survivors(&self) -> usize {
        (4.0 / (self.theta * self.theta)).floor() as usize
    }
}

/// t = ⌈log₂(1/θ²)⌉ + 5.
pub fn table_size(theta: f64) -> usize {
    ((1.0 / (theta * theta)).log2().ceil().max(0.0) as usize) + TABLE_SLACK
}

/// Samples for a ±precision estimate of a mean in [−1, 1] with confidence 1 − δ.
pub fn estimate_samples(precision: f64, delta: f64) -> usize {
    (2.0 * (2.0 / delta).ln() / (precision * precision)).ceil() as usize
}

/// The 2^t candidate decoders D_b sharing one voting table.
pub struct Candidates {
    pub xs: Vec<Point>,
    pub xs_ctx: Vec<u64>,
    pub table: VotingTable,
}

/// Draws X₁…X_t for t = ⌈log₂(1/θ²)⌉ + 5.
pub fn build_candidates(target: &dyn GlTarget, theta: f64, rng: &mut RandomSource) -> Candidates {
    let xs = random_points(target.dim(), table_size(theta), rng);
    let xs_ctx: Vec<u64> = xs.iter().map(|x| target.context(x)).collect();
    let table = VotingTable::new(&xs, &xs_ctx);
    Candidates { xs, xs_ctx, table }
}

impl Candidates {
    pub fn decoder<'a>(&'a self, target: &'a dyn GlTarget, b: u64) -> Decoder<'a> {
        Decoder { table: &self.table, target, b }
    }
}

/// D_b as a bit function.
pub struct Decoder<'a> {
    table: &'a VotingTable,
    target: &'a dyn GlTarget,
    b: u64,
}

impl BitFn for Decoder<'_> {
    fn dim(&self) -> usize {
        self.target.dim()
    }
    fn eval(&self, x: &Point, _: &mut RandomSource) -> bool {
        self.table.decode(self.target, self.b, x, self.target.context(x))
    }
}

/// Self-correction of an arbitrary bit function with R anchors fixed at construction.
pub struct LocalCorrector<'a> {
    d: &'a dyn BitFn,
    anchors: Vec<Point>,
    anchor_bits: Vec<bool>,
}

/// 𝒪(x) = maj_j D(x + Yⱼ) + D(Yⱼ). R must be odd.
pub fn local_correct<'a>(d: &'a dyn BitFn, r: usize, rng: &mut RandomSource) -> Result<LocalCorrector<'a>> {
    if r.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("R = {r} must be odd")));
    }
    let anchors = random_points(d.dim(), r, rng);
    let anchor_bits = anchors.iter().map(|y| d.eval(y, rng)).collect();
    Ok(LocalCorrector { d, anchors, anchor_bits })
}

impl BitFn for LocalCorrector<'_> {
    fn dim(&self) -> usize {
        self.d.dim()
    }
    fn eval(&self, x: &Point, rng: &mut RandomSource) -> bool {
        let ones = self
            .anchors
            .iter()
            .zip(&self.anchor_bits)
            .filter(|(y, &by)| self.d.eval(&(x ^ *y), rng) ^ by)
            .count();
        2 * ones > self.anchors.len()
    }
}

/// Estimates Θ̂ = |E[f(x)·(−1)^{𝒪(x)}]| to ±θ/4 with confidence 1 − δ₁; keeps iff Θ̂ ≥ 3θ/4.
pub fn correlation_filter(
    target: &dyn GlTarget,
    oracle: &ParityOracle,
    theta: f64,
    delta1: f64,
    rng: &mut RandomSource,
) -> (bool, f64) {
    let samples = estimate_samples(theta / 4.0, delta1);
    let mut sum = 0i64;
    for _ in 0..samples {
        let x = Point::random(target.dim(), rng);
        let cx = target.context(&x);
        if target.query(&x, cx) {
            sum += if oracle.eval_fixed(target, &x, cx) { -1 } else { 1 };
        }
    }
    let est = sum.unsigned_abs() as f64 / samples as f64;
    (est >= 0.75 * theta, est)
}

/// Output of [`implicit_gl`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GLResult {
    pub params: GlParams,
    pub oracles: Vec<ParityOracle>,
    /// Offsets b passing the linearity test.
    pub accepted: usize,
    /// Survivors of the correlation filter before deduplication.
    pub correlated: usize,
}

impl GLResult {
    /// Deterministic evaluation of every oracle at x (shared anchors).
    pub fn eval_all_fixed(&self, target: &dyn GlTarget, x: &Point, ctx: u64) -> Vec<bool> {
        let Some(first) = self.oracles.iter().find(|o| !o.constant) else {
            return vec![false; self.oracles.len()];
        };
        let table = first.voting();
        let mut votes = vec![0usize; self.oracles.len()];
        let mut w = Vec::new();
        let mut z = x.clone();
        for (j, y) in first.anchors.iter().enumerate() {
            z.assign_xor_of(x, y);
            table.decode_all(target, &z, ctx ^ first.anchor_routes[j], &mut w);
            for (v, o) in votes.iter_mut().zip(&self.oracles) {
                if !o.constant {
                    *v += ((w[o.b as usize] < 0) ^ o.anchor_bits[j]) as usize;
                }
            }
        }
        votes.iter().map(|&v| 2 * v > first.anchors.len()).collect()
    }

    /// Amplified evaluation of every oracle at x, with m fresh votes shared
    /// across oracles. Costs 2m(2^t − 1) target queries in total.
    pub fn eval_all_amplified(
        &self,
        target: &dyn GlTarget,
        x: &Point,
        ctx: u64,
        m: usize,
        rng: &mut RandomSource,
    ) -> Vec<bool> {
        let Some(first) = self.oracles.iter().find(|o| !o.constant) else {
            return vec![false; self.oracles.len()];
        };
        let table = first.voting();
        let mut votes = vec![0usize; self.oracles.len()];
        let (mut wy, mut wxy) = (Vec::new(), Vec::new());
        for _ in 0..m {
            let y = Point::random(x.dim(), rng);
            let cy = target.context(&y);
            table.decode_all(target, &y, cy, &mut wy);
            table.decode_all(target, &(x ^ &y), ctx ^ cy, &mut wxy);
            for (v, o) in votes.iter_mut().zip(&self.oracles) {
                let b = o.b as usize;
                *v += (!o.constant && ((wy[b] < 0) ^ (wxy[b] < 0))) as usize;
            }
        }
        votes.iter().map(|&v| 2 * v > m).collect()
    }
}

/// Implicit Goldreich–Levin: oracles for the parities χ_α with large |f̂(α)|,
/// without ever writing α down. Query cost depends on (θ, δ) only.
pub fn implicit_gl(target: &dyn GlTarget, params: &GlParams, rng: &mut RandomSource) -> Result<GLResult> {
    let n = target.dim();
    let p = params;
    let cands = build_candidates(target, p.theta, &mut rng.split("table"));
    let table = &cands.table;
    let nb = 1usize << table.t;

    // Linearity test of every D_b on shared triples. D_b decodes either χ_α or
    // its complement (depending on the sign of the heavy coefficient), so a
    // candidate passes if D_b or 1 − D_b looks linear.
    let mut odd = vec![0u32; nb];
    let mut blr = rng.split("blr");
    let (mut wx, mut wy, mut wxy) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..p.blr_trials {
        let x = Point::random(n, &mut blr);
        let y = Point::random(n, &mut blr);
        let (cx, cy) = (target.context(&x), target.context(&y));
        table.decode_all(target, &x, cx, &mut wx);
        table.decode_all(target, &y, cy, &mut wy);
        table.decode_all(target, &(&x ^ &y), cx ^ cy, &mut wxy);
        for b in 0..nb {
            odd[b] += ((wx[b] < 0) ^ (wy[b] < 0) ^ (wxy[b] < 0)) as u32;
        }
    }
    let cut = (3.0 * p.tau_c + p.tau_l) / 2.0 * p.blr_trials as f64;
    let accepted: Vec<usize> =
        (0..nb).filter(|&b| (odd[b].min(p.blr_trials as u32 - odd[b]) as f64) <= cut).collect();

    // Shared correction anchors.
    let mut arng = rng.split("anchors");
    let anchors = random_points(n, p.r, &mut arng);
    let anchor_ctx: Vec<u64> = anchors.iter().map(|y| target.context(y)).collect();
    let mut anchor_bits = vec![vec![false; accepted.len()]; p.r];
    for (j, y) in anchors.iter().enumerate() {
        table.decode_all(target, y, anchor_ctx[j], &mut wx);
        for (k, &b) in accepted.iter().enumerate() {
            anchor_bits[j][k] = wx[b] < 0;
        }
    }
    let eval_accepted = |x: &Point, cx: u64, w: &mut Vec<i32>| -> Vec<bool> {
        let mut votes = vec![0usize; accepted.len()];
        let mut z = x.clone();
        for (j, y) in anchors.iter().enumerate() {
            z.assign_xor_of(x, y);
            table.decode_all(target, &z, cx ^ anchor_ctx[j], w);
            for (k, &b) in accepted.iter().enumerate() {
                votes[k] += ((w[b] < 0) ^ anchor_bits[j][k]) as usize;
            }
        }
        votes.iter().map(|&v| 2 * v > p.r).collect()
    };

    // Correlation filter on shared samples; the zero parity is a candidate
    // of its own with Θ̂ = E[f].
    let mut crng = rng.split("correlation");
    let mut sums = vec![0i64; accepted.len()];
    let mut mass = 0i64;
    for _ in 0..p.corr_samples {
        let x = Point::random(n, &mut crng);
        let cx = target.context(&x);
        if !target.query(&x, cx) {
            continue;
        }
        mass += 1;
        for (s, o) in sums.iter_mut().zip(eval_accepted(&x, cx, &mut wx)) {
            *s += if o { -1 } else { 1 };
        }
    }
    let s = p.corr_samples as f64;
    let keep = 0.75 * p.theta;
    // (accepted index or None for the zero parity, estimate)
    let mut survivors: Vec<(Option<usize>, f64)> = Vec::new();
    if mass as f64 / s >= keep {
        survivors.push((None, mass as f64 / s));
    }
    for (k, &sum) in sums.iter().enumerate() {
        let est = sum.unsigned_abs() as f64 / s;
        if est >= keep {
            survivors.push((Some(k), est));
        }
    }
    let correlated = survivors.len();

    // Merge survivors whose signatures on random points (nearly) agree;
    // distinct parities disagree on about half of them.
    let mut drng = rng.split("dedup");
    let mut sigs = vec![0u64; survivors.len()];
    for i in 0..p.dedup_points.min(64) {
        let w = Point::random(n, &mut drng);
        let cw = target.context(&w);
        let bits = eval_accepted(&w, cw, &mut wx);
        for (sig, (k, _)) in sigs.iter_mut().zip(&survivors) {
            if let Some(k) = k {
                *sig |= (bits[*k] as u64) << i;
            }
        }
    }
    let mut order: Vec<usize> = (0..survivors.len()).collect();
    order.sort_by(|&a, &b| survivors[b].1.total_cmp(&survivors[a].1));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept.iter().all(|&j| (sigs[i] ^ sigs[j]).count_ones() > p.dedup_tolerance) {
            kept.push(i);
        }
    }
    kept.truncate(p.max_survivors());

    let (home, home_depth) = target.home();
    let oracles = kept
        .into_iter()
        .map(|i| match survivors[i] {
            (None, est) => {
                let mut z = ParityOracle::zero(n, p.m, est);
                z.home = home;
                z.home_depth = home_depth;
                z
            }
            (Some(k), est) => ParityOracle {
                n,
                constant: false,
                table: cands.xs.clone(),
                b: accepted[k] as u64,
                anchors: anchors.clone(),
                anchor_bits: anchor_bits.iter().map(|row| row[k]).collect(),
                r: p.r,
                m: p.m,
                estimate: est,
                home,
                home_depth,
                table_routes: cands.xs_ctx.clone(),
                anchor_routes: anchor_ctx.clone(),
                voting: Default::default(),
            },
        })
        .collect();
    Ok(GLResult { params: p.clone(), oracles, accepted: accepted.len(), correlated })
}
