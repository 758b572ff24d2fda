use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{mask, GlTarget};
use crate::error::{Error, Result};
use crate::fourier::wht_in_place;
use crate::point::Point;
use crate::rng::RandomSource;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitGlParams {
    pub theta: f64,
    pub delta: f64,
    /// Prefix bits fixed per descent step.
    pub block: usize,
    /// Read the whole domain and transform exactly when that takes no more
    /// queries than sampling would.
    pub allow_exhaustive: bool,
}

impl ExplicitGlParams {
    pub fn new(theta: f64, delta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("θ = {theta}, δ = {delta}")));
        }
        Ok(ExplicitGlParams { theta, delta, block: 4, allow_exhaustive: true })
    }

    /// Bucket cap from Parseval: at most 4/θ² buckets carry weight ≥ θ²/4.
    pub fn cap(&self) -> usize {
        (4.0 / (self.theta * self.theta)).ceil() as usize
    }

    /// Per-estimate confidence after a union bound over every bucket examined.
    pub fn delta_per_estimate(&self, m: usize) -> f64 {
        let levels = m.div_ceil(self.block).max(1);
        self.delta / (levels * (1 << self.block) * self.cap()) as f64
    }

    /// Pair samples per internal level (weights to ±θ²/4).
    pub fn pair_samples(&self, m: usize) -> usize {
        let l = (2.0 / self.delta_per_estimate(m)).ln();
        (32.0 * l / self.theta.powi(4)).ceil() as usize
    }

    pub fn sampling_only(mut self) -> Self {
        self.allow_exhaustive = false;
        self
    }

    /// Queries the sampling search makes at most on a domain of dimension m.
    pub fn sampling_cost(&self, m: usize) -> u64 {
        let internal = m.div_ceil(self.block).max(1) - 1;
        (2 * internal * self.pair_samples(m) + self.final_samples(m)) as u64
    }

    /// Samples of the final coefficient estimates (to ±θ/4).
    pub fn final_samples(&self, m: usize) -> usize {
        let l = (2.0 / self.delta_per_estimate(m)).ln();
        (32.0 * l / (self.theta * self.theta)).ceil() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitHit {
    pub alpha: Point,
    /// Estimated coefficient f̂(α) (signed).
    pub estimate: f64,
}

/// Exact spectrum from all 2^m values; keeps |f̂(α)| ≥ 3θ/4 like the search.
fn exhaustive(target: &dyn GlTarget, theta: f64) -> Vec<ExplicitHit> {
    let m = target.dim();
    let mut f: Vec<i64> = (0..1u64 << m).map(|c| target.query(&Point::from_u64(m, c), 0) as i64).collect();
    wht_in_place(&mut f);
    let size = f.len() as f64;
    f.iter()
        .enumerate()
        .map(|(a, &v)| (a, v as f64 / size))
        .filter(|(_, v)| v.abs() >= 0.75 * theta)
        .map(|(a, v)| ExplicitHit { alpha: Point::from_u64(m, a as u64), estimate: v })
        .collect()
}

#[inline]
fn parity(v: u64) -> bool {
    v.count_ones() & 1 == 1
}

/// Classic prefix-bucket Goldreich–Levin. Bucket w (a prefix of α) has
/// weight Σ_{α extends w} f̂(α)² = E_{x,y,y'}[f(y,x)f(y',x)χ_w(y+y')];
/// buckets estimated at ≥ θ²/2 are refined by `block` more bits. Complete
/// frequencies are kept iff their estimated |f̂(α)| ≥ 3θ/4.
///
/// Every α with |f̂(α)| ≥ θ is returned and every returned α has
/// |f̂(α)| ≥ θ/2, with probability 1 − δ. Works for dimensions up to 64.
pub fn explicit_gl(target: &dyn GlTarget, params: &ExplicitGlParams, rng: &mut RandomSource) -> Result<Vec<ExplicitHit>> {
    let m = target.dim();
    if m > 64 {
        return Err(Error::InvalidParameter(format!("explicit search supports m ≤ 64, got {m}")));
    }
    let theta = params.theta;
    let at = |c: u64| Point::from_u64(m.max(1), c);
    if m == 0 {
        let v = target.query(&Point::zero(0), 0);
        return Ok(if v { vec![ExplicitHit { alpha: Point::zero(0), estimate: 1.0 }] } else { vec![] });
    }
    if params.allow_exhaustive && m < 64 && (1u64 << m) <= params.sampling_cost(m) {
        return Ok(exhaustive(target, theta));
    }
    let mut parents: Vec<u64> = vec![0];
    let mut ell = 0;
    loop {
        let next = (ell + params.block).min(m);
        let w = next - ell;
        let width = 1usize << w;
        let mut hist = vec![0i64; parents.len() * width];
        if next < m {
            let rest = m - next;
            let samples = params.pair_samples(m);
            for _ in 0..samples {
                let x = rng.next_u64() & mask(rest);
                let y = rng.next_u64() & mask(next);
                let y2 = rng.next_u64() & mask(next);
                if !target.query(&at((y << rest) | x), 0) || !target.query(&at((y2 << rest) | x), 0) {
                    continue;
                }
                let z = y ^ y2;
                let (hi, lo) = (z >> w, (z & mask(w)) as usize);
                for (pi, &p) in parents.iter().enumerate() {
                    hist[pi * width + lo] += if parity(p & hi) { -1 } else { 1 };
                }
            }
            let mut weights: Vec<(u64, f64)> = Vec::new();
            for (pi, &p) in parents.iter().enumerate() {
                let row = &mut hist[pi * width..(pi + 1) * width];
                wht_in_place(row);
                for (s, &v) in row.iter().enumerate() {
                    let est = v as f64 / samples as f64;
                    if est >= theta * theta / 2.0 {
                        weights.push(((p << w) | s as u64, est));
                    }
                }
            }
            weights.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            weights.truncate(params.cap());
            parents = weights.into_iter().map(|(p, _)| p).collect();
            parents.sort_unstable();
            if parents.is_empty() {
                return Ok(vec![]);
            }
            ell = next;
        } else {
            let samples = params.final_samples(m);
            for _ in 0..samples {
                let c = rng.next_u64() & mask(m);
                if !target.query(&at(c), 0) {
                    continue;
                }
                let (hi, lo) = (c >> w, (c & mask(w)) as usize);
                for (pi, &p) in parents.iter().enumerate() {
                    hist[pi * width + lo] += if parity(p & hi) { -1 } else { 1 };
                }
            }
            let mut hits = Vec::new();
            for (pi, &p) in parents.iter().enumerate() {
                let row = &mut hist[pi * width..(pi + 1) * width];
                wht_in_place(row);
                for (s, &v) in row.iter().enumerate() {
                    let est = v as f64 / samples as f64;
                    if est.abs() >= 0.75 * theta {
                        hits.push(ExplicitHit { alpha: at((p << w) | s as u64), estimate: est });
                    }
                }
            }
            return Ok(hits);
        }
    }
}
