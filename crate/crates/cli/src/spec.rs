use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sumset_core::gf2::independent;
use sumset_core::oracle::STORED_CAP;
use sumset_core::{Membership, Point, SetOracle, StoredSet};

use crate::CliError;

/// A family of test sets. Points are lowercase hex (`"n:hex"`); coset
/// addresses are bit strings b₁…b_k over the listed parities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    Explicit {
        n: usize,
        members: Vec<Point>,
    },
    AffineSubspace {
        n: usize,
        basis: Vec<Point>,
        shift: Point,
    },
    CosetUnion {
        n: usize,
        parities: Vec<Point>,
        cosets: Vec<String>,
    },
    Random {
        n: usize,
        density: f64,
        seed: u64,
    },
    /// {x : Σxᵢ ≥ n/2}.
    Majority {
        n: usize,
    },
    /// Each point of the coset union is kept with probability `density`;
    /// each point outside it is added with probability `flip`.
    NoisyCosetUnion {
        n: usize,
        parities: Vec<Point>,
        cosets: Vec<String>,
        density: f64,
        #[serde(default)]
        flip: f64,
        seed: u64,
    },
}

/// A generated set: counted oracle plus an exhaustive twin when n ≤ 24.
pub struct Generated {
    pub oracle: SetOracle,
    pub twin: Option<StoredSet>,
}

fn parse_address(s: &str, k: usize) -> Result<Vec<bool>, CliError> {
    if s.len() != k || !s.chars().all(|c| c == '0' || c == '1') {
        return Err(CliError::Spec(format!("coset address {s:?} is not a {k}-bit string")));
    }
    Ok(s.chars().map(|c| c == '1').collect())
}

fn resize(p: &Point, n: usize) -> Point {
    Point::from_words(n, p.words())
}

impl SetSpec {
    pub fn n(&self) -> usize {
        match self {
            SetSpec::Explicit { n, .. }
            | SetSpec::AffineSubspace { n, .. }
            | SetSpec::CosetUnion { n, .. }
            | SetSpec::Random { n, .. }
            | SetSpec::Majority { n }
            | SetSpec::NoisyCosetUnion { n, .. } => *n,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SetSpec::Explicit { .. } => "explicit",
            SetSpec::AffineSubspace { .. } => "affine_subspace",
            SetSpec::CosetUnion { .. } => "coset_union",
            SetSpec::Random { .. } => "random",
            SetSpec::Majority { .. } => "majority",
            SetSpec::NoisyCosetUnion { .. } => "noisy_coset_union",
        }
    }

    /// The same instance in dimension `n`: every point keeps its low
    /// coordinates (its integer value), so structure on the low coordinates
    /// is shared across the family.
    pub fn with_n(&self, n: usize) -> SetSpec {
        let pts = |v: &[Point]| v.iter().map(|p| resize(p, n)).collect::<Vec<_>>();
        match self.clone() {
            SetSpec::Explicit { members, .. } => SetSpec::Explicit { n, members: pts(&members) },
            SetSpec::AffineSubspace { basis, shift, .. } => {
                // extra coordinates extend the subspace so the codimension is kept
                let old = self.n();
                let mut basis = pts(&basis);
                basis.extend((old..n).map(|j| {
                    let mut p = Point::zero(n);
                    p.set_bit(j, true);
                    p
                }));
                SetSpec::AffineSubspace { n, basis, shift: resize(&shift, n) }
            }
            SetSpec::CosetUnion { parities, cosets, .. } => SetSpec::CosetUnion { n, parities: pts(&parities), cosets },
            SetSpec::Random { density, seed, .. } => SetSpec::Random { n, density, seed },
            SetSpec::Majority { .. } => SetSpec::Majority { n },
            SetSpec::NoisyCosetUnion { parities, cosets, density, flip, seed, .. } => {
                SetSpec::NoisyCosetUnion { n, parities: pts(&parities), cosets, density, flip, seed }
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.n();
        if n == 0 {
            return Err(CliError::Spec("n must be positive".into()));
        }
        let dims = |v: &[Point]| {
            v.iter()
                .find(|p| p.dim() != n)
                .map_or(Ok(()), |p| Err(CliError::Spec(format!("point {p} has dimension ≠ {n}"))))
        };
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(CliError::Spec(format!("{name} = {v} outside [0, 1]")))
            }
        };
        match self {
            SetSpec::Explicit { members, .. } => {
                if n > STORED_CAP {
                    return Err(CliError::Spec(format!("explicit sets need n ≤ {STORED_CAP}, got {n}")));
                }
                dims(members)
            }
            SetSpec::AffineSubspace { basis, shift, .. } => {
                dims(basis)?;
                dims(std::slice::from_ref(shift))?;
                if !independent(basis) {
                    return Err(CliError::Spec("basis is not independent".into()));
                }
                Ok(())
            }
            SetSpec::CosetUnion { parities, cosets, .. } | SetSpec::NoisyCosetUnion { parities, cosets, .. } => {
                dims(parities)?;
                if !independent(parities) {
                    return Err(CliError::Spec("parities are not independent".into()));
                }
                for c in cosets {
                    parse_address(c, parities.len())?;
                }
                if let SetSpec::NoisyCosetUnion { density, flip, .. } = self {
                    prob("density", *density)?;
                    prob("flip", *flip)?;
                }
                Ok(())
            }
            SetSpec::Random { density, .. } => prob("density", *density),
            SetSpec::Majority { .. } => Ok(()),
        }
    }

    pub fn membership(&self) -> Result<Arc<dyn Membership>, CliError> {
        self.validate()?;
        let n = self.n();
        Ok(match self.clone() {
            SetSpec::Explicit { members, .. } => Arc::new(StoredSet::from_points(n, &members)?),
            SetSpec::AffineSubspace { basis, shift, .. } => {
                let normals = sumset_core::gf2::null_space(&basis, n)?;
                let rhs: Vec<bool> = normals.iter().map(|a| a.dot(&shift)).collect();
                Arc::new(Family { n, rule: Rule::Cosets { parities: normals, cosets: vec![rhs] }, inside: 1.0, outside: 0.0, seed: 0 })
            }
            SetSpec::CosetUnion { parities, cosets, .. } => {
                let k = parities.len();
                let cosets = cosets.iter().map(|c| parse_address(c, k)).collect::<Result<_, _>>()?;
                Arc::new(Family { n, rule: Rule::Cosets { parities, cosets }, inside: 1.0, outside: 0.0, seed: 0 })
            }
            SetSpec::Random { density, seed, .. } => {
                Arc::new(Family { n, rule: Rule::Everything, inside: density, outside: 0.0, seed })
            }
            SetSpec::Majority { .. } => Arc::new(Family { n, rule: Rule::Majority, inside: 1.0, outside: 0.0, seed: 0 }),
            SetSpec::NoisyCosetUnion { parities, cosets, density, flip, seed, .. } => {
                let k = parities.len();
                let cosets = cosets.iter().map(|c| parse_address(c, k)).collect::<Result<_, _>>()?;
                Arc::new(Family { n, rule: Rule::Cosets { parities, cosets }, inside: density, outside: flip, seed })
            }
        })
    }
}

enum Rule {
    Everything,
    Majority,
    Cosets { parities: Vec<Point>, cosets: Vec<Vec<bool>> },
}

/// Membership of a rule, thinned inside and salted outside by a per-point coin.
struct Family {
    n: usize,
    rule: Rule,
    inside: f64,
    outside: f64,
    seed: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A uniform number in [0, 1) determined by (seed, x).
fn coin(seed: u64, x: &Point) -> f64 {
    let h = x.words().iter().fold(splitmix(seed), |h, &w| splitmix(h ^ w));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

impl Membership for Family {
    fn dim(&self) -> usize {
        self.n
    }
    fn contains(&self, x: &Point) -> bool {
        let inside = match &self.rule {
            Rule::Everything => true,
            Rule::Majority => 2 * x.weight() as usize >= self.n,
            Rule::Cosets { parities, cosets } => {
                let addr: Vec<bool> = parities.iter().map(|a| a.dot(x)).collect();
                cosets.contains(&addr)
            }
        };
        let p = if inside { self.inside } else { self.outside };
        p >= 1.0 || (p > 0.0 && coin(self.seed, x) < p)
    }
}

/// Builds the counted oracle of a spec, and its stored twin when n ≤ 24.
pub fn generate(spec: &SetSpec) -> Result<Generated, CliError> {
    let m = spec.membership()?;
    let twin = (spec.n() <= STORED_CAP).then(|| StoredSet::from_membership(m.as_ref())).transpose()?;
    Ok(Generated { oracle: SetOracle::new(m), twin })
}
