//! Oracle-access machinery for sumsets in F₂ⁿ: points and GF(2) linear
//! algebra, Fourier analysis, implicit Goldreich–Levin parity oracles,
//! parity decision trees with a constructive regularity decomposition, and
//! sumset simulation on top of them.

pub mod error;
pub mod fourier;
pub mod gf2;
pub mod oracle;
pub mod parity;
pub mod point;
pub mod regularity;
pub mod rng;
pub mod sumset;

pub use error::{Error, Result};
pub use fourier::{CosetSpec, SpectrumTable};
pub use gf2::{coset_solve, gf2_rank, CosetParam, EchelonBasis, GF2Matrix};
pub use oracle::{BitFn, Membership, PredicateSet, SetOracle, StoredSet};
pub use parity::{GLResult, ParityOracle};
pub use point::{dot, xor, Point};
pub use regularity::{ParityDecisionTree, RegularityBudget, RegularityRun};
pub use rng::RandomSource;
pub use sumset::{simulate_sumset, Mode, SumTree, SumsetRun, VolumeEstimate};

/// Double-precision spectrum, the default reference type.
pub type Spectrum = SpectrumTable<f64>;
/// Single-precision spectrum.
pub type Spectrum32 = SpectrumTable<f32>;
/// Exact rational spectrum for certifying borderline verdicts (n ≤ 12).
pub type ExactSpectrum = SpectrumTable<num_rational::Rational64>;
