//! Self-attention particle dynamics on the unit sphere.
//!
//! Tokens normalized to unit length evolve under the projected attention
//! velocity field, which is a gradient flow of the interaction energy
//! `E_D(mu) = ∫∫ exp(x·Dy) dmu(x) dmu(y)` for a symmetric matrix `D`.
//! This crate provides the energy and its derivatives on weighted empirical
//! measures, the explicit Euler particle flow, constructors and checks for the
//! known stationary states, cluster detection, a mirror-descent solver for
//! grid densities on the circle, and the quadrature constants of the
//! perturbation-of-identity expansion.
//!
//! With the default `parallel` feature, pairwise sums and trial sweeps run on
//! rayon. Every parallel loop collects per-item results in order and reduces
//! them sequentially, so results are bitwise identical with the feature off.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod asymptotics;
pub mod catalog;
pub mod cluster;
pub mod density;
mod error;
pub mod experiments;
pub mod flow;
pub mod interaction;
pub mod linalg;
mod par;
pub mod quadrature;
pub mod sphere;
pub mod stationary;

pub use error::{Error, Result};
pub use flow::{FlowConfig, Normalization, Sign, Trajectory};
pub use interaction::{EnergyReport, Ensemble, InteractionMatrix};
pub use linalg::Matrix;
pub use sphere::{TangentVector, UnitVector};

/// Seeded generator used everywhere randomness is needed.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the generator for a seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed from a base seed and a list of indices
/// (splitmix64 finalizer applied per component).
pub fn derive_seed(base: u64, indices: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    indices.iter().fold(mix(base), |acc, &i| mix(acc ^ mix(i)))
}
