//! Cluster LP toolkit for correlation clustering.
//!
//! The crate is `no_std` with `alloc`: everything here is a pure function of
//! its inputs and an explicit 64-bit seed. File formats, the command-line
//! driver and parallel Monte Carlo fan-out live in the `clusterlp` crate.
//!
//! Module map:
//!
//! * [`instance`] complete signed graphs, clusterings, objectives, generators
//! * [`exact`] brute-force optimal clustering over restricted-growth strings
//! * [`lp`] dense revised simplex, the exact cluster LP and the pairwise LP
//! * [`precluster`] atoms, averaged weights and admissible edges
//! * [`rounding`] cluster-based and pivot-based rounding
//! * [`triangle`] budget functions, closed-form triangle costs, verifier, `d̃`
//! * [`sdp`] discretization and assembly of the factor-revealing SDP
//! * [`gap`] the line graph of `K_n` integrality-gap family
#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop, clippy::suspicious_arithmetic_impl, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod exact;
pub mod gap;
pub mod instance;
pub mod linalg;
pub mod lp;
pub mod precluster;
pub mod rounding;
pub mod sdp;
pub mod set;
pub mod triangle;

pub use error::{Error, Result};
pub use instance::{Clustering, FractionalAssignment, Instance};
pub use set::VertexSet;

/// Tolerance applied to LP solutions at the API boundary.
pub const API_TOL: f64 = 1e-7;

/// Deterministic RNG used by every randomized operation.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate RNG from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}

/// Independent child seed for stream `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(seed ^ splitmix(index))
}
