//! Metropolis-adjusted Langevin (MALA) sampling toolkit.
//!
//! The crate bundles everything needed to study how the step size of MALA
//! interacts with dimension and conditioning on log-concave targets whose
//! negative log density is a quadratic plus a small product of cosines:
//!
//! * [`targets`]: the target distributions (diagonal Gaussians, the
//!   cosine-perturbed Gaussian family) behind a shared [`targets::Target`]
//!   trait exposing values and gradients.
//! * [`sampler`]: the lazy MALA kernel in log space, the proposal/accept
//!   pieces as standalone functions for testing, and the leapfrog view of the
//!   proposal.
//! * [`init`]: start distributions with controlled warmness: restricted warm
//!   starts, Gaussian starts, a piecewise-linear (tent) start on the last
//!   coordinate, and a typical-set restricted start.
//! * [`diagnostics`]: acceptance-rate and quantile-based mixing proxies,
//!   Monte Carlo Dirichlet forms, chi-squared divergences, and spectral-gap
//!   to mixing-time conversions.
//! * [`analytic`]: closed forms that the sampler must reproduce: the step
//!   size recipe, the acceptance-exponent split for the perturbed target,
//!   Gaussian cosine moments, and the one-dimensional flow ratio.
//! * [`harness`]: experiment configuration, seeded parallel sweeps over
//!   dimension and condition number, deterministic CSV output, and the
//!   self-check suite behind the `verify` subcommand.
//! * [`numerics`]: the small numerical kernel shared by everything above
//!   (compensated sums, adaptive Simpson quadrature, Gauss-Hermite rules,
//!   standard normal helpers).

pub mod analytic;
pub mod diagnostics;
pub mod harness;
pub mod init;
pub mod numerics;
pub mod sampler;
pub mod targets;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Errors shared across the crate.
///
/// `InvalidParameter` and `Config` indicate caller mistakes (the CLI maps
/// them to exit code 2); the remaining variants indicate numerical or
/// regime failures at run time (exit code 3).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("out of regime: {0}")]
    OutOfRegime(String),
    #[error("rejection sampler exceeded {attempts} attempts")]
    RetryLimit { attempts: u64 },
    #[error("no proposals recorded")]
    NoProposals,
    #[error("empty series")]
    EmptySeries,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Deterministic RNG for a given seed and stream id.
///
/// ChaCha streams are disjoint by construction, so every (seed, stream) pair
/// yields an independent reproducible random sequence regardless of thread
/// scheduling.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for a chain, unique across sweep points and chain indices.
pub fn chain_stream(sweep_index: u32, chain_index: u32) -> u64 {
    ((sweep_index as u64) << 32) | chain_index as u64
}

// Compile and run every code snippet in the guide alongside the unit tests,
// so the book cannot drift from the crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sampler.md")]
    mod sampler {}
    #[doc = include_str!("../../../book/src/targets.md")]
    mod targets {}
    #[doc = include_str!("../../../book/src/warm-starts.md")]
    mod warm_starts {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
