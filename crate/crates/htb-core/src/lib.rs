//! Asymptotic tail risk for linearly shared heavy-tailed losses.
//!
//! A vector `V` of `d` loss factors with Pareto-type tails
//! `P(V_j > t) ~ K_j t^{-alpha}` is distributed to `q` agents by a
//! nonnegative, possibly random, `q x d` allocation matrix `A`, so agent
//! `i` carries the loss `F_i = (A V)_i` and the market carries the
//! aggreggate `||F||_r`. Far enough out in the tail both obey a power law
//! `P(. > t) ~ C t^{-alpha}`, and the constant `C` — not the exponent —
//! is where the allocation layer and the extremal dependence of `V` enter.
//!
//! This crate computes those constants and everything downstream of them:
//!
//! * [`measure`] — discrete spectral measures describing extremal
//!   dependence: independent and comonotone reference measures, margins,
//!   pushforward under a linear map, standardization to canonical form,
//!   and the power functional that turns a canonical measure plus an
//!   allocation matrix into a tail constant.
//! * [`sharing`] — allocation models (fixed matrix, finite scenario mix,
//!   random bipartite sharing graph, black-box sampler), expectations over
//!   them (exact enumeration or Monte Carlo), operator norms, and a moment
//!   diagnostic for the integrability condition behind the asymptotics.
//! * [`constants`] — per-agent and market risk constants under
//!   independent, comonotone, and arbitrary spectral dependence, and their
//!   conversion to asymptotic Value-at-Risk and conditional tail
//!   expectation levels.
//! * [`regime`] — which dependence orderings are guaranteed for a given
//!   `(alpha, r)`: individual constants are always bracketed by the
//!   independent and comonotone ones, market constants only in specific
//!   parameter regimes.
//! * [`bounds`] — evaluates every guaranteed ordering for a concrete
//!   model and reports pass/fail with slack, plus a self-contained
//!   counterexample suite showing the orderings genuinely fail outside
//!   the guaranteed regimes.
//! * [`sim`] — an exact-tail Monte Carlo simulator: sampled loss vectors
//!   have *exactly* the prescribed polynomial marginal tails above a
//!   finite threshold, so empirical quantiles converge to the asymptotic
//!   predictions without model error.
//!
//! The crate is `no_std`-compatible (`alloc` required): disable the
//! default `std` feature and enable `libm` to build without the standard
//! library.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("htb-core requires either the `std` feature or the `libm` feature");

pub mod bounds;
pub mod constants;
pub mod error;
mod fmath;
pub mod matrix;
pub mod measure;
pub mod norm;
pub mod regime;
mod rng;
pub mod sharing;
pub mod sim;
pub mod tail;

pub use bounds::{
    counterexample_suite, verify_bounds, BoundCheck, BoundReport, CounterexampleReport,
    CrossoverCheck, FunctionalValue, RealizationSummary, Relation,
};
pub use constants::{
    cote_asymptotic, dependent_constants, independent_constants, spectral_constants,
    var_asymptotic, DependenceLabel, RiskConstants,
};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use measure::{DiscreteSpectralMeasure, SpectralAtom};
pub use norm::RNorm;
pub use regime::{classify_regime, IndividualRegime, MarketBound, RegimeClassification};
pub use sharing::{
    moment_diagnostic, operator_norm, EvalMethod, ExpectationEstimate, MethodTag, MomentReport,
    Scenario, SharingModel, ZeroDegreePolicy,
};
pub use sim::{
    assemble_batches, chunk_layout, comparison_report, convergence_study,
    convergence_study_on, empirical_cote,
    empirical_var, sample_f, sample_f_chunk, sample_v, BatchMeta, ChunkSpec, ConvergenceRow,
    ConvergenceStudy, DependenceKind, DependenceSpec, SampleBatch, SimBatches, TailBootstrap,
    TailEstimator, TailMetric, BOOTSTRAP_RESAMPLES, CHUNK,
};
pub use tail::TailModel;
