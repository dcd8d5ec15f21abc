//! Simulation and verification engine for multiple-copy discrimination of two
//! noisy qubit states.
//!
//! Two pure signal states `cos(theta)|0> +/- sin(theta)|1>` are prepared with
//! imperfect fidelity `F`, turning each copy into the mixed state
//! `F |psi_k><psi_k| + (1-F) |psi_k_perp><psi_k_perp|`. This crate evaluates
//! the probability that each of several discrimination schemes identifies the
//! prepared state from `N` copies:
//!
//! - [`adaptive`]: local measurements with one-step feedback (the Markovian
//!   scheme), its closed form, recursion and chain-DP routes, plus the
//!   record-majority and full-record Bayesian refinements;
//! - [`qdg`]: quantum data gathering, a collective scheme in which a single
//!   probe qubit absorbs each copy through a two-qubit unitary, evaluated by
//!   an explicit-unitary oracle, a Kraus-coefficient recursion and closed
//!   forms;
//! - [`voting`]: fixed per-copy Helstrom measurements with a majority
//!   decision, and the classical Chernoff exponent of its error decay;
//! - [`helstrom`]: single- and multi-copy minimum-error bounds used as
//!   references throughout;
//! - [`sim`]: a seeded, worker-count-invariant Monte Carlo engine that
//!   cross-checks every exact route;
//! - [`cli`]: the `qdiscrim` command line (curve sweeps, the verification
//!   report, Monte Carlo runs, SVG plots).
//!
//! All exact routes are pure functions and safe to call concurrently.

pub mod adaptive;
pub mod cli;
pub mod helstrom;
pub mod qdg;
pub mod sim;
pub mod states;
pub mod voting;

pub use states::{Density2, MeasBasis, NoiseModel, PureState2, SignalEnsemble};
