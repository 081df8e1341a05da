//! Numerical study of the pushforward of the product Haar measure on a
//! periodic lattice by the normalized Wilson action.
//!
//! The crate samples Haar-random `U(N)` gauge fields, computes the
//! distribution and moments of the normalized action `t`, compares them with
//! the Gaussian large-`N` limit and its pairing count, evaluates Haar
//! integrals exactly through the Weingarten function, and turns all of this
//! into strong- and weak-coupling free-energy estimates.
//!
//! Data-parallel loops go through [`exec`]; with the default `parallel`
//! feature they run on rayon, otherwise sequentially. Results never depend on
//! the backend or on the worker count.

pub mod action;
pub mod concentration;
mod error;
pub mod exec;
pub mod haar;
pub mod lattice;
pub mod moments;
pub mod numeric;
pub mod pairings;
pub mod rng;
pub mod thermo;
pub mod verify;
pub mod weingarten;

pub use error::{Error, Result};
pub use exec::Backend;
pub use haar::{sample_haar_unitary, ComplexSquareMatrix};
pub use lattice::{EdgeId, GaugeConfig, LatticeShape, Plaquette};
pub use rng::RngStream;

/// Seed used by the CLI defaults and the verification suite.
pub const DEFAULT_SEED: u64 = 42;
