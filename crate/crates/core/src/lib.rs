//! Two-step blind source separation for two-channel mixtures.
//!
//! Mixtures are first whitened ([`whitening`]); the remaining orthonormal
//! ambiguity is a single rotation angle, found either by brute-force
//! search over an objective ([`objectives`], [`search`]) or in closed form
//! from a second-order statistic ([`spectral`], [`baselines`]). The
//! [`harness`] module runs repeated synthetic trials over all methods.

pub mod baselines;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod objectives;
pub mod search;
pub mod separation;
pub mod signal;
pub mod spectral;
pub mod whitening;

pub use error::{Error, Result};
pub use separation::{Diagnostics, SeparationResult};
pub use signal::TimeSeriesSet;
