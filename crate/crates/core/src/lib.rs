//! Numerical toolkit for entanglement-assisted communication over quantum
//! channels whose behaviour depends on a classical random parameter.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`]: dense complex matrices, partial traces, Hermitian spectra.
//! * [`quantum`]: states, channels, isometries and entropic quantities.
//! * [`rpchannel`]: the random-parameter channel model and its file format.
//! * [`capacity`]: capacity objectives for every side-information scenario,
//!   a name-keyed scenario registry, the multi-start optimizer and the
//!   classical baselines.
//! * [`mtypes`]: method of types, typical projectors, covering Monte Carlo.
//! * [`protosim`]: exact small-blocklength execution of the coding schemes.

pub mod capacity;
pub mod mtypes;
pub mod protosim;
pub mod qcore;
pub mod quantum;
pub mod rng;
pub mod rpchannel;

mod error;

pub use error::{Error, Result};
