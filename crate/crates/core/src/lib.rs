//! Voting-bloc entropy (VBE) for token-weighted governance.
//!
//! The crate is split along the two ingredients of the metric and the
//! experiments built on top of them:
//!
//! * [`model`] holds accounts, balances, elections, votes, vote matrices and
//!   partitions.
//! * [`clustering`] turns voting histories (or latent utilities) into voting
//!   blocs.
//! * [`metrics`] measures how token mass is spread across those blocs, plus
//!   the balance-only baselines (Gini, Nakamoto, singleton-bloc entropy).
//! * [`pipeline`] runs the observable metric over rolling proposal windows.
//! * [`lab`] builds synthetic DAOs with explicit utilities and checks the
//!   transformation results mechanically.
//!
//! Everything here is `no_std` with `alloc`; file formats and the CLI live in
//! the companion `ovbe` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod clustering;
mod error;
pub mod lab;
pub(crate) mod math;
pub mod metrics;
pub mod model;
pub mod pipeline;

pub use error::{Error, Result};
