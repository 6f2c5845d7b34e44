//! Files, reports and the command-line tool around [`vbe_core`].
//!
//! [`ingest`] reads CSV datasets and platform JSON exports, [`report`]
//! writes results as JSON or CSV, [`config`] merges defaults, a settings
//! file and flags, and [`cli`] ties them into the `ovbe` binary.

pub mod cli;
pub mod config;
mod error;
pub mod ingest;
pub mod report;

pub use error::{exit, Error, Result};
