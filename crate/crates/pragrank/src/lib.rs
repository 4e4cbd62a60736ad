//! Std side of pragrank: file formats, rayon drivers, domain bundles, timing,
//! the command line and the interactive HTTP service.

pub mod bench;
pub mod bundle;
pub mod cli;
pub mod clock;
pub mod distill;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod service;

pub use error::{Error, Result};
