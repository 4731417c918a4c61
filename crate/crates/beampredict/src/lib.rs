//! File formats, run manifests, a rayon-backed executor and the command line
//! for [`beampredict_core`].

pub mod cli;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod pool;

pub use error::{Error, Result};
