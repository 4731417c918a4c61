//! Synthetic urban mm-wave channel generation, beam-pair-link datasets and
//! location-aided beam prediction with cross-gNB transfer learning.
//!
//! The crate is `no_std` (with `alloc`). Everything here is a pure function
//! of its inputs and an explicit seed; file formats, thread pools and the
//! command line live in the `beampredict` companion crate.
//!
//! Pipeline, bottom-up:
//!
//! - [`scenario`]: study area, buildings, gNB sites, UE grid.
//! - [`raytracer`]: LoS and specular wall reflections via the image method.
//! - [`antenna`]: codebook steering and uniform-planar-array gains.
//! - [`rss`]: per-location 64x16 beam-pair-link RSS matrix and top-k labels.
//! - [`dataset`]: per-gNB datasets, splits and fine-tuning subsets.
//! - [`mlp`]: the 2-128-128-128-1024 network, loss, backprop and Adam.
//! - [`transfer`]: reference training, zero-shot evaluation and fine-tuning.
//! - [`evaluation`]: accuracy metrics, matrices, coverage and sweeps.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod antenna;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod geometry;
pub mod math;
pub mod mlp;
pub mod raytracer;
pub mod rng;
pub mod rss;
pub mod scenario;
pub mod transfer;

pub use error::{Error, Result};
