//! Hybrid attentional memory network for drug-disease association
//! prediction.
//!
//! A drug and a disease are each encoded by a denoising autoencoder that
//! reads an association row together with a similarity row. The prediction
//! fuses the interaction of the two latents with an attention-weighted read
//! of an external memory over the drugs already linked to the disease.
//!
//! This crate is `no_std` (it needs `alloc`); file formats, the CLI and
//! parallel orchestration live in the `hamn` crate.
#![no_std]
#![allow(clippy::too_many_arguments, clippy::needless_range_loop)]

extern crate alloc;

pub mod autoencoder;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod model;
pub mod neighborhood;
pub mod numerics;

pub use error::{Error, Result};
