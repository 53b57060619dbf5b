//! Construction, analysis, encoding, decoding and simulation of edge-spreading
//! Raptor-like (ESRL) spatially-coupled LDPC codes.
//!
//! The crate is organised bottom-up:
//!
//! * [`profile`] holds the code profile (protomatrix, spreading labels,
//!   circulant shifts and tail matrix) and its structural transformations.
//! * [`coupled`] expands a profile into the coupled protomatrix and the lifted
//!   parity-check matrix.
//! * [`graph`] counts cycles on the unified graph and optimizes edge spreading.
//! * [`rca`] estimates coupled, punctured decoding thresholds.
//! * [`designer`] builds profiles from scratch.
//! * [`codec`] encodes and decodes lifted codes under several schedules.
//! * [`sim`] runs AWGN Monte Carlo and IR-HARQ experiments.
//! * [`service`] exposes the above as request/response operations.

pub mod codec;
pub mod coupled;
pub mod designer;
pub mod error;
pub mod gf2;
pub mod golden;
pub mod graph;
pub mod matrix;
pub mod profile;
pub mod profile_io;
pub mod rca;
pub mod service;
pub mod sim;

pub use error::{Error, Result};
pub use matrix::IntMatrix;
pub use profile::CodeProfile;
