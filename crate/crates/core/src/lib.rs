//! Handover prediction toolkit.
//!
//! Desk-scale pipeline for studying handover prediction and its effect on
//! resource-acquisition cost: synthesize multi-cell radio measurement traces
//! with ground-truth handovers, window them into labeled sequence datasets,
//! train an LSTM classifier from scratch, evaluate precision/recall operating
//! points, translate operating points into purchase cost against an
//! always-buy baseline, and serve the trained model over an NDJSON stream
//! the way a near-real-time RIC xApp would consume indications.

pub mod costmodel;
pub mod dataset;
pub mod error;
pub mod evalkit;
pub mod manifest;
pub mod radiosim;
pub mod ranges;
pub mod seeding;
pub mod seqmodel;
pub mod stream;

pub use error::{Error, Result};
