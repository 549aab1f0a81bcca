//! Bistatic OFDM sensing from frequency-domain channel snapshots.
//!
//! The chain runs packet snapshots through delay/phase alignment and
//! differential clutter cancellation ([`preprocess`]), a slow-time FFT
//! ([`doppler`]) and a matched-filter angle search ([`aoa`]), selects
//! peaks in the delay-Doppler map ([`detect`]), converts them to
//! positions ([`localize`]) and maintains target tracks ([`track`]).
//! [`pipeline`] strings the stages together over a capture, [`sim`]
//! synthesizes captures for a known [`scene::Scene`], and [`eval`] scores
//! tracks against its ground truth.

// Validation uses `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aoa;
pub mod detect;
pub mod doppler;
pub mod error;
pub mod eval;
pub mod io;
pub mod localize;
pub mod pipeline;
pub mod preprocess;
pub mod scene;
pub mod sim;
pub mod track;

pub use error::{Error, Result};
pub use pipeline::{SenseConfig, Sensor, WindowReport};
pub use scene::{Position3, RadioConfig, Scene};
