//! Constellation shaping for OFDM integrated sensing and communication.
//!
//! The crate covers the full loop of a kurtosis-constrained constellation
//! design:
//!
//! * [`constellation`]: points, probabilities and Gray labels, QAM/PSK
//!   generators, moments and the text table format.
//! * [`comms`]: AWGN channel, exact LLR demapper and Monte-Carlo GMI.
//! * [`sensing`]: OFDM radar frame, matched filter, CA-CFAR and the
//!   closed-form constellation-dependent detection probability.
//! * [`shaping`]: the differentiable training loop (Gumbel-softmax
//!   sampling, sensing penalty, hand-derived gradients, Adam).
//! * [`harness`]: configuration-driven experiments behind the
//!   `isac-shape` binary.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod comms;
pub mod constellation;
pub mod error;
pub mod harness;
pub mod rng;
pub mod sensing;
pub mod shaping;
pub mod stats;

pub use constellation::{realize, Constellation, RawShapingParams, ShapingMode};
pub use error::{Error, Result};
pub use rng::RngStream;
