//! Spin-network communication channels and their Lieb-Robinson capacity bounds.
//!
//! The crate models a spin network split into a sender region A, a receiver
//! region B and the remainder C, builds the channel from a sender memory Q to
//! B for an arbitrary encoding, and compares exact small-scale distances
//! against the analytic envelopes and capacity bounds.

pub mod capacity;
pub mod channels;
pub mod distance;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod lr;
pub mod network;
pub mod random;
pub mod sdp;

pub use error::{Error, Result};
