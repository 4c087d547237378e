//! Complementary beamforming for omnidirectional broadcast from hybrid
//! beamforming arrays.
//!
//! A partially-connected array is split into sub-arrays, each driven by its
//! own RF chain. Giving two sub-arrays weight vectors whose power patterns
//! sum to a constant, and feeding them independent (Alamouti-coded) streams,
//! yields a composite radiation pattern with equal gain in every direction.
//!
//! * [`array`]: geometry, steering vectors, patterns and the variance metric.
//! * [`search`]: finding complementary weight sets.
//! * [`stbc`]: Alamouti encoding and MMSE/ZF detection.
//! * [`channel`]: QPSK, AWGN and Rayleigh block fading.
//! * [`simulation`]: seeded BER campaigns comparing broadcast schemes.

pub mod array;
pub mod channel;
pub mod error;
pub mod search;
pub mod simulation;
pub mod stbc;

pub use error::{Error, Result};
pub use num_complex::Complex64;
