//! Near-field wideband uplink simulation for holographic metasurface antennas.
//!
//! Geometry, channel synthesis, mutual coupling, the metasurface front end and
//! the alternating WMMSE/MM combiner design.

pub mod channel;
pub mod coupling;
pub mod error;
pub mod frontend;
pub mod geometry;
pub mod linalg;
pub mod scenario;
pub mod special;
pub mod wmmse;

pub use error::{Error, Result};
