//! Real-valued error-correcting codes decoded by l1 minimization, with the
//! linear-programming, certificate and experiment machinery around them.

pub mod bp;
pub mod codec;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod lp;

pub use bp::{decode_l1, sense_l1, SubspaceBasis};
pub use codec::{Codec, CodecSpec, CodeParams};
pub use linalg::{RealMatrix, RealVector, SeedSpec};
