//! Bit-level simulator of stochastic-computing DCNN hardware.
//!
//! Streams are packed into `u64` words; every block is a deterministic
//! function of its inputs and of the generator state it is handed.

#![no_std]

extern crate alloc;

pub mod arith;
pub mod blocks;
pub mod error;
pub mod feb;
pub mod network;
pub mod quant;
pub mod sng;
pub mod stream;

pub use error::{Error, Result};
pub use stream::{BitStream, Encoding, TwoLineStream};
