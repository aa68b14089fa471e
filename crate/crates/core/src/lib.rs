#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod apc;
pub mod clr;
pub mod effects;
pub mod error;
pub mod linmod;
pub mod optimal;
pub mod qp;
pub mod sim;
pub mod tdist;
pub mod uniform;
pub mod weights;

pub use error::{Error, Result};
