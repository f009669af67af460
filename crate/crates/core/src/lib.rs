#![no_std]
extern crate alloc;

pub mod error;
pub mod qubit;
pub mod steering;
pub mod system;
pub mod structure;
pub mod assembly;
pub mod builders;
pub mod lp;
pub mod analysis;

pub use error::{Error, Result};
