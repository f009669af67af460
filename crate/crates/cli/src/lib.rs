//! File formats and command bodies behind the `lhv` binary.

pub mod commands;
pub mod input;
