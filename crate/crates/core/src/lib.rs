//! Error-floor workbench for LDPC codes: absorption-set enumeration,
//! linearized set dynamics, density evolution and importance sampling.

pub mod channel;
pub mod code;
pub mod decoder;
pub mod density;
pub mod absorption;
pub mod dynamics;
pub mod fixtures;
pub mod harness;
pub mod sampling;
