//! Secrecy rates of Gaussian wiretap channels observed through
//! finite-resolution ADCs.
//!
//! The crate computes exact transition laws and mutual informations for real
//! and complex channels, builds binary inputs that provably reach a positive
//! secrecy rate whenever the two gain magnitudes differ, searches for good
//! finite-support inputs under an average power constraint, and checks the
//! structural properties such inputs must have.

pub mod achievability;
pub mod adc;
pub mod channel;
pub mod cli;
pub mod error;
pub mod infotheory;
pub mod optimizer;
pub mod verify;

pub use error::{Error, Result};
