//! Simulation of a coherent DP-QPSK link with electronic dispersion
//! compensation and carrier phase recovery.

pub mod analytics;
pub mod channel;
pub mod cpr;
pub mod edc;
pub mod error;
pub mod harness;
pub mod rng;
pub mod signal;
pub mod sim;
pub mod spectral;
pub mod transmitter;

pub use error::{Result, SimError};
