//! Equalization-enhanced phase noise (EEPN) laboratory.
//!
//! Monte Carlo simulation of single-polarization coherent QPSK links with
//! electronic chromatic-dispersion compensation in the transmitter
//! (pre-compensation) or the receiver (post-compensation), next to the
//! closed-form EEPN model that predicts the resulting BER floor.

pub mod analytics;
pub mod dispersion;
pub mod error;
pub mod harness;
pub mod link;
pub mod modem;
pub mod noise;
pub mod rxdsp;
pub mod signal;

pub use error::{Error, Result};
pub use signal::ComplexSignal;
