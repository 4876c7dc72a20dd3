//! Antenna coding and beamforming optimization for MIMO wireless power
//! transfer with reconfigurable pixel antennas.
//!
//! The crate is organised bottom-up:
//!
//! * [`antenna`] models one pixel antenna as a multiport network, maps antenna
//!   coders to loads and extracts the orthogonal pattern basis.
//! * [`channel`] samples beamspace channels and forms the effective MIMO channel.
//! * [`rectenna`] evaluates the truncated diode nonlinearity.
//! * [`search`] holds the generic optimizers (warm-start SEBO, multi-start BFGS).
//! * [`system`] ties the antenna, channel and rectenna into coder-level objectives.
//! * [`dcc`] and [`rfc`] are the DC-combining and RF-combining pipelines.
//! * [`codebook`] trains and deploys antenna-coder codebooks.
//! * [`harness`] runs Monte Carlo experiments and writes CSV reports.

pub mod antenna;
pub mod channel;
pub mod codebook;
pub mod dcc;
mod error;
pub mod harness;
pub(crate) mod linalg;
pub mod rectenna;
pub mod rfc;
pub mod rng;
pub mod search;
pub mod system;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Column vector of complex samples.
pub type CVector = nalgebra::DVector<Complex64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
