//! Secrecy-optimized resource allocation for device-to-device (D2D) links
//! underlaying a two-tier heterogeneous network (one high power node, several
//! low power nodes).
//!
//! The crate is organized bottom-up:
//!
//! - [`config`]: scenario parameters and the flat key-value config file.
//! - [`netmodel`]: node placement, path loss and Rayleigh fading.
//! - [`linkmetrics`]: SINRs, secrecy capacities and QoS checks.
//! - [`suballoc`]: per-cell Lagrangian subcarrier heuristic and the exhaustive oracle.
//! - [`spectral`]: per-subcarrier matrix form and Perron-Frobenius machinery.
//! - [`solver`]: dual sub-gradient / proximal-gradient power allocation.
//! - [`baselines`]: reference schemes used in comparisons.
//! - [`harness`]: Monte-Carlo driver, CSV output and the command line.

pub mod baselines;
pub mod config;
pub mod error;
pub mod harness;
pub mod linkmetrics;
pub mod netmodel;
pub mod solver;
pub mod spectral;
pub mod suballoc;

pub use config::NetworkConfig;
pub use error::{Error, Result};
