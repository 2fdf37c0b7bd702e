//! Simulation laboratory for isolated faces in random Čech and Vietoris-Rips
//! complexes built on Poisson point processes over the flat unit torus.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: toroidal metric, smallest enclosing balls, ball and lens
//!   volumes, and the connection regions `Q` with exact membership tests and
//!   Monte Carlo volumes.
//! - [`pointprocess`]: Poisson sampling on the torus, reproducible RNG streams
//!   and a cell-list index for fixed-radius queries.
//! - [`complexes`]: k-faces of both complexes and birth radii.
//! - [`isolation`]: up/down connectivity graphs, isolated-face counts `J`,
//!   the monotone count `J*` and component censuses.
//! - [`asymptotics`]: the constants `m`, `M`, `|A|`, the radius schedule,
//!   the expectation integral, the implicit constant `c_n` and a separation probe.
//! - [`experiments`]: replicated sweeps, Poisson goodness of fit, expectation
//!   scans and the scaling probe.

pub mod asymptotics;
pub mod complexes;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod isolation;
pub mod pointprocess;

pub use error::{Error, Result};
pub use geometry::{Conn, Flavor};
