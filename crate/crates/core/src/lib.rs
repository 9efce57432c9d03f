//! Monte Carlo and quadrature laboratory for the degenerate second-order system
//! `dX = Y dt`, `dY = |X|^α dB`.

// `!(x > 0.0)` rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod moments;
pub mod pathint;
pub mod paths;
pub mod quad;
pub mod rng;
pub mod sde;
pub mod stats;
pub mod timechange;
pub mod verify;

pub use paths::BrownianPath;
pub use rng::SeedSpec;
pub use sde::{StopPolicy, StopReason, SystemParams, Trajectory};
