//! Dynamic infinite mixed-membership stochastic blockmodels for sequences of
//! directed binary networks.

pub mod analysis;
pub mod error;
pub mod generator;
pub mod gibbs;
pub mod hyper;
pub mod math;
pub mod model;
pub mod runner;
pub mod slice;
pub mod state;

pub use error::{Error, Result};
pub use state::{ChainState, Freeze, SamplerOptions, SweepOrder, SweepStats};
