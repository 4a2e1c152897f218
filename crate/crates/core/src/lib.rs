pub mod error;
pub mod experiment;
pub mod features;
pub mod bnc;
pub mod cutgen;
pub mod lp;
pub mod model;
pub mod scorer;
pub mod train;

pub use error::{Error, Result};
