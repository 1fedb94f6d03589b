pub mod chain;
pub mod dataset;
pub mod dynamics;
pub mod energy;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod graph;

pub use error::{Error, Result};
