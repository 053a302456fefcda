//! Sparse decomposition of weighted graphs into weighted sums of matchings.

pub mod bench;
pub mod bits;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod instances;
pub mod matching;
pub mod optimizer;
pub mod qaoa;
pub mod qubo;
pub mod samplers;
pub mod weights;

pub use error::{Error, Result};
