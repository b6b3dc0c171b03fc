pub mod distributions;
pub mod error;
pub mod gf;
pub mod perm_core;
pub mod rng;

pub use error::{Error, Result};
pub mod properties;
pub mod approx_theory;
pub mod secretary_algs;
pub mod lower_bounds;
pub mod hardness;
pub mod matching_ext;
pub mod report;
pub mod acceptance;
