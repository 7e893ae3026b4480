pub mod boundary;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod history;
pub mod poly;
pub mod quadrature;
pub mod singular;
pub mod sources;
pub mod stability;
pub mod stencil;
pub mod types;

pub use error::{EosError, Result};
