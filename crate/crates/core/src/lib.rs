pub mod analytics;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod model;
pub mod portfolio;
pub mod search;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
