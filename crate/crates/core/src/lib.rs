pub mod analysis;
pub mod catalog;
pub mod config;
pub mod error;
pub mod field2d;
pub mod geodesics;
pub mod geometry;
pub mod radial;
pub mod report;
pub mod suite;

pub use error::{Error, Result};
