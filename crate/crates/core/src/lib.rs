pub mod chart;
pub mod cocycle;
pub mod config;
pub mod error;
pub mod goldman;
pub mod io;
pub mod linalg;
pub mod rep;
pub mod tolerance;
pub mod verify;
pub mod word;

pub use error::{Error, Result};
