//! Hybrid full-order / reduced-order time integration with a dual-based
//! output error indicator.

pub mod bench;
pub mod deim;
pub mod error;
pub mod estimate;
pub mod greedy;
pub mod hybrid;
pub mod io;
pub mod models;
pub mod pod;
pub mod rom;
pub mod sparse;
pub mod system;
pub mod window;

pub use error::{Result, RomError};
