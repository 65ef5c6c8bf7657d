//! Spin-squeezing dynamics and analytics for the long-range XXZ model.

pub mod dtwa;
pub mod error;
pub mod fit;
pub mod hydro;
pub mod math;
pub mod model;
pub mod oat;
pub mod observables;
pub mod quantum;
pub mod spinwave;

pub use error::{Error, Result};
