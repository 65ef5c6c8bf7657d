//! Config-driven batch runs of the `squeeze` toolkit.

pub mod config;
pub mod output;
pub mod pipeline;

pub use config::{Format, Mode, RunConfig};
pub use pipeline::{execute, resolve, Manifest, Overrides, Verb};
