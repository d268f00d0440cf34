//! Dataset files, run configuration, CSV output and the command bodies
//! behind the `cp-multipole` binary.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod output;

pub use config::{ModelSpec, RunConfig, ZGrid};
pub use dataset::{bundled_cs_fixture, load_dataset, write_dataset, AtomDataset, TransitionData};
