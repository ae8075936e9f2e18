//! Experiment drivers and configuration for the `chordseq` command line.

pub mod config;
pub mod experiments;
pub mod manifest;

pub use config::ExperimentConfig;
