//! Experiment runner library behind the `slt-thermo` binary: configuration
//! parsing with canonical digests, experiment dispatch, and CSV/JSON/SVG
//! emission.

pub mod config;
pub mod experiments;
pub mod output;
pub mod svg;
