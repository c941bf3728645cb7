//! Std companion to `hoplr-core`: rule, matrix and point files, run
//! manifests, the published table data, parallel kernel tables and the
//! `hoplr` command-line tool.

pub mod budget;
pub mod cli;
pub mod construct;
pub mod fixtures;
pub mod manifest;
pub mod matrixfile;
pub mod parallel;
pub mod pointsio;
pub mod reproduce;
pub mod rulefile;
pub mod weights;

pub use hoplr_core as core;
