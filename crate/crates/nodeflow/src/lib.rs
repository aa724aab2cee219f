//! File formats and command line for the `nodeflow-core` node-model toolkit:
//! JSON problem files, JSON scene files for plotting, and the `nodeflow`
//! binary.

pub mod cli;
pub mod number;
pub mod problem_file;
pub mod report;
pub mod scene_file;
