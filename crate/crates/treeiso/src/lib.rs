//! Command-line front end and file formats for `treeiso-core`.

pub mod args;
pub mod cache;
pub mod cli;
pub mod commands;
pub mod failure;
pub mod mc;
pub mod report;

pub use cli::run;
