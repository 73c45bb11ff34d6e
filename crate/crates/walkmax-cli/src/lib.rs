//! Library half of the `walkmax` binary: config parsing and result encoding.

pub mod config;
pub mod report;
