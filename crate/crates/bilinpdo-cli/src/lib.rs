//! Command-line experiment runner for `bilinpdo`.

pub mod config;
pub mod experiments;
pub mod output;
pub mod svg;
