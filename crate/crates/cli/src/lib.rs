//! Command-line front end: argument parsing, configuration files and JSON reports.

pub mod commands;
pub mod config;
pub mod report;
