//! Reusable internals of the `gbmul` binary: sweep configuration, report
//! shapes, randomized check suites, and the command implementations.
//! The binary is a thin argument-parsing layer over [`commands`].

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;
