//! Scenarios, Monte Carlo evaluation, sweeps, artifacts and the CLI.

pub mod cli;
pub mod evaluate;
pub mod report;
pub mod scenario;
pub mod selftest;
pub mod sweep;
