//! Library surface of the CLI harness, shared between the `pdmrl` binary
//! and the integration/acceptance test suites.

pub mod commands;
pub mod config;
pub mod ema;
pub mod io;
