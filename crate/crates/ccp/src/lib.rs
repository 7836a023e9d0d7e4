//! Instance files, generators, traces, the benchmark harness and the CLI.

pub mod bench;
pub mod cli;
pub mod gen;
pub mod io;
pub mod report;
