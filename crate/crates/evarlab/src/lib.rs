//! Function files and the `evarlab` command line on top of `evarlab-core`.

pub mod cli;
pub mod io;

pub use evarlab_core as core;
