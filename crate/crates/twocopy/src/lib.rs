//! Pointer-level simulation, JSON file formats and the command-line front end
//! for two-copy weak-value entanglement detection. The numerical core lives in
//! `twocopy-core`.

pub mod cli;
pub mod io;
pub mod pointer;

pub use twocopy_core as core;
