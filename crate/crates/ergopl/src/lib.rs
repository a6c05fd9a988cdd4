//! File formats, multi-threaded drivers and the `ergopl` command-line tool
//! built on [`ergopl_core`].

pub mod cli;
pub mod format;
pub mod parallel;
pub mod report;

pub use ergopl_core as core;
