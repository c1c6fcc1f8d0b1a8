//! Problem files, built-in benchmarks and the multi-run harness.

mod document;
mod generators;
mod harness;
mod sections;

pub use document::*;
pub use generators::*;
pub use harness::*;
pub use sections::*;
