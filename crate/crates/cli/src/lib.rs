//! Pipeline plumbing behind the `cpc` binary: configuration, JSON-lines I/O
//! and the stage functions, exposed so tests can drive them in process.

pub mod error;
pub mod io;
pub mod pipeline;
pub mod sim;
