//! Command-line front end: synthetic corpora, file formats and the cached
//! end-to-end pipeline.

pub mod commands;
pub mod io;
pub mod pipeline;
pub mod synth;
