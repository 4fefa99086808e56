//! IO, file formats and the command-line front end for the activity
//! analysis pipeline. The algorithms live in `vle-core`; this crate loads
//! and validates input files, wires subcommands end to end and writes the
//! deterministic output sets (with a run manifest each).

pub mod cli;
pub mod ingest;
pub mod manifest;
pub mod parallel;
pub mod rules_json;
pub mod spec_file;
pub mod transitions;
