//! File formats, the exhaustive sweep and the command implementations
//! behind the `mindchange` binary.

pub mod commands;
pub mod formats;
pub mod sweep;
