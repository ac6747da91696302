//! Library side of the `pagani` command-line tool: CSV records, the work
//! behind each subcommand, and SVG plotting.

pub mod commands;
pub mod plot;
pub mod record;
