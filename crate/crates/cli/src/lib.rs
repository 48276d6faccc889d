//! Command-line frontend: dataset files in, rendered tables out.
//!
//! [`run`] is the whole program minus process plumbing, so tests can drive it
//! with in-memory streams.

pub mod commands;
pub mod io;
pub mod render;

pub use commands::{run, Cli};
pub use render::{Cell, Format, Table};

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const DATA: i32 = 1;
    pub const USAGE: i32 = 2;
}
