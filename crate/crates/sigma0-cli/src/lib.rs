//! Command-line driver: configuration, the order cache, table persistence,
//! report rendering and the subcommands.

pub mod cache;
pub mod cli;
pub mod config;
pub mod pipeline;
pub mod report;
pub mod table;

pub use cli::run;
