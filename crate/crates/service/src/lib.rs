//! Command-line tools and the HTTP service built on `sciprose-core`.

pub mod cli;
pub mod config;
pub mod io;
pub mod proxy;
pub mod server;
