//! Command-line front end and HTTP run service for `ansatz_forge`.
//!
//! The binary is a thin clap layer over [`commands`]; [`service`] exposes
//! search runs over HTTP and [`runs`] persists them as one JSON file each.

pub mod commands;
pub mod error;
pub mod runs;
pub mod service;

pub use error::AppError;
