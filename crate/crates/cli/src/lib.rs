//! Command-line front end for hdw-forge: model files, reports and the
//! `derive`, `check`, `legendre`, `solve` and `compare` commands.

pub mod cli;
pub mod commands;
pub mod error;
pub mod expr_parse;
pub mod grid_io;
pub mod model;
pub mod report;
