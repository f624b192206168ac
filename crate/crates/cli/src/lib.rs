//! Command line and HTTP front ends for the monotile engine.

pub mod commands;
pub mod service;
