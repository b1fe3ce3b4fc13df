//! Configuration, run records, the crossover scan and the acceptance suite.

pub mod config;
pub mod records;
pub mod scan;
pub mod verify;

pub const SCHEMA_VERSION: &str = "bandpoly/1";
pub const DEFAULT_SEED: u64 = 20_240_917;
