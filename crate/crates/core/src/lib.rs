pub mod cli;
pub mod dataset;
pub mod evolution;
pub mod karva;
pub mod metrics;
pub mod models;
