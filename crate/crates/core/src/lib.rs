pub mod error;
pub mod estimators;
pub mod levy;
pub mod monte_carlo;
pub mod ou;
pub mod report;
pub mod rng;
pub mod stats;
pub mod config;
pub mod cli;
