pub mod bers;
pub mod cli;
pub mod currents;
pub mod engine;
pub mod error;
pub mod families;
pub mod holder;
pub mod metrics;
pub mod projective;
