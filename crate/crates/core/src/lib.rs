//! Seeded, event-driven simulation of the Schelling swap model on a ring,
//! with observables for separators and monochromatic sections and an exact
//! continuous-time Markov chain oracle for small rings.

pub mod cli;
pub mod engine;
pub mod error;
pub mod model;
pub mod moving;
pub mod observables;
pub mod oracle;
pub mod timeline;

pub use error::{Error, Result};
pub use model::{AgentType, Horizon, ModelParams, RingConfiguration, SwapReason, SwapVerdict};
pub use moving::MovingDistribution;
