//! Simulation toolkit for resilient distributed Q-learning over networks
//! with compromised communication links.

pub mod comms;
pub mod error;
pub mod graph;
pub mod harness;
pub mod learning;
pub mod mdp;
pub mod oracle;
pub mod rng;

pub use error::{Error, Result};
