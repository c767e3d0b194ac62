//! Schnapsen rules engine, baseline and search bots, a shallow value network with its
//! trainers, and a seeded tournament runner.

pub mod arena;
pub mod bots;
pub mod encoder;
pub mod engine;
pub mod error;
pub mod neuralnet;
pub mod par;
pub mod rng;
pub mod store;
pub mod trainer;

pub use error::{Error, Result, StoreError};
