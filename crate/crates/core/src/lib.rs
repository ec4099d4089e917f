//! Simulation and inference toolkit for daily interbank trading networks.
//!
//! The crate is organised around a dynamical fitness model of interbank
//! lending ([`model`]), closed-form results for its untyped variant
//! ([`closed_form`]), structural and temporal statistics of network series
//! ([`metrics`]), statistical fitting ([`inference`]) and conversion of raw
//! transaction logs into daily networks ([`ingest`]).

pub mod closed_form;
pub mod config;
pub mod error;
pub mod inference;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod network;
pub mod series_io;
pub mod special;

mod seeding;

pub use error::{Error, Result};
pub use model::{BankState, BankType, ModelParams, TypeFractions, WeightParams};
pub use network::{BankId, DailyNetwork, Edge, NetworkSeries, Provenance};
pub use seeding::derive_seed;
