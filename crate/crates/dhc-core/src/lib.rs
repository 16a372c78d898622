//! Core library for a district-heating flow-rate control toolkit.
//!
//! The crate models a two-loop district heating system at desk scale and
//! provides everything needed to study flow-rate control on it:
//!
//! - [`plant`] — ground-truth physics of a heat-exchange station
//!   (effectiveness-NTU exchanger, lumped building/pipe losses) plus the
//!   national-standard target heat formula.
//! - [`neural`] — a small dense-network engine (forward, backprop, Adam,
//!   soft parameter blending) shared by the surrogate models and the agent.
//! - [`data`] — synthetic weather and operating-data generation,
//!   shape-preserving interpolation, and train/test splitting.
//! - [`surrogate`] — regression models for the station temperatures and the
//!   circulating-pump flow polynomial, chained to predict heat quantities.
//! - [`env`] — the reinforcement-learning environment: state/action
//!   mappings, reward functions, and episode handling over a dataset.
//! - [`agent`] — a DDPG agent with replay and Ornstein-Uhlenbeck
//!   exploration, plus supervised-learning and fixed-flow baselines.
//! - [`balance`] — branch-network hydraulics and the PID controllers that
//!   equalize per-unit return temperatures.

pub mod agent;
pub mod balance;
pub mod config;
pub mod data;
pub mod env;
pub mod error;
pub mod neural;
pub mod plant;
pub mod surrogate;

pub use error::{Error, Result};
