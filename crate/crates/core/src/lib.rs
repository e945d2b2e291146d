//! Equilibria of inextensible, perfectly flexible strings under slope-dependent
//! loads, the critical-slope test that rules out smooth equilibria for
//! combined loads, and a damped bead-chain simulator for the non-smooth
//! regime.

pub mod analytic;
pub mod bvp;
pub mod chain;
pub mod cli;
pub mod config;
pub mod critical;
pub mod error;
pub mod geometry;
pub mod loads;
pub mod ode;
pub mod plot;

pub use error::{Error, Result};
pub use loads::{LoadPair, LoadSample, LoadSpec};
