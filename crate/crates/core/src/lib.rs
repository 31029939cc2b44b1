//! Underwater vehicle pose estimation workbench.
//!
//! A 15-state extended Kalman filter fuses simulated IMU, DVL, USBL,
//! pressure-depth and intermittent surface position fixes gathered along a
//! scripted ground-truth trajectory. Experiments compare sensor
//! configurations by per-axis mean squared pose error.

pub mod cli;
pub mod config;
pub mod ekf;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod output;
pub mod parallel;
pub mod sensors;
pub mod sim;
pub mod state;

pub use error::{Error, Result};
