//! Closed-form social costs and price of anarchy for linear-quadratic
//! extended mean field games.
//!
//! The crate compares two ways a large population can pick a common
//! feedback control:
//!
//! * a mean field game (MFG) equilibrium, where every agent best-responds
//!   to the population flows, and
//! * the McKean-Vlasov (MKV) central planner, who minimises the social
//!   cost directly.
//!
//! With constant coefficients both problems reduce to three scalar Riccati
//! equations plus linear ODEs, so every social cost is explicit up to one
//! dimensional quadrature. [`socialcost::price_of_anarchy`] returns both
//! costs, their difference computed two independent ways, and the ratio.
//! [`verify`] holds the Runge-Kutta and Monte Carlo oracles used to check
//! the closed forms, and [`sweep`] drives one-parameter studies and their
//! limiting behaviour.
//!
//! ```
//! use mfg_poa::{model::ModelParams, socialcost, trajectories::TimeGrid};
//!
//! let params = ModelParams::default();
//! let grid = TimeGrid::new(params.horizon, 2001).unwrap();
//! let report = socialcost::price_of_anarchy(&params, &grid).unwrap();
//! assert!(report.poa > 1.0);
//! assert!((report.delta_direct - report.delta_prop2).abs() < 1e-8);
//! ```

pub mod error;
pub mod model;
pub mod numeric;
pub mod riccati;
pub mod socialcost;
pub mod sweep;
pub mod trajectories;
pub mod verify;

pub use error::{Error, Result};
