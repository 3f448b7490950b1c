//! Exact formal power series, division theorems, scissions and
//! Rank-Theorem linearization of textile maps, with applications to arc
//! lifting, power-series ODE solving and implicit-function style lifts.

pub mod error;
pub mod series;

pub use error::{Error, Result};
pub mod random;
pub mod textile;
pub mod division;
pub mod nmatrix;
pub mod linearize;
pub mod arcspace;
pub mod apps;
pub mod fixtures;
pub mod verify;
pub mod cli;
