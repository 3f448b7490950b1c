//! End-to-end procedures built on the linearization: explicit ODE systems,
//! implicit function lifts, germ inversion and arc deformations over test rings.

pub mod drinfeld;
pub mod germ;
pub mod ode;
pub mod tougeron;
pub mod wavrik;
