//! Exact method of moments (eMoM) for population balance equations with a
//! size and a composition coordinate.
//!
//! The population of coprecipitating two-component particles is transported
//! along discrete characteristics of the growth field. Only the quadrature
//! nodes of the initial density are moved; the number density is recovered
//! afterwards by evaluating characteristics backwards or forwards.
//!
//! * [`model`]: states, kinetics, process data, initial densities, grids
//! * [`characteristics`]: discrete characteristic maps and their Jacobians
//! * [`solver`]: the fixed-point time stepper for the concentrations
//! * [`reconstruction`]: number density, radial composition profile, moments
//! * [`fvm`]: a finite-volume baseline on a rectangular grid
//! * [`bench`]: configuration, error norms, slope fits and experiment drivers

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod characteristics;
pub mod error;
pub mod fvm;
pub mod model;
pub mod reconstruction;
pub mod solver;

pub use error::{Error, Result};
