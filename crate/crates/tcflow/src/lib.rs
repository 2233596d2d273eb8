//! Taylor-Couette-Poiseuille flow between narrow-gap cylinders: base state,
//! linear stability, bifurcated branches, flow topology of the bifurcated
//! states, and a spectral time-stepper to check the predictions.

pub mod baseflow;
pub mod bifurcation;
pub mod boxmodel;
pub mod chandrasekhar;
pub mod dns;
pub mod error;
pub mod field;
pub mod linstab;
pub mod spectral;
pub mod separation;
pub mod spline;
pub mod topology;

pub use error::{Error, Result};
