//! Noise sensitivity experiments for the Poisson Boolean (Gilbert disc) model.
//!
//! Discs of radius 1 are centred at the points of a planar Poisson process.
//! The crate samples such configurations, decides crossing and circuit
//! events exactly, perturbs configurations with resampling noise, runs the
//! frontier-growing query algorithm and measures its revealment, couples the
//! model to a fine lattice, and ships exact small-`n` engines for biased
//! Fourier-Walsh analysis and for hypergraph degree/variance inequalities.

pub mod binomial;
pub mod discretize;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod geometry;
pub mod hypergraph;
pub mod noise;
pub mod oracle;
pub mod sampling;
pub mod water;

pub use error::{Error, Result};
pub use sampling::{Point, PointSet, Rect, RngStream};
