//! Multi-parametric logarithmic capacity on the n-torus and the summation
//! theory of multiple Fourier series in the Dirichlet space of the polydisc.

pub mod capacity;
pub mod cli;
pub mod construct;
pub mod error;
pub mod fft;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod quadrature;
pub mod series;
pub mod setspec;

pub use error::{Error, Result};
pub use grid::{GridMeasure, GridSet, TorusGrid};
