//! Velocity-space solver and spectral toolkit for the spatially homogeneous
//! Landau equation with moderately soft potentials, `γ ∈ (−2, 0)`.

pub mod collision;
pub mod decayfit;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod fft;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod linearized;
pub mod maxwellian;
pub mod quadrature;
pub mod weight;

pub use error::{LandauError, Result};
pub use grid::{build_grid, Field, Grid};
pub use weight::WeightSpec;
