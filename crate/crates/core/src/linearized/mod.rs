//! Linearized operator around the standard Maxwellian: radial coefficient
//! integrals, the weighted dissipativity multiplier with its cutoff search,
//! and dense assembly with spectral analysis.

pub mod dissipativity;
pub mod operator;
pub mod radial;

pub use dissipativity::{find_mr, phi_direct, phi_mp, Certificate, CutoffSpec};
pub use operator::{assemble, spectral_report, weighted_dissipation_bound, LinearizedOperator, SpectralReport};
pub use radial::{bar_coefficients, RadialTable};
