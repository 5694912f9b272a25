//! Maxwellians and Maxwellian mixtures used as equilibria and initial data.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{Field, Grid};

/// Tail mass (relative to ρ) above which discretization emits a warning.
pub const TAIL_WARN_THRESHOLD: f64 = 1e-8;

/// `ρ / (2πT)^{3/2} exp(-|v-u|^2 / 2T)`.
#[inline]
pub fn maxwellian_density(v: [f64; 3], rho: f64, u: [f64; 3], temperature: f64) -> f64 {
    let d2 = (v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2) + (v[2] - u[2]).powi(2);
    rho * (2.0 * PI * temperature).powf(-1.5) * (-0.5 * d2 / temperature).exp()
}

/// Standard Maxwellian `μ` with unit mass, zero mean and unit temperature.
#[inline]
pub fn standard_maxwellian(v: [f64; 3]) -> f64 {
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    (2.0 * PI).powf(-1.5) * (-0.5 * r2).exp()
}

/// `μ^{1/2}` without forming μ first.
#[inline]
pub fn sqrt_standard_maxwellian(v: [f64; 3]) -> f64 {
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    (2.0 * PI).powf(-0.75) * (-0.25 * r2).exp()
}

/// Mass fraction of a Maxwellian that falls outside the box `[-L, L]^3`.
pub fn tail_mass_fraction(half_width: f64, u: [f64; 3], temperature: f64) -> f64 {
    let sigma = (2.0 * temperature).sqrt();
    let mut outside_any = 0.0;
    let mut inside_all = 1.0;
    for &ui in &u {
        let q = 0.5 * libm::erfc((half_width - ui) / sigma) + 0.5 * libm::erfc((half_width + ui) / sigma);
        outside_any += q;
        inside_all *= 1.0 - q;
    }
    // Small-tail regime: the union bound is accurate and avoids cancellation.
    if outside_any < 1e-6 {
        outside_any
    } else {
        1.0 - inside_all
    }
}

/// Samples `μ_{ρ,u,T}` at the cell centres.
pub fn discretize_maxwellian(grid: &Grid, rho: f64, u: [f64; 3], temperature: f64) -> Result<Field> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(invalid(format!("Maxwellian temperature must be positive, got {temperature}")));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(invalid(format!("Maxwellian density must be positive, got {rho}")));
    }
    let tail = tail_mass_fraction(grid.half_width(), u, temperature);
    if tail > TAIL_WARN_THRESHOLD {
        warn!(
            "Maxwellian (u = {u:?}, T = {temperature}) loses a fraction {tail:.3e} of its mass outside the box L = {}",
            grid.half_width()
        );
    }
    Ok(Field::from_fn(*grid, |v| maxwellian_density(v, rho, u, temperature)))
}

/// One component `(weight, u, T)` of a Maxwellian mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub velocity: [f64; 3],
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxwellianMixture {
    pub components: Vec<MixtureComponent>,
}

impl MaxwellianMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("Maxwellian mixture needs at least one component"));
        }
        for (i, c) in components.iter().enumerate() {
            if !(c.weight > 0.0) || !c.weight.is_finite() {
                return Err(invalid(format!("mixture component {i}: weight must be positive, got {}", c.weight)));
            }
            if !(c.temperature > 0.0) || !c.temperature.is_finite() {
                return Err(invalid(format!(
                    "mixture component {i}: temperature must be positive, got {}",
                    c.temperature
                )));
            }
            if c.velocity.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!("mixture component {i}: non-finite velocity")));
            }
        }
        Ok(MaxwellianMixture { components })
    }

    /// Analytic `(ρ, u, T)` with `T = (1/3ρ) ∫ |v-u|^2 f`.
    pub fn moments(&self) -> (f64, [f64; 3], f64) {
        let rho: f64 = self.components.iter().map(|c| c.weight).sum();
        let mut u = [0.0; 3];
        for c in &self.components {
            for d in 0..3 {
                u[d] += c.weight * c.velocity[d] / rho;
            }
        }
        let mut second = 0.0;
        for c in &self.components {
            let d2: f64 = (0..3).map(|d| (c.velocity[d] - u[d]).powi(2)).sum();
            second += c.weight * (3.0 * c.temperature + d2);
        }
        (rho, u, second / (3.0 * rho))
    }

    /// Rescales mass and applies the affine velocity change `v -> (v - u_f)/sqrt(T_f)`
    /// so the mixture has moments `(1, 0, 1)`.
    pub fn standardize(&self) -> MaxwellianMixture {
        let (rho, u, t) = self.moments();
        let scale = t.sqrt();
        let components = self
            .components
            .iter()
            .map(|c| MixtureComponent {
                weight: c.weight / rho,
                velocity: [
                    (c.velocity[0] - u[0]) / scale,
                    (c.velocity[1] - u[1]) / scale,
                    (c.velocity[2] - u[2]) / scale,
                ],
                temperature: c.temperature / t,
            })
            .collect();
        MaxwellianMixture { components }
    }

    pub fn density(&self, v: [f64; 3]) -> f64 {
        self.components
            .iter()
            .map(|c| maxwellian_density(v, c.weight, c.velocity, c.temperature))
            .sum()
    }

    pub fn discretize(&self, grid: &Grid) -> Result<Field> {
        let mut tail = 0.0;
        for c in &self.components {
            tail += c.weight * tail_mass_fraction(grid.half_width(), c.velocity, c.temperature);
        }
        let rho: f64 = self.components.iter().map(|c| c.weight).sum();
        if tail > TAIL_WARN_THRESHOLD * rho {
            warn!("mixture loses mass {tail:.3e} outside the box L = {}", grid.half_width());
        }
        Ok(Field::from_fn(*grid, |v| self.density(v)))
    }
}

/// Convenience wrapper: validates and standardizes in one go.
pub fn standardize_mixture(components: &[MixtureComponent]) -> Result<MaxwellianMixture> {
    Ok(MaxwellianMixture::new(components.to_vec())?.standardize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, integrate};
    use crate::weight::WeightSpec;

    #[test]
    fn standard_maxwellian_mass_on_reference_grid() {
        let g = build_grid(32, 8.0).unwrap();
        let mu = discretize_maxwellian(&g, 1.0, [0.0; 3], 1.0).unwrap();
        // Midpoint rule on a Gaussian: Poisson-summation error ~ 2 exp(-2π²/h²) and tail ~ erfc(8/√2).
        assert!((integrate(&mu, None) - 1.0).abs() < 1e-8);
        let mu2 = discretize_maxwellian(&g, 2.0, [0.0; 3], 1.0).unwrap();
        assert_eq!(integrate(&mu2, None), 2.0 * integrate(&mu, None));
    }

    #[test]
    fn second_polynomial_moment() {
        let g = build_grid(32, 8.0).unwrap();
        let mu = discretize_maxwellian(&g, 1.0, [0.0; 3], 1.0).unwrap();
        let m2 = integrate(&mu, Some(&WeightSpec::Polynomial { k: 2.0 }));
        assert!((m2 - 4.0).abs() < 1e-6, "{m2}");
    }

    #[test]
    fn zero_temperature_rejected() {
        let g = build_grid(8, 4.0).unwrap();
        assert!(discretize_maxwellian(&g, 1.0, [0.0; 3], 0.0).is_err());
    }

    #[test]
    fn tail_fraction_matches_one_dimensional_erfc() {
        let t = tail_mass_fraction(3.0, [0.0; 3], 1.0);
        let q = libm::erfc(3.0 / 2f64.sqrt());
        let expected = 1.0 - (1.0 - q).powi(3);
        assert!((t - expected).abs() < 1e-12);
    }

    #[test]
    fn single_standard_component_unchanged() {
        let c = MixtureComponent {
            weight: 1.0,
            velocity: [0.0; 3],
            temperature: 1.0,
        };
        let m = standardize_mixture(&[c]).unwrap();
        assert_eq!(m.components, vec![c]);
    }

    #[test]
    fn symmetric_pair_rescaled_by_temperature() {
        let u = 1.0;
        let comps = [
            MixtureComponent { weight: 0.5, velocity: [u, 0.0, 0.0], temperature: 1.0 },
            MixtureComponent { weight: 0.5, velocity: [-u, 0.0, 0.0], temperature: 1.0 },
        ];
        let m = standardize_mixture(&comps).unwrap();
        // T_f = (1/3)(3 + u^2) before rescaling.
        let scale = (1.0 + u * u / 3.0).sqrt();
        assert!((m.components[0].velocity[0] - u / scale).abs() < 1e-15);
        assert!((m.components[1].velocity[0] + u / scale).abs() < 1e-15);
        assert!((m.components[0].temperature - 1.0 / (scale * scale)).abs() < 1e-15);
        let (rho, mean, t) = m.moments();
        assert!((rho - 1.0).abs() < 1e-15 && mean.iter().all(|x| x.abs() < 1e-15));
        assert!((t - 1.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_components_rejected() {
        assert!(standardize_mixture(&[]).is_err());
        let bad_t = MixtureComponent { weight: 1.0, velocity: [0.0; 3], temperature: 0.0 };
        assert!(standardize_mixture(&[bad_t]).is_err());
        let bad_w = MixtureComponent { weight: -1.0, velocity: [0.0; 3], temperature: 1.0 };
        assert!(standardize_mixture(&[bad_w]).is_err());
    }
}
