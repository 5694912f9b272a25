//! Radial profiles of the Maxwellian-convolved coefficients.
//!
//! `J_α(r) = ∫ |v − w|^α μ(w) dw` at `|v| = r`, and the two eigenvalues of
//! `ā = a∗μ`: `ℓ₁` along `v` and `ℓ₂` (double) across it, so that
//! `ā = ℓ₁ v̂v̂ᵀ + ℓ₂ (I − v̂v̂ᵀ)`, `b̄ = −ℓ₁ v`, `c̄ = −2(γ+3) J_γ`.

use std::f64::consts::PI;

use crate::collision::CoefficientFields;
use crate::error::{invalid, LandauError, Result};
use crate::grid::Grid;
use crate::kernels::{check_gamma, SYM_PAIRS};
use crate::quadrature::{integrate_pieces, Tolerance};

/// Beyond this distance from its centre the Gaussian factor is below 1e-340.
const GAUSS_REACH: f64 = 40.0;

const J_TOL: Tolerance = Tolerance::relative(1e-12);
const ELL_TOL: Tolerance = Tolerance::relative(1e-11);

/// Below this radius `J_α` is replaced by its Taylor expansion at the origin.
const SMALL_R: f64 = 1e-3;

fn gauss_norm() -> f64 {
    (2.0 * PI).powf(-1.5)
}

/// `J_α(0) = 4π ∫ ρ^{α+2} g₁(ρ) dρ = 4π (2π)^{-3/2} 2^{(α+1)/2} Γ((α+3)/2)`.
fn j_alpha_origin(alpha: f64) -> f64 {
    4.0 * PI * gauss_norm() * 2f64.powf(0.5 * (alpha + 1.0)) * libm::tgamma(0.5 * (alpha + 3.0))
}

/// `J_α(r)` by adaptive quadrature of the one-dimensional radial reduction
/// `(2π/r) ∫ ρ g₁(ρ) [(r+ρ)^{α+2} − |r−ρ|^{α+2}] / (α+2) dρ`.
pub fn j_alpha(r: f64, alpha: f64) -> Result<f64> {
    if !(alpha > -3.0) || !alpha.is_finite() {
        return Err(invalid(format!("J_alpha needs alpha > -3, got {alpha}")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(invalid(format!("radius must be finite and nonnegative, got {r}")));
    }
    if r < SMALL_R {
        // ΔJ_α(0) = E[|X|^α (|X|² − 3)] = J_{α+2}(0) − 3 J_α(0); the next term is O(r⁴).
        let j0 = j_alpha_origin(alpha);
        return Ok(j0 + r * r / 6.0 * (j_alpha_origin(alpha + 2.0) - 3.0 * j0));
    }
    let e = alpha + 2.0;
    let bracket = move |rho: f64| -> f64 {
        if e.abs() < 1e-14 {
            ((r + rho) / (r - rho).abs()).ln()
        } else {
            ((r + rho).powf(e) - (r - rho).abs().powf(e)) / e
        }
    };
    let mut integrand = |rho: f64| rho * (-0.5 * rho * rho).exp() * bracket(rho);
    let mut points = vec![0.0];
    if r < GAUSS_REACH {
        points.push(r);
    }
    points.push(GAUSS_REACH);
    let est = integrate_pieces(&mut integrand, &points, J_TOL)?;
    Ok(2.0 * PI / r * gauss_norm() * est.value)
}

/// `E_n(k) = ∫_0^2 s^n e^{−ks} ds` for `n = 0, 1, 2`.
fn polar_moments(k: f64) -> [f64; 3] {
    if k < 2.0 {
        // Power series in k; terms decay like (2k)^m / m!.
        let mut out = [0.0; 3];
        for (n, o) in out.iter_mut().enumerate() {
            let mut term = 1.0; // (−k)^m / m!
            let mut acc = 0.0;
            for m in 0..80 {
                let p = (n + m + 1) as f64;
                let add = term * 2f64.powi((n + m + 1) as i32) / p;
                acc += add;
                if add.abs() < 1e-18 * acc.abs() && m > 4 {
                    break;
                }
                term *= -k / (m + 1) as f64;
            }
            *o = acc;
        }
        out
    } else {
        let e = (-2.0 * k).exp();
        [
            (1.0 - e) / k,
            (1.0 - e * (1.0 + 2.0 * k)) / (k * k),
            (2.0 - e * (2.0 + 4.0 * k + 4.0 * k * k)) / (k * k * k),
        ]
    }
}

/// `(ℓ₁, ℓ₂)` at radius `r`: radial quadrature over `ρ = |w|` with the polar
/// integral done in closed form (`s = 1 − cos θ`, weights `s(2−s)` for `ℓ₁`
/// and `1 − s + s²/2` for `ℓ₂`).
pub fn ell12(r: f64, gamma: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(invalid(format!("radius must be finite and nonnegative, got {r}")));
    }
    let pref = 2.0 * PI * gauss_norm();
    let lo = (r - GAUSS_REACH).max(0.0);
    let mut points = vec![lo];
    for x in [r - 8.0, r, r + 8.0] {
        if x > lo {
            points.push(x);
        }
    }
    points.push(r + GAUSS_REACH);
    let radial = move |rho: f64| rho.powf(gamma + 4.0) * (-0.5 * (r - rho).powi(2)).exp();
    let mut f1 = |rho: f64| {
        let e = polar_moments(r * rho);
        radial(rho) * (2.0 * e[1] - e[2])
    };
    let l1 = integrate_pieces(&mut f1, &points, ELL_TOL)?.value;
    let mut f2 = |rho: f64| {
        let e = polar_moments(r * rho);
        radial(rho) * (e[0] - e[1] + 0.5 * e[2])
    };
    let l2 = integrate_pieces(&mut f2, &points, ELL_TOL)?.value;
    Ok((pref * l1, pref * l2))
}

/// Values of all radial profiles at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSample {
    pub j_gamma: f64,
    pub j_gamma2: f64,
    pub j_two: f64,
    pub ell1: f64,
    pub ell2: f64,
}

impl RadialSample {
    /// Direct quadrature at `r` (no table).
    pub fn direct(r: f64, gamma: f64) -> Result<Self> {
        let (ell1, ell2) = ell12(r, gamma)?;
        Ok(RadialSample {
            j_gamma: j_alpha(r, gamma)?,
            j_gamma2: j_alpha(r, gamma + 2.0)?,
            j_two: j_alpha(r, 2.0)?,
            ell1,
            ell2,
        })
    }

    fn as_array(&self) -> [f64; 5] {
        [self.j_gamma, self.j_gamma2, self.j_two, self.ell1, self.ell2]
    }

    fn from_array(a: [f64; 5]) -> Self {
        RadialSample {
            j_gamma: a[0],
            j_gamma2: a[1],
            j_two: a[2],
            ell1: a[3],
            ell2: a[4],
        }
    }
}

/// Default number of uniform samples.
pub const DEFAULT_TABLE_SAMPLES: usize = 2048;

/// Uniformly sampled radial profiles with four-point cubic interpolation.
/// All profiles are even in `r`, which supplies the stencil near the origin.
#[derive(Debug, Clone)]
pub struct RadialTable {
    gamma: f64,
    r_max: f64,
    step: f64,
    samples: Vec<[f64; 5]>,
}

impl RadialTable {
    pub fn build(gamma: f64, r_max: f64, samples: usize) -> Result<Self> {
        check_gamma(gamma)?;
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(invalid(format!("table radius must be positive, got {r_max}")));
        }
        if samples < 4 {
            return Err(invalid("radial table needs at least 4 samples"));
        }
        let step = r_max / (samples - 1) as f64;
        let values = (0..samples)
            .map(|i| RadialSample::direct(i as f64 * step, gamma).map(|s| s.as_array()))
            .collect::<Result<Vec<_>>>()?;
        for (i, v) in values.iter().enumerate() {
            if !(v[3] > 0.0 && v[4] > 0.0) {
                return Err(LandauError::Quadrature(format!(
                    "nonpositive coefficient eigenvalue at r = {}",
                    i as f64 * step
                )));
            }
        }
        Ok(RadialTable {
            gamma,
            r_max,
            step,
            samples: values,
        })
    }

    /// Table covering the whole box `[−L, L]^3` (`r_max = 2L√3`).
    pub fn for_grid(grid: &Grid, gamma: f64) -> Result<Self> {
        Self::build(gamma, 2.0 * grid.half_width() * 3f64.sqrt(), DEFAULT_TABLE_SAMPLES)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample radius and stored values of row `i`.
    pub fn row(&self, i: usize) -> (f64, RadialSample) {
        (i as f64 * self.step, RadialSample::from_array(self.samples[i]))
    }

    pub fn eval(&self, r: f64) -> Result<RadialSample> {
        let r = r.abs();
        if r > self.r_max * (1.0 + 1e-12) {
            return Err(invalid(format!(
                "radius {r} outside the radial table range [0, {}]",
                self.r_max
            )));
        }
        let n = self.samples.len();
        let x = r / self.step;
        let i = (x.floor() as usize).min(n - 2);
        // Stencil i-1..=i+2, shifted left at the far end, mirrored at the origin.
        let start = (i as isize - 1).min(n as isize - 4);
        let mut out = [0.0; 5];
        for m in 0..4 {
            let node = start + m as isize;
            let vals = &self.samples[node.unsigned_abs()];
            let mut w = 1.0;
            for q in 0..4 {
                if q != m {
                    let other = (start + q as isize) as f64;
                    w *= (x - other) / (node as f64 - other);
                }
            }
            for c in 0..5 {
                out[c] += w * vals[c];
            }
        }
        Ok(RadialSample::from_array(out))
    }

    /// Largest relative interpolation error at the midpoints between samples
    /// in `rows`, measured against direct quadrature.
    pub fn midpoint_error(&self, rows: impl Iterator<Item = usize>) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in rows {
            if i + 1 >= self.samples.len() {
                continue;
            }
            let r = (i as f64 + 0.5) * self.step;
            let t = self.eval(r)?.as_array();
            let d = RadialSample::direct(r, self.gamma)?.as_array();
            for c in 0..5 {
                worst = worst.max((t[c] - d[c]).abs() / d[c].abs());
            }
        }
        Ok(worst)
    }
}

/// `ā`, `b̄`, `c̄` for `g = μ` from the radial profiles.
pub fn bar_coefficients(grid: &Grid, gamma: f64, table: &RadialTable) -> Result<CoefficientFields> {
    if (table.gamma() - gamma).abs() > 0.0 {
        return Err(invalid(format!(
            "radial table built for gamma = {}, requested {gamma}",
            table.gamma()
        )));
    }
    if grid.max_speed() > table.r_max() * (1.0 + 1e-12) {
        return Err(invalid(format!(
            "radial table reaches r = {} but the grid needs {}",
            table.r_max(),
            grid.max_speed()
        )));
    }
    let mut out = CoefficientFields::zeros(*grid);
    for idx in 0..grid.cell_count() {
        let v = grid.velocity(idx);
        let r = crate::weight::norm3(v);
        let s = table.eval(r)?;
        let u = if r > 0.0 { [v[0] / r, v[1] / r, v[2] / r] } else { [0.0; 3] };
        for (slot, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            out.a[slot][idx] = s.ell1 * u[i] * u[j] + s.ell2 * (delta - u[i] * u[j]);
        }
        for d in 0..3 {
            out.b[d][idx] = -s.ell1 * v[d];
        }
        out.c[idx] = -2.0 * (gamma + 3.0) * s.j_gamma;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_moments_branches_agree() {
        for &k in &[1.999_999, 2.0] {
            let e = polar_moments(k);
            let s = polar_moments(k - 1e-9);
            for n in 0..3 {
                assert!((e[n] - s[n]).abs() < 1e-8 * e[n]);
            }
        }
        assert_eq!(polar_moments(0.0), [2.0, 2.0, 8.0 / 3.0]);
    }

    #[test]
    fn j_alpha_origin_matches_quadrature_near_zero() {
        for &a in &[-1.5, -0.5, 1.5] {
            let inner = j_alpha(SMALL_R * (1.0 - 1e-9), a).unwrap();
            let outer = j_alpha(SMALL_R * (1.0 + 1e-9), a).unwrap();
            assert!((inner - outer).abs() < 1e-11 * inner, "{a}: {inner} {outer}");
        }
    }
}
