//! Weighted dissipativity multiplier `φ_{m,p}` and the `(M, R)` cutoff search.
//!
//! For `m = exp(κ⟨v⟩^s)`:
//! `φ = 2κs J_{γ+2}⟨v⟩^{s−2} + κs(s−2) ℓ₁|v|²⟨v⟩^{s−4} + pκ²s² ℓ₁|v|²⟨v⟩^{2s−4}
//!      − 2κs ℓ₁|v|²⟨v⟩^{s−2} + 2(γ+3)(1 − 1/p) J_γ`,
//! and for `m = μ^{−1/2}` (with `p = 2`): `φ = J_{γ+2} − ½ℓ₁|v|² + (γ+3)J_γ`.

use serde::{Deserialize, Serialize};

use super::radial::{RadialSample, RadialTable};
use crate::error::{invalid, LandauError, Result};
use crate::kernels::check_gamma;
use crate::weight::{norm3, WeightContext, WeightSpec};

/// `φ` from precomputed radial values at radius `r`.
pub fn phi_from_sample(r: f64, s: &RadialSample, weight: &WeightSpec, p: f64, gamma: f64) -> Result<f64> {
    match *weight {
        WeightSpec::StretchedExp { kappa, s: sx } => {
            if !(p >= 1.0) {
                return Err(invalid(format!("p must be at least 1, got {p}")));
            }
            let jv = (1.0 + r * r).sqrt();
            let r2 = r * r;
            let ks = kappa * sx;
            Ok(2.0 * ks * s.j_gamma2 * jv.powf(sx - 2.0)
                + ks * (sx - 2.0) * s.ell1 * r2 * jv.powf(sx - 4.0)
                + p * ks * ks * s.ell1 * r2 * jv.powf(2.0 * sx - 4.0)
                - 2.0 * ks * s.ell1 * r2 * jv.powf(sx - 2.0)
                + 2.0 * (gamma + 3.0) * (1.0 - 1.0 / p) * s.j_gamma)
        }
        WeightSpec::InverseSqrtMaxwellian => Ok(s.j_gamma2 - 0.5 * s.ell1 * r * r + (gamma + 3.0) * s.j_gamma),
        WeightSpec::Polynomial { .. } => Err(LandauError::WeightValidation(
            "the dissipativity multiplier is defined for stretched-exponential and inverse-sqrt-Maxwellian weights only"
                .into(),
        )),
    }
}

fn check_phi_inputs(weight: &WeightSpec, gamma: f64) -> Result<()> {
    check_gamma(gamma)?;
    if let WeightSpec::Polynomial { .. } = weight {
        return Err(LandauError::WeightValidation(
            "the dissipativity multiplier is defined for stretched-exponential and inverse-sqrt-Maxwellian weights only"
                .into(),
        ));
    }
    weight.validate(WeightContext::Linearized, gamma)
}

/// `φ_{m,p}(v)` using the radial table (`p` is ignored for `μ^{−1/2}`).
pub fn phi_mp(v: [f64; 3], weight: &WeightSpec, p: f64, gamma: f64, table: &RadialTable) -> Result<f64> {
    check_phi_inputs(weight, gamma)?;
    let r = norm3(v);
    phi_from_sample(r, &table.eval(r)?, weight, p, gamma)
}

/// `φ_{m,p}` at radius `r` by direct quadrature (any radius).
pub fn phi_direct(r: f64, weight: &WeightSpec, p: f64, gamma: f64) -> Result<f64> {
    check_phi_inputs(weight, gamma)?;
    phi_from_sample(r, &RadialSample::direct(r, gamma)?, weight, p, gamma)
}

/// Smooth plateau `χ(r)`: 1 for `r ≤ 1`, 0 for `r ≥ 2`, exp-based partition between.
pub fn chi_profile(r: f64) -> f64 {
    let eta = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = eta(2.0 - r);
        a / (a + eta(r - 1.0))
    }
}

/// Cutoff `M χ_R(v) = M χ(|v|/R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub m: f64,
    pub r: f64,
}

impl CutoffSpec {
    pub fn new(m: f64, r: f64) -> Result<Self> {
        if !(m >= 0.0) || !m.is_finite() {
            return Err(invalid(format!("cutoff amplitude must be finite and nonnegative, got {m}")));
        }
        if !(r >= 1.0) || !r.is_finite() {
            return Err(invalid(format!("cutoff radius must be at least 1, got {r}")));
        }
        Ok(CutoffSpec { m, r })
    }

    pub fn chi(&self, v: [f64; 3]) -> f64 {
        chi_profile(norm3(v) / self.r)
    }

    pub fn chi_radial(&self, r: f64) -> f64 {
        chi_profile(r / self.r)
    }

    pub fn value(&self, v: [f64; 3]) -> f64 {
        self.m * self.chi(v)
    }
}

/// Output of [`find_mr`]: the cutoff, the sweep it was verified on and the
/// worst margin `sup (φ − Mχ_R)` over that sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub cutoff: CutoffSpec,
    pub lambda: f64,
    pub p: f64,
    pub gamma: f64,
    pub weight: WeightSpec,
    pub worst_margin: f64,
    /// `(r, φ(r))` pairs.
    pub sweep: Vec<(f64, f64)>,
}

impl Certificate {
    /// `φ(r) − Mχ_R(r)` along the sweep.
    pub fn margins(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.sweep
            .iter()
            .map(|&(r, phi)| (r, phi, phi - self.cutoff.m * self.cutoff.chi_radial(r)))
    }
}

/// Radii of the verification sweep: step 0.05 up to 16, then geometric (×1.01).
pub fn sweep_radii(radius_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        let r = 0.05 * i as f64;
        if r > 16.0 || r > radius_max {
            break;
        }
        out.push(r);
        i += 1;
    }
    let mut r = *out.last().unwrap_or(&0.0);
    while r < radius_max {
        r = (r * 1.01).min(radius_max);
        out.push(r);
    }
    out
}

/// Picks `(M, R)` for a sampled profile `φ(r)`: the smallest `R = 2^j ≥ 1`
/// with `φ ≤ −λ` on all samples beyond `R`, then `M = max(0, sup_{r≤R} φ + λ)`.
/// The tail of the profile must be non-increasing (asymptote check).
pub fn select_cutoff(lambda: f64, sweep: &[(f64, f64)]) -> Result<CutoffSpec> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("target rate must be positive, got {lambda}")));
    }
    let radius_max = sweep.last().map(|s| s.0).unwrap_or(0.0);
    let fail = |detail: String| LandauError::SearchFailure { radius_max, detail };
    if sweep.len() < 8 {
        return Err(fail("sweep too short".into()));
    }
    // Asymptote check over the last 5% of samples.
    let tail_start = sweep.len() - (sweep.len() / 20).max(4);
    for w in sweep[tail_start..].windows(2) {
        if w[1].1 > w[0].1 {
            return Err(fail(format!(
                "phi is not decreasing near the end of the sweep (r = {:.4e}: {:.6e} -> {:.6e})",
                w[1].0, w[0].1, w[1].1
            )));
        }
    }
    let mut radius = 1.0;
    while radius <= radius_max {
        let tail_ok = sweep.iter().filter(|s| s.0 > radius).all(|s| s.1 <= -lambda);
        if tail_ok {
            let sup_inner = sweep
                .iter()
                .filter(|s| s.0 <= radius)
                .map(|s| s.1)
                .fold(f64::NEG_INFINITY, f64::max);
            let m = (sup_inner + lambda).max(0.0);
            return CutoffSpec::new(m, radius);
        }
        radius *= 2.0;
    }
    let worst_end = sweep.last().map(|s| s.1).unwrap_or(f64::NAN);
    Err(fail(format!(
        "phi exceeds -lambda = {:.4} somewhere beyond every candidate radius (phi at the end of the sweep: {worst_end:.6e})",
        -lambda
    )))
}

/// Constructs and verifies `(M, R)` with `φ_{m,p} − Mχ_R ≤ −λ` along a dense
/// radial sweep to `radius_max`.
pub fn find_mr(lambda: f64, weight: &WeightSpec, p: f64, gamma: f64, radius_max: f64) -> Result<Certificate> {
    check_phi_inputs(weight, gamma)?;
    if !(radius_max > 16.0) || !radius_max.is_finite() {
        return Err(invalid(format!("search radius must exceed 16, got {radius_max}")));
    }
    let sweep = sweep_radii(radius_max)
        .into_iter()
        .map(|r| phi_direct(r, weight, p, gamma).map(|phi| (r, phi)))
        .collect::<Result<Vec<_>>>()?;
    let cutoff = select_cutoff(lambda, &sweep)?;
    let mut cert = Certificate {
        cutoff,
        lambda,
        p,
        gamma,
        weight: *weight,
        worst_margin: f64::NEG_INFINITY,
        sweep,
    };
    cert.worst_margin = cert.margins().map(|m| m.2).fold(f64::NEG_INFINITY, f64::max);
    if cert.worst_margin > -lambda * (1.0 - 1e-6) {
        return Err(LandauError::SearchFailure {
            radius_max,
            detail: format!("verification sweep margin {:.6e} above -lambda", cert.worst_margin),
        });
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_plateaus_and_range() {
        assert_eq!(chi_profile(0.3), 1.0);
        assert_eq!(chi_profile(1.0), 1.0);
        assert_eq!(chi_profile(2.0), 0.0);
        assert_eq!(chi_profile(7.0), 0.0);
        assert!((chi_profile(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let x = chi_profile(1.0 + i as f64 / 100.0);
            assert!((0.0..=1.0).contains(&x) && x <= prev);
            prev = x;
        }
    }

    #[test]
    fn degenerate_profile_gives_trivial_cutoff() {
        let sweep: Vec<(f64, f64)> = sweep_radii(100.0).into_iter().map(|r| (r, -2.0 - r)).collect();
        let c = select_cutoff(1.0, &sweep).unwrap();
        assert_eq!(c, CutoffSpec { m: 0.0, r: 1.0 });
    }

    #[test]
    fn bump_profile() {
        // φ = 3 − r: φ ≤ −1 needs r ≥ 4, so R = 4 and M = sup φ + λ = 3 + 1.
        let sweep: Vec<(f64, f64)> = sweep_radii(64.0).into_iter().map(|r| (r, 3.0 - r)).collect();
        let c = select_cutoff(1.0, &sweep).unwrap();
        assert_eq!(c.r, 4.0);
        assert!((c.m - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rising_tail_rejected() {
        let sweep: Vec<(f64, f64)> = sweep_radii(64.0).into_iter().map(|r| (r, r - 100.0)).collect();
        assert!(matches!(select_cutoff(1.0, &sweep), Err(LandauError::SearchFailure { .. })));
    }

    #[test]
    fn cutoff_validation() {
        assert!(CutoffSpec::new(-1.0, 2.0).is_err());
        assert!(CutoffSpec::new(1.0, 0.5).is_err());
    }
}
