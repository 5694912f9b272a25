//! Velocity weights for moments and weighted norms.

use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};

/// `⟨v⟩ = sqrt(1 + |v|^2)`.
#[inline]
pub fn japanese(v: [f64; 3]) -> f64 {
    (1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
pub fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Where a weight is going to be used; the admissible stretched-exponential
/// exponents differ between the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightContext {
    /// Weighted spaces for the linearized operator and its splitting.
    Linearized,
    /// Moment propagation along nonlinear trajectories.
    Moments,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `⟨v⟩^k`.
    Polynomial { k: f64 },
    /// `exp(κ ⟨v⟩^s)`.
    StretchedExp { kappa: f64, s: f64 },
    /// `μ(v)^{-1/2}` for the standard Maxwellian. Overflows for wide boxes.
    InverseSqrtMaxwellian,
}

impl WeightSpec {
    pub fn polynomial(k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(LandauError::WeightValidation(format!(
                "polynomial weight needs k >= 0, got {k}"
            )));
        }
        Ok(WeightSpec::Polynomial { k })
    }

    pub fn stretched_exp(kappa: f64, s: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(LandauError::WeightValidation(format!(
                "stretched exponential weight needs kappa > 0, got {kappa}"
            )));
        }
        if !(s > 0.0 && s < 2.0) {
            return Err(LandauError::WeightValidation(format!(
                "stretched exponential weight needs 0 < s < 2, got {s}"
            )));
        }
        Ok(WeightSpec::StretchedExp { kappa, s })
    }

    #[inline]
    pub fn eval(&self, v: [f64; 3]) -> f64 {
        match *self {
            WeightSpec::Polynomial { k } => {
                if k == 0.0 {
                    1.0
                } else {
                    japanese(v).powf(k)
                }
            }
            WeightSpec::StretchedExp { kappa, s } => (kappa * japanese(v).powf(s)).exp(),
            WeightSpec::InverseSqrtMaxwellian => {
                let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                (2.0 * std::f64::consts::PI).powf(0.75) * (0.25 * r2).exp()
            }
        }
    }

    /// Checks the context-dependent admissibility rules:
    /// `s + γ > 0` for linearized work and `s < 2 + γ` for moment propagation.
    pub fn validate(&self, context: WeightContext, gamma: f64) -> Result<()> {
        match *self {
            WeightSpec::Polynomial { k } => {
                if !(k >= 0.0) {
                    return Err(LandauError::WeightValidation(format!(
                        "polynomial weight needs k >= 0, got {k}"
                    )));
                }
            }
            WeightSpec::StretchedExp { kappa, s } => {
                WeightSpec::stretched_exp(kappa, s)?;
                match context {
                    WeightContext::Linearized if s + gamma <= 0.0 => {
                        return Err(LandauError::WeightValidation(format!(
                            "weight exp({kappa}<v>^{s}) requires s + gamma > 0 for the linearized \
                             operator (s + gamma = {})",
                            s + gamma
                        )));
                    }
                    WeightContext::Moments if s >= 2.0 + gamma => {
                        return Err(LandauError::WeightValidation(format!(
                            "weight exp({kappa}<v>^{s}) requires s < 2 + gamma for moment \
                             propagation (2 + gamma = {})",
                            2.0 + gamma
                        )));
                    }
                    _ => {}
                }
            }
            WeightSpec::InverseSqrtMaxwellian => {}
        }
        Ok(())
    }

    /// Canonical key fragment used in CSV column names, e.g. `k4`,
    /// `exp_k0.1_s0.75`, `invsqrtmu`.
    pub fn key(&self) -> String {
        match *self {
            WeightSpec::Polynomial { k } => format!("k{k}"),
            WeightSpec::StretchedExp { kappa, s } => format!("exp_k{kappa}_s{s}"),
            WeightSpec::InverseSqrtMaxwellian => "invsqrtmu".to_string(),
        }
    }

    /// Parses the canonical key fragment back into a weight.
    pub fn from_key(key: &str) -> Result<Self> {
        let bad = || LandauError::Config(format!("unrecognised weight key `{key}`"));
        if key == "invsqrtmu" {
            return Ok(WeightSpec::InverseSqrtMaxwellian);
        }
        if let Some(rest) = key.strip_prefix("exp_k") {
            let (kappa, s) = rest.split_once("_s").ok_or_else(bad)?;
            let kappa: f64 = kappa.parse().map_err(|_| bad())?;
            let s: f64 = s.parse().map_err(|_| bad())?;
            return WeightSpec::stretched_exp(kappa, s);
        }
        if let Some(k) = key.strip_prefix('k') {
            let k: f64 = k.parse().map_err(|_| bad())?;
            return WeightSpec::polynomial(k);
        }
        Err(bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_rules() {
        let v = [1.0, 2.0, 2.0];
        assert!((japanese(v) - 10f64.sqrt()).abs() < 1e-15);
        assert!((WeightSpec::Polynomial { k: 2.0 }.eval(v) - 10.0).abs() < 1e-12);
        let w = WeightSpec::StretchedExp { kappa: 0.1, s: 2.0 - 1e-12 };
        assert!((w.eval(v) - 1.0f64.exp()).abs() < 1e-9);
        let m = WeightSpec::InverseSqrtMaxwellian.eval([0.0; 3]);
        assert!((m - (2.0 * std::f64::consts::PI).powf(0.75)).abs() < 1e-12);
    }

    #[test]
    fn linearized_context_requires_s_plus_gamma_positive() {
        let w = WeightSpec::stretched_exp(0.1, 0.3).unwrap();
        let err = w.validate(WeightContext::Linearized, -0.5).unwrap_err();
        assert!(matches!(err, LandauError::WeightValidation(_)));
        assert!(err.to_string().contains("s + gamma > 0"));
        WeightSpec::stretched_exp(0.1, 0.75)
            .unwrap()
            .validate(WeightContext::Linearized, -0.5)
            .unwrap();
    }

    #[test]
    fn moment_context_requires_s_below_two_plus_gamma() {
        let w = WeightSpec::stretched_exp(0.1, 1.6).unwrap();
        assert!(w.validate(WeightContext::Moments, -0.5).is_err());
        assert!(w.validate(WeightContext::Linearized, -0.5).is_ok());
    }

    #[test]
    fn constructor_ranges() {
        assert!(WeightSpec::stretched_exp(0.0, 1.0).is_err());
        assert!(WeightSpec::stretched_exp(0.1, 2.0).is_err());
        assert!(WeightSpec::polynomial(-1.0).is_err());
    }

    #[test]
    fn keys_round_trip() {
        for w in [
            WeightSpec::Polynomial { k: 4.0 },
            WeightSpec::Polynomial { k: 2.5 },
            WeightSpec::StretchedExp { kappa: 0.1, s: 0.75 },
            WeightSpec::InverseSqrtMaxwellian,
        ] {
            assert_eq!(WeightSpec::from_key(&w.key()).unwrap(), w);
        }
        assert_eq!(WeightSpec::Polynomial { k: 4.0 }.key(), "k4");
        assert_eq!(WeightSpec::StretchedExp { kappa: 0.1, s: 0.75 }.key(), "exp_k0.1_s0.75");
    }
}
