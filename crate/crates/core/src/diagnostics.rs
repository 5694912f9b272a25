//! Scalar diagnostics of a distribution field: moments, entropies, dissipation,
//! weighted norms, Fisher information, coercivity and the entropy/dissipation ratio.

use serde::{Deserialize, Serialize};

use crate::collision::CoefficientFields;
use crate::error::{invalid, LandauError, Result};
use crate::grid::{central_difference, integrate_with, pairwise_sum, pairwise_sum_by, Field, Grid};
use crate::kernels::check_gamma;
use crate::linalg::sym3_eigenvalues;
use crate::maxwellian::discretize_maxwellian;
use crate::weight::{japanese, WeightSpec};

/// Floor under logarithms and square roots, relative to the peak of `f`.
/// Shared with the collision operator so that `D = −Σ Q log F` is exactly the
/// nonnegative entropy production of the discrete scheme.
pub const DEFAULT_EPS_LOG: f64 = crate::collision::COLLISION_LOG_FLOOR;

/// Box half width above which `μ^{−1/2}` weights need an explicit override.
pub const RISKY_WEIGHT_HALF_WIDTH: f64 = 8.0;

/// `(ρ, u, T)` by midpoint quadrature.
pub fn moments(f: &Field) -> Result<(f64, [f64; 3], f64)> {
    let rho = integrate_with(f, |_| 1.0);
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(LandauError::NonPositiveMass(rho));
    }
    let u = [0, 1, 2].map(|d| integrate_with(f, |v| v[d]) / rho);
    let t = integrate_with(f, |v| {
        let w = [v[0] - u[0], v[1] - u[1], v[2] - u[2]];
        w[0] * w[0] + w[1] * w[1] + w[2] * w[2]
    }) / (3.0 * rho);
    Ok((rho, u, t))
}

fn floored(f: &Field, eps_log: f64) -> impl Fn(f64) -> f64 {
    let floor = f.max().max(0.0) * eps_log;
    let floor = if floor > 0.0 { floor } else { f64::MIN_POSITIVE };
    move |x: f64| x.max(floor)
}

/// `H(f) = ∫ f log f` with `log max(f, ε·peak)`.
pub fn entropy(f: &Field, eps_log: f64) -> f64 {
    let fl = floored(f, eps_log);
    let v = f.values();
    f.grid().cell_volume() * pairwise_sum_by(v.len(), &|i| v[i] * fl(v[i]).ln())
}

/// `H(f|μ) = ∫ f log(f/μ̂)` with the same floor applied to both arguments.
pub fn relative_entropy(f: &Field, mu_hat: &Field, eps_log: f64) -> Result<f64> {
    f.grid().ensure_same(mu_hat.grid())?;
    let fl = floored(f, eps_log);
    let (v, m) = (f.values(), mu_hat.values());
    Ok(f.grid().cell_volume() * pairwise_sum_by(v.len(), &|i| v[i] * (fl(v[i]).ln() - fl(m[i]).ln())))
}

/// `D(f) = −∫ Q(f,f) log f`.
pub fn dissipation(f: &Field, q: &Field, eps_log: f64) -> Result<f64> {
    f.grid().ensure_same(q.grid())?;
    let fl = floored(f, eps_log);
    let (v, qv) = (f.values(), q.values());
    Ok(-f.grid().cell_volume() * pairwise_sum_by(v.len(), &|i| qv[i] * fl(v[i]).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormSpace {
    L1,
    L2,
    H1,
}

impl NormSpace {
    pub fn prefix(self) -> &'static str {
        match self {
            NormSpace::L1 => "L1",
            NormSpace::L2 => "L2",
            NormSpace::H1 => "H1",
        }
    }
}

/// `‖m f‖_{L¹}`, `‖m f‖_{L²}` or `(‖m f‖² + ‖m ∇f‖²)^{1/2}`.
/// `μ^{−1/2}` weights on boxes wider than [`RISKY_WEIGHT_HALF_WIDTH`] need `allow_risky`.
pub fn weighted_norm(f: &Field, weight: &WeightSpec, space: NormSpace, allow_risky: bool) -> Result<f64> {
    let grid = *f.grid();
    if matches!(weight, WeightSpec::InverseSqrtMaxwellian)
        && grid.half_width() > RISKY_WEIGHT_HALF_WIDTH
        && !allow_risky
    {
        return Err(LandauError::WeightValidation(format!(
            "the inverse-sqrt-Maxwellian weight overflows on boxes wider than L = {RISKY_WEIGHT_HALF_WIDTH}; \
             an explicit override is required (L = {})",
            grid.half_width()
        )));
    }
    let w: Vec<f64> = (0..grid.cell_count()).map(|i| weight.eval(grid.velocity(i))).collect();
    let v = f.values();
    let h3 = grid.cell_volume();
    Ok(match space {
        NormSpace::L1 => h3 * pairwise_sum_by(v.len(), &|i| w[i] * v[i].abs()),
        NormSpace::L2 => (h3 * pairwise_sum_by(v.len(), &|i| (w[i] * v[i]).powi(2))).sqrt(),
        NormSpace::H1 => {
            let mut total = pairwise_sum_by(v.len(), &|i| (w[i] * v[i]).powi(2));
            let mut d = vec![0.0; v.len()];
            for axis in 0..3 {
                central_difference(&grid, v, axis, &mut d);
                total += pairwise_sum_by(v.len(), &|i| (w[i] * d[i]).powi(2));
            }
            (h3 * total).sqrt()
        }
    })
}

/// Moment growth constant: `l²` for `l ≤ 4`, and for `l > 4`
/// `l^{2−4/(γ+2)}/(l−4) · ((l−4)/(l+γ−2))^{(l−4)/(γ+2)} · l^{l/(γ+2)}`.
pub fn alpha_of_l(l: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(l > 2.0) || !l.is_finite() {
        return Err(invalid(format!("moment order must exceed 2, got {l}")));
    }
    if l <= 4.0 {
        return Ok(l * l);
    }
    let g2 = gamma + 2.0;
    Ok(l.powf(2.0 - 4.0 / g2) / (l - 4.0) * ((l - 4.0) / (l + gamma - 2.0)).powf((l - 4.0) / g2) * l.powf(l / g2))
}

/// `J_{k+2}(f) = ‖⟨v⟩^{k+2} ∇√f‖²` with `√max(f, ε·peak)` and central differences.
pub fn fisher_weighted(f: &Field, k: f64, eps_log: f64) -> f64 {
    let grid = *f.grid();
    let fl = floored(f, eps_log);
    let root: Vec<f64> = f.values().iter().map(|&x| fl(x).sqrt()).collect();
    let w: Vec<f64> = (0..grid.cell_count())
        .map(|i| japanese(grid.velocity(i)).powf(2.0 * (k + 2.0)))
        .collect();
    let mut d = vec![0.0; root.len()];
    let mut total = 0.0;
    for axis in 0..3 {
        central_difference(&grid, &root, axis, &mut d);
        total += pairwise_sum_by(d.len(), &|i| w[i] * d[i] * d[i]);
    }
    grid.cell_volume() * total
}

/// `K̂ = min_v λ_min(ā(v)) / ⟨v⟩^γ`.
pub fn coercivity_constant(coeffs: &CoefficientFields, gamma: f64) -> f64 {
    let grid = coeffs.grid;
    (0..grid.cell_count())
        .map(|i| sym3_eigenvalues(coeffs.a_matrix(i))[0] / japanese(grid.velocity(i)).powf(gamma))
        .fold(f64::INFINITY, f64::min)
}

/// `R_k = D / [H(f|μ)^{1−γ/k} (‖f‖_{L¹_{k+2}} + J_{k+2})^{γ/k}]`, or `None`
/// when `H(f|μ)` is at or below `h_floor`.
pub fn entropy_dissipation_ratio(d: f64, h_rel: f64, moment_k2: f64, fisher_k2: f64, k: f64, gamma: f64, h_floor: f64) -> Option<f64> {
    if !(h_rel > h_floor) {
        return None;
    }
    Some(d / (h_rel.powf(1.0 - gamma / k) * (moment_k2 + fisher_k2).powf(gamma / k)))
}

/// Which optional columns a diagnostics row carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSpec {
    pub l1_weights: Vec<WeightSpec>,
    pub l2_k: Vec<f64>,
    pub h1_k: Vec<f64>,
    pub fisher_k: Vec<f64>,
    pub coercivity: bool,
    pub ratio_k: Vec<f64>,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        DiagnosticsSpec {
            l1_weights: vec![
                WeightSpec::Polynomial { k: 4.0 },
                WeightSpec::StretchedExp { kappa: 0.1, s: 0.75 },
            ],
            l2_k: Vec::new(),
            h1_k: Vec::new(),
            fisher_k: vec![4.0],
            coercivity: true,
            ratio_k: vec![4.0],
        }
    }
}

/// Fixed leading columns of every diagnostics table.
pub const BASE_COLUMNS: [&str; 11] = [
    "t", "mass", "ux", "uy", "uz", "temperature", "min_f", "H", "H_rel", "D", "l1_dist",
];

impl DiagnosticsSpec {
    /// Names of the optional columns, in emission order.
    pub fn extra_columns(&self) -> Vec<String> {
        let mut out: Vec<String> = self.l1_weights.iter().map(|w| format!("L1_{}", w.key())).collect();
        out.extend(self.l2_k.iter().map(|k| format!("L2_k{k}")));
        out.extend(self.h1_k.iter().map(|k| format!("H1_k{k}")));
        out.extend(self.fisher_k.iter().map(|k| format!("fisher_k{k}")));
        if self.coercivity {
            out.push("coercivity".into());
        }
        out.extend(self.ratio_k.iter().map(|k| format!("ratio_k{k}")));
        out
    }

    pub fn columns(&self) -> Vec<String> {
        let mut out: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
        out.extend(self.extra_columns());
        out
    }

    pub fn validate(&self, gamma: f64) -> Result<()> {
        for w in &self.l1_weights {
            w.validate(crate::weight::WeightContext::Moments, gamma)?;
        }
        for &k in self.l2_k.iter().chain(&self.h1_k).chain(&self.fisher_k) {
            if !(k >= 0.0) || !k.is_finite() {
                return Err(LandauError::WeightValidation(format!("weight exponent must be >= 0, got {k}")));
            }
        }
        for &k in &self.ratio_k {
            if !(k > 0.0) || !k.is_finite() {
                return Err(LandauError::WeightValidation(format!("ratio exponent must be > 0, got {k}")));
            }
        }
        Ok(())
    }
}

/// One diagnostics row. `extras` follows [`DiagnosticsSpec::extra_columns`];
/// a not-applicable entry is NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass: f64,
    pub momentum: [f64; 3],
    pub temperature: f64,
    pub min_f: f64,
    pub h: f64,
    pub h_rel: f64,
    pub d: f64,
    pub l1_dist: f64,
    pub extras: Vec<f64>,
}

impl DiagnosticsRow {
    pub fn values(&self) -> Vec<f64> {
        let mut out = vec![
            self.t,
            self.mass,
            self.momentum[0],
            self.momentum[1],
            self.momentum[2],
            self.temperature,
            self.min_f,
            self.h,
            self.h_rel,
            self.d,
            self.l1_dist,
        ];
        out.extend(&self.extras);
        out
    }
}

/// Evaluates rows on one grid, caching `μ̂`.
#[derive(Debug, Clone)]
pub struct Diagnostician {
    grid: Grid,
    gamma: f64,
    spec: DiagnosticsSpec,
    mu_hat: Field,
    eps_log: f64,
}

impl Diagnostician {
    pub fn new(grid: &Grid, gamma: f64, spec: DiagnosticsSpec, eps_log: f64) -> Result<Self> {
        check_gamma(gamma)?;
        spec.validate(gamma)?;
        if !(eps_log > 0.0 && eps_log < 1.0) {
            return Err(invalid(format!("log floor must lie in (0, 1), got {eps_log}")));
        }
        Ok(Diagnostician {
            grid: *grid,
            gamma,
            spec,
            mu_hat: discretize_maxwellian(grid, 1.0, [0.0; 3], 1.0)?,
            eps_log,
        })
    }

    pub fn spec(&self) -> &DiagnosticsSpec {
        &self.spec
    }

    pub fn mu_hat(&self) -> &Field {
        &self.mu_hat
    }

    pub fn eps_log(&self) -> f64 {
        self.eps_log
    }

    /// Floor below which `H(f|μ)` is treated as zero by the ratio column.
    pub fn h_floor(&self) -> f64 {
        10.0 * self.eps_log
    }

    /// Row for `f` at time `t` given `Q(f,f)` and, when coercivity is monitored, `ā = a∗f`.
    pub fn row(&self, t: f64, f: &Field, q: &Field, coeffs: Option<&CoefficientFields>) -> Result<DiagnosticsRow> {
        self.grid.ensure_same(f.grid())?;
        let (mass, momentum, temperature) = moments(f)?;
        let h = entropy(f, self.eps_log);
        let h_rel = relative_entropy(f, &self.mu_hat, self.eps_log)?;
        let d = dissipation(f, q, self.eps_log)?;
        let diff: Vec<f64> = f.values().iter().zip(self.mu_hat.values()).map(|(a, b)| (a - b).abs()).collect();
        let l1_dist = self.grid.cell_volume() * pairwise_sum(&diff);
        let mut extras = Vec::new();
        for w in &self.spec.l1_weights {
            extras.push(weighted_norm(f, w, NormSpace::L1, false)?);
        }
        for &k in &self.spec.l2_k {
            extras.push(weighted_norm(f, &WeightSpec::Polynomial { k }, NormSpace::L2, false)?);
        }
        for &k in &self.spec.h1_k {
            extras.push(weighted_norm(f, &WeightSpec::Polynomial { k }, NormSpace::H1, false)?);
        }
        for &k in &self.spec.fisher_k {
            extras.push(fisher_weighted(f, k, self.eps_log));
        }
        if self.spec.coercivity {
            let c = coeffs.ok_or_else(|| invalid("coercivity column needs the coefficient fields of f"))?;
            extras.push(coercivity_constant(c, self.gamma));
        }
        for &k in &self.spec.ratio_k {
            let m = weighted_norm(f, &WeightSpec::Polynomial { k: k + 2.0 }, NormSpace::L1, false)?;
            let j = fisher_weighted(f, k, self.eps_log);
            let r = entropy_dissipation_ratio(d, h_rel, m, j, k, self.gamma, self.h_floor());
            extras.push(r.unwrap_or(f64::NAN));
        }
        Ok(DiagnosticsRow {
            t,
            mass,
            momentum,
            temperature,
            min_f: f.min(),
            h,
            h_rel,
            d,
            l1_dist,
            extras,
        })
    }
}
