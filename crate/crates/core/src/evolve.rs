//! Explicit time integration of the nonlinear equation and of the linear
//! generators `L`, `B = Q(μ,·) − Mχ_R` and `B₀ = Q(μ,·)`.

use std::sync::Arc;

use faer::{Mat, Side};
use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::collision::{apply_q, CoefficientFields, Convolver};
use crate::diagnostics::{DiagnosticsRow, DiagnosticsSpec, Diagnostician, NormSpace, DEFAULT_EPS_LOG};
use crate::error::{invalid, LandauError, Result};
use crate::grid::{pairwise_sum_by, Field, Grid, DEFAULT_TOL_NEG};
use crate::kernels::{check_gamma, sample_kernels};
use crate::linalg::sym3_eigenvalues;
use crate::linearized::dissipativity::CutoffSpec;
use crate::linearized::operator::{mat_vec, LinearizedOperator};
use crate::maxwellian::{sqrt_standard_maxwellian, MaxwellianMixture, MixtureComponent};
use crate::weight::WeightSpec;

/// Maxwellian-mixture initial datum, optionally standardized to `(ρ, u, T) = (1, 0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub components: Vec<MixtureComponent>,
    pub standardize: bool,
}

impl InitialCondition {
    /// Symmetric pair of drifting Maxwellians along the first axis.
    pub fn bi_maxwellian() -> Self {
        let c = |s: f64| MixtureComponent {
            weight: 1.0,
            velocity: [s, 0.0, 0.0],
            temperature: 0.5,
        };
        InitialCondition {
            components: vec![c(-1.0), c(1.0)],
            standardize: true,
        }
    }

    pub fn maxwellian() -> Self {
        InitialCondition {
            components: vec![MixtureComponent {
                weight: 1.0,
                velocity: [0.0; 3],
                temperature: 1.0,
            }],
            standardize: false,
        }
    }

    pub fn mixture(&self) -> Result<MaxwellianMixture> {
        let m = MaxwellianMixture::new(self.components.clone())?;
        Ok(if self.standardize { m.standardize() } else { m })
    }

    /// Point samples of the mixture. A standardized datum is then corrected
    /// onto the discrete mass, momentum and energy of the sampled `μ`, so the
    /// discrete steady state is that `μ` rather than a nearby Maxwellian.
    pub fn discretize(&self, grid: &Grid) -> Result<Field> {
        let mut f = self.mixture()?.discretize(grid)?;
        if self.standardize {
            let target = conserved_moments(&crate::maxwellian::discretize_maxwellian(grid, 1.0, [0.0; 3], 1.0)?);
            project_conservation(&mut f, &target)?;
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub half_width: f64,
    pub gamma: f64,
    pub initial: InitialCondition,
    pub t_end: f64,
    /// Diagnostic cadence; steps are sized to land on every multiple of it.
    pub dt_diag: f64,
    pub c_cfl: f64,
    pub tol_neg: f64,
    /// Log floor of the diagnostics, relative to the peak.
    pub eps_log: f64,
    /// Restore the initial mass, momentum and energy after every step.
    pub project: bool,
    pub diagnostics: DiagnosticsSpec,
    /// Snapshot cadence (a multiple of `dt_diag`).
    pub snapshot_every: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 32,
            half_width: 8.0,
            gamma: -0.5,
            initial: InitialCondition::bi_maxwellian(),
            t_end: 5.0,
            dt_diag: 0.05,
            c_cfl: 0.5,
            tol_neg: DEFAULT_TOL_NEG,
            eps_log: DEFAULT_EPS_LOG,
            project: false,
            diagnostics: DiagnosticsSpec::default(),
            snapshot_every: None,
        }
    }
}

fn intervals(span: f64, step: f64) -> Result<u64> {
    let k = (span / step).round();
    if !(k >= 0.0) || ((k * step - span).abs() > 1e-9 * span.abs().max(step)) {
        return Err(invalid(format!("{span} is not a whole multiple of {step}")));
    }
    Ok(k as u64)
}

impl SimConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.half_width)
    }

    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        self.grid()?;
        self.initial.mixture()?;
        for (name, x) in [("t_end", self.t_end), ("dt_diag", self.dt_diag), ("c_cfl", self.c_cfl)] {
            if !(x > 0.0) || !x.is_finite() {
                return Err(invalid(format!("{name} must be positive, got {x}")));
            }
        }
        if !(self.tol_neg >= 0.0) {
            return Err(invalid(format!("tol_neg must be nonnegative, got {}", self.tol_neg)));
        }
        if !(self.eps_log > 0.0 && self.eps_log < 1.0) {
            return Err(invalid(format!("eps_log must lie in (0, 1), got {}", self.eps_log)));
        }
        intervals(self.t_end, self.dt_diag)?;
        if let Some(s) = self.snapshot_every {
            if intervals(s, self.dt_diag)? == 0 {
                return Err(invalid("snapshot cadence must be at least one diagnostic interval"));
            }
        }
        self.diagnostics.validate(self.gamma)
    }
}

/// `c_cfl · h² / (6 max_v λ_max(ā(v)))`.
pub fn stable_dt(coeffs: &CoefficientFields, h: f64, c_cfl: f64) -> f64 {
    let top = (0..coeffs.grid.cell_count())
        .map(|i| sym3_eigenvalues(coeffs.a_matrix(i))[2])
        .fold(0.0f64, f64::max);
    if top > 0.0 {
        c_cfl * h * h / (6.0 * top)
    } else {
        f64::INFINITY
    }
}

/// Mass, momentum and energy `∫ f {1, v, |v|²}`.
pub fn conserved_moments(f: &Field) -> [f64; 5] {
    let grid = *f.grid();
    let v = f.values();
    let h3 = grid.cell_volume();
    std::array::from_fn(|k| h3 * pairwise_sum_by(v.len(), &|i| invariant(k, grid.velocity(i)) * v[i]))
}

fn invariant(k: usize, v: [f64; 3]) -> f64 {
    match k {
        0 => 1.0,
        1..=3 => v[k - 1],
        _ => v[0] * v[0] + v[1] * v[1] + v[2] * v[2],
    }
}

fn solve5(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> Result<[f64; 5]> {
    for col in 0..5 {
        let piv = (col..5)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[piv][col] == 0.0 {
            return Err(LandauError::NonPositiveMass(0.0));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..5 {
            let m = a[r][col] / a[col][col];
            for c in col..5 {
                a[r][c] -= m * a[col][c];
            }
            b[r] -= m * b[col];
        }
    }
    let mut x = [0.0; 5];
    for r in (0..5).rev() {
        let s: f64 = (r + 1..5).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// Adds `F (α + β·v + c|v|²)` with `F = max(f, 0)` so that the five
/// conserved moments of `f` equal `target`.
pub fn project_conservation(f: &mut Field, target: &[f64; 5]) -> Result<()> {
    let grid = *f.grid();
    let h3 = grid.cell_volume();
    for _ in 0..2 {
        let current = conserved_moments(f);
        let rhs: [f64; 5] = std::array::from_fn(|k| target[k] - current[k]);
        let v = f.values();
        let mut a = [[0.0; 5]; 5];
        for (r, row) in a.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate().skip(r) {
                *x = h3
                    * pairwise_sum_by(v.len(), &|i| {
                        let w = grid.velocity(i);
                        v[i].max(0.0) * invariant(r, w) * invariant(c, w)
                    });
            }
        }
        for r in 0..5 {
            for c in 0..r {
                a[r][c] = a[c][r];
            }
        }
        let coef = solve5(a, rhs)?;
        let vals = f.values_mut();
        for (i, x) in vals.iter_mut().enumerate() {
            let w = grid.velocity(i);
            let p: f64 = (0..5).map(|k| coef[k] * invariant(k, w)).sum();
            *x += x.max(0.0) * p;
        }
    }
    Ok(())
}

/// Classical RK4 for `∂_t f = Q(f, f)` with fresh convolutions at every stage.
#[derive(Debug, Clone)]
pub struct Stepper {
    conv: Convolver,
    tol_neg: f64,
    log_floor: f64,
}

impl Stepper {
    /// `log_floor` is the floor under `log f` in the collision operator,
    /// relative to the peak of `f`.
    pub fn new(grid: &Grid, gamma: f64, tol_neg: f64, log_floor: f64) -> Result<Self> {
        let kernels = Arc::new(sample_kernels(grid, gamma)?);
        Ok(Stepper {
            conv: Convolver::new(kernels),
            tol_neg,
            log_floor,
        })
    }

    pub fn convolver(&mut self) -> &mut Convolver {
        &mut self.conv
    }

    pub fn rhs(&mut self, f: &Field) -> Result<Field> {
        self.conv.landau(f, self.log_floor)
    }

    /// One step from time `t`; `t` only labels errors.
    pub fn step_rk4(&mut self, f: &Field, dt: f64, t: f64) -> Result<Field> {
        let k1 = self.rhs(f)?;
        let k2 = self.rhs(&f.add_scaled(0.5 * dt, &k1)?)?;
        let k3 = self.rhs(&f.add_scaled(0.5 * dt, &k2)?)?;
        let k4 = self.rhs(&f.add_scaled(dt, &k3)?)?;
        let mut out = f.clone();
        let (a, b, c, d) = (k1.values(), k2.values(), k3.values(), k4.values());
        for (i, x) in out.values_mut().iter_mut().enumerate() {
            *x += dt / 6.0 * ((a[i] + 2.0 * b[i]) + (2.0 * c[i] + d[i]));
        }
        if !out.is_finite() {
            return Err(LandauError::BlowUp { t: t + dt });
        }
        if let Err((min, _)) = out.check_distribution(self.tol_neg) {
            return Err(LandauError::Positivity {
                t: t + dt,
                min,
                tol: self.tol_neg,
            });
        }
        Ok(out)
    }
}

/// What [`run_nonlinear_with`] hands to its observer after every diagnostic interval.
pub struct Checkpoint<'a> {
    pub row: &'a DiagnosticsRow,
    pub field: &'a Field,
    /// Index of this diagnostic time (`t = index · dt_diag`).
    pub index: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub columns: Vec<String>,
    pub rows: Vec<DiagnosticsRow>,
    pub field: Field,
}

/// Nonlinear run from the configured initial datum, or from `resume = (f, t)`
/// where `t` is a diagnostic time of the same configuration.
pub fn run_nonlinear_with(
    cfg: &SimConfig,
    resume: Option<(Field, f64)>,
    observer: &mut dyn FnMut(Checkpoint<'_>) -> Result<()>,
) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let initial = cfg.initial.discretize(&grid)?;
    let target = conserved_moments(&initial);
    let (mut f, start) = match resume {
        Some((f, t)) => {
            grid.ensure_same(f.grid())?;
            (f, intervals(t, cfg.dt_diag)?)
        }
        None => (initial, 0),
    };
    let total = intervals(cfg.t_end, cfg.dt_diag)?;
    let diag = Diagnostician::new(&grid, cfg.gamma, cfg.diagnostics.clone(), cfg.eps_log)?;
    let mut stepper = Stepper::new(&grid, cfg.gamma, cfg.tol_neg, cfg.eps_log)?;
    let mut rows = Vec::new();
    let mut index = start;
    loop {
        let t = index as f64 * cfg.dt_diag;
        let coeffs = stepper.convolver().convolve_fields(&f)?;
        let q = stepper.rhs(&f)?;
        let row = diag.row(t, &f, &q, Some(&coeffs))?;
        observer(Checkpoint {
            row: &row,
            field: &f,
            index,
        })?;
        rows.push(row);
        if index >= total {
            break;
        }
        let dt_max = stable_dt(&coeffs, grid.spacing(), cfg.c_cfl);
        let steps = (cfg.dt_diag / dt_max).ceil().max(1.0) as u64;
        let dt = cfg.dt_diag / steps as f64;
        debug!("t = {t:.4}: {steps} steps of {dt:.3e}");
        for s in 0..steps {
            f = stepper.step_rk4(&f, dt, t + s as f64 * dt)?;
            if cfg.project {
                project_conservation(&mut f, &target)?;
            }
        }
        index += 1;
    }
    info!("nonlinear run finished at t = {}", cfg.t_end);
    Ok(RunOutput {
        columns: diag.spec().columns(),
        rows,
        field: f,
    })
}

pub fn run_nonlinear(cfg: &SimConfig) -> Result<RunOutput> {
    run_nonlinear_with(cfg, None, &mut |_| Ok(()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    L,
    B,
    B0,
}

/// Norms recorded by [`run_linear`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LinearNorm {
    /// `L²(μ^{−1/2})`; only on the spectral grid.
    L2InvSqrtMu,
    /// `‖m h‖_{L^p}` in the direct representation.
    Weighted { weight: WeightSpec, space: NormSpace },
}

impl LinearNorm {
    pub fn key(&self) -> String {
        match self {
            LinearNorm::L2InvSqrtMu => "L2_invsqrtmu".into(),
            LinearNorm::Weighted { weight, space } => format!("{}_{}", space.prefix(), weight.key()),
        }
    }
}

/// A linear generator ready for time stepping.
#[derive(Debug, Clone)]
pub enum LinearProblem {
    /// Conjugated `L̃` with its eigendecomposition; evolution is exact.
    Spectral {
        op: Box<LinearizedOperator>,
        eigenvalues: Vec<f64>,
        eigenvectors: Mat<f64>,
    },
    /// `Q(μ, h) − Mχ_R h` in flux form with analytic `ā, b̄`.
    Direct {
        coeffs: Box<CoefficientFields>,
        cutoff: Option<CutoffSpec>,
    },
}

impl LinearProblem {
    pub fn spectral(op: LinearizedOperator) -> Result<Self> {
        let eig = op
            .matrix()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| LandauError::Eigensolver(format!("{e:?}")))?;
        let s = eig.S().column_vector();
        let eigenvalues = (0..op.dim()).map(|i| s[i]).collect();
        let eigenvectors = eig.U().to_owned();
        Ok(LinearProblem::Spectral {
            op: Box::new(op),
            eigenvalues,
            eigenvectors,
        })
    }

    /// `B` (with a cutoff) or `B₀` (without) on `grid`.
    pub fn direct(grid: &Grid, gamma: f64, cutoff: Option<CutoffSpec>) -> Result<Self> {
        let table = crate::linearized::radial::RadialTable::for_grid(grid, gamma)?;
        let coeffs = crate::linearized::radial::bar_coefficients(grid, gamma, &table)?;
        Ok(LinearProblem::Direct {
            coeffs: Box::new(coeffs),
            cutoff,
        })
    }

    pub fn grid(&self) -> &Grid {
        match self {
            LinearProblem::Spectral { op, .. } => op.grid(),
            LinearProblem::Direct { coeffs, .. } => &coeffs.grid,
        }
    }

    pub fn generator(&self) -> Generator {
        match self {
            LinearProblem::Spectral { .. } => Generator::L,
            LinearProblem::Direct { cutoff: Some(_), .. } => Generator::B,
            LinearProblem::Direct { cutoff: None, .. } => Generator::B0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl LinearSeries {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

fn norm_of(grid: &Grid, norm: &LinearNorm, h: &[f64], conjugated: bool) -> Result<f64> {
    let h3 = grid.cell_volume();
    let len = h.len();
    match norm {
        LinearNorm::L2InvSqrtMu => {
            if !conjugated {
                return Err(invalid(
                    "L2(mu^-1/2) norms are only available on the spectral grid in the conjugated representation",
                ));
            }
            Ok((h3 * pairwise_sum_by(len, &|i| h[i] * h[i])).sqrt())
        }
        LinearNorm::Weighted { weight, space } => {
            if matches!(weight, WeightSpec::InverseSqrtMaxwellian) {
                return Err(invalid("use the L2InvSqrtMu norm for the inverse-sqrt-Maxwellian weight"));
            }
            // direct h = μ^{1/2} g in the conjugated case
            let w: Vec<f64> = (0..len)
                .map(|i| {
                    let v = grid.velocity(i);
                    weight.eval(v) * if conjugated { sqrt_standard_maxwellian(v) } else { 1.0 }
                })
                .collect();
            match space {
                NormSpace::L1 => Ok(h3 * pairwise_sum_by(len, &|i| w[i] * h[i].abs())),
                NormSpace::L2 => Ok((h3 * pairwise_sum_by(len, &|i| (w[i] * h[i]).powi(2))).sqrt()),
                NormSpace::H1 => Err(invalid("H1 norms are not recorded for linear runs")),
            }
        }
    }
}

/// Evolves `∂_t h = G h` from `h0` (direct representation on the problem's grid)
/// and records the configured norms of `h(t) − Π₀h₀` (for `L`) or `h(t)` every `dt_diag`.
pub fn run_linear(
    problem: &LinearProblem,
    h0: &Field,
    t_end: f64,
    dt_diag: f64,
    c_cfl: f64,
    norms: &[LinearNorm],
) -> Result<LinearSeries> {
    let grid = *problem.grid();
    grid.ensure_same(h0.grid())?;
    if !(c_cfl > 0.0) || !(dt_diag > 0.0) {
        return Err(invalid("c_cfl and dt_diag must be positive"));
    }
    let total = intervals(t_end, dt_diag)?;
    let mut columns = vec!["t".to_string()];
    columns.extend(norms.iter().map(LinearNorm::key));
    let mut rows = Vec::new();
    match problem {
        LinearProblem::Spectral {
            op,
            eigenvalues,
            eigenvectors,
        } => {
            let g0: Vec<f64> = h0
                .values()
                .iter()
                .enumerate()
                .map(|(i, x)| x / sqrt_standard_maxwellian(grid.velocity(i)))
                .collect();
            let p0 = op.project(&g0);
            let perp: Vec<f64> = g0.iter().zip(&p0).map(|(a, b)| a - b).collect();
            // coefficients in the eigenbasis
            let n = op.dim();
            let coef: Vec<f64> = (0..n)
                .map(|k| {
                    let u = eigenvectors.col(k);
                    (0..n).map(|i| u[i] * perp[i]).sum()
                })
                .collect();
            for step in 0..=total {
                let t = step as f64 * dt_diag;
                let scaled: Vec<f64> = coef
                    .iter()
                    .zip(eigenvalues)
                    .map(|(c, l)| c * (l.min(0.0) * t).exp())
                    .collect();
                let g = mat_vec(eigenvectors, &scaled);
                let mut row = vec![t];
                for nm in norms {
                    row.push(norm_of(&grid, nm, &g, true)?);
                }
                rows.push(row);
            }
        }
        LinearProblem::Direct { coeffs, cutoff } => {
            let damp: Vec<f64> = (0..grid.cell_count())
                .map(|i| cutoff.map_or(0.0, |c| c.value(grid.velocity(i))))
                .collect();
            let m_max = damp.iter().fold(0.0f64, |a, &b| a.max(b));
            let mut dt_max = stable_dt(coeffs, grid.spacing(), c_cfl);
            if m_max > 0.0 {
                dt_max = dt_max.min(c_cfl * 2.5 / m_max);
            }
            let steps = (dt_diag / dt_max).ceil().max(1.0) as u64;
            let dt = dt_diag / steps as f64;
            let rhs = |h: &Field| -> Result<Field> {
                let mut q = apply_q(coeffs, h)?;
                for ((x, d), y) in q.values_mut().iter_mut().zip(&damp).zip(h.values()) {
                    *x -= d * y;
                }
                Ok(q)
            };
            let mut h = h0.clone();
            for step in 0..=total {
                let t = step as f64 * dt_diag;
                let mut row = vec![t];
                for nm in norms {
                    row.push(norm_of(&grid, nm, h.values(), false)?);
                }
                rows.push(row);
                if step == total {
                    break;
                }
                for _ in 0..steps {
                    let k1 = rhs(&h)?;
                    let k2 = rhs(&h.add_scaled(0.5 * dt, &k1)?)?;
                    let k3 = rhs(&h.add_scaled(0.5 * dt, &k2)?)?;
                    let k4 = rhs(&h.add_scaled(dt, &k3)?)?;
                    let (a, b, c, d) = (k1.values(), k2.values(), k3.values(), k4.values());
                    for (i, x) in h.values_mut().iter_mut().enumerate() {
                        *x += dt / 6.0 * ((a[i] + 2.0 * b[i]) + (2.0 * c[i] + d[i]));
                    }
                }
                if !h.is_finite() {
                    return Err(LandauError::BlowUp { t: t + dt_diag });
                }
            }
        }
    }
    Ok(LinearSeries { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn stable_dt_formula() {
        let g = build_grid(4, 1.0).unwrap();
        let mut c = CoefficientFields::zeros(g);
        for s in 0..3 {
            c.a[s].iter_mut().for_each(|x| *x = 1.0);
        }
        let dt = stable_dt(&c, 0.5, 0.5);
        assert!((dt - 0.5 * 0.25 / 6.0).abs() < 1e-15);
        for s in 0..3 {
            c.a[s].iter_mut().for_each(|x| *x = 2.0);
        }
        assert!((stable_dt(&c, 0.5, 0.5) - dt / 2.0).abs() < 1e-15);
    }

    #[test]
    fn projection_restores_moments() {
        let g = build_grid(12, 5.0).unwrap();
        let f = InitialCondition::bi_maxwellian().discretize(&g).unwrap();
        let target = conserved_moments(&f);
        let mut p = f.map(|x| x * 1.01);
        p.values_mut()[500] += 1e-3;
        project_conservation(&mut p, &target).unwrap();
        let got = conserved_moments(&p);
        for k in 0..5 {
            assert!((got[k] - target[k]).abs() <= 1e-13 * target[0].max(target[4]), "{k}");
        }
    }

    #[test]
    fn intervals_must_divide() {
        assert_eq!(intervals(1.0, 0.05).unwrap(), 20);
        assert!(intervals(1.0, 0.3).is_err());
    }
}
