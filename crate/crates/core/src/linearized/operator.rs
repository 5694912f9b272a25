//! Dense conjugated linearized operator `L̃ g = μ^{−1/2} L(μ^{1/2} g)`.
//!
//! Discretized through its Dirichlet form. With `ψ = μ^{−1/2} g` and a
//! one-sided difference `D`, the quadratic form is
//! `gᵀL̃g = −½ h³ Σ_{x,y} μ(x)μ(y) (Dψ(x) − Dψ(y))ᵀ a(x−y) (Dψ(x) − Dψ(y))`,
//! which splits as `L̃ = −ĎᵀĀĎ + h³ ĎᵀKĎ` with `Ď = μ^{1/2} D μ^{−1/2}`,
//! `Ā` the cell-wise `ā = a∗μ̂` and `K_xy = μ^{1/2}(x) a(x−y) μ^{1/2}(y)`.
//! The first part is the `B₀ = Q(μ, ·)` contribution, the second `A₀ = Q(·, μ)`.
//! The eight sign patterns of per-axis forward/backward differences are
//! averaged as in the nonlinear operator, so `L̃` is its Jacobian at `μ̂`.
//! Both sides close the boundary with a quadratic extrapolation, so `D` is
//! exact on `1, v_i, |v|²` up to a constant shift. The form is then negative
//! semidefinite and the five collision invariants lie exactly in its kernel.

use std::sync::Arc;

use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dissipativity::CutoffSpec;
use super::radial::{bar_coefficients, RadialTable};
use crate::collision::{apply_q, convolve_fields, CoefficientFields};
use crate::error::{LandauError, Result};
use crate::grid::{Field, Grid};
use crate::kernels::{sample_kernels, KernelSet};
use crate::maxwellian::sqrt_standard_maxwellian;
use crate::weight::{WeightContext, WeightSpec};

/// Largest spectral grid accepted for dense assembly.
pub const MAX_DENSE_N: usize = 24;

/// Sparse difference operator: for each row `3·cell + axis`, `(column, value)` pairs.
struct Stencil {
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
}

#[derive(Clone, Copy)]
enum Side1 {
    Forward,
    Backward,
}

fn conjugated_difference(grid: &Grid, side: Side1) -> Stencil {
    let n = grid.n();
    let h = grid.spacing();
    let len = grid.cell_count();
    let r2 = |idx: usize| {
        let v = grid.velocity(idx);
        v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
    };
    let mut rows = vec![Vec::new(); 3 * len];
    for idx in 0..len {
        let pos = grid.unravel(idx);
        for axis in 0..3 {
            let stride = [n * n, n, 1][axis];
            let at = |off: isize| (idx as isize + off * stride as isize) as usize;
            let p = pos[axis];
            let taps: Vec<(usize, f64)> = match side {
                Side1::Forward if p + 1 < n => vec![(at(1), 1.0), (idx, -1.0)],
                Side1::Forward => vec![(idx, 2.0), (at(-1), -3.0), (at(-2), 1.0)],
                Side1::Backward if p > 0 => vec![(idx, 1.0), (at(-1), -1.0)],
                Side1::Backward => vec![(idx, -2.0), (at(1), 3.0), (at(2), -1.0)],
            };
            // μ^{1/2}(x) / μ^{1/2}(x_k) = exp((|x_k|² − |x|²)/4)
            let here = r2(idx);
            rows[3 * idx + axis] = taps
                .into_iter()
                .map(|(k, c)| (k, c / h * (0.25 * (r2(k) - here)).exp()))
                .collect();
        }
    }
    let mut cols = vec![Vec::new(); len];
    for (row, entries) in rows.iter().enumerate() {
        for &(c, v) in entries {
            cols[c].push((row, v));
        }
    }
    Stencil { rows, cols }
}

/// `Ď e_c` grouped by cell.
fn stencil_column(stencil: &Stencil, c: usize) -> Vec<(usize, [f64; 3])> {
    let mut cells: Vec<(usize, [f64; 3])> = Vec::new();
    for &(row, v) in &stencil.cols[c] {
        let (cell, axis) = (row / 3, row % 3);
        match cells.iter_mut().find(|e| e.0 == cell) {
            Some(e) => e.1[axis] += v,
            None => {
                let mut u = [0.0; 3];
                u[axis] = v;
                cells.push((cell, u));
            }
        }
    }
    cells
}

/// `M_jj u_j^σ + Σ_{k≠j} M_jk ū_k` for one side `σ`.
fn mixed_product(m: &[[f64; 3]; 3], side: &[f64; 3], mean: &[f64; 3], j: usize) -> f64 {
    (0..3).map(|k| m[j][k] * if k == j { side[k] } else { mean[k] }).sum()
}

/// Column `c` of the B part `−⟨ĎᵀĀĎ⟩` and the A part `h³⟨ĎᵀKĎ⟩`, where `⟨·⟩`
/// averages the eight sign patterns of the per-axis one-sided differences:
/// diagonal entries of `Ā` and `K` pair like-sided differences, off-diagonal
/// entries pair the mean differences.
fn column_parts(
    grid: &Grid,
    stencils: &[Stencil; 2],
    abar: &CoefficientFields,
    kernels: &KernelSet,
    sqrt_mu: &[f64],
    c: usize,
) -> (Vec<f64>, Vec<f64>) {
    let len = grid.cell_count();
    let h3 = grid.cell_volume();
    // u[σ] = Ď^σ e_c and the mean ū on the union of their supports.
    let mut support: Vec<(usize, [[f64; 3]; 2])> = Vec::new();
    for (sigma, st) in stencils.iter().enumerate() {
        for (cell, u) in stencil_column(st, c) {
            match support.iter_mut().find(|e| e.0 == cell) {
                Some(e) => e.1[sigma] = u,
                None => {
                    let mut pair = [[0.0; 3]; 2];
                    pair[sigma] = u;
                    support.push((cell, pair));
                }
            }
        }
    }
    let mean = |pair: &[[f64; 3]; 2]| -> [f64; 3] { std::array::from_fn(|k| 0.5 * (pair[0][k] + pair[1][k])) };
    let apply_t = |st: &Stencil, w: &[f64], rows: &mut dyn Iterator<Item = usize>, out: &mut [f64]| {
        for row in rows {
            let wr = w[row];
            if wr != 0.0 {
                for &(col, v) in &st.rows[row] {
                    out[col] += 0.5 * v * wr;
                }
            }
        }
    };

    // B part: Ā u is supported on the same cells.
    let mut b_col = vec![0.0; len];
    for (sigma, st) in stencils.iter().enumerate() {
        let mut au = vec![0.0; 3 * len];
        let mut touched = Vec::new();
        for (cell, pair) in &support {
            let a = abar.a_matrix(*cell);
            let ub = mean(pair);
            for j in 0..3 {
                au[3 * cell + j] = -mixed_product(&a, &pair[sigma], &ub, j);
                touched.push(3 * cell + j);
            }
        }
        apply_t(st, &au, &mut touched.into_iter(), &mut b_col);
    }

    // A part: w(x) = h³ μ^{1/2}(x) Σ_y a(x−y) μ^{1/2}(y) u(y) on every cell.
    let mut w = [vec![0.0; 3 * len], vec![0.0; 3 * len]];
    for (cell, pair) in &support {
        let py = grid.unravel(*cell);
        let s = sqrt_mu[*cell];
        let ub = mean(pair);
        for x in 0..len {
            let px = grid.unravel(x);
            let m = [
                px[0] as isize - py[0] as isize,
                px[1] as isize - py[1] as isize,
                px[2] as isize - py[2] as isize,
            ];
            let a = kernels.a_matrix(m);
            let f = h3 * sqrt_mu[x] * s;
            for (sigma, ws) in w.iter_mut().enumerate() {
                for j in 0..3 {
                    ws[3 * x + j] += f * mixed_product(&a, &pair[sigma], &ub, j);
                }
            }
        }
    }
    let mut a_col = vec![0.0; len];
    for (st, ws) in stencils.iter().zip(&w) {
        apply_t(st, ws, &mut (0..3 * len), &mut a_col);
    }
    (b_col, a_col)
}

/// Assembled conjugated operator with its null-space data.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    grid: Grid,
    gamma: f64,
    matrix: Mat<f64>,
    asymmetry: f64,
    null_basis: Vec<Vec<f64>>,
    split: Option<(Mat<f64>, Mat<f64>)>,
    cutoff: Option<CutoffSpec>,
}

fn symmetrize(m: &Mat<f64>) -> (Mat<f64>, f64, f64) {
    let n = m.nrows();
    let mut diff = 0.0;
    let mut norm = 0.0;
    let out = Mat::from_fn(n, n, |i, j| {
        let (a, b) = (m[(i, j)], m[(j, i)]);
        diff += (a - b) * (a - b);
        norm += a * a;
        0.5 * (a + b)
    });
    (out, diff.sqrt(), norm.sqrt())
}

/// Assembles `L̃` on a spectral grid; with a cutoff, also `Ã = Ã₀ + Mχ_R`
/// and `B̃ = B̃₀ − Mχ_R`, and then `L̃ = Ã + B̃` entrywise.
pub fn assemble(grid: &Grid, gamma: f64, cutoff: Option<CutoffSpec>) -> Result<LinearizedOperator> {
    if grid.n() > MAX_DENSE_N {
        return Err(LandauError::GridTooLarge {
            operation: "dense linearized assembly".into(),
            n: grid.n(),
            max: MAX_DENSE_N,
        });
    }
    if grid.n() < 3 {
        return Err(crate::error::invalid("linearized assembly needs n >= 3"));
    }
    let kernels = Arc::new(sample_kernels(grid, gamma)?);
    let mu = crate::maxwellian::discretize_maxwellian(grid, 1.0, [0.0; 3], 1.0)?;
    let abar = convolve_fields(&kernels, &mu)?;
    let sqrt_mu: Vec<f64> = (0..grid.cell_count()).map(|i| sqrt_standard_maxwellian(grid.velocity(i))).collect();
    let stencils = [
        conjugated_difference(grid, Side1::Forward),
        conjugated_difference(grid, Side1::Backward),
    ];
    let len = grid.cell_count();
    let columns: Vec<(Vec<f64>, Vec<f64>)> = (0..len)
        .into_par_iter()
        .map(|c| {
            column_parts(grid, &stencils, &abar, &kernels, &sqrt_mu, c)
        })
        .collect();

    let null_basis = null_space_basis(grid);
    let (matrix, asymmetry, split) = match cutoff {
        None => {
            let raw = Mat::from_fn(len, len, |i, j| columns[j].0[i] + columns[j].1[i]);
            let (m, d, nrm) = symmetrize(&raw);
            (m, d / nrm, None)
        }
        Some(cut) => {
            let raw_b = Mat::from_fn(len, len, |i, j| columns[j].0[i]);
            let raw_a = Mat::from_fn(len, len, |i, j| columns[j].1[i]);
            let raw = Mat::from_fn(len, len, |i, j| raw_a[(i, j)] + raw_b[(i, j)]);
            let (_, d, nrm) = symmetrize(&raw);
            let (mut a, _, _) = symmetrize(&raw_a);
            let (mut b, _, _) = symmetrize(&raw_b);
            for i in 0..len {
                let mc = cut.value(grid.velocity(i));
                a[(i, i)] += mc;
                b[(i, i)] -= mc;
            }
            let l = Mat::from_fn(len, len, |i, j| a[(i, j)] + b[(i, j)]);
            (l, d / nrm, Some((a, b)))
        }
    };
    Ok(LinearizedOperator {
        grid: *grid,
        gamma,
        matrix,
        asymmetry,
        null_basis,
        split,
        cutoff,
    })
}

/// Orthonormal basis (flat inner product) of `μ^{1/2}·{1, v₁, v₂, v₃, |v|²}`.
pub fn null_space_basis(grid: &Grid) -> Vec<Vec<f64>> {
    let len = grid.cell_count();
    let raw: Vec<Vec<f64>> = (0..5)
        .map(|k| {
            (0..len)
                .map(|i| {
                    let v = grid.velocity(i);
                    let poly = match k {
                        0 => 1.0,
                        1..=3 => v[k - 1],
                        _ => v[0] * v[0] + v[1] * v[1] + v[2] * v[2],
                    };
                    poly * sqrt_standard_maxwellian(v)
                })
                .collect()
        })
        .collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(5);
    for mut v in raw {
        // Two passes of modified Gram–Schmidt.
        for _ in 0..2 {
            for b in &basis {
                let d = dot(&v, b);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= d * y;
                }
            }
        }
        let nrm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= nrm);
        basis.push(v);
    }
    basis
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    crate::grid::pairwise_sum_by(a.len(), &|i| a[i] * b[i])
}

impl LinearizedOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `‖M − Mᵀ‖_F / ‖M‖_F` before symmetrization.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn null_basis(&self) -> &[Vec<f64>] {
        &self.null_basis
    }

    pub fn cutoff(&self) -> Option<CutoffSpec> {
        self.cutoff
    }

    /// `(Ã, B̃)` when assembled with a cutoff.
    pub fn split(&self) -> Option<(&Mat<f64>, &Mat<f64>)> {
        self.split.as_ref().map(|(a, b)| (a, b))
    }

    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        mat_vec(&self.matrix, g)
    }

    /// `Π₀ g`.
    pub fn project(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; g.len()];
        for b in &self.null_basis {
            let d = dot(g, b);
            for (o, x) in out.iter_mut().zip(b) {
                *o += d * x;
            }
        }
        out
    }

    /// Dense `Π₀`.
    pub fn projector(&self) -> Mat<f64> {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| self.null_basis.iter().map(|b| b[i] * b[j]).sum())
    }

    /// Frobenius norm of `L̃`.
    pub fn frobenius_norm(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += self.matrix[(i, j)].powi(2);
            }
        }
        s.sqrt()
    }
}

pub(crate) fn mat_vec(m: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    let mut out = vec![0.0; n];
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            let col = m.col(j);
            for i in 0..n {
                out[i] += col[i] * xj;
            }
        }
    }
    out
}

/// Largest grid for [`weighted_dissipation_bound`].
pub const MAX_DIRECT_N: usize = 16;

/// Largest eigenvalue of the symmetric part of `m B m⁻¹`, where `B = Q(μ, ·) − Mχ_R`
/// acts on `h` in the direct representation on `grid` (flux form with the
/// analytic `ā, b̄`). It bounds the growth rate of `‖e^{tB}h‖_{L²(m)}`.
/// The conjugated spectral grid is too coarse against `μ^{1/2}` to carry `m μ^{1/2}`.
pub fn weighted_dissipation_bound(grid: &Grid, gamma: f64, cutoff: CutoffSpec, weight: &WeightSpec) -> Result<f64> {
    if grid.n() > MAX_DIRECT_N {
        return Err(LandauError::GridTooLarge {
            operation: "dense weighted dissipation bound".into(),
            n: grid.n(),
            max: MAX_DIRECT_N,
        });
    }
    weight.validate(WeightContext::Linearized, gamma)?;
    let table = RadialTable::for_grid(grid, gamma)?;
    let coeffs = bar_coefficients(grid, gamma, &table)?;
    let len = grid.cell_count();
    let columns: Vec<Vec<f64>> = (0..len)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; len];
            e[j] = 1.0;
            apply_q(&coeffs, &Field::from_values(*grid, e)?).map(Field::into_values)
        })
        .collect::<Result<_>>()?;
    let log_m: Vec<f64> = (0..len).map(|i| weight.eval(grid.velocity(i)).ln()).collect();
    let s = Mat::from_fn(len, len, |i, j| {
        let mut x = 0.5 * (columns[j][i] * (log_m[i] - log_m[j]).exp() + columns[i][j] * (log_m[j] - log_m[i]).exp());
        if i == j {
            x -= cutoff.value(grid.velocity(i));
        }
        x
    });
    let ev = s
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| LandauError::Eigensolver(format!("{e:?}")))?;
    Ok(ev.last().copied().unwrap_or(f64::NAN))
}

/// Spectrum of `L̃` with the null-space classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: usize,
    pub half_width: f64,
    pub gamma: f64,
    /// Sorted by decreasing value.
    pub eigenvalues: Vec<f64>,
    /// `−λ₆`.
    pub lambda0: f64,
    /// Largest `|λ|`.
    pub spectral_norm: f64,
    pub max_eigenvalue: f64,
    /// `‖L̃ g_i‖ / ‖g_i‖` for the orthonormal invariants.
    pub null_residuals: Vec<f64>,
    /// `g_iᵀ L̃ g_i`.
    pub null_rayleigh: Vec<f64>,
    pub asymmetry: f64,
}

/// Number of eigenvalues classified as the discrete null space.
pub const NULL_DIM: usize = 5;

/// Full symmetric eigensolve and classification of the five null eigenvalues.
pub fn spectral_report(op: &LinearizedOperator) -> Result<SpectralReport> {
    let mut ev = op
        .matrix
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| LandauError::Eigensolver(format!("{e:?}")))?;
    ev.reverse();
    let spectral_norm = ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut null_residuals = Vec::new();
    let mut null_rayleigh = Vec::new();
    for b in op.null_basis() {
        let lb = op.apply(b);
        null_residuals.push(dot(&lb, &lb).sqrt());
        null_rayleigh.push(dot(b, &lb));
    }
    if ev.len() <= NULL_DIM {
        return Err(LandauError::DegenerateSpectrum(format!("only {} eigenvalues", ev.len())));
    }
    let l6 = ev[NULL_DIM];
    let l5 = ev[NULL_DIM - 1];
    let dump = || {
        let head: Vec<String> = ev.iter().take(12).map(|x| format!("{x:.6e}")).collect();
        format!("leading eigenvalues [{}]", head.join(", "))
    };
    if ev[..NULL_DIM].iter().any(|x| x.abs() > 0.05 * l6.abs()) {
        return Err(LandauError::DegenerateSpectrum(format!(
            "null eigenvalues not separated (|lambda| > 0.05 |lambda_6|); {}",
            dump()
        )));
    }
    if l6.abs() < 2.0 * l5.abs() {
        return Err(LandauError::DegenerateSpectrum(format!(
            "gap between lambda_5 and lambda_6 under 2x; {}",
            dump()
        )));
    }
    Ok(SpectralReport {
        n: op.grid.n(),
        half_width: op.grid.half_width(),
        gamma: op.gamma,
        lambda0: -l6,
        spectral_norm,
        max_eigenvalue: ev[0],
        eigenvalues: ev,
        null_residuals,
        null_rayleigh,
        asymmetry: op.asymmetry,
    })
}
