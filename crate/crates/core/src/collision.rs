//! Landau collision operator in conservative divergence form.
//!
//! `Q(g, f) = ∇·{ (a∗g) ∇f − (b∗g) f }`. The convolutions are exact discrete
//! linear convolutions `h^3 Σ_y k(x−y) g(y)` evaluated with the cached kernel
//! spectra; the flux and its divergence use central differences with zero
//! extension. The normal flux is set to zero in the outermost cell layer
//! (no-flux wall), so the discrete mass of `Q` telescopes to zero for every
//! input, not only for compactly supported ones.
//!
//! The nonlinear operator `Q(f, f)` used for time stepping is evaluated in the
//! symmetric Landau form
//! `G(x) = P(x) Σ_y a(x−y) P(y) [D log F(x) − D log F(y)]`, `Q = −Dᵀ G`,
//! i.e. `G = P (ā D log F − a∗(P D log F))` with `ā = a∗P` and `F = max(f, floor)`.
//! `D` is a per-axis one-sided difference, averaged over the eight sign
//! patterns of `(D_x, D_y, D_z)`; the average keeps like-sided differences on
//! the diagonal of `a` and the mean difference off it. The transpose is the
//! exact matrix adjoint, so the stencil is compact (no odd-even decoupling) and
//! invariant under axis reflections. `D` is exact on quadratics and
//! `a(z) z = 0` holds for every sampled offset, so the discrete Maxwellian is
//! annihilated to roundoff; the pair antisymmetry of the double sum conserves
//! mass, momentum and energy, and the discrete entropy production `−Σ Q log F`
//! is a sum of nonnegative quadratic forms. The prefactor `P` equals `F` except
//! where `F` drops by more than [`STAR_RATIO_CAP`] across the seven-point star
//! of a cell; capping it there bounds the coupling `P(x)/F(x ± h e_k)` in steep
//! tails, which otherwise limits the explicit time step.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{LandauError, Result};
use crate::fft::{FftScratch, PaddedFft3};
use crate::grid::{central_difference, Field, Grid};
use crate::kernels::{sym_index, Component, KernelSet, SPECTRAL_PAIRS, SYM_PAIRS};

/// Largest grid accepted by [`weak_form_moment`] without the force flag.
pub const WEAK_FORM_MAX_N: usize = 12;

/// `ā = a∗g`, `b̄ = b∗g`, `c̄ = c∗g` on the primary lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFields {
    pub grid: Grid,
    /// Symmetric matrix entries in [`SYM_PAIRS`] order.
    pub a: [Vec<f64>; 6],
    pub b: [Vec<f64>; 3],
    pub c: Vec<f64>,
}

impl CoefficientFields {
    pub fn zeros(grid: Grid) -> Self {
        let len = grid.cell_count();
        CoefficientFields {
            grid,
            a: std::array::from_fn(|_| vec![0.0; len]),
            b: std::array::from_fn(|_| vec![0.0; len]),
            c: vec![0.0; len],
        }
    }

    #[inline]
    pub fn a_matrix(&self, idx: usize) -> [[f64; 3]; 3] {
        let s = |i, j| self.a[sym_index(i, j)][idx];
        [
            [s(0, 0), s(0, 1), s(0, 2)],
            [s(1, 0), s(1, 1), s(1, 2)],
            [s(2, 0), s(2, 1), s(2, 2)],
        ]
    }

    #[inline]
    pub fn b_vector(&self, idx: usize) -> [f64; 3] {
        [self.b[0][idx], self.b[1][idx], self.b[2][idx]]
    }

    /// Trace `ā_ii` as a field.
    pub fn trace(&self) -> Field {
        let vals = (0..self.grid.cell_count())
            .map(|i| self.a[0][i] + self.a[1][i] + self.a[2][i])
            .collect();
        Field::from_values(self.grid, vals).expect("length matches grid")
    }

    /// `self + s * other`, component-wise.
    pub fn add_scaled(&self, s: f64, other: &CoefficientFields) -> Result<CoefficientFields> {
        self.grid.ensure_same(&other.grid)?;
        let comb = |x: &Vec<f64>, y: &Vec<f64>| x.iter().zip(y).map(|(p, q)| p + s * q).collect::<Vec<_>>();
        Ok(CoefficientFields {
            grid: self.grid,
            a: std::array::from_fn(|i| comb(&self.a[i], &other.a[i])),
            b: std::array::from_fn(|i| comb(&self.b[i], &other.b[i])),
            c: comb(&self.c, &other.c),
        })
    }

    /// Largest entry magnitude across all components.
    pub fn max_abs(&self) -> f64 {
        self.a
            .iter()
            .chain(self.b.iter())
            .chain(std::iter::once(&self.c))
            .flat_map(|v| v.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Default floor under `log F` in [`Convolver::landau`], relative to the peak
/// of `f`. Cells below it drop out of the dynamics: their `log F` is constant.
pub const COLLISION_LOG_FLOOR: f64 = 1e-30;

/// FFT workspace bound to one [`KernelSet`]. Each running simulation owns its own.
#[derive(Debug, Clone)]
pub struct Convolver {
    kernels: Arc<KernelSet>,
    g_hat: Vec<Complex64>,
    w_hat: [Vec<Complex64>; 6],
    work: Vec<Complex64>,
    out: Vec<Complex64>,
    scratch: FftScratch,
}

impl Convolver {
    pub fn new(kernels: Arc<KernelSet>) -> Self {
        let fft = kernels.fft();
        let len = fft.padded_len();
        let n = fft.n();
        Convolver {
            g_hat: vec![Complex64::default(); len],
            w_hat: std::array::from_fn(|_| Vec::new()),
            work: vec![Complex64::default(); len],
            out: vec![Complex64::default(); n * n * n],
            scratch: fft.scratch(),
            kernels,
        }
    }

    pub fn kernels(&self) -> &Arc<KernelSet> {
        &self.kernels
    }

    /// `a∗g`, `b∗g`, `c∗g` restricted to the primary lattice.
    pub fn convolve_fields(&mut self, g: &Field) -> Result<CoefficientFields> {
        let ks = Arc::clone(&self.kernels);
        ks.grid().ensure_same(g.grid())?;
        let fft = ks.fft();
        fft.forward_padded(g.values(), &mut self.g_hat, &mut self.scratch);
        let grid = *g.grid();
        let scale = grid.cell_volume() / fft.padded_len() as f64;
        let mut coeffs = CoefficientFields::zeros(grid);
        for (slot, &(re, im)) in SPECTRAL_PAIRS.iter().enumerate() {
            let spec = ks.spectrum(slot);
            for ((w, k), g) in self.work.iter_mut().zip(spec).zip(&self.g_hat) {
                *w = k * g;
            }
            fft.inverse_restricted(&mut self.work, &mut self.out, &mut self.scratch);
            {
                let dst = component_mut(&mut coeffs, re);
                for (d, o) in dst.iter_mut().zip(&self.out) {
                    *d = o.re * scale;
                }
            }
            let dst = component_mut(&mut coeffs, im);
            for (d, o) in dst.iter_mut().zip(&self.out) {
                *d = o.im * scale;
            }
        }
        Ok(coeffs)
    }

    /// `Q(g, f)` with fresh convolutions of `g`.
    pub fn collision(&mut self, g: &Field, f: &Field) -> Result<Field> {
        let coeffs = self.convolve_fields(g)?;
        apply_q(&coeffs, f)
    }

    /// Nonlinear `Q(f, f)` in the symmetric log form (see module docs).
    /// `log_floor` is relative to the peak of `f`.
    pub fn landau(&mut self, f: &Field, log_floor: f64) -> Result<Field> {
        let ks = Arc::clone(&self.kernels);
        ks.grid().ensure_same(f.grid())?;
        let grid = *f.grid();
        let len = grid.cell_count();
        let peak = f.max();
        if !(peak > 0.0) || !peak.is_finite() {
            return Err(LandauError::NonPositiveMass(peak));
        }
        if grid.n() < 3 {
            return Err(crate::error::invalid("the log-form operator needs n >= 3"));
        }
        let floor = peak * log_floor.max(f64::MIN_POSITIVE);
        let big_f: Vec<f64> = f.values().iter().map(|&x| x.max(floor)).collect();
        let log_f: Vec<f64> = big_f.iter().map(|x| x.ln()).collect();
        let weight = star_weight(&grid, &big_f);
        // psi[s][j]: one-sided difference of log F along j, s = 0 forward, 1 backward
        let mut psi: [[Vec<f64>; 3]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| vec![0.0; len]));
        for (s, side) in [Side::Forward, Side::Backward].into_iter().enumerate() {
            for (axis, out) in psi[s].iter_mut().enumerate() {
                one_sided_difference(&grid, &log_f, axis, side, out);
            }
        }
        let psi_mean: [Vec<f64>; 3] =
            std::array::from_fn(|j| psi[0][j].iter().zip(&psi[1][j]).map(|(a, b)| 0.5 * (a + b)).collect());

        let fft = ks.fft();
        let plen = fft.padded_len();
        let scale = grid.cell_volume() / plen as f64;
        fft.forward_padded(&weight, &mut self.g_hat, &mut self.scratch);
        let mut abar: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; len]);
        for slot in 0..3 {
            let spec = ks.spectrum(slot);
            for ((w, k), g) in self.work.iter_mut().zip(spec).zip(&self.g_hat) {
                *w = k * g;
            }
            fft.inverse_restricted(&mut self.work, &mut self.out, &mut self.scratch);
            let (lo, hi) = abar.split_at_mut(2 * slot + 1);
            for ((re, im), o) in lo[2 * slot].iter_mut().zip(hi[0].iter_mut()).zip(&self.out) {
                *re = o.re * scale;
                *im = o.im * scale;
            }
        }

        // Spectra of P·ψ, slot 3s + j; the two sides of one axis share a transform.
        let w: [Vec<f64>; 6] =
            std::array::from_fn(|slot| weight.iter().zip(&psi[slot / 3][slot % 3]).map(|(a, b)| a * b).collect());
        for j in 0..3 {
            let z = &mut self.w_hat[j];
            z.resize(plen, Complex64::default());
            fft.forward_padded_pair(&w[j], &w[3 + j], z, &mut self.scratch);
        }
        // Drift terms, output o = 3j + t: t = 0, 1 the diagonal a_jj∗(Pψ_j) per
        // side, t = 2 the off-diagonal Σ_{k≠j} a_jk∗(P ψ̄_k) with the mean difference.
        // Outputs are packed in pairs (2q, 2q + 1) into the real and imaginary parts.
        for buf in self.w_hat[3..].iter_mut() {
            buf.resize(plen, Complex64::default());
        }
        self.work.resize(plen, Complex64::default());
        let half = Complex64::new(0.5, 0.0);
        let minus_half_i = Complex64::new(0.0, -0.5);
        let i_unit = Complex64::i();
        let spectra: [&[Complex64]; 3] = std::array::from_fn(|slot| ks.spectrum(slot));
        {
            let (zs, outs) = self.w_hat.split_at_mut(3);
            let (o01, o23) = outs.split_at_mut(1);
            let (o2, o3) = o23.split_at_mut(1);
            let (o0, o1, o2, o3, o4) = (&mut o01[0], &mut o2[0], &mut o3[0], &mut self.work, &mut self.g_hat);
            let p = fft.padded();
            for ia in 0..p {
                for ib in 0..p {
                    let row = (ia * p + ib) * p;
                    let neg_row = (((p - ia) % p) * p + (p - ib) % p) * p;
                    for ic in 0..p {
                        let idx = row + ic;
                        let neg = neg_row + if ic == 0 { 0 } else { p - ic };
                        let mut fwd = [Complex64::default(); 3];
                        let mut bwd = [Complex64::default(); 3];
                        for j in 0..3 {
                            let (zp, zm) = (zs[j][idx], zs[j][neg].conj());
                            fwd[j] = half * (zp + zm);
                            bwd[j] = minus_half_i * (zp - zm);
                        }
                        let mean: [Complex64; 3] = std::array::from_fn(|j| half * (fwd[j] + bwd[j]));
                        // Kernel spectra are real: slot s/2, real part for even symmetric index s.
                        let (s0, s1, s2) = (spectra[0][idx], spectra[1][idx], spectra[2][idx]);
                        let (a00, a11, a22, a01, a02, a12) = (s0.re, s0.im, s1.re, s1.im, s2.re, s2.im);
                        o0[idx] = fwd[0] * a00 + i_unit * (bwd[0] * a00);
                        o1[idx] = (mean[1] * a01 + mean[2] * a02) + i_unit * (fwd[1] * a11);
                        o2[idx] = bwd[1] * a11 + i_unit * (mean[0] * a01 + mean[2] * a12);
                        o3[idx] = fwd[2] * a22 + i_unit * (bwd[2] * a22);
                        o4[idx] = mean[0] * a02 + mean[1] * a12;
                    }
                }
            }
        }
        let mut drift: [Vec<f64>; 9] = std::array::from_fn(|_| vec![0.0; len]);
        for q in 0..5 {
            let buf = match q {
                0..=2 => &mut self.w_hat[3 + q],
                3 => &mut self.work,
                _ => &mut self.g_hat,
            };
            fft.inverse_restricted(buf, &mut self.out, &mut self.scratch);
            for (i, o) in self.out.iter().enumerate() {
                drift[2 * q][i] = o.re * scale;
                if 2 * q + 1 < 9 {
                    drift[2 * q + 1][i] = o.im * scale;
                }
            }
        }

        // Averaging the eight sign patterns of (D_x, D_y, D_z) leaves one-sided
        // differences on the diagonal of ā and the mean difference off it.
        let mut q = vec![0.0; len];
        let mut g = vec![0.0; len];
        for j in 0..3 {
            for (s, side) in [Side::Forward, Side::Backward].into_iter().enumerate() {
                for idx in 0..len {
                    let mut acc = abar[sym_index(j, j)][idx] * psi[s][j][idx] - drift[3 * j + s][idx] - drift[3 * j + 2][idx];
                    for k in (0..3).filter(|&k| k != j) {
                        acc += abar[sym_index(j, k)][idx] * psi_mean[k][idx];
                    }
                    g[idx] = -0.5 * weight[idx] * acc;
                }
                one_sided_transpose_add(&grid, &g, j, side, &mut q);
            }
        }
        Field::from_values(grid, q)
    }
}

/// Cap on the prefactor `P(x)` relative to the smallest `F` in the seven-point
/// star of `x`.
pub const STAR_RATIO_CAP: f64 = 100.0;

/// `P = min(F, cap · min over the star of F)`; equals `F` wherever the
/// neighbour ratios stay below the cap.
fn star_weight(grid: &Grid, big_f: &[f64]) -> Vec<f64> {
    let n = grid.n();
    (0..big_f.len())
        .map(|idx| {
            let pos = grid.unravel(idx);
            let mut lo = big_f[idx];
            for (axis, stride) in [n * n, n, 1].into_iter().enumerate() {
                if pos[axis] > 0 {
                    lo = lo.min(big_f[idx - stride]);
                }
                if pos[axis] + 1 < n {
                    lo = lo.min(big_f[idx + stride]);
                }
            }
            big_f[idx].min(STAR_RATIO_CAP * lo)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Forward,
    Backward,
}

/// One-sided difference along `axis`. The cell at the open end uses the
/// quadratic extrapolation of the missing neighbour, so the stencil is exact
/// on quadratics: `(2ψ₀ − 3ψ₋₁ + ψ₋₂)/h` forward at the last cell and its
/// mirror image backward at the first one.
fn one_sided_difference(grid: &Grid, src: &[f64], axis: usize, side: Side, out: &mut [f64]) {
    let n = grid.n();
    let inv_h = 1.0 / grid.spacing();
    let stride = [n * n, n, 1][axis];
    for (idx, o) in out.iter_mut().enumerate() {
        let pos = grid.unravel(idx)[axis];
        let at = |off: isize| src[(idx as isize + off * stride as isize) as usize];
        *o = inv_h
            * match side {
                Side::Forward if pos + 1 < n => at(1) - at(0),
                Side::Forward => 2.0 * at(0) - 3.0 * at(-1) + at(-2),
                Side::Backward if pos > 0 => at(0) - at(-1),
                Side::Backward => -2.0 * at(0) + 3.0 * at(1) - at(2),
            };
    }
}

/// `out += Dᵀ g` for the matrix `D` of [`one_sided_difference`].
fn one_sided_transpose_add(grid: &Grid, g: &[f64], axis: usize, side: Side, out: &mut [f64]) {
    let n = grid.n();
    let inv_h = 1.0 / grid.spacing();
    let stride = [n * n, n, 1][axis] as isize;
    for (idx, &gv) in g.iter().enumerate() {
        let pos = grid.unravel(idx)[axis];
        let x = gv * inv_h;
        let mut put = |off: isize, c: f64| out[(idx as isize + off * stride) as usize] += c * x;
        match side {
            Side::Forward if pos + 1 < n => {
                put(1, 1.0);
                put(0, -1.0);
            }
            Side::Forward => {
                put(0, 2.0);
                put(-1, -3.0);
                put(-2, 1.0);
            }
            Side::Backward if pos > 0 => {
                put(0, 1.0);
                put(-1, -1.0);
            }
            Side::Backward => {
                put(0, -2.0);
                put(1, 3.0);
                put(2, -1.0);
            }
        }
    }
}

/// Zeroes the normal flux component on the two boundary layers of each axis.
fn close_walls(grid: &Grid, g: &mut [Vec<f64>; 3]) {
    let n = grid.n();
    for idx in 0..grid.cell_count() {
        let pos = grid.unravel(idx);
        for axis in 0..3 {
            if pos[axis] == 0 || pos[axis] == n - 1 {
                g[axis][idx] = 0.0;
            }
        }
    }
}

/// One-shot [`Convolver::landau`] with a temporary workspace.
pub fn landau_collision(kernels: &Arc<KernelSet>, f: &Field, log_floor: f64) -> Result<Field> {
    Convolver::new(Arc::clone(kernels)).landau(f, log_floor)
}

fn component_mut(c: &mut CoefficientFields, comp: Component) -> &mut Vec<f64> {
    match comp {
        Component::A(s) => &mut c.a[s],
        Component::B(d) => &mut c.b[d],
        Component::C => &mut c.c,
    }
}

/// One-shot convolution with a temporary workspace.
pub fn convolve_fields(kernels: &Arc<KernelSet>, g: &Field) -> Result<CoefficientFields> {
    Convolver::new(Arc::clone(kernels)).convolve_fields(g)
}

/// Discrete linear convolution `h^3 Σ_y k((x−y)) g(y)` of a field with an
/// arbitrary scalar kernel given as a function of the difference vector.
/// `kernel_at_origin` replaces the value at `z = 0`.
pub fn convolve_scalar(g: &Field, kernel: impl Fn([f64; 3]) -> f64, kernel_at_origin: f64) -> Field {
    let grid = *g.grid();
    let n = grid.n();
    let h = grid.spacing();
    let fft = PaddedFft3::new(n);
    let p = fft.padded();
    let mut s = fft.scratch();
    let wrap = |i: usize| if i < n { i as f64 } else { i as f64 - p as f64 };
    let mut k_hat = vec![Complex64::default(); fft.padded_len()];
    for i in 0..p {
        for j in 0..p {
            for k in 0..p {
                let v = if i == 0 && j == 0 && k == 0 {
                    kernel_at_origin
                } else {
                    kernel([wrap(i) * h, wrap(j) * h, wrap(k) * h])
                };
                k_hat[(i * p + j) * p + k] = Complex64::new(v, 0.0);
            }
        }
    }
    fft.forward_full(&mut k_hat, &mut s);
    let mut g_hat = vec![Complex64::default(); fft.padded_len()];
    fft.forward_padded(g.values(), &mut g_hat, &mut s);
    for (a, b) in g_hat.iter_mut().zip(&k_hat) {
        *a *= b;
    }
    let mut out = vec![Complex64::default(); n * n * n];
    fft.inverse_restricted(&mut g_hat, &mut out, &mut s);
    let scale = grid.cell_volume() / fft.padded_len() as f64;
    Field::from_values(grid, out.iter().map(|c| c.re * scale).collect()).expect("length matches grid")
}

/// Flux `G_i = Σ_j ā_ij ∂_j f − b̄_i f` with central differences; `G_i`
/// vanishes on the two boundary layers normal to axis `i`.
pub fn flux(coeffs: &CoefficientFields, f: &Field) -> Result<[Field; 3]> {
    coeffs.grid.ensure_same(f.grid())?;
    let grid = coeffs.grid;
    let len = grid.cell_count();
    let mut d: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; len]);
    for (axis, out) in d.iter_mut().enumerate() {
        central_difference(&grid, f.values(), axis, out);
    }
    let fv = f.values();
    let mut g: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; len]);
    for idx in 0..len {
        let (d0, d1, d2) = (d[0][idx], d[1][idx], d[2][idx]);
        let a = &coeffs.a;
        let fx = fv[idx];
        g[0][idx] = a[0][idx] * d0 + a[3][idx] * d1 + a[4][idx] * d2 - coeffs.b[0][idx] * fx;
        g[1][idx] = a[3][idx] * d0 + a[1][idx] * d1 + a[5][idx] * d2 - coeffs.b[1][idx] * fx;
        g[2][idx] = a[4][idx] * d0 + a[5][idx] * d1 + a[2][idx] * d2 - coeffs.b[2][idx] * fx;
    }
    close_walls(&grid, &mut g);
    let [g0, g1, g2] = g;
    Ok([
        Field::from_values(grid, g0)?,
        Field::from_values(grid, g1)?,
        Field::from_values(grid, g2)?,
    ])
}

/// `∇·{ ā ∇f − b̄ f }` in flux form.
pub fn apply_q(coeffs: &CoefficientFields, f: &Field) -> Result<Field> {
    let g = flux(coeffs, f)?;
    crate::grid::divergence(&g)
}

/// Expanded (non-conservative) form `ā_ij ∂_ij f − c̄ f`; cross-check path only.
/// Diagonal second derivatives use the compact three-point stencil, mixed
/// ones the product of central differences.
pub fn apply_q_expanded(coeffs: &CoefficientFields, f: &Field) -> Result<Field> {
    coeffs.grid.ensure_same(f.grid())?;
    let grid = coeffs.grid;
    let n = grid.n();
    let h = grid.spacing();
    let fv = f.values();
    let at = |i: isize, j: isize, k: isize| -> f64 {
        let n = n as isize;
        if i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n {
            0.0
        } else {
            fv[((i * n + j) * n + k) as usize]
        }
    };
    let mut out = vec![0.0; grid.cell_count()];
    for (idx, o) in out.iter_mut().enumerate() {
        let [i, j, k] = grid.unravel(idx).map(|x| x as isize);
        let c = at(i, j, k);
        let dxx = (at(i + 1, j, k) - 2.0 * c + at(i - 1, j, k)) / (h * h);
        let dyy = (at(i, j + 1, k) - 2.0 * c + at(i, j - 1, k)) / (h * h);
        let dzz = (at(i, j, k + 1) - 2.0 * c + at(i, j, k - 1)) / (h * h);
        let mixed = |di: [isize; 3], dj: [isize; 3]| {
            (at(i + di[0] + dj[0], j + di[1] + dj[1], k + di[2] + dj[2])
                - at(i + di[0] - dj[0], j + di[1] - dj[1], k + di[2] - dj[2])
                - at(i - di[0] + dj[0], j - di[1] + dj[1], k - di[2] + dj[2])
                + at(i - di[0] - dj[0], j - di[1] - dj[1], k - di[2] - dj[2]))
                / (4.0 * h * h)
        };
        let e = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        let dxy = mixed(e[0], e[1]);
        let dxz = mixed(e[0], e[2]);
        let dyz = mixed(e[1], e[2]);
        let a = &coeffs.a;
        *o = a[0][idx] * dxx
            + a[1][idx] * dyy
            + a[2][idx] * dzz
            + 2.0 * (a[3][idx] * dxy + a[4][idx] * dxz + a[5][idx] * dyz)
            - coeffs.c[idx] * c;
    }
    Field::from_values(grid, out)
}

/// Test function for the weak form: gradient and Hessian are all that enter.
pub trait TestFunction {
    fn gradient(&self, v: [f64; 3]) -> [f64; 3];
    fn hessian(&self, v: [f64; 3]) -> [[f64; 3]; 3];
}

/// Collision invariants `1`, `v_i`, `|v|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    Mass,
    Momentum(usize),
    Energy,
}

impl TestFunction for Invariant {
    fn gradient(&self, v: [f64; 3]) -> [f64; 3] {
        match *self {
            Invariant::Mass => [0.0; 3],
            Invariant::Momentum(d) => {
                let mut g = [0.0; 3];
                g[d] = 1.0;
                g
            }
            Invariant::Energy => [2.0 * v[0], 2.0 * v[1], 2.0 * v[2]],
        }
    }

    fn hessian(&self, _v: [f64; 3]) -> [[f64; 3]; 3] {
        match *self {
            Invariant::Energy => [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]],
            _ => [[0.0; 3]; 3],
        }
    }
}

/// Brute-force double sum of the symmetrised weak form
/// `½∬ a_ij(v−v*)(∂_ijφ + ∂_ijφ*) f* f + ∬ b_i(v−v*)(∂_iφ − ∂_iφ*) f* f`
/// over all cell pairs, times `h^6`. Cost `O(n^6)`.
///
/// Coincident pairs are skipped: averaged over the cell, their integrand
/// vanishes for every test function of degree at most two.
pub fn weak_form_moment(kernels: &KernelSet, f: &Field, phi: &dyn TestFunction, force: bool) -> Result<f64> {
    let grid = *f.grid();
    kernels.grid().ensure_same(&grid)?;
    if grid.n() > WEAK_FORM_MAX_N && !force {
        return Err(LandauError::GridTooLarge {
            operation: "weak_form_moment",
            n: grid.n(),
            max: WEAK_FORM_MAX_N,
        });
    }
    let len = grid.cell_count();
    let fv = f.values();
    let grads: Vec<[f64; 3]> = (0..len).map(|i| phi.gradient(grid.velocity(i))).collect();
    let hess: Vec<[[f64; 3]; 3]> = (0..len).map(|i| phi.hessian(grid.velocity(i))).collect();
    let cells: Vec<[isize; 3]> = (0..len).map(|i| grid.unravel(i).map(|x| x as isize)).collect();
    let mut row_sums = vec![0.0; len];
    for x in 0..len {
        if fv[x] == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for y in (x + 1)..len {
            if fv[y] == 0.0 {
                continue;
            }
            let m = [cells[x][0] - cells[y][0], cells[x][1] - cells[y][1], cells[x][2] - cells[y][2]];
            let a = kernels.a_matrix(m);
            let b = kernels.b_vector(m);
            let mut term = 0.0;
            for &(i, j) in SYM_PAIRS.iter() {
                let mult = if i == j { 1.0 } else { 2.0 };
                term += 0.5 * mult * a[i][j] * (hess[x][i][j] + hess[y][i][j]);
            }
            for d in 0..3 {
                term += b[d] * (grads[x][d] - grads[y][d]);
            }
            acc += term * fv[y];
        }
        // Each unordered pair appears twice in the double integral.
        row_sums[x] = 2.0 * acc * fv[x];
    }
    let h3 = grid.cell_volume();
    Ok(h3 * h3 * crate::grid::pairwise_sum(&row_sums))
}
