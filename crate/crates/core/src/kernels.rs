//! Collision kernels `a`, `b`, `c` sampled on the doubled difference lattice.
//!
//! For `z ≠ 0`:
//! `a_ij(z) = |z|^{γ+2} (δ_ij − z_i z_j / |z|^2)`, `b_i(z) = −2 |z|^γ z_i`,
//! `c(z) = −2 (γ+3) |z|^γ`.
//! The origin cell carries exact cell averages: `a = (2/3) avg|z|^{γ+2} I`
//! (isotropic angular average of the projector), `b = 0` (odd symmetry),
//! `c = −2 (γ+3) avg|z|^γ`.
//!
//! Difference vectors `z = m h` with `m ∈ [−n, n)^3` are stored in circular
//! order on the `(2n)^3` lattice so that the cached spectra give exact linear
//! convolutions through [`PaddedFft3`]. Offsets with a component equal to
//! `−n` never occur between two cells of the primary grid and are stored as
//! zero; the stored kernels are then exactly even or odd, so every kernel
//! spectrum is purely real (`a`, `c`) or purely imaginary (`b`).

use rustfft::num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fft::PaddedFft3;
use crate::grid::Grid;
use crate::quadrature::{self, Tolerance};

/// Component order for the six independent entries of a symmetric matrix.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Slot of `(i, j)` in [`SYM_PAIRS`] order.
#[inline]
pub fn sym_index(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) => 3,
        (0, 2) => 4,
        (1, 2) => 5,
        _ => unreachable!(),
    }
}

/// Identifies one of the ten sampled kernel components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    A(usize),
    B(usize),
    C,
}

/// Real kernels are transformed two at a time as `k1 + i k2`; the inverse of
/// `(K1 + i K2) · G` then carries both convolutions in its real and imaginary parts.
pub const SPECTRAL_PAIRS: [(Component, Component); 5] = [
    (Component::A(0), Component::A(1)),
    (Component::A(2), Component::A(3)),
    (Component::A(4), Component::A(5)),
    (Component::B(0), Component::B(1)),
    (Component::B(2), Component::C),
];

/// Kernel values at a nonzero difference vector: `(a in SYM_PAIRS order, b, c)`.
#[inline]
pub fn kernel_values(z: [f64; 3], gamma: f64) -> ([f64; 6], [f64; 3], f64) {
    let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
    let rg = r2.powf(0.5 * gamma);
    let mut a = [0.0; 6];
    for (slot, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        let delta = if i == j { r2 } else { 0.0 };
        a[slot] = rg * (delta - z[i] * z[j]);
    }
    let b = [-2.0 * rg * z[0], -2.0 * rg * z[1], -2.0 * rg * z[2]];
    let c = -2.0 * (gamma + 3.0) * rg;
    (a, b, c)
}

/// Mean of `|z|^exponent` over the cube `[−h/2, h/2]^3`.
///
/// Splitting the cube into three pyramids with apex at the origin reduces the
/// singular 3D integral to `(h/2)^e · 3/(e+3) · ∫∫_{[0,1]^2} (1+u²+w²)^{e/2}`,
/// whose integrand is smooth; the remaining double integral is computed by
/// nested adaptive quadrature.
pub fn cell_average_power(exponent: f64, h: f64) -> Result<f64> {
    if !(exponent > -3.0) || !exponent.is_finite() {
        return Err(invalid(format!("cell average of |z|^e needs e > -3, got {exponent}")));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid(format!("cell width must be positive, got {h}")));
    }
    let tol = Tolerance::relative(1e-13);
    let half_e = 0.5 * exponent;
    let mut inner_err = None;
    let outer = quadrature::integrate(
        |w| match quadrature::integrate(|u| (1.0 + u * u + w * w).powf(half_e), 0.0, 1.0, tol) {
            Ok(e) => e.value,
            Err(e) => {
                inner_err = Some(e);
                f64::NAN
            }
        },
        0.0,
        1.0,
        tol,
    );
    if let Some(e) = inner_err {
        return Err(e);
    }
    let face = outer?.value;
    Ok((0.5 * h).powf(exponent) * 3.0 / (exponent + 3.0) * face)
}

#[derive(Debug, Clone)]
pub struct KernelSet {
    grid: Grid,
    gamma: f64,
    a: [Vec<f64>; 6],
    b: [Vec<f64>; 3],
    c: Vec<f64>,
    spectra: [Vec<Complex64>; 5],
    fft: PaddedFft3,
    origin_avg_a: f64,
    origin_avg_c: f64,
}

pub fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > -2.0 && gamma < 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("gamma must lie in (-2, 0), got {gamma}")))
    }
}

/// Samples all kernel components for `grid` and caches their spectra.
pub fn sample_kernels(grid: &Grid, gamma: f64) -> Result<KernelSet> {
    check_gamma(gamma)?;
    let n = grid.n();
    let p = 2 * n;
    let h = grid.spacing();
    let len = p * p * p;
    let avg_a = cell_average_power(gamma + 2.0, h)?;
    let avg_c = cell_average_power(gamma, h)?;

    let mut a: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; len]);
    let mut b: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; len]);
    let mut c = vec![0.0; len];
    let wrap = |i: usize| if i < n { i as f64 } else { i as f64 - p as f64 };
    for i in 0..p {
        for j in 0..p {
            for k in 0..p {
                let idx = (i * p + j) * p + k;
                if i == 0 && j == 0 && k == 0 {
                    let diag = 2.0 / 3.0 * avg_a;
                    a[0][idx] = diag;
                    a[1][idx] = diag;
                    a[2][idx] = diag;
                    c[idx] = -2.0 * (gamma + 3.0) * avg_c;
                    continue;
                }
                if i == n || j == n || k == n {
                    continue;
                }
                let z = [wrap(i) * h, wrap(j) * h, wrap(k) * h];
                let (av, bv, cv) = kernel_values(z, gamma);
                for s in 0..6 {
                    a[s][idx] = av[s];
                }
                for d in 0..3 {
                    b[d][idx] = bv[d];
                }
                c[idx] = cv;
            }
        }
    }

    let fft = PaddedFft3::new(n);
    let mut scratch = fft.scratch();
    let mut set = KernelSet {
        grid: *grid,
        gamma,
        a,
        b,
        c,
        spectra: std::array::from_fn(|_| Vec::new()),
        fft,
        origin_avg_a: avg_a,
        origin_avg_c: avg_c,
    };
    for (slot, &(re, im)) in SPECTRAL_PAIRS.iter().enumerate() {
        let (xr, xi) = (set.component(re), set.component(im));
        let mut data: Vec<Complex64> = xr.iter().zip(xi).map(|(&r, &i)| Complex64::new(r, i)).collect();
        set.fft.forward_full(&mut data, &mut scratch);
        set.spectra[slot] = data;
    }
    Ok(set)
}

impl KernelSet {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn fft(&self) -> &PaddedFft3 {
        &self.fft
    }

    /// Mean of `|z|^{γ+2}` over the origin cell.
    pub fn origin_average_a(&self) -> f64 {
        self.origin_avg_a
    }

    /// Mean of `|z|^γ` over the origin cell.
    pub fn origin_average_c(&self) -> f64 {
        self.origin_avg_c
    }

    pub fn component(&self, comp: Component) -> &[f64] {
        match comp {
            Component::A(s) => &self.a[s],
            Component::B(d) => &self.b[d],
            Component::C => &self.c,
        }
    }

    pub fn spectrum(&self, slot: usize) -> &[Complex64] {
        &self.spectra[slot]
    }

    /// Storage index of the difference vector `m h`, `m ∈ [−n, n)^3`.
    #[inline]
    pub fn offset_index(&self, m: [isize; 3]) -> usize {
        let p = 2 * self.grid.n() as isize;
        let w = |x: isize| {
            debug_assert!(x >= -p / 2 && x < p / 2);
            x.rem_euclid(p) as usize
        };
        let p = p as usize;
        (w(m[0]) * p + w(m[1])) * p + w(m[2])
    }

    /// Full 3×3 sample of `a` at offset `m`.
    #[inline]
    pub fn a_matrix(&self, m: [isize; 3]) -> [[f64; 3]; 3] {
        let idx = self.offset_index(m);
        let s = |i, j| self.a[sym_index(i, j)][idx];
        [
            [s(0, 0), s(0, 1), s(0, 2)],
            [s(1, 0), s(1, 1), s(1, 2)],
            [s(2, 0), s(2, 1), s(2, 2)],
        ]
    }

    #[inline]
    pub fn b_vector(&self, m: [isize; 3]) -> [f64; 3] {
        let idx = self.offset_index(m);
        [self.b[0][idx], self.b[1][idx], self.b[2][idx]]
    }

    #[inline]
    pub fn c_value(&self, m: [isize; 3]) -> f64 {
        self.c[self.offset_index(m)]
    }
}
