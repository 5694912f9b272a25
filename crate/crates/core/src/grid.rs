//! Truncated cell-centred velocity lattice, sampled fields, quadrature and
//! central-difference stencils.
//!
//! The box is `[-L, L)^3` split into `n` cells per axis; node `i` sits at
//! `-L + (i + 1/2) h` with `h = 2L / n`. Cells are stored lexicographically
//! in `(i, j, k)` with `k` fastest. Outside the box every field is taken to be
//! zero, which is what makes the divergence stencil telescope.

use crate::error::{invalid, LandauError, Result};
use crate::weight::WeightSpec;

/// Default tolerance for negative undershoots of a distribution field,
/// relative to its peak.
pub const DEFAULT_TOL_NEG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    half_width: f64,
    spacing: f64,
}

impl Grid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("grid needs n >= 2 cells per axis, got {n}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(invalid(format!("grid half width must be positive, got {half_width}")));
        }
        Ok(Grid {
            n,
            half_width,
            spacing: 2.0 * half_width / n as f64,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing * self.spacing * self.spacing
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Cell-centre coordinate of node `i` along one axis.
    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coordinate(i)).collect()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.n;
        let j = (idx / self.n) % self.n;
        let i = idx / (self.n * self.n);
        [i, j, k]
    }

    #[inline]
    pub fn velocity(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unravel(idx);
        [self.coordinate(i), self.coordinate(j), self.coordinate(k)]
    }

    /// Largest cell-centre speed on the lattice.
    pub fn max_speed(&self) -> f64 {
        let c = self.coordinate(self.n - 1);
        c * 3f64.sqrt()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && self.half_width.to_bits() == other.half_width.to_bits()
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(LandauError::GridMismatch(format!(
                "(n = {}, L = {}) vs (n = {}, L = {})",
                self.n, self.half_width, other.n, other.half_width
            )))
        }
    }
}

/// Builds the cell-centred lattice with `n` cells per axis on `[-L, L)^3`.
pub fn build_grid(n: usize, half_width: f64) -> Result<Grid> {
    Grid::new(n, half_width)
}

/// Scalar field sampled at the cell centres of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.cell_count()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(LandauError::GridMismatch(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut([f64; 3]) -> f64) -> Self {
        let values = (0..grid.cell_count()).map(|idx| f(grid.velocity(idx))).collect();
        Field { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|x| c * x)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Field) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Field {
            grid: self.grid,
            values,
        })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    /// Checks the distribution invariant `min f >= -tol_neg * max f`.
    pub fn check_distribution(&self, tol_neg: f64) -> std::result::Result<(), (f64, f64)> {
        let (lo, hi) = (self.min(), self.max());
        if lo >= -tol_neg * hi.max(0.0) {
            Ok(())
        } else {
            Err((lo, hi))
        }
    }
}

/// Pairwise (cascade) summation with a fixed split order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        s
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Pairwise sum of `g(idx)` over all cells, without materialising more than
/// one block at a time.
pub(crate) fn pairwise_sum_by(len: usize, g: &impl Fn(usize) -> f64) -> f64 {
    fn rec(lo: usize, hi: usize, g: &impl Fn(usize) -> f64) -> f64 {
        if hi - lo <= 32 {
            let mut s = 0.0;
            for i in lo..hi {
                s += g(i);
            }
            s
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, g) + rec(mid, hi, g)
        }
    }
    rec(0, len, g)
}

/// Midpoint quadrature `h^3 Σ w(v) f(v)`; `weight = None` integrates `f` itself.
pub fn integrate(field: &Field, weight: Option<&WeightSpec>) -> f64 {
    let grid = field.grid;
    let vals = &field.values;
    let s = match weight {
        None => pairwise_sum(vals),
        Some(w) => pairwise_sum_by(vals.len(), &|idx| w.eval(grid.velocity(idx)) * vals[idx]),
    };
    grid.cell_volume() * s
}

/// `h^3 Σ φ(v) f(v)` for an arbitrary pointwise function.
pub fn integrate_with(field: &Field, phi: impl Fn([f64; 3]) -> f64) -> f64 {
    let grid = field.grid;
    let vals = &field.values;
    grid.cell_volume() * pairwise_sum_by(vals.len(), &|idx| phi(grid.velocity(idx)) * vals[idx])
}

/// Central difference along `axis` with zero extension outside the box.
pub fn partial(field: &Field, axis: usize) -> Field {
    let grid = field.grid;
    let mut out = vec![0.0; grid.cell_count()];
    central_difference(&grid, &field.values, axis, &mut out);
    Field { grid, values: out }
}

pub(crate) fn central_difference(grid: &Grid, src: &[f64], axis: usize, out: &mut [f64]) {
    let n = grid.n();
    let stride = match axis {
        0 => n * n,
        1 => n,
        2 => 1,
        _ => panic!("axis {axis} out of range"),
    };
    let inv2h = 0.5 / grid.spacing();
    for idx in 0..src.len() {
        let pos = (idx / stride) % n;
        let fwd = if pos + 1 < n { src[idx + stride] } else { 0.0 };
        let bwd = if pos > 0 { src[idx - stride] } else { 0.0 };
        out[idx] = (fwd - bwd) * inv2h;
    }
}

/// Second-order central gradient. Boundary cells see the zero extension, so
/// the gradient of a constant is nonzero in the outermost layer.
pub fn gradient(field: &Field) -> [Field; 3] {
    [partial(field, 0), partial(field, 1), partial(field, 2)]
}

/// Central-difference divergence with zero extension. Its cell sum telescopes
/// to the outermost layers, so `h^3 Σ div G = 0` whenever `G` vanishes there.
pub fn divergence(components: &[Field; 3]) -> Result<Field> {
    let grid = components[0].grid;
    components[1].grid.ensure_same(&grid)?;
    components[2].grid.ensure_same(&grid)?;
    let mut out = vec![0.0; grid.cell_count()];
    let mut scratch = vec![0.0; grid.cell_count()];
    for (axis, comp) in components.iter().enumerate() {
        central_difference(&grid, &comp.values, axis, &mut scratch);
        for (o, s) in out.iter_mut().zip(&scratch) {
            *o += s;
        }
    }
    Ok(Field { grid, values: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_grid_sizes() {
        let g = build_grid(32, 8.0).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.cell_count(), 32768);
        let g = build_grid(2, 1.0).unwrap();
        assert_eq!(g.axis(), vec![-0.5, 0.5]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(build_grid(0, 1.0), Err(LandauError::InvalidParameter(_))));
        assert!(matches!(build_grid(1, 1.0), Err(LandauError::InvalidParameter(_))));
        assert!(build_grid(4, 0.0).is_err());
        assert!(build_grid(4, -1.0).is_err());
    }

    #[test]
    fn coordinates_strictly_inside_and_volume_exact() {
        for &(n, l) in &[(2, 1.0), (7, 3.0), (15, 6.0), (32, 8.0)] {
            let g = build_grid(n, l).unwrap();
            for x in g.axis() {
                assert!(x > -l && x < l);
            }
            let vol = g.cell_volume() * g.cell_count() as f64;
            assert!((vol - (2.0 * l).powi(3)).abs() <= 1e-12 * vol);
        }
    }

    #[test]
    fn lexicographic_order() {
        let g = build_grid(3, 1.5).unwrap();
        assert_eq!(g.index(0, 0, 1), 1);
        assert_eq!(g.index(0, 1, 0), 3);
        assert_eq!(g.index(1, 0, 0), 9);
        for idx in 0..g.cell_count() {
            let [i, j, k] = g.unravel(idx);
            assert_eq!(g.index(i, j, k), idx);
        }
    }

    #[test]
    fn zero_field_integrates_to_zero() {
        let g = build_grid(6, 2.0).unwrap();
        let z = Field::zeros(g);
        assert_eq!(integrate(&z, None), 0.0);
        assert_eq!(integrate(&z, Some(&WeightSpec::Polynomial { k: 3.0 })), 0.0);
    }

    #[test]
    fn gradient_of_linear_is_exact_in_interior() {
        let g = build_grid(10, 3.0).unwrap();
        let f = Field::from_fn(g, |v| v[0]);
        let [dx, dy, dz] = gradient(&f);
        for idx in 0..g.cell_count() {
            let [i, _, _] = g.unravel(idx);
            if i > 0 && i + 1 < g.n() {
                assert!((dx.values()[idx] - 1.0).abs() < 1e-14);
            }
        }
        // Transverse derivatives see zero extension only in their own boundary layer.
        let [_, j, _] = g.unravel(g.index(3, 4, 5));
        assert!(j > 0);
        assert!(dy.values()[g.index(3, 4, 5)].abs() < 1e-14);
        assert!(dz.values()[g.index(3, 4, 5)].abs() < 1e-14);
    }

    #[test]
    fn gradient_of_constant_shows_boundary_artifact() {
        let g = build_grid(6, 2.0).unwrap();
        let f = Field::from_fn(g, |_| 1.0);
        let dx = partial(&f, 0);
        assert_eq!(dx.values()[g.index(2, 2, 2)], 0.0);
        let h = g.spacing();
        assert!((dx.values()[g.index(0, 2, 2)] - 0.5 / h).abs() < 1e-14);
        assert!((dx.values()[g.index(5, 2, 2)] + 0.5 / h).abs() < 1e-14);
    }

    #[test]
    fn divergence_of_compact_field_telescopes() {
        let g = build_grid(16, 4.0).unwrap();
        let bump = |v: [f64; 3], c: f64| {
            let r2 = v.iter().map(|x| x * x).sum::<f64>();
            if r2 < 9.0 {
                c * (9.0 - r2).powi(3) * (v[0] + 0.3 * v[1] * v[2]).sin()
            } else {
                0.0
            }
        };
        let comps = [
            Field::from_fn(g, |v| bump(v, 1.0)),
            Field::from_fn(g, |v| bump(v, 0.7) * v[2]),
            Field::from_fn(g, |v| bump(v, -1.3) * v[0] * v[0]),
        ];
        let div = divergence(&comps).unwrap();
        let total = integrate(&div, None);
        let scale: f64 = comps
            .iter()
            .map(|c| g.cell_volume() * c.values().iter().map(|x| x.abs()).sum::<f64>())
            .sum();
        assert!(total.abs() <= 1e-12 * scale, "{total} vs {scale}");
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499500.0);
        assert_eq!(pairwise_sum_by(1000, &|i| xs[i]), 499500.0);
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = Field::zeros(build_grid(4, 1.0).unwrap());
        let b = Field::zeros(build_grid(4, 2.0).unwrap());
        assert!(matches!(a.add_scaled(1.0, &b), Err(LandauError::GridMismatch(_))));
    }
}
