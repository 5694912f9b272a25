//! Closed-form eigenvalues of symmetric 3×3 matrices.

use std::f64::consts::PI;

/// Eigenvalues of a symmetric 3×3 matrix in ascending order (trigonometric
/// solution of the characteristic cubic).
pub fn sym3_eigenvalues(a: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = a;
    for (i, row) in b.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = (*x - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (0.5 * det).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let mid = 3.0 * q - hi - lo;
    [lo, mid, hi]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_rank_one() {
        assert_eq!(sym3_eigenvalues([[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]), [1.0, 2.0, 3.0]);
        // v v^T with |v|^2 = 14
        let v = [1.0, 2.0, 3.0];
        let m = std::array::from_fn(|i| std::array::from_fn(|j| v[i] * v[j]));
        let e = sym3_eigenvalues(m);
        assert!(e[0].abs() < 1e-12 && e[1].abs() < 1e-12 && (e[2] - 14.0).abs() < 1e-12);
    }

    #[test]
    fn projector_form() {
        // l1 P + l2 (I - P) along a unit direction
        let u = [0.6, 0.0, 0.8];
        let (l1, l2) = (0.3, 5.0);
        let m = std::array::from_fn(|i| {
            std::array::from_fn(|j| l1 * u[i] * u[j] + l2 * (if i == j { 1.0 } else { 0.0 } - u[i] * u[j]))
        });
        let e = sym3_eigenvalues(m);
        assert!((e[0] - l1).abs() < 1e-12 && (e[1] - l2).abs() < 1e-12 && (e[2] - l2).abs() < 1e-12);
    }
}
