//! Pruned three-dimensional FFTs on the doubled lattice.
//!
//! Linear convolution of an `n^3` field with a kernel sampled on `(2n)^3`
//! difference vectors is computed as a circular convolution of size
//! `p = 2n`. The input occupies only the low octant and only the low octant
//! of the output is needed, so the forward and inverse passes skip lines
//! that are identically zero or discarded.
//!
//! Layout: index `(i * p + j) * p + k`, `k` fastest.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

const BATCH: usize = 16;

#[derive(Clone)]
pub struct PaddedFft3 {
    n: usize,
    p: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl std::fmt::Debug for PaddedFft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PaddedFft3").field("n", &self.n).field("p", &self.p).finish()
    }
}

/// Per-caller scratch for [`PaddedFft3`]; never shared between threads.
#[derive(Debug, Clone)]
pub struct FftScratch {
    lines: Vec<Complex64>,
    work: Vec<Complex64>,
}

#[derive(Clone, Copy)]
enum Dir {
    Forward,
    Inverse,
}

impl PaddedFft3 {
    pub fn new(n: usize) -> Self {
        let p = 2 * n;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(p);
        let inverse = planner.plan_fft_inverse(p);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        PaddedFft3 {
            n,
            p,
            forward,
            inverse,
            scratch_len,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn padded(&self) -> usize {
        self.p
    }

    pub fn padded_len(&self) -> usize {
        self.p * self.p * self.p
    }

    pub fn scratch(&self) -> FftScratch {
        FftScratch {
            lines: vec![Complex64::default(); BATCH * self.p],
            work: vec![Complex64::default(); self.scratch_len.max(1)],
        }
    }

    fn plan(&self, dir: Dir) -> &Arc<dyn Fft<f64>> {
        match dir {
            Dir::Forward => &self.forward,
            Dir::Inverse => &self.inverse,
        }
    }

    /// Lines along the last axis for `i < ni`, `j < nj`; keeps all `p` outputs.
    fn pass_k(&self, data: &mut [Complex64], ni: usize, nj: usize, dir: Dir, s: &mut FftScratch) {
        let p = self.p;
        let plan = self.plan(dir);
        for i in 0..ni {
            let base = i * p * p;
            plan.process_with_scratch(&mut data[base..base + nj * p], &mut s.work);
        }
    }

    /// Lines along the middle axis for `i < ni`, all `k`; writes back `j < keep`.
    fn pass_j(&self, data: &mut [Complex64], ni: usize, keep: usize, dir: Dir, s: &mut FftScratch) {
        let p = self.p;
        let plan = self.plan(dir);
        for i in 0..ni {
            let plane = i * p * p;
            let mut k0 = 0;
            while k0 < p {
                let b = BATCH.min(p - k0);
                for bb in 0..b {
                    for j in 0..p {
                        s.lines[bb * p + j] = data[plane + j * p + k0 + bb];
                    }
                }
                plan.process_with_scratch(&mut s.lines[..b * p], &mut s.work);
                for bb in 0..b {
                    for j in 0..keep {
                        data[plane + j * p + k0 + bb] = s.lines[bb * p + j];
                    }
                }
                k0 += b;
            }
        }
    }

    /// Lines along the first axis for `j < nj`, all `k`; writes back `i < keep`.
    fn pass_i(&self, data: &mut [Complex64], nj: usize, keep: usize, dir: Dir, s: &mut FftScratch) {
        let p = self.p;
        let plan = self.plan(dir);
        for j in 0..nj {
            let mut k0 = 0;
            while k0 < p {
                let b = BATCH.min(p - k0);
                for i in 0..p {
                    let row = (i * p + j) * p + k0;
                    for bb in 0..b {
                        s.lines[bb * p + i] = data[row + bb];
                    }
                }
                plan.process_with_scratch(&mut s.lines[..b * p], &mut s.work);
                for i in 0..keep {
                    let row = (i * p + j) * p + k0;
                    for bb in 0..b {
                        data[row + bb] = s.lines[bb * p + i];
                    }
                }
                k0 += b;
            }
        }
    }

    /// Unnormalised forward transform of a full `p^3` array.
    pub fn forward_full(&self, data: &mut [Complex64], s: &mut FftScratch) {
        assert_eq!(data.len(), self.padded_len());
        let p = self.p;
        self.pass_k(data, p, p, Dir::Forward, s);
        self.pass_j(data, p, p, Dir::Forward, s);
        self.pass_i(data, p, p, Dir::Forward, s);
    }

    /// Unnormalised inverse transform of a full `p^3` array.
    pub fn inverse_full(&self, data: &mut [Complex64], s: &mut FftScratch) {
        assert_eq!(data.len(), self.padded_len());
        let p = self.p;
        self.pass_i(data, p, p, Dir::Inverse, s);
        self.pass_j(data, p, p, Dir::Inverse, s);
        self.pass_k(data, p, p, Dir::Inverse, s);
    }

    /// Zero-pads a real `n^3` array into `out` (length `p^3`) and transforms it.
    pub fn forward_padded(&self, input: &[f64], out: &mut [Complex64], s: &mut FftScratch) {
        let (n, p) = (self.n, self.p);
        assert_eq!(input.len(), n * n * n);
        assert_eq!(out.len(), self.padded_len());
        out.fill(Complex64::default());
        for i in 0..n {
            for j in 0..n {
                let src = (i * n + j) * n;
                let dst = (i * p + j) * p;
                for k in 0..n {
                    out[dst + k] = Complex64::new(input[src + k], 0.0);
                }
            }
        }
        self.pass_k(out, n, n, Dir::Forward, s);
        self.pass_j(out, n, p, Dir::Forward, s);
        self.pass_i(out, p, p, Dir::Forward, s);
    }

    /// Transforms `re + i·im` for two real `n^3` arrays in one pass. The
    /// individual spectra follow from `X(k) = (Z(k) + conj Z(−k))/2` and
    /// `Y(k) = (Z(k) − conj Z(−k))/(2i)`.
    pub fn forward_padded_pair(&self, re: &[f64], im: &[f64], out: &mut [Complex64], s: &mut FftScratch) {
        let (n, p) = (self.n, self.p);
        assert_eq!(re.len(), n * n * n);
        assert_eq!(im.len(), n * n * n);
        assert_eq!(out.len(), self.padded_len());
        out.fill(Complex64::default());
        for i in 0..n {
            for j in 0..n {
                let src = (i * n + j) * n;
                let dst = (i * p + j) * p;
                for k in 0..n {
                    out[dst + k] = Complex64::new(re[src + k], im[src + k]);
                }
            }
        }
        self.pass_k(out, n, n, Dir::Forward, s);
        self.pass_j(out, n, p, Dir::Forward, s);
        self.pass_i(out, p, p, Dir::Forward, s);
    }

    /// Unnormalised inverse transform keeping only the low `n^3` octant.
    /// `data` is used as workspace and left in an unspecified state.
    pub fn inverse_restricted(&self, data: &mut [Complex64], out: &mut [Complex64], s: &mut FftScratch) {
        let (n, p) = (self.n, self.p);
        assert_eq!(data.len(), self.padded_len());
        assert_eq!(out.len(), n * n * n);
        self.pass_i(data, p, n, Dir::Inverse, s);
        self.pass_j(data, n, n, Dir::Inverse, s);
        self.pass_k(data, n, n, Dir::Inverse, s);
        for i in 0..n {
            for j in 0..n {
                let src = (i * p + j) * p;
                let dst = (i * n + j) * n;
                out[dst..dst + n].copy_from_slice(&data[src..src + n]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_linear_convolution(n: usize, kernel: impl Fn(isize, isize, isize) -> f64, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; n * n * n];
        for x in 0..n * n * n {
            let (xi, xj, xk) = ((x / (n * n)) as isize, ((x / n) % n) as isize, (x % n) as isize);
            let mut acc = 0.0;
            for y in 0..n * n * n {
                let (yi, yj, yk) = ((y / (n * n)) as isize, ((y / n) % n) as isize, (y % n) as isize);
                acc += kernel(xi - yi, xj - yj, xk - yk) * g[y];
            }
            out[x] = acc;
        }
        out
    }

    #[test]
    fn pruned_convolution_matches_direct_sum() {
        let n = 5;
        let fft = PaddedFft3::new(n);
        let p = fft.padded();
        let mut s = fft.scratch();
        let kernel = |a: isize, b: isize, c: isize| ((a * 3 + b * 5 - c) as f64 * 0.37).sin() + 0.1 * (a * a) as f64;
        let wrap = |m: usize| if m < n { m as isize } else { m as isize - p as isize };
        let mut ks = vec![Complex64::default(); p * p * p];
        for i in 0..p {
            for j in 0..p {
                for k in 0..p {
                    ks[(i * p + j) * p + k] = Complex64::new(kernel(wrap(i), wrap(j), wrap(k)), 0.0);
                }
            }
        }
        fft.forward_full(&mut ks, &mut s);
        let g: Vec<f64> = (0..n * n * n).map(|i| ((i * 7 % 11) as f64) - 4.0).collect();
        let mut gs = vec![Complex64::default(); p * p * p];
        fft.forward_padded(&g, &mut gs, &mut s);
        for (a, b) in gs.iter_mut().zip(&ks) {
            *a *= b;
        }
        let mut out = vec![Complex64::default(); n * n * n];
        fft.inverse_restricted(&mut gs, &mut out, &mut s);
        let scale = 1.0 / (p * p * p) as f64;
        let direct = direct_linear_convolution(n, kernel, &g);
        for (o, d) in out.iter().zip(&direct) {
            assert!((o.re * scale - d).abs() < 1e-10 * (1.0 + d.abs()), "{} vs {}", o.re * scale, d);
            assert!(o.im.abs() * scale < 1e-10);
        }
    }

    #[test]
    fn full_round_trip() {
        let fft = PaddedFft3::new(3);
        let mut s = fft.scratch();
        let orig: Vec<Complex64> = (0..fft.padded_len())
            .map(|i| Complex64::new((i as f64).sqrt(), (i % 5) as f64))
            .collect();
        let mut data = orig.clone();
        fft.forward_full(&mut data, &mut s);
        fft.inverse_full(&mut data, &mut s);
        let scale = 1.0 / fft.padded_len() as f64;
        for (a, b) in data.iter().zip(&orig) {
            assert!((a * scale - b).norm() < 1e-12);
        }
    }
}
