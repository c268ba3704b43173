use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use num_complex::Complex64;

use super::field::SpectralField;

/// Samples of a real field on the uniform `n x n` grid, row `x1`, column `x2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub n: usize,
    pub data: Vec<f64>,
}

impl PhysicalField {
    pub fn zeros(n: usize) -> Self {
        PhysicalField { n, data: vec![0.0; n * n] }
    }

    pub fn mul_assign(&mut self, other: &PhysicalField) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a *= b;
        }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// Band-limited separable Fourier transform on an `n x n` grid.
///
/// Only the modes that a field actually carries are summed, which is cheaper
/// than a full FFT for the small boxes used here and works for any `n`.
/// A product of fields with boxes `ka`, `kb` projected to `kout` is exact
/// when `n > ka + kb + kout`.
#[derive(Debug, Clone)]
pub struct Grid {
    n: usize,
    twiddle: Vec<Complex64>,
}

impl Grid {
    pub fn new(n: usize) -> Self {
        let twiddle = (0..n)
            .map(|j| {
                let (s, c) = libm::sincos(TAU * j as f64 / n as f64);
                Complex64::new(c, s)
            })
            .collect();
        Grid { n, twiddle }
    }

    /// Grid for products among fields with boxes up to `kmax`:
    /// `n = grid_factor * (2 kmax + 1)`.
    pub fn for_kmax(kmax: usize, grid_factor: usize) -> Self {
        Grid::new(grid_factor.max(2) * (2 * kmax + 1))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// True if a product of boxes `ka`, `kb` projected onto `kout` is alias-free.
    pub fn dealiases(&self, ka: usize, kb: usize, kout: usize) -> bool {
        self.n > ka + kb + kout
    }

    #[inline]
    fn w(&self, e: i64) -> Complex64 {
        self.twiddle[e.rem_euclid(self.n as i64) as usize]
    }

    pub fn to_physical(&self, f: &SpectralField) -> PhysicalField {
        let n = self.n;
        let k = f.kmax() as i64;
        let width = (2 * k + 1) as usize;
        assert!(n > 2 * k as usize, "grid of size {n} cannot resolve kmax {k}");
        // g[k1][x2] = sum over the stored k2 of c(k1, k2) w^(k2 x2)
        let mut g = vec![Complex64::new(0.0, 0.0); width * n];
        for (i, c) in f.coeffs().iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let mode = f.mode_at(i);
            let row = &mut g[(mode.k1 as i64 + k) as usize * n..][..n];
            let k2 = mode.k2 as i64;
            for (x2, slot) in row.iter_mut().enumerate() {
                *slot += c * self.w(k2 * x2 as i64);
            }
        }
        let mut out = PhysicalField::zeros(n);
        for x1 in 0..n {
            let dst = &mut out.data[x1 * n..][..n];
            for k1 in -k..=k {
                let row = &g[(k1 + k) as usize * n..][..n];
                let t = self.w(k1 * x1 as i64);
                for (d, s) in dst.iter_mut().zip(row) {
                    *d += 2.0 * (s.re * t.re - s.im * t.im);
                }
            }
        }
        out
    }

    /// Projects grid samples onto the half-lattice box `kmax`, dropping the mean.
    pub fn to_spectral(&self, p: &PhysicalField, kmax: usize) -> SpectralField {
        let n = self.n;
        assert_eq!(p.n, n);
        let kw = kmax + 1;
        // h[x1][k2] = sum_x2 f(x1, x2) w^(-k2 x2)
        let mut h = vec![Complex64::new(0.0, 0.0); n * kw];
        for x1 in 0..n {
            let src = &p.data[x1 * n..][..n];
            let dst = &mut h[x1 * kw..][..kw];
            for (k2, d) in dst.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (x2, v) in src.iter().enumerate() {
                    acc += self.w(-((k2 * x2) as i64)) * v;
                }
                *d = acc;
            }
        }
        let scale = 1.0 / (n * n) as f64;
        let mut out = SpectralField::zeros(kmax);
        for i in 0..out.len() {
            let mode = out.mode_at(i);
            let k1 = mode.k1 as i64;
            let k2 = mode.k2 as usize;
            let mut acc = Complex64::new(0.0, 0.0);
            for x1 in 0..n {
                acc += h[x1 * kw + k2] * self.w(-k1 * x1 as i64);
            }
            out.coeffs_mut()[i] = acc * scale;
        }
        out
    }
}

/// Product `P_kout(a b)` computed on a grid large enough to be alias-free.
pub fn dealiased_product(a: &SpectralField, b: &SpectralField, kout: usize) -> SpectralField {
    let big = a.kmax().max(b.kmax()).max(kout);
    let grid = Grid::for_kmax(big, 2);
    let mut pa = grid.to_physical(a);
    pa.mul_assign(&grid.to_physical(b));
    grid.to_spectral(&pa, kout)
}
