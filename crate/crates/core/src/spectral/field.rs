use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::mode::ModeIndex;
use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// A real, mean-zero field stored as Fourier coefficients on the positive
/// half of the box `|k|_inf <= kmax`. Coefficients at `-k` are implied by
/// conjugate symmetry.
///
/// Modes are laid out lexicographically in `(k1, k2)`: for `k1 <= 0` the
/// column holds `k2 = 1..=kmax`, for `k1 > 0` it holds `k2 = 0..=kmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    kmax: usize,
    coeffs: Vec<Complex64>,
}

/// Number of stored modes for a given `kmax`.
pub const fn mode_count(kmax: usize) -> usize {
    2 * kmax * (kmax + 1)
}

impl SpectralField {
    pub fn zeros(kmax: usize) -> Self {
        SpectralField { kmax, coeffs: vec![Complex64::new(0.0, 0.0); mode_count(kmax)] }
    }

    pub fn from_coeffs(kmax: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != mode_count(kmax) {
            return Err(Error::shape(format!(
                "kmax {kmax} needs {} coefficients, got {}",
                mode_count(kmax),
                coeffs.len()
            )));
        }
        Ok(SpectralField { kmax, coeffs })
    }

    /// Builds a field from `(mode, coefficient)` pairs. Modes in the negative
    /// half are conjugated onto their partner; repeated modes accumulate.
    pub fn from_modes(kmax: usize, modes: &[(ModeIndex, Complex64)]) -> Result<Self> {
        let mut f = SpectralField::zeros(kmax);
        for &(k, c) in modes {
            if k.is_zero() {
                return Err(Error::usage("the zero mode is not representable"));
            }
            let (kc, cc) = if k.is_positive_half() { (k, c) } else { (-k, c.conj()) };
            let i =
                f.index_of(kc).ok_or_else(|| Error::shape(format!("mode {k} lies outside the box of kmax {kmax}")))?;
            f.coeffs[i] += cc;
        }
        Ok(f)
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Storage slot of a positive-half mode, if it lies in the box.
    pub fn index_of(&self, k: ModeIndex) -> Option<usize> {
        let km = self.kmax as i32;
        if !k.is_positive_half() || k.sup_norm() > self.kmax as u32 {
            return None;
        }
        let i = if k.k1 <= 0 { (k.k1 + km) * km + (k.k2 - 1) } else { (km + 1) * km + (k.k1 - 1) * (km + 1) + k.k2 };
        Some(i as usize)
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn mode_at(&self, i: usize) -> ModeIndex {
        let km = self.kmax;
        if i < (km + 1) * km {
            ModeIndex::new((i / km) as i32 - km as i32, (i % km) as i32 + 1)
        } else {
            let j = i - (km + 1) * km;
            ModeIndex::new((j / (km + 1)) as i32 + 1, (j % (km + 1)) as i32)
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.mode_at(i), *c))
    }

    /// Coefficient at any lattice point; zero outside the box and at the origin.
    pub fn coeff(&self, k: ModeIndex) -> Complex64 {
        if k.is_positive_half() {
            self.index_of(k).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
        } else if k.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            self.index_of(-k).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i].conj())
        }
    }

    pub(crate) fn check_same(&self, other: &SpectralField) -> Result<()> {
        if self.kmax != other.kmax {
            return Err(Error::shape(format!("kmax {} vs {}", self.kmax, other.kmax)));
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        self.check_same(other)?;
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        SpectralField { kmax: self.kmax, coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    /// L2 inner product on the torus: `2 Re sum_+ a_k conj(b_k)`.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &SpectralField) -> f64 {
        let mut s = 0.0;
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            s += a.re * b.re + a.im * b.im;
        }
        2.0 * s
    }

    pub fn l2_norm_sq(&self) -> f64 {
        2.0 * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.l2_norm_sq())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Zero-pads or truncates to a new box.
    pub fn resized(&self, kmax: usize) -> SpectralField {
        if kmax == self.kmax {
            return self.clone();
        }
        let mut out = SpectralField::zeros(kmax);
        for i in 0..out.coeffs.len() {
            out.coeffs[i] = self.coeff(out.mode_at(i));
        }
        out
    }

    /// Galerkin projection onto `0 < |k| <= m` (Euclidean disk), stored with `kmax = m`.
    pub fn project(&self, m: usize) -> SpectralField {
        let mut out = self.resized(m);
        let r2 = (m * m) as i64;
        for i in 0..out.coeffs.len() {
            if out.mode_at(i).norm_sq() > r2 {
                out.coeffs[i] = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Random field with independent complex Gaussian coefficients of
    /// standard deviation `amplitude * (1 + |k|^2)^(-decay / 2)`.
    pub fn random(kmax: usize, amplitude: f64, decay: f64, rng: &CounterRng, stream: u64) -> Self {
        let mut f = SpectralField::zeros(kmax);
        let r = rng.stream(stream);
        for i in 0..f.coeffs.len() {
            let k = f.mode_at(i);
            let sd = amplitude * libm::pow(1.0 + k.norm_sq() as f64, -0.5 * decay);
            let (a, b) = r.normal_pair(0, i as u64);
            f.coeffs[i] = Complex64::new(a, b) * (sd * core::f64::consts::FRAC_1_SQRT_2);
        }
        f
    }
}
