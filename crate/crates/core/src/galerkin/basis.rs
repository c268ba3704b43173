use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2, TAU};
use num_complex::Complex64;

use crate::spectral::{ModeIndex, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// `sqrt 2 sin(2 pi p.x)`, labelled by `p` in the positive half-lattice.
    Sin,
    /// `sqrt 2 cos(2 pi p.x)`, labelled by `-p`.
    Cos,
}

/// The real orthonormal basis of `P_m L2`.
///
/// Positive-half waves `p` with `|p| <= m` are taken in lexicographic order;
/// coordinate `2j` is the sine of wave `j` and `2j + 1` its cosine. For a
/// field with coefficient `c_p`, `X_sin = -sqrt 2 Im c_p` and
/// `X_cos = sqrt 2 Re c_p`, so the Euclidean norm of `X` is the L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct RealBasis {
    m: usize,
    waves: Vec<ModeIndex>,
}

impl RealBasis {
    pub fn new(m: usize) -> Self {
        let probe = SpectralField::zeros(m);
        let r2 = (m * m) as i64;
        let waves = (0..probe.len()).map(|i| probe.mode_at(i)).filter(|k| k.norm_sq() <= r2).collect();
        RealBasis { m, waves }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        2 * self.waves.len()
    }

    pub fn waves(&self) -> &[ModeIndex] {
        &self.waves
    }

    pub fn wave(&self, i: usize) -> ModeIndex {
        self.waves[i / 2]
    }

    pub fn component(&self, i: usize) -> Component {
        if i.is_multiple_of(2) {
            Component::Sin
        } else {
            Component::Cos
        }
    }

    /// Lattice label: `p` for a sine, `-p` for a cosine.
    pub fn label(&self, i: usize) -> ModeIndex {
        match self.component(i) {
            Component::Sin => self.wave(i),
            Component::Cos => -self.wave(i),
        }
    }

    pub fn index_of_label(&self, k: ModeIndex) -> Option<usize> {
        let p = k.canonical();
        let j = self.waves.binary_search(&p).ok()?;
        Some(if k.is_positive_half() { 2 * j } else { 2 * j + 1 })
    }

    /// `|2 pi k|^s` per coordinate.
    pub fn multiplier(&self, s: f64) -> Vec<f64> {
        (0..self.dim()).map(|i| self.wave(i).wavenumber_pow(s)).collect()
    }

    /// Coordinates of `P_m f`.
    pub fn to_real(&self, f: &SpectralField) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        for &p in &self.waves {
            let c = f.coeff(p);
            x.push(-SQRT_2 * c.im);
            x.push(SQRT_2 * c.re);
        }
        x
    }

    /// Field with `kmax = m` from coordinates.
    pub fn from_real(&self, x: &[f64]) -> SpectralField {
        assert_eq!(x.len(), self.dim());
        let mut f = SpectralField::zeros(self.m);
        for (j, &p) in self.waves.iter().enumerate() {
            let i = f.index_of(p).expect("wave inside box");
            f.coeffs_mut()[i] = Complex64::new(x[2 * j + 1], -x[2 * j]) * FRAC_1_SQRT_2;
        }
        f
    }
}

/// Coefficient of the basis function labelled by `k` at lattice point `sign * p`.
fn basis_coeff(k: ModeIndex, sign: i32) -> Complex64 {
    if k.is_positive_half() {
        Complex64::new(0.0, -(sign as f64) * FRAC_1_SQRT_2)
    } else {
        Complex64::new(FRAC_1_SQRT_2, 0.0)
    }
}

/// `B_{k,l,n} = <u_n . grad e_l, e_k>` with `u_n = R^perp e_n` for real-basis
/// labels `k, l, n` (see [`RealBasis::label`]).
///
/// Expanding each basis function into its two exponentials leaves at most
/// eight wave-vector triads `q + s + r = 0`, each contributing
/// `e_n(q) e_l(s) e_k(r) 2 pi (q2 s1 - q1 s2) / |q|`.
pub fn b_coefficient(k: ModeIndex, l: ModeIndex, n: ModeIndex) -> f64 {
    if k.is_zero() || l.is_zero() || n.is_zero() {
        return 0.0;
    }
    let (pk, pl, pn) = (k.canonical(), l.canonical(), n.canonical());
    let mut acc = Complex64::new(0.0, 0.0);
    for sn in [1, -1] {
        let q = ModeIndex::new(sn * pn.k1, sn * pn.k2);
        for sl in [1, -1] {
            let s = ModeIndex::new(sl * pl.k1, sl * pl.k2);
            for sk in [1, -1] {
                let r = ModeIndex::new(sk * pk.k1, sk * pk.k2);
                if !(q + s + r).is_zero() {
                    continue;
                }
                let sym =
                    TAU * (q.k2 as f64 * s.k1 as f64 - q.k1 as f64 * s.k2 as f64) / libm::sqrt(q.norm_sq() as f64);
                acc += basis_coeff(n, sn) * basis_coeff(l, sl) * basis_coeff(k, sk) * sym;
            }
        }
    }
    acc.re
}

/// Sparse structure tensor of `P_m N` in real coordinates:
/// `N_k(x) = sum_{l,n} B_{k,l,n} x_l x_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BTensor {
    dim: usize,
    entries: Vec<(u32, u32, u32, f64)>,
}

impl BTensor {
    pub fn new(basis: &RealBasis) -> Self {
        let dim = basis.dim();
        let mut entries = Vec::new();
        let mut seen = Vec::new();
        for l in 0..dim {
            for n in 0..dim {
                let (pl, pn) = (basis.wave(l), basis.wave(n));
                seen.clear();
                for cand in [pl + pn, pl + -pn] {
                    if cand.is_zero() {
                        continue;
                    }
                    let Some(i) = basis.index_of_label(cand.canonical()) else { continue };
                    for k in [i, i + 1] {
                        if seen.contains(&k) {
                            continue;
                        }
                        seen.push(k);
                        let v = b_coefficient(basis.label(k), basis.label(l), basis.label(n));
                        if v.abs() > 1e-13 {
                            entries.push((k as u32, l as u32, n as u32, v));
                        }
                    }
                }
            }
        }
        entries.sort_by_key(|a| (a.0, a.1, a.2));
        BTensor { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u32, u32, u32, f64)] {
        &self.entries
    }

    /// `out_k = sum B_{k,l,n} x_l x_n`.
    pub fn contract(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(k, l, n, b) in &self.entries {
            out[k as usize] += b * x[l as usize] * x[n as usize];
        }
    }
}
