//! Independent oracles: real trigonometric polynomials evaluated pointwise and
//! integrated by grid quadrature, sharing nothing with the library transforms.

#![allow(dead_code)]

use std::f64::consts::TAU;

use sqg_core::spectral::{ModeIndex, SpectralField};
use sqg_core::Complex64;

/// `sum a cos(2 pi k.x) + b sin(2 pi k.x)` over distinct positive-half modes.
#[derive(Debug, Clone, Default)]
pub struct Trig {
    pub terms: Vec<(i32, i32, f64, f64)>,
}

impl Trig {
    pub fn from_field(f: &SpectralField) -> Self {
        let terms = f.modes().map(|(k, c)| (k.k1, k.k2, 2.0 * c.re, -2.0 * c.im)).collect();
        Trig { terms }
    }

    fn map(&self, f: impl Fn(i32, i32, f64, f64) -> (f64, f64)) -> Trig {
        Trig {
            terms: self
                .terms
                .iter()
                .map(|&(k1, k2, a, b)| {
                    let (a2, b2) = f(k1, k2, a, b);
                    (k1, k2, a2, b2)
                })
                .collect(),
        }
    }

    /// `d/dx_j`: `cos -> -2 pi k_j sin`, `sin -> 2 pi k_j cos`.
    pub fn d(&self, j: usize) -> Trig {
        self.map(|k1, k2, a, b| {
            let kj = TAU * if j == 1 { k1 } else { k2 } as f64;
            (kj * b, -kj * a)
        })
    }

    /// Riesz transform with symbol `i k_j / |k|`: `cos -> -(k_j/|k|) sin`, `sin -> (k_j/|k|) cos`.
    pub fn riesz(&self, j: usize) -> Trig {
        self.map(|k1, k2, a, b| {
            let kj = if j == 1 { k1 } else { k2 } as f64;
            let r = kj / ((k1 * k1 + k2 * k2) as f64).sqrt();
            (r * b, -r * a)
        })
    }

    /// `|2 pi k|^r`.
    pub fn lambda(&self, r: f64) -> Trig {
        self.map(|k1, k2, a, b| {
            let w = (TAU * ((k1 * k1 + k2 * k2) as f64).sqrt()).powf(r);
            (w * a, w * b)
        })
    }

    pub fn scaled(&self, s: f64) -> Trig {
        self.map(|_, _, a, b| (s * a, s * b))
    }

    /// Values on the `n x n` grid `x = (i/n, j/n)`, row-major in `i`.
    pub fn eval(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for &(k1, k2, a, b) in &self.terms {
            let e1: Vec<Complex64> =
                (0..n).map(|i| Complex64::from_polar(1.0, TAU * (k1 as f64) * i as f64 / n as f64)).collect();
            let e2: Vec<Complex64> =
                (0..n).map(|j| Complex64::from_polar(1.0, TAU * (k2 as f64) * j as f64 / n as f64)).collect();
            let c = Complex64::new(a, -b);
            for i in 0..n {
                let ci = c * e1[i];
                let row = &mut out[i * n..(i + 1) * n];
                for j in 0..n {
                    let z = ci * e2[j];
                    row[j] += z.re;
                }
            }
        }
        out
    }
}

/// Grid average, exact for trigonometric polynomials of degree below `n`.
pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn product(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Fourier coefficient `c_k` of grid values by quadrature.
pub fn coefficient(v: &[f64], n: usize, k: ModeIndex) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let e1: Vec<Complex64> =
        (0..n).map(|i| Complex64::from_polar(1.0, -TAU * (k.k1 as f64) * i as f64 / n as f64)).collect();
    let e2: Vec<Complex64> =
        (0..n).map(|j| Complex64::from_polar(1.0, -TAU * (k.k2 as f64) * j as f64 / n as f64)).collect();
    for i in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            row += v[i * n + j] * e2[j];
        }
        acc += row * e1[i];
    }
    acc / (n * n) as f64
}

/// `u . grad theta` on the grid with `u = (-R_2 theta, R_1 theta)`.
pub fn advection_on_grid(theta: &Trig, n: usize) -> Vec<f64> {
    let u1 = theta.riesz(2).scaled(-1.0).eval(n);
    let u2 = theta.riesz(1).eval(n);
    let d1 = theta.d(1).eval(n);
    let d2 = theta.d(2).eval(n);
    add(&product(&u1, &d1), &product(&u2, &d2))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
