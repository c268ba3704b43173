use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::{dealiased_product, Grid};
use super::lp::{lp_split, LpProfile};
use super::mode::ModeIndex;
use crate::error::{Error, Result};

/// Applies a real Fourier multiplier.
pub fn apply_multiplier(f: &SpectralField, symbol: impl Fn(ModeIndex) -> f64) -> SpectralField {
    let mut out = f.clone();
    for i in 0..out.len() {
        let m = symbol(out.mode_at(i));
        out.coeffs_mut()[i] *= m;
    }
    out
}

/// `Lambda^r f` with symbol `|2 pi k|^r`.
pub fn apply_lambda(f: &SpectralField, r: f64) -> Result<SpectralField> {
    if !r.is_finite() {
        return Err(Error::param("r", "exponent must be finite"));
    }
    Ok(lambda(f, r))
}

pub(crate) fn lambda(f: &SpectralField, r: f64) -> SpectralField {
    apply_multiplier(f, |k| k.wavenumber_pow(r))
}

fn apply_imaginary(f: &SpectralField, symbol: impl Fn(ModeIndex) -> f64) -> SpectralField {
    let mut out = f.clone();
    for i in 0..out.len() {
        let m = symbol(out.mode_at(i));
        let c = out.coeffs()[i];
        out.coeffs_mut()[i] = Complex64::new(-c.im * m, c.re * m);
    }
    out
}

/// Riesz transform `R_j`, symbol `i k_j / |k|`.
pub fn riesz(f: &SpectralField, j: usize) -> SpectralField {
    apply_imaginary(f, |k| {
        let kj = if j == 1 { k.k1 } else { k.k2 } as f64;
        kj / libm::sqrt(k.norm_sq() as f64)
    })
}

/// Partial derivative `d/dx_j`, symbol `2 pi i k_j`.
pub fn derivative(f: &SpectralField, j: usize) -> SpectralField {
    apply_imaginary(f, |k| core::f64::consts::TAU * if j == 1 { k.k1 } else { k.k2 } as f64)
}

/// Velocity `u = R^perp theta = (-R_2 theta, R_1 theta)`.
pub fn riesz_velocity(theta: &SpectralField) -> (SpectralField, SpectralField) {
    (riesz(theta, 2).scaled(-1.0), riesz(theta, 1))
}

/// `P_K (u . grad theta)` with `u = R^perp theta`, projected onto the box of
/// `theta`. The physical grid has `grid_factor * (2 kmax + 1)` points per axis,
/// which is alias-free for `grid_factor >= 2`.
pub fn advection(theta: &SpectralField, grid_factor: usize) -> Result<SpectralField> {
    if grid_factor < 2 {
        return Err(Error::param("grid_factor", "must be at least 2 for an alias-free product"));
    }
    Ok(advection_on(theta, &Grid::for_kmax(theta.kmax(), grid_factor)))
}

pub(crate) fn advection_on(theta: &SpectralField, grid: &Grid) -> SpectralField {
    let k = theta.kmax();
    let (u1, u2) = riesz_velocity(theta);
    let mut a = grid.to_physical(&u1);
    a.mul_assign(&grid.to_physical(&derivative(theta, 1)));
    let mut b = grid.to_physical(&u2);
    b.mul_assign(&grid.to_physical(&derivative(theta, 2)));
    for (x, y) in a.data.iter_mut().zip(&b.data) {
        *x += y;
    }
    grid.to_spectral(&a, k)
}

pub fn sobolev_inner(f: &SpectralField, g: &SpectralField, s: f64) -> Result<f64> {
    f.check_same(g)?;
    let mut acc = 0.0;
    for (i, (a, b)) in f.coeffs().iter().zip(g.coeffs()).enumerate() {
        let w = f.mode_at(i).wavenumber_pow(2.0 * s);
        acc += w * (a.re * b.re + a.im * b.im);
    }
    Ok(2.0 * acc)
}

pub fn sobolev_norm_sq(f: &SpectralField, s: f64) -> f64 {
    let mut acc = 0.0;
    for (i, c) in f.coeffs().iter().enumerate() {
        acc += f.mode_at(i).wavenumber_pow(2.0 * s) * c.norm_sqr();
    }
    2.0 * acc
}

/// Homogeneous Sobolev norm `||Lambda^s f||_{L2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    libm::sqrt(sobolev_norm_sq(f, s))
}

/// `[Lambda, phi] g = Lambda (phi g) - phi Lambda g`, truncated to the box of
/// `g`. The zero mode of `phi Lambda g` is discarded.
pub fn commutator(phi: &SpectralField, g: &SpectralField) -> SpectralField {
    let kout = g.kmax();
    let a = lambda(&dealiased_product(phi, g, kout), 1.0);
    let b = dealiased_product(phi, &lambda(g, 1.0), kout);
    a.sub(&b).expect("same box")
}

/// `<u . grad theta, phi>` from a single dealiased product.
pub fn nonlinear_pairing(theta: &SpectralField, phi: &SpectralField) -> f64 {
    let (u1, u2) = riesz_velocity(theta);
    let kp = phi.kmax();
    let f1 = dealiased_product(theta, &u1, kp);
    let f2 = dealiased_product(theta, &u2, kp);
    // <u.grad theta, phi> = -<theta u, grad phi> since div u = 0
    -(f1.inner_unchecked(&derivative(phi, 1)) + f2.inner_unchecked(&derivative(phi, 2)))
}

/// `<u . grad theta, phi>` evaluated through the commutator split at level `j`:
/// the low-frequency part of the flux is paired directly and the
/// high-high interaction is rewritten with `[Lambda, d_i phi]`.
pub fn nonlinear_pairing_commutator(theta: &SpectralField, phi: &SpectralField, j: i32) -> Result<f64> {
    let k = theta.kmax();
    LpProfile::for_kmax(k).check(j)?;
    let kp = phi.kmax();
    let split = lp_split(theta, j);
    let (d1, d2) = (derivative(phi, 1), derivative(phi, 2));

    let flux = |a: &SpectralField, b: &SpectralField| {
        let (v1, v2) = riesz_velocity(b);
        dealiased_product(a, &v1, kp).inner_unchecked(&d1) + dealiased_product(a, &v2, kp).inner_unchecked(&d2)
    };
    let low = flux(theta, &split.low);
    let mixed = flux(&split.low, &split.high);

    let h = &split.high;
    let h_inv = lambda(h, -1.0);
    let c1 = commutator(&d1, &h_inv);
    let c2 = commutator(&d2, &h_inv);
    let high = -0.5 * riesz(h, 2).inner_unchecked(&c1) + 0.5 * riesz(h, 1).inner_unchecked(&c2);

    Ok(-low - mixed + high)
}
