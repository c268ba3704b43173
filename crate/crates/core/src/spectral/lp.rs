//! Littlewood-Paley blocks with smooth Fourier cut-offs.
//!
//! The low-pass symbol at level `j` is `phi(|2 pi k| / 2^j)` where `phi` is a
//! radial step equal to 1 on `[0, 1/2]` and 0 on `[1, inf)`. Blocks are
//! differences of consecutive low-pass symbols, so they sum to the identity
//! exactly.

use super::field::SpectralField;
use super::ops::apply_multiplier;
use crate::error::{Error, Result};
use alloc::format;

/// Radial cut-off: 1 on `[0, 1/2]`, 0 on `[1, inf)`, and
/// `exp(1 - 1/(1 - t^2))` with `t = 2r - 1` in between.
pub fn bump(r: f64) -> f64 {
    if r <= 0.5 {
        1.0
    } else if r >= 1.0 {
        0.0
    } else {
        let t = 2.0 * r - 1.0;
        libm::exp(1.0 - 1.0 / (1.0 - t * t))
    }
}

/// Symbol of the block at level `j`, evaluated at `xi = |2 pi k|`.
pub fn block_symbol(xi: f64, j: i32) -> f64 {
    let s = libm::ldexp(1.0, -j);
    bump(xi * s * 0.5) - bump(xi * s)
}

pub fn low_symbol(xi: f64, j: i32) -> f64 {
    bump(xi * libm::ldexp(1.0, -j))
}

/// Range of dyadic levels that see a given box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpProfile {
    /// Every block below this level vanishes on nonzero lattice modes.
    pub jmin: i32,
    /// Blocks `jmin..=jmax` sum to the identity on the box.
    pub jmax: i32,
}

impl LpProfile {
    pub fn for_kmax(kmax: usize) -> Self {
        // |2 pi k| >= 2 pi > 4 for every nonzero mode.
        let jmin = 2;
        let top = core::f64::consts::TAU * core::f64::consts::SQRT_2 * kmax.max(1) as f64;
        let mut jmax = jmin;
        while libm::ldexp(1.0, jmax) < top {
            jmax += 1;
        }
        LpProfile { jmin, jmax }
    }

    /// Levels `j` for which the split into `S_j` and `H_j` is meaningful.
    pub fn admissible(&self) -> core::ops::RangeInclusive<i32> {
        self.jmin..=self.jmax + 1
    }

    pub fn midpoint(&self) -> i32 {
        (self.jmin + self.jmax + 1) / 2
    }

    pub fn check(&self, j: i32) -> Result<()> {
        if self.admissible().contains(&j) {
            Ok(())
        } else {
            Err(Error::param("j", format!("level {j} outside the admissible range {}..={}", self.jmin, self.jmax + 1)))
        }
    }
}

/// Low- and high-frequency parts with `low + high = f`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSplit {
    pub low: SpectralField,
    pub high: SpectralField,
}

pub fn lp_block(f: &SpectralField, j: i32) -> SpectralField {
    apply_multiplier(f, |k| block_symbol(k.wavenumber(), j))
}

pub fn lp_low(f: &SpectralField, j: i32) -> SpectralField {
    apply_multiplier(f, |k| low_symbol(k.wavenumber(), j))
}

/// `H_j f = f - S_j f`.
pub fn lp_high(f: &SpectralField, j: i32) -> SpectralField {
    let low = lp_low(f, j);
    f.sub(&low).expect("same box")
}

pub fn lp_split(f: &SpectralField, j: i32) -> LpSplit {
    let low = lp_low(f, j);
    let high = f.sub(&low).expect("same box");
    LpSplit { low, high }
}
