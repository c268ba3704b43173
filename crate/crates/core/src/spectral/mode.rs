use core::f64::consts::TAU;
use core::fmt;

/// A wave vector `(k1, k2)` in the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub k1: i32,
    pub k2: i32,
}

impl ModeIndex {
    pub const fn new(k1: i32, k2: i32) -> Self {
        ModeIndex { k1, k2 }
    }

    pub fn is_zero(&self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }

    /// Membership in `{k2 > 0} u {k2 = 0, k1 > 0}`.
    pub fn is_positive_half(&self) -> bool {
        self.k2 > 0 || (self.k2 == 0 && self.k1 > 0)
    }

    /// The representative of `{k, -k}` in the positive half-lattice.
    pub fn canonical(&self) -> Self {
        if self.is_positive_half() {
            *self
        } else {
            -*self
        }
    }

    pub fn norm_sq(&self) -> i64 {
        let (a, b) = (self.k1 as i64, self.k2 as i64);
        a * a + b * b
    }

    /// Sup norm, the quantity bounded by a field's `kmax`.
    pub fn sup_norm(&self) -> u32 {
        self.k1.unsigned_abs().max(self.k2.unsigned_abs())
    }

    /// `|2 pi k|`.
    pub fn wavenumber(&self) -> f64 {
        TAU * libm::sqrt(self.norm_sq() as f64)
    }

    /// `|2 pi k|^p`; zero at the origin.
    pub fn wavenumber_pow(&self, p: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        libm::pow(self.wavenumber(), p)
    }
}

impl core::ops::Neg for ModeIndex {
    type Output = ModeIndex;
    fn neg(self) -> ModeIndex {
        ModeIndex { k1: -self.k1, k2: -self.k2 }
    }
}

impl core::ops::Add for ModeIndex {
    type Output = ModeIndex;
    fn add(self, o: ModeIndex) -> ModeIndex {
        ModeIndex { k1: self.k1 + o.k1, k2: self.k2 + o.k2 }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k1, self.k2)
    }
}
