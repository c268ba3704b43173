//! Counter-based Gaussian stream.
//!
//! Every draw is a pure function of `(seed, trajectory, step, slot)`, so an
//! ensemble gives identical numbers no matter how trajectories are spread
//! across threads or in which order they run.

use core::f64::consts::TAU;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Step index reserved for initial-condition draws.
pub const INITIAL_STEP: u64 = u64::MAX;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: mix(seed.wrapping_add(GOLDEN)) }
    }

    /// Independent sub-stream, e.g. one per trajectory.
    pub fn stream(&self, id: u64) -> Self {
        CounterRng { key: mix(self.key ^ mix(id.wrapping_mul(GOLDEN).wrapping_add(0xD1B5_4A32_D192_ED03))) }
    }

    #[inline]
    pub fn bits(&self, step: u64, slot: u64) -> u64 {
        let a = mix(self.key ^ step.wrapping_mul(GOLDEN));
        mix(a ^ slot.wrapping_mul(0xA24B_AED4_963E_E407).wrapping_add(GOLDEN))
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&self, step: u64, slot: u64) -> f64 {
        ((self.bits(step, slot) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normals (Box-Muller).
    #[inline]
    pub fn normal_pair(&self, step: u64, pair: u64) -> (f64, f64) {
        let u1 = self.uniform(step, 2 * pair);
        let u2 = self.uniform(step, 2 * pair + 1);
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let (s, c) = libm::sincos(TAU * u2);
        (r * c, r * s)
    }

    /// Fills `out` with standard normals for one step.
    pub fn fill_normals(&self, step: u64, out: &mut [f64]) {
        let mut i = 0;
        while i < out.len() {
            let (a, b) = self.normal_pair(step, (i / 2) as u64);
            out[i] = a;
            if i + 1 < out.len() {
                out[i + 1] = b;
            }
            i += 2;
        }
    }
}
