//! Seeded random streams.
//!
//! Every independent unit of Monte-Carlo work (one cell's moment estimate, one
//! outer position draw, one channel draw) gets its own ChaCha stream derived
//! from a master seed and a stream id, so results do not depend on how rayon
//! splits the work.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

/// Stream ids are namespaced so different consumers of one master seed never
/// collide.
#[derive(Debug, Clone, Copy)]
pub enum Purpose {
    Moments = 1,
    Positions = 2,
    Channels = 3,
    Misc = 4,
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((purpose as u64) << 56));
    rng.set_stream(index);
    rng
}

/// Circularly symmetric CN(0, 1): two N(0, 1) draws scaled by 1/sqrt(2).
#[inline]
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn fill_complex_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [Complex64]) {
    for z in out.iter_mut() {
        *z = complex_normal(rng);
    }
}
