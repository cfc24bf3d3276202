//! Seedable, stream-splittable random number generation.
//!
//! All stochastic routines in this crate draw from a [`StreamRng`]
//! instantiated from an explicit [`RngHandle`]; there is no global RNG
//! state. Identical `(seed, stream)` pairs reproduce identical draws on
//! every platform: the generator is ChaCha12 and all transforms of its
//! output go through `libm`, which is bit-deterministic.

use rand::{Rng, SeedableRng};

use crate::special::std_normal_quantile_unchecked;

/// The concrete generator used everywhere in this crate.
pub type StreamRng = rand_chacha::ChaCha12Rng;

/// A `(seed, stream)` pair identifying one reproducible random stream.
///
/// Parallel work derives child handles with [`RngHandle::derive`]; the
/// derivation is a pure mix of the parent stream id and the child index,
/// so a given handle tree is identical no matter how work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngHandle {
    pub seed: u64,
    pub stream: u64,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Deterministically derive an independent child stream.
    pub fn derive(&self, child: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(child.wrapping_add(0x9E37_79B9_7F4A_7C15))),
        }
    }

    /// Materialize the generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = StreamRng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw on the open interval (0, 1).
pub fn open01(rng: &mut StreamRng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Standard normal draw by inversion; deterministic across platforms.
pub fn standard_normal(rng: &mut StreamRng) -> f64 {
    std_normal_quantile_unchecked(open01(rng))
}

/// Gamma(shape, 1) draw via the Marsaglia-Tsang squeeze.
///
/// Shapes below one use the boost step `G(a) = G(a+1) * U^{1/a}`.
pub fn gamma(shape: f64, rng: &mut StreamRng) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let boost = libm::pow(open01(rng), 1.0 / shape);
        return gamma(shape + 1.0, rng) * boost;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / libm::sqrt(9.0 * d);
    loop {
        let x = standard_normal(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v3 = v * v * v;
        let u = open01(rng);
        // squeeze test, then the full acceptance check
        if u < 1.0 - 0.0331 * (x * x) * (x * x) {
            return d * v3;
        }
        if libm::log(u) < 0.5 * x * x + d * (1.0 - v3 + libm::log(v3)) {
            return d * v3;
        }
    }
}
