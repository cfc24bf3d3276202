//! Truncated normal distributions, the intervention policies of the
//! effect engine.

use crate::error::{Error, Result};
use crate::rng::{open01, StreamRng};
use crate::special::normal::{
    normal_mass, std_normal_cdf, std_normal_pdf, std_normal_quantile_unchecked, std_normal_sf,
};

/// Probability mass below which a truncation interval is treated as
/// degenerate (an ordinal level with numerically zero probability).
pub const DEGENERATE_MASS: f64 = 1e-300;

/// A normal distribution restricted to `[lower, upper]`; either bound may
/// be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    mu: f64,
    sigma: f64,
    lower: f64,
    upper: f64,
    // standardized bounds and their tail masses, fixed at construction
    z_lo: f64,
    z_hi: f64,
    mass: f64,
}

impl TruncatedNormal {
    pub fn new(mu: f64, sigma: f64, lower: f64, upper: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "truncated normal requires finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
            )));
        }
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidParam(format!(
                "truncation bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        let z_lo = if lower == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            (lower - mu) / sigma
        };
        let z_hi = if upper == f64::INFINITY {
            f64::INFINITY
        } else {
            (upper - mu) / sigma
        };
        let mass = normal_mass(z_lo, z_hi);
        if mass < DEGENERATE_MASS {
            return Err(Error::DegenerateInterval(format!(
                "interval [{lower}, {upper}] carries mass {mass:e} under N({mu}, {}^2)",
                sigma
            )));
        }
        Ok(Self {
            mu,
            sigma,
            lower,
            upper,
            z_lo,
            z_hi,
            mass,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Probability the untruncated normal assigns to `[lower, upper]`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.lower || x > self.upper || x.is_infinite() {
            return 0.0;
        }
        std_normal_pdf((x - self.mu) / self.sigma) / (self.sigma * self.mass)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lower {
            return 0.0;
        }
        if x >= self.upper {
            return 1.0;
        }
        normal_mass(self.z_lo, (x - self.mu) / self.sigma) / self.mass
    }

    /// Inverse of [`cdf`](Self::cdf) on `[0, 1]`.
    ///
    /// Worked in whichever normal tail keeps the erfc evaluations free of
    /// cancellation, so bands far out in a tail stay accurate.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!(
                "truncated normal quantile requires p in [0,1], got {p}"
            )));
        }
        if p == 0.0 {
            return Ok(self.lower);
        }
        if p == 1.0 {
            return Ok(self.upper);
        }
        let z = if self.z_lo > 0.0 {
            // right-tail band: interpolate survival values
            let q = std_normal_sf(self.z_lo) - p * self.mass;
            -std_normal_quantile_unchecked(q.clamp(f64::MIN_POSITIVE, 1.0))
        } else {
            let f = std_normal_cdf(self.z_lo) + p * self.mass;
            std_normal_quantile_unchecked(f.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
        };
        let z = z.clamp(self.z_lo, self.z_hi);
        Ok((self.mu + self.sigma * z).clamp(self.lower, self.upper))
    }

    /// Mean of the truncated distribution.
    pub fn mean(&self) -> f64 {
        let lo_pdf = std_normal_pdf(self.z_lo);
        let hi_pdf = std_normal_pdf(self.z_hi);
        self.mu + self.sigma * (lo_pdf - hi_pdf) / self.mass
    }

    /// Inverse-CDF sampling; the draw always lies in `[lower, upper]`.
    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        let u = open01(rng);
        self.quantile(u).expect("open01 stays inside (0,1)")
    }
}
