//! Owen's T function and the standard bivariate normal distribution
//! function built from it.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::special::normal::std_normal_cdf;

/// Owen's T function `T(h, a)`.
///
/// Evaluated by 64-point Gauss-Legendre quadrature of the defining integral
/// on `|a| <= 1`; larger `|a|` is folded back with the reduction identity
/// `T(h, a) = Φ(h)/2 + Φ(ah)/2 - Φ(h)Φ(ah) - T(ah, 1/a)` after taking out
/// the symmetries `T(-h, a) = T(h, a)` and `T(h, -a) = -T(h, a)`.
/// `a = ±∞` resolves to the limit `±(1 - Φ(|h|))/2`.
pub fn owen_t(h: f64, a: f64) -> Result<f64> {
    if !h.is_finite() {
        return Err(Error::Domain(format!("owen_t requires finite h, got {h}")));
    }
    if a.is_nan() {
        return Err(Error::Domain("owen_t received NaN slope".into()));
    }
    Ok(owen_t_raw(h, a))
}

pub(crate) fn owen_t_raw(h: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let hh = h.abs();
    let (aa, sign) = if a < 0.0 { (-a, -1.0) } else { (a, 1.0) };
    if aa == f64::INFINITY {
        // T(h, ∞) = (1 - Φ(|h|)) / 2
        return sign * 0.5 * std_normal_cdf(-hh);
    }
    let t = if aa <= 1.0 {
        owen_t_core(hh, aa)
    } else {
        let ah = aa * hh;
        let phi_h = std_normal_cdf(hh);
        let phi_ah = std_normal_cdf(ah);
        0.5 * (phi_h + phi_ah) - phi_h * phi_ah - owen_t_core(ah, 1.0 / aa)
    };
    sign * t
}

// T(h, a) for h >= 0, 0 < a <= 1, by quadrature of
// (1/2π) ∫_0^a exp(-h²(1+x²)/2) / (1+x²) dx.
fn owen_t_core(h: f64, a: f64) -> f64 {
    let h2 = 0.5 * h * h;
    gauss_legendre(|x| libm::exp(-h2 * (1.0 + x * x)) / (1.0 + x * x), 0.0, a) / (2.0 * PI)
}

/// Standard bivariate normal distribution function
/// `P(Z₁ <= h, Z₂ <= k)` for correlation `rho`.
///
/// Uses the classical decomposition into `Φ` and Owen's T terms, with the
/// extra `-1/2` when `h` and `k` lie on opposite sides of the origin.
/// Infinite arguments collapse to the univariate limits and `|rho| = 1`
/// to the comonotone/antimonotone bounds.
pub fn bvn_cdf(h: f64, k: f64, rho: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!(
            "bvn_cdf requires rho in [-1, 1], got {rho}"
        )));
    }
    if h.is_nan() || k.is_nan() {
        return Err(Error::Domain("bvn_cdf received NaN limit".into()));
    }
    Ok(bvn_cdf_raw(h, k, rho))
}

pub(crate) fn bvn_cdf_raw(h: f64, k: f64, rho: f64) -> f64 {
    debug_assert!((-1.0..=1.0).contains(&rho));
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return std_normal_cdf(k);
    }
    if k == f64::INFINITY {
        return std_normal_cdf(h);
    }
    if rho == 1.0 {
        return std_normal_cdf(h.min(k));
    }
    if rho == -1.0 {
        return (std_normal_cdf(h) + std_normal_cdf(k) - 1.0).max(0.0);
    }
    if rho == 0.0 {
        return std_normal_cdf(h) * std_normal_cdf(k);
    }
    if h == 0.0 && k == 0.0 {
        return 0.25 + libm::asin(rho) / (2.0 * PI);
    }
    let s = libm::sqrt((1.0 - rho) * (1.0 + rho));
    // T(0, ·) limits follow the h -> 0+ convention.
    let t1 = if h == 0.0 {
        if k > 0.0 {
            0.25
        } else {
            -0.25
        }
    } else {
        owen_t_raw(h, (k - rho * h) / (h * s))
    };
    let t2 = if k == 0.0 {
        if h > 0.0 {
            0.25
        } else {
            -0.25
        }
    } else {
        owen_t_raw(k, (h - rho * k) / (k * s))
    };
    let correction = if h * k < 0.0 || (h * k == 0.0 && h + k < 0.0) {
        0.5
    } else {
        0.0
    };
    let v = 0.5 * (std_normal_cdf(h) + std_normal_cdf(k)) - t1 - t2 - correction;
    v.clamp(0.0, 1.0)
}
