//! Prelec probability weighting `w(p) = exp(-beta * (-ln p)^alpha)`.
//!
//! For `0 < alpha < 1` the curve is inverse-S shaped: concave on `(0, l)`,
//! convex on `(l, 1)`, above the diagonal below its fixed point and below the
//! diagonal above it. `alpha` sets the curvature and `beta` the elevation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::bisect;

/// Landmarks are searched in `u = -ln p` on `[U_MIN, U_MAX]`, which keeps
/// full relative precision for landmarks far below 1e-15.
const U_MIN: f64 = f64::EPSILON;
const U_MAX: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightingParams {
    alpha: f64,
    beta: f64,
}

/// Characteristic points of a weighting curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightingLandmarks {
    /// Where the curve switches from concave to convex.
    pub inflection: f64,
    /// Where `w(p) = p`.
    pub fixed_point: f64,
    /// Point below the inflection where `w'(q) = 1`.
    pub unit_slope: f64,
}

impl WeightingParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NotFinite {
                name: "alpha",
                value: alpha,
            });
        }
        if !beta.is_finite() {
            return Err(Error::NotFinite {
                name: "beta",
                value: beta,
            });
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                expected: "(0, 1)",
            });
        }
        if !(beta > 0.0) {
            return Err(Error::OutOfRange {
                name: "beta",
                value: beta,
                expected: "(0, inf)",
            });
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `w(p)` with a domain check. `w(0) = 0` and `w(1) = 1` exactly.
    pub fn eval(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain {
                value: p,
                domain: "[0, 1]",
            });
        }
        Ok(self.value(p))
    }

    /// `w(p)` without a domain check; arguments outside `[0, 1]` saturate.
    #[inline]
    pub fn value(&self, p: f64) -> f64 {
        if p <= 0.0 {
            0.0
        } else if p >= 1.0 {
            1.0
        } else {
            (-self.beta * (-p.ln()).powf(self.alpha)).exp()
        }
    }

    /// `w'(p)` on `(0, 1]`. The slope blows up at both ends, so `w'(1)` is
    /// reported as `+inf`; `p = 0` is rejected.
    pub fn eval_derivative(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain {
                value: p,
                domain: "(0, 1]",
            });
        }
        Ok(self.slope(p))
    }

    /// `w'(p)` without a domain check; `+inf` at and beyond both ends.
    #[inline]
    pub fn slope(&self, p: f64) -> f64 {
        if p <= 0.0 || p >= 1.0 {
            return f64::INFINITY;
        }
        let u = -p.ln();
        let u_pow = u.powf(self.alpha - 1.0);
        let w = (-self.beta * u * u_pow).exp();
        w * self.alpha * self.beta * u_pow / p
    }

    /// Sign-carrying factor of `w''`: `w''(p) = w'(p) * curvature(p) / p`.
    ///
    /// Negative on the concave part, positive on the convex part.
    #[inline]
    pub fn curvature(&self, p: f64) -> f64 {
        let u = -p.ln();
        self.alpha * self.beta * u.powf(self.alpha - 1.0) + (1.0 - self.alpha) / u - 1.0
    }

    /// `w''(p)` on `(0, 1)`.
    pub fn second_derivative(&self, p: f64) -> f64 {
        self.slope(p) * self.curvature(p) / p
    }

    /// Inflection point, fixed point and unit-slope point, each by bisection
    /// in `u = -ln p` down to the last representable bit.
    pub fn landmarks(&self) -> Result<WeightingLandmarks> {
        let (a, b) = (self.alpha, self.beta);
        let curvature = |u: f64| a * b * u.powf(a - 1.0) + (1.0 - a) / u - 1.0;
        // ln w(p) - ln p and ln w'(p), both written in u
        let above_diagonal = |u: f64| u - b * u.powf(a);
        let log_slope = |u: f64| u - b * u.powf(a) + (a * b).ln() + (a - 1.0) * u.ln();

        let unrepresentable = |what: &str| {
            Error::ConvergenceFailure(format!(
                "{what} of ({a}, {b}) lies below exp(-{U_MAX}), outside f64 range"
            ))
        };
        let u_inflection = bisect(curvature, U_MIN, U_MAX, 0.0)
            .map_err(|_| unrepresentable("inflection point"))?;
        let u_fixed = bisect(above_diagonal, U_MIN, U_MAX, 0.0)
            .map_err(|_| unrepresentable("fixed point"))?;
        let u_unit = bisect(log_slope, u_inflection, U_MAX, 0.0)
            .map_err(|_| unrepresentable("unit-slope point"))?;
        Ok(WeightingLandmarks {
            inflection: (-u_inflection).exp(),
            fixed_point: (-u_fixed).exp(),
            unit_slope: (-u_unit).exp(),
        })
    }

    /// Solve `w'(p) = target` on the convex branch `[inflection, 1]`.
    ///
    /// `w'` increases from `w'(inflection)` to `+inf` there, so targets at or
    /// below the minimum slope map to the inflection point and `+inf` maps
    /// to 1.
    pub fn inverse_slope_convex(&self, target: f64, inflection: f64) -> f64 {
        if target <= self.slope(inflection) {
            return inflection;
        }
        if target == f64::INFINITY {
            return 1.0;
        }
        let (mut lo, mut hi) = (inflection, 1.0);
        for _ in 0..crate::search::MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.slope(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
