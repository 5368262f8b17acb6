//! Special functions, quadrature and finite-size deviation bounds.

use std::f64::consts::PI;

use crate::error::KgpError;

/// Panels used by every θ-integral.
pub const SIMPSON_PANELS: usize = 1 << 10;

/// Modified Bessel function of the first kind, order zero, by its power
/// series. Accurate to double precision for `|x| < 50`, far beyond the
/// channel intensities that reach it.
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson_with(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    simpson_with(f, a, b, SIMPSON_PANELS)
}

/// Inverse of the binary entropy on `[0, 1/2]`.
pub fn inverse_binary_entropy(h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    if h >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if crate::bounds::binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Deviation bound for random sampling without replacement: with `n`
/// samples drawn and `k` left over, the rate seen in the sample differs
/// from the rate `lambda` of the rest by at most this, except with
/// probability `eps`.
pub fn gamma_u(n: f64, k: f64, lambda: f64, eps: f64) -> Result<f64, KgpError> {
    if !(n >= 1.0 && k >= 1.0) {
        return Err(KgpError::InvalidArgument(format!(
            "sample sizes must be at least 1, got {n} and {k}"
        )));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(KgpError::InvalidArgument(format!(
            "rate {lambda} must lie strictly between 0 and 1"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(KgpError::InvalidArgument(format!("eps {eps} must lie in (0, 1)")));
    }
    let s = n + k;
    let a = n.max(k);
    let g = s / (n * k) * (s / (2.0 * PI * n * k * lambda * (1.0 - lambda) * eps * eps)).ln();
    if g <= 0.0 {
        return Ok(0.0);
    }
    let r = a / s;
    let num = (1.0 - 2.0 * lambda) * r * g + (r * r * g * g + 4.0 * lambda * (1.0 - lambda) * g).sqrt();
    Ok(num / (2.0 + 2.0 * r * r * g))
}

/// [`gamma_u`] for callers that already handle the degenerate cases: an
/// empty remainder contributes nothing and the rate is kept off the
/// endpoints.
pub(crate) fn gamma_u_or_zero(n: f64, k: f64, lambda: f64, eps: f64) -> f64 {
    if n < 1.0 || k < 1.0 {
        return 0.0;
    }
    let lambda = lambda.clamp(1e-15, 1.0 - 1e-15);
    gamma_u(n, k, lambda, eps).unwrap_or(0.0)
}

/// Chernoff conversions between a count and its expectation, each failing
/// with probability `e^-beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chernoff {
    pub beta: f64,
}

impl Chernoff {
    pub fn new(eps: f64) -> Self {
        Self { beta: (1.0 / eps).ln() }
    }

    /// Lower bound on the expectation behind an observed count.
    pub fn expected_lower(&self, observed: f64) -> f64 {
        let b = self.beta;
        (observed + 1.5 * b - (3.0 * b * observed + 2.25 * b * b).sqrt()).max(0.0)
    }

    /// Upper bound on the expectation behind an observed count.
    pub fn expected_upper(&self, observed: f64) -> f64 {
        let b = self.beta;
        observed.max(0.0) + b + (2.0 * b * observed.max(0.0) + b * b).sqrt()
    }

    /// Lower bound on the count observed for a given expectation.
    pub fn observed_lower(&self, expected: f64) -> f64 {
        (expected - (2.0 * self.beta * expected.max(0.0)).sqrt()).max(0.0)
    }

    /// Upper bound on the count observed for a given expectation.
    pub fn observed_upper(&self, expected: f64) -> f64 {
        expected + (3.0 * self.beta * expected.max(0.0)).sqrt()
    }
}
