//! The fibering map t -> g(t) = K1 t^2/2 - w K4 t^p/p - K2 t^{2*}/2* - K3 t^{2_*}/2_*.

use serde::{Deserialize, Serialize};

use crate::dim::Dimension;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    pub lambda: f64,
    pub mu: f64,
    pub p: f64,
    pub dim: Dimension,
}

impl FunctionalParams {
    pub fn new(dim: Dimension, lambda: f64, mu: f64, p: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter("mu must be finite".into()));
        }
        dim.check_subcritical(p)?;
        Ok(Self { lambda, mu, p, dim })
    }

    /// mu * lambda^{(N-2)(2-p)/4}, the coefficient of K4 after rescaling by
    /// lambda.
    pub fn mu_weight(&self) -> f64 {
        let n = self.dim.nf();
        self.mu * self.lambda.powf((n - 2.0) * (2.0 - self.p) / 4.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberCurve {
    pub k1e: f64,
    pub k2e: f64,
    pub k3e: f64,
    pub k4e: f64,
    pub mu_weight: f64,
    pub p: f64,
    pub dim: Dimension,
}

impl FiberCurve {
    fn exps(&self) -> (f64, f64) {
        (self.dim.two_star(), self.dim.two_lower())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1e > 0.0 && self.k2e > 0.0 && self.k3e >= 0.0 && self.k4e >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fiber totals must be positive: K1={}, K2={}, K3={}, K4={}",
                self.k1e, self.k2e, self.k3e, self.k4e
            )));
        }
        Ok(())
    }

    /// g'(t) / t = K1 - w K4 t^{p-2} - K2 t^{2*-2} - K3 t^{2_*-2}.
    pub fn reduced_derivative(&self, t: f64) -> f64 {
        let (ts, tl) = self.exps();
        self.k1e
            - self.mu_weight * self.k4e * t.powf(self.p - 2.0)
            - self.k2e * t.powf(ts - 2.0)
            - self.k3e * t.powf(tl - 2.0)
    }
}

pub fn fiber_value(c: &FiberCurve, t: f64) -> f64 {
    let (ts, tl) = c.exps();
    c.k1e * t * t / 2.0
        - c.mu_weight * c.k4e * t.powf(c.p) / c.p
        - c.k2e * t.powf(ts) / ts
        - c.k3e * t.powf(tl) / tl
}

pub fn fiber_derivative(c: &FiberCurve, t: f64) -> f64 {
    t * c.reduced_derivative(t)
}

/// Positive root of K2 u^2 + K3 u - K1 = 0, u = t^{2_*-2}, in the stable form
/// 2 K1 / (K3 + sqrt(K3^2 + 4 K1 K2)) followed by Newton polishing.
fn quadratic_root(k1: f64, k2: f64, k3: f64) -> f64 {
    let mut u = 2.0 * k1 / (k3 + (k3 * k3 + 4.0 * k1 * k2).sqrt());
    for _ in 0..3 {
        let r = k2 * u * u + k3 * u - k1;
        let step = r / (2.0 * k2 * u + k3);
        if step == 0.0 {
            break;
        }
        u -= step;
    }
    u
}

/// Closed-form maximiser of the mu = 0 fiber, using 2* - 2 = 2(2_* - 2).
pub fn closed_form_t(c: &FiberCurve) -> Result<f64> {
    if c.mu_weight != 0.0 {
        return Err(Error::InvalidParameter(
            "closed form needs mu_weight = 0".into(),
        ));
    }
    c.validate()?;
    let u = quadratic_root(c.k1e, c.k2e, c.k3e);
    Ok(u.powf(1.0 / (c.dim.two_lower() - 2.0)))
}

/// Number of sign changes of g'(t)/t on a log grid over [1e-6, t_hi].
pub fn critical_point_count(c: &FiberCurve, t_hi: f64) -> usize {
    let m = 2000;
    let (lo, hi) = (1e-6f64.ln(), t_hi.ln());
    let mut count = 0;
    let mut prev = c.reduced_derivative(1e-6).signum();
    for i in 1..=m {
        let t = (lo + (hi - lo) * i as f64 / m as f64).exp();
        let s = c.reduced_derivative(t).signum();
        if s != prev && s != 0.0 {
            count += 1;
            prev = s;
        }
    }
    count
}

/// Global maximiser (t*, g(t*)) over t > 0 by bracketing and bisection on
/// g'(t)/t.
pub fn fiber_max(c: &FiberCurve) -> Result<(f64, f64)> {
    c.validate()?;
    let t0 = quadratic_root(c.k1e, c.k2e, c.k3e).powf(1.0 / (c.dim.two_lower() - 2.0));
    let mut hi = 4.0 * t0;
    while c.reduced_derivative(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e150 {
            return Err(Error::NotConverged("fiber maximiser bracket".into()));
        }
    }
    if c.mu_weight < 0.0 {
        // beyond this bound K2 t^{2*-2} exceeds K1 + |w| K4 t^{p-2}
        let ts = c.dim.two_star();
        let a = -c.mu_weight * c.k4e;
        let bound = (2.0 * c.k1e / c.k2e)
            .powf(1.0 / (ts - 2.0))
            .max((2.0 * a / c.k2e).powf(1.0 / (ts - c.p)))
            .max(hi);
        let count = critical_point_count(c, bound);
        if count > 1 {
            return Err(Error::NonUnimodal(count));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if c.reduced_derivative(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok((t, fiber_value(c, t)))
}
