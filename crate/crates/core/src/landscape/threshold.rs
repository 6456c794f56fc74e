//! Energy thresholds A, A_lambda and the margin A - sup_t g_eps(t) along an
//! eps-ladder.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fiber::{fiber_max, FiberCurve};
use crate::asymptotics::fit::fine_end_order;
use crate::asymptotics::{energy_breakdown, theta_n, EnergyBreakdown};
use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::quadrature::{bubble_constants, QuadratureSpec};

/// A = K1/2 - K2/2* - K3/2_* from the bubble constants.
pub fn threshold_a(dim: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    Ok(bubble_constants(dim, spec)?.a)
}

/// A_lambda = lambda^{-(N-2)/2} A.
pub fn threshold_a_lambda(lambda: f64, dim: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(lambda.powf(-(dim.nf() - 2.0) / 2.0) * threshold_a(dim, spec)?)
}

/// Existence regimes: (i) N >= 4, mu > 0; (ii) N = 3, 4 < p < 6, mu > 0;
/// (iii) N = 3, 2 < p <= 4, mu large.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    I,
    II,
    III,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MuMode {
    Fixed {
        mu: f64,
    },
    /// mu = eps^{-1/2}, tied to the ladder rung.
    InverseSqrtEps,
}

impl MuMode {
    pub fn mu_at(&self, eps: f64) -> f64 {
        match *self {
            Self::Fixed { mu } => mu,
            Self::InverseSqrtEps => eps.powf(-0.5),
        }
    }
}

pub fn classify_regime(dim: Dimension, p: f64, mode: MuMode) -> Result<Regime> {
    dim.check_subcritical(p)?;
    let positive = match mode {
        MuMode::Fixed { mu } => mu > 0.0,
        MuMode::InverseSqrtEps => true,
    };
    if !positive {
        return Err(Error::RegimeViolation(
            "existence regimes need mu > 0".into(),
        ));
    }
    match (dim.n(), mode) {
        (n, MuMode::Fixed { .. }) if n >= 4 => Ok(Regime::I),
        (3, MuMode::Fixed { .. }) if p > 4.0 => Ok(Regime::II),
        (3, _) if p <= 4.0 => Ok(Regime::III),
        (3, MuMode::InverseSqrtEps) => Err(Error::RegimeViolation(
            "mu = eps^{-1/2} coupling is for 2 < p <= 4".into(),
        )),
        _ => Err(Error::RegimeViolation(format!(
            "no existence regime for N = {}, p = {p}",
            dim.n()
        ))),
    }
}

/// Margin order predicted for the regime, when one is stated.
pub fn expected_margin_order(regime: Regime, dim: Dimension, p: f64) -> Option<f64> {
    match regime {
        Regime::I => Some(theta_n(dim, p)),
        Regime::II => Some(3.0 - p / 2.0),
        Regime::III => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRung {
    pub eps: f64,
    pub mu: f64,
    pub mu_weight: f64,
    pub t_star: f64,
    pub sup_g: f64,
    pub margin: f64,
    /// Bound on |error of margin| propagated from the quadrature estimates.
    pub error_estimate: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub regime: Regime,
    #[serde(rename = "N")]
    pub n: u32,
    pub lambda: f64,
    pub mu_mode: MuMode,
    pub p: f64,
    pub a: f64,
    pub ladder: Vec<ThresholdRung>,
    /// Log-log slope of the margin over the finest half of the positive
    /// fine-end run (needs three positive rungs).
    pub fitted_order: Option<f64>,
    pub expected_order: Option<f64>,
    /// Number of consecutive positive margins at the fine end of the ladder.
    pub positive_suffix: usize,
    /// The finest rung has a positive margin.
    pub passed: bool,
}

fn rung(
    b: &EnergyBreakdown,
    dim: Dimension,
    lambda: f64,
    mu: f64,
    p: f64,
    a: f64,
    a_err: f64,
) -> Result<ThresholdRung> {
    let n = dim.nf();
    let mu_weight = mu * lambda.powf((n - 2.0) * (2.0 - p) / 4.0);
    let curve = FiberCurve {
        k1e: b.k1.value,
        k2e: b.k2.value,
        k3e: b.k3.value,
        k4e: b.k4.value,
        mu_weight,
        p,
        dim,
    };
    let (t, sup) = fiber_max(&curve)?;
    let (ts, tl) = (dim.two_star(), dim.two_lower());
    // envelope: d sup / d K_i is the corresponding monomial at t*
    let err = t * t / 2.0 * b.k1.error_estimate
        + t.powf(ts) / ts * b.k2.error_estimate
        + t.powf(tl) / tl * b.k3.error_estimate
        + mu_weight.abs() * t.powf(p) / p * b.k4.error_estimate
        + a_err;
    Ok(ThresholdRung {
        eps: b.eps,
        mu,
        mu_weight,
        t_star: t,
        sup_g: sup,
        margin: a - sup,
        error_estimate: err,
        k1: b.k1.value,
        k2: b.k2.value,
        k3: b.k3.value,
        k4: b.k4.value,
    })
}

/// Computes sup_t g_eps and the margin A - sup_t g_eps on every rung.
pub fn verify_threshold(
    dim: Dimension,
    lambda: f64,
    mode: MuMode,
    p: f64,
    ladder: &[f64],
    spec: &QuadratureSpec,
) -> Result<ThresholdReport> {
    let regime = classify_regime(dim, p, mode)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if ladder.is_empty() || ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter(
            "ladder must be non-empty and strictly decreasing".into(),
        ));
    }
    let consts = bubble_constants(dim, spec)?;
    let a = consts.a;
    let a_err = consts.k1.error_estimate / 2.0
        + consts.k2.error_estimate / dim.two_star()
        + consts.k3.error_estimate / dim.two_lower();
    let rungs: Vec<Result<ThresholdRung>> = ladder
        .par_iter()
        .map(|&eps| {
            let b = energy_breakdown(eps, p, dim, spec)?;
            rung(&b, dim, lambda, mode.mu_at(eps), p, a, a_err)
        })
        .collect();
    let rungs: Vec<ThresholdRung> = rungs.into_iter().collect::<Result<_>>()?;
    let positive_suffix = rungs.iter().rev().take_while(|r| r.margin > 0.0).count();
    let fitted_order = if positive_suffix >= 3 {
        let tail = &rungs[rungs.len() - positive_suffix..];
        let e: Vec<f64> = tail.iter().map(|r| r.eps).collect();
        let m: Vec<f64> = tail.iter().map(|r| r.margin).collect();
        Some(fine_end_order(&e, &m))
    } else {
        None
    };
    Ok(ThresholdReport {
        regime,
        n: dim.n(),
        lambda,
        mu_mode: mode,
        p,
        a,
        ladder: rungs,
        fitted_order,
        expected_order: expected_margin_order(regime, dim, p),
        positive_suffix,
        passed: positive_suffix > 0,
    })
}

/// Ladder 10^{-1}, 10^{-1.5}, ..., 10^{-7} reaching the asymptotic regime of
/// all three existence cases.
pub fn deep_ladder() -> Vec<f64> {
    (2..=14).map(|k| 10f64.powf(-(k as f64) / 2.0)).collect()
}
