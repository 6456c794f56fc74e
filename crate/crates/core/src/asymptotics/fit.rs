//! Least-squares fits of eps-ladders against expansion models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative residual above which a fit is reported as a model mismatch.
pub const MISMATCH_TOL: f64 = 1e-3;
const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExpansionModel {
    /// c eps^2
    Eps2,
    /// c eps^2 |ln eps|
    Eps2Log,
    /// c eps^q
    EpsPower(f64),
    /// c eps^q |ln eps|
    EpsPowerLog(f64),
}

impl ExpansionModel {
    pub fn leading(&self, eps: f64) -> f64 {
        let l = eps.ln().abs();
        match *self {
            Self::Eps2 => eps * eps,
            Self::Eps2Log => eps * eps * l,
            Self::EpsPower(q) => eps.powf(q),
            Self::EpsPowerLog(q) => eps.powf(q) * l,
        }
    }

    /// Exponent of the default next-order term eps^k fitted alongside the
    /// leading one.
    pub fn companion_order(&self) -> f64 {
        match *self {
            Self::Eps2 => 3.0,
            Self::Eps2Log => 2.0,
            Self::EpsPower(q) => q + 1.0,
            Self::EpsPowerLog(q) => q,
        }
    }

    /// Nominal order of the leading term.
    pub fn order(&self) -> f64 {
        match *self {
            Self::Eps2 | Self::Eps2Log => 2.0,
            Self::EpsPower(q) | Self::EpsPowerLog(q) => q,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub eps_ladder: Vec<f64>,
    pub lhs_values: Vec<f64>,
    pub limit: f64,
    pub model: ExpansionModel,
    pub fitted_coefficient: f64,
    pub companion_coefficient: f64,
    /// Exponent k of the companion term eps^k.
    pub companion_order: f64,
    /// Log-log slope of |value - limit| over the finest half of the ladder.
    pub fitted_order: f64,
    /// Relative residual of the weighted fit, ||r / leading|| / ||(value - limit) / leading||.
    pub residual: f64,
    pub condition_number: f64,
    pub mismatch: bool,
}

impl ExpansionFit {
    pub fn prediction(&self, eps: f64) -> f64 {
        self.limit
            + self.fitted_coefficient * self.model.leading(eps)
            + self.companion_coefficient * eps.powf(self.companion_order)
    }
}

/// Slope of the least-squares line through (x, y).
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Log-log slope of |y| against eps over the finest half of the ladder
/// (at least three rungs).
pub fn fine_end_order(eps: &[f64], y: &[f64]) -> f64 {
    let n = eps.len();
    let take = (n / 2).max(3).min(n);
    let (lx, ly): (Vec<f64>, Vec<f64>) = eps[n - take..]
        .iter()
        .zip(&y[n - take..])
        .filter(|(_, v)| **v != 0.0)
        .map(|(e, v)| (e.ln(), v.abs().ln()))
        .unzip();
    if lx.len() < 2 {
        return f64::NAN;
    }
    regression_slope(&lx, &ly)
}

/// Fits value(eps) - limit = c * leading(eps) + c' * eps^k with the model's
/// default companion order k.
pub fn fit_expansion(
    eps: &[f64],
    values: &[f64],
    limit: f64,
    model: ExpansionModel,
) -> Result<ExpansionFit> {
    fit_expansion_with(eps, values, limit, model, model.companion_order())
}

/// Fits value(eps) - limit = c * leading(eps) + c' * eps^k by least squares
/// on (value - limit) / leading(eps).
pub fn fit_expansion_with(
    eps: &[f64],
    values: &[f64],
    limit: f64,
    model: ExpansionModel,
    companion_order: f64,
) -> Result<ExpansionFit> {
    let log = matches!(
        model,
        ExpansionModel::Eps2Log | ExpansionModel::EpsPowerLog(_)
    );
    let below = if log {
        companion_order < model.order()
    } else {
        companion_order <= model.order()
    };
    if below || !companion_order.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "companion order {companion_order} must lie above the leading order {}",
            model.order()
        )));
    }
    if eps.len() != values.len() {
        return Err(Error::InvalidParameter(
            "ladder and values differ in length".into(),
        ));
    }
    if eps.len() < 5 {
        return Err(Error::InvalidParameter(
            "a fit needs at least 5 rungs".into(),
        ));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter(
            "ladder must be positive and strictly decreasing".into(),
        ));
    }
    if eps[0] / eps[eps.len() - 1] < 4.0 {
        return Err(Error::InvalidParameter(
            "ladder must span a factor of 4".into(),
        ));
    }
    let raw: Vec<f64> = values.iter().map(|v| v - limit).collect();
    // rows scaled by 1/leading(eps): each rung weighs in relative terms,
    // otherwise the coarsest rungs set the coefficient
    let w: Vec<f64> = eps.iter().map(|&e| 1.0 / model.leading(e)).collect();
    let y: Vec<f64> = raw.iter().zip(&w).map(|(v, w)| v * w).collect();
    let b1: Vec<f64> = w.iter().map(|_| 1.0).collect();
    let b2: Vec<f64> = eps
        .iter()
        .zip(&w)
        .map(|(&e, w)| e.powf(companion_order) * w)
        .collect();
    let n1 = b1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n2 = b2.iter().map(|v| v * v).sum::<f64>().sqrt();
    // Gram matrix of the unit-normalised columns
    let g12: f64 = b1.iter().zip(&b2).map(|(a, b)| a * b).sum::<f64>() / (n1 * n2);
    let lmax = 1.0 + g12.abs();
    let lmin = 1.0 - g12.abs();
    let cond = if lmin > 0.0 {
        lmax / lmin
    } else {
        f64::INFINITY
    };
    if cond > MAX_CONDITION {
        return Err(Error::IllConditioned(cond));
    }
    let r1: f64 = b1.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / n1;
    let r2: f64 = b2.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / n2;
    let det = 1.0 - g12 * g12;
    let c1 = (r1 - g12 * r2) / det / n1;
    let c2 = (r2 - g12 * r1) / det / n2;
    let res: f64 = (0..eps.len())
        .map(|i| {
            let r = y[i] - c1 * b1[i] - c2 * b2[i];
            r * r
        })
        .sum::<f64>()
        .sqrt();
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let residual = if ynorm > 0.0 { res / ynorm } else { 0.0 };
    Ok(ExpansionFit {
        eps_ladder: eps.to_vec(),
        lhs_values: values.to_vec(),
        limit,
        model,
        fitted_coefficient: c1,
        companion_coefficient: c2,
        companion_order,
        fitted_order: fine_end_order(eps, &raw),
        residual,
        condition_number: cond,
        mismatch: residual > MISMATCH_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::DEFAULT_LADDER;

    #[test]
    fn exact_quadratic() {
        let v: Vec<f64> = DEFAULT_LADDER.iter().map(|e| 7.0 + 3.0 * e * e).collect();
        let f = fit_expansion(&DEFAULT_LADDER, &v, 7.0, ExpansionModel::Eps2).unwrap();
        assert!((f.fitted_coefficient - 3.0).abs() < 1e-9);
        assert!((f.fitted_order - 2.0).abs() < 1e-9);
        assert!(!f.mismatch);
    }

    #[test]
    fn log_data_under_power_model_is_mismatch() {
        let v: Vec<f64> = DEFAULT_LADDER
            .iter()
            .map(|e| 7.0 + 3.0 * e * e * e.ln().abs())
            .collect();
        let f = fit_expansion(&DEFAULT_LADDER, &v, 7.0, ExpansionModel::Eps2).unwrap();
        assert!(f.mismatch, "residual {}", f.residual);
        let g = fit_expansion(&DEFAULT_LADDER, &v, 7.0, ExpansionModel::Eps2Log).unwrap();
        assert!(!g.mismatch);
        assert!((g.fitted_coefficient - 3.0).abs() < 1e-9);
    }

    #[test]
    fn companion_absorbs_next_order() {
        let v: Vec<f64> = DEFAULT_LADDER
            .iter()
            .map(|e| 1.0 - 12.0 * e * e + 5.0 * e.powi(3))
            .collect();
        let f = fit_expansion(&DEFAULT_LADDER, &v, 1.0, ExpansionModel::Eps2).unwrap();
        assert!((f.fitted_coefficient + 12.0).abs() < 1e-9);
        assert!((f.companion_coefficient - 5.0).abs() < 1e-7);
        assert!((f.prediction(0.1) - v[2]).abs() < 1e-12);
    }

    #[test]
    fn explicit_companion_order() {
        let v: Vec<f64> = DEFAULT_LADDER
            .iter()
            .map(|e| 2.0 - 23.0 * e * e + 40.0 * e.powi(4))
            .collect();
        let f = fit_expansion_with(&DEFAULT_LADDER, &v, 2.0, ExpansionModel::Eps2, 4.0).unwrap();
        assert!((f.fitted_coefficient + 23.0).abs() < 1e-9);
        assert!((f.companion_coefficient - 40.0).abs() < 1e-6);
        assert!(fit_expansion_with(&DEFAULT_LADDER, &v, 2.0, ExpansionModel::Eps2, 2.0).is_err());
        assert!(fit_expansion_with(&DEFAULT_LADDER, &v, 2.0, ExpansionModel::Eps2Log, 2.0).is_ok());
    }

    #[test]
    fn rejects_bad_ladders() {
        let v = [1.0; 5];
        assert!(fit_expansion(&[0.1, 0.2, 0.3, 0.4, 0.5], &v, 0.0, ExpansionModel::Eps2).is_err());
        assert!(fit_expansion(
            &[0.1, 0.09, 0.08, 0.07, 0.06],
            &v,
            0.0,
            ExpansionModel::Eps2
        )
        .is_err());
        assert!(fit_expansion(&[0.1, 0.05], &[1.0, 1.0], 0.0, ExpansionModel::Eps2).is_err());
    }

    #[test]
    fn condition_number_reported() {
        let v: Vec<f64> = DEFAULT_LADDER.iter().map(|e| e * e).collect();
        let f = fit_expansion(&DEFAULT_LADDER, &v, 0.0, ExpansionModel::Eps2Log).unwrap();
        assert!(f.condition_number >= 1.0 && f.condition_number < MAX_CONDITION);
        assert!((f.companion_coefficient - 1.0).abs() < 1e-9);
    }
}
