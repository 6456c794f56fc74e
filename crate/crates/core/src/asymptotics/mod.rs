//! Quadrature totals of the weighted test function and their small-eps
//! expansions.

pub mod coefficients;
pub mod fit;

use serde::{Deserialize, Serialize};

use crate::bubble::{
    bubble_value, cutoff_profile, weighted_test_gradient, BubbleParams, HalfSpacePoint,
};
use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_boundary, integrate_halfspace, IntegralResult, QuadratureSpec};

pub use coefficients::{
    c1n, coefficient_alpha, coefficient_beta, coefficient_gamma, expansion_coefficients,
    log_coefficient_n4, theta_n, ExpansionCoefficients,
};
pub use fit::{fit_expansion, fit_expansion_with, ExpansionFit, ExpansionModel};

/// The four totals of the test function at one eps:
/// K1 = int K |grad U~|^2, K2 = int K U~^{2*}, K3 = int_boundary K U~^{2_*},
/// K4 = int K U~^p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub eps: f64,
    pub p: f64,
    pub k1: IntegralResult,
    pub k2: IntegralResult,
    pub k3: IntegralResult,
    pub k4: IntegralResult,
}

impl EnergyBreakdown {
    /// Largest relative error estimate among the four totals.
    pub fn worst_rel_error(&self) -> f64 {
        [self.k1, self.k2, self.k3, self.k4]
            .iter()
            .map(|r| r.error_estimate / r.value.abs().max(1e-300))
            .fold(0.0, f64::max)
    }
}

/// `QuadratureSpec` for the cutoff-supported integrands at scale eps:
/// truncated at |x| = 2 with breakpoints at eps * 4^k.
pub fn test_function_spec(eps: f64, base: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec {
        radial_truncation: 2.0,
        compactify: false,
        scale: eps,
        ..*base
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 0.5], got {eps}"
        )));
    }
    Ok(())
}

fn unit_tau(dim: Dimension, eps: f64) -> Result<BubbleParams> {
    check_eps(eps)?;
    BubbleParams::new(dim, eps, 1.0)
}

/// int K U~^q = int K^{1 - q/2} cutoff^q U^q over the half-space.
fn weighted_volume_power(
    dim: Dimension,
    eps: f64,
    q: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    let p = unit_tau(dim, eps)?;
    let s = test_function_spec(eps, spec);
    integrate_halfspace(
        |rho, xn| {
            let x = HalfSpacePoint { rho, xn };
            let r2 = rho * rho + xn * xn;
            let c = cutoff_profile(r2.sqrt());
            if c == 0.0 {
                return 0.0;
            }
            ((1.0 - q / 2.0) * r2 / 4.0).exp() * (c * bubble_value(&p, x)).powf(q)
        },
        dim,
        &s,
    )?
    .require()
}

/// ||U~||^2 = int K |grad U~|^2.
pub fn weighted_energy(eps: f64, dim: Dimension, spec: &QuadratureSpec) -> Result<IntegralResult> {
    let p = unit_tau(dim, eps)?;
    let s = test_function_spec(eps, spec);
    integrate_halfspace(
        |rho, xn| {
            let (a, b) = weighted_test_gradient(&p, HalfSpacePoint { rho, xn })
                .unwrap_or((f64::NAN, f64::NAN));
            a * a + b * b
        },
        dim,
        &s,
    )?
    .require()
}

/// ||U~||_{L^{2*}_K}^{2*}.
pub fn critical_volume_norm(
    eps: f64,
    dim: Dimension,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    weighted_volume_power(dim, eps, dim.two_star(), spec)
}

/// ||U~||_{L^{2_*}_K(boundary)}^{2_*}.
pub fn trace_norm(eps: f64, dim: Dimension, spec: &QuadratureSpec) -> Result<IntegralResult> {
    let p = unit_tau(dim, eps)?;
    let q = dim.two_lower();
    let s = test_function_spec(eps, spec);
    integrate_boundary(
        |rho| {
            let c = cutoff_profile(rho);
            if c == 0.0 {
                return 0.0;
            }
            ((1.0 - q / 2.0) * rho * rho / 4.0).exp()
                * (c * bubble_value(&p, HalfSpacePoint { rho, xn: 0.0 })).powf(q)
        },
        dim,
        &s,
    )?
    .require()
}

/// ||U~||_{L^p_K}^p.
pub fn subcritical_norm(
    eps: f64,
    p: f64,
    dim: Dimension,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    dim.check_subcritical(p)?;
    weighted_volume_power(dim, eps, p, spec)
}

/// All four totals at one eps.
pub fn energy_breakdown(
    eps: f64,
    p: f64,
    dim: Dimension,
    spec: &QuadratureSpec,
) -> Result<EnergyBreakdown> {
    dim.check_subcritical(p)?;
    let ((k1, k2), (k3, k4)) = rayon::join(
        || {
            rayon::join(
                || weighted_energy(eps, dim, spec),
                || critical_volume_norm(eps, dim, spec),
            )
        },
        || {
            rayon::join(
                || trace_norm(eps, dim, spec),
                || subcritical_norm(eps, p, dim, spec),
            )
        },
    );
    Ok(EnergyBreakdown {
        eps,
        p,
        k1: k1?,
        k2: k2?,
        k3: k3?,
        k4: k4?,
    })
}

/// [`energy_breakdown`] on every rung, rungs in parallel, in ladder order.
pub fn energy_ladder(
    ladder: &[f64],
    p: f64,
    dim: Dimension,
    spec: &QuadratureSpec,
) -> Result<Vec<EnergyBreakdown>> {
    use rayon::prelude::*;
    ladder
        .par_iter()
        .map(|&e| energy_breakdown(e, p, dim, spec))
        .collect()
}

/// Which of the four test-function totals a ladder describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Total {
    Energy,
    Critical,
    Trace,
    Subcritical,
}

impl Total {
    /// Leading model of value - limit for this total in dimension N; the
    /// subcritical norm itself is the leading term (limit 0).
    pub fn model(self, dim: Dimension, p: f64) -> ExpansionModel {
        let n = dim.n();
        match self {
            Self::Energy if n == 3 => ExpansionModel::EpsPower(1.0),
            Self::Energy if n == 4 => ExpansionModel::Eps2Log,
            Self::Trace if n == 3 => ExpansionModel::EpsPower(1.0),
            Self::Energy | Self::Critical | Self::Trace => ExpansionModel::Eps2,
            Self::Subcritical if n == 3 && p <= 3.0 => ExpansionModel::EpsPower(p / 2.0),
            Self::Subcritical => ExpansionModel::EpsPower(theta_n(dim, p)),
        }
    }

    /// Order of the next term. The eps^2 moments of the Gaussian weight stop
    /// existing where the bubble tail makes them diverge, which leaves an
    /// eps^{N-2} term in the energy and eps^{N-1} in the trace norm.
    pub fn companion_order(self, dim: Dimension, p: f64) -> f64 {
        let n = dim.nf();
        let m = self.model(dim, p);
        match self {
            Self::Energy if dim.n() >= 5 => n - 2.0,
            Self::Trace if dim.n() >= 4 => n - 1.0,
            Self::Critical if dim.n() >= 4 => 4.0,
            _ => m.companion_order(),
        }
    }

    pub fn of(self, b: &EnergyBreakdown) -> IntegralResult {
        match self {
            Self::Energy => b.k1,
            Self::Critical => b.k2,
            Self::Trace => b.k3,
            Self::Subcritical => b.k4,
        }
    }

    pub const ALL: [Total; 4] = [
        Total::Energy,
        Total::Critical,
        Total::Trace,
        Total::Subcritical,
    ];
}

/// The ladder used for expansion fits.
pub const DEFAULT_LADDER: [f64; 7] = [0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.025];

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn eps_range_checked() {
        let s = QuadratureSpec::default();
        assert!(weighted_energy(0.6, d(4), &s).is_err());
        assert!(subcritical_norm(0.1, 4.0, d(4), &s).is_err());
    }

    #[test]
    fn totals_positive_and_near_limits() {
        let s = QuadratureSpec::default();
        let b = energy_breakdown(0.001, 3.0, d(4), &s).unwrap();
        for r in [b.k1, b.k2, b.k3, b.k4] {
            assert!(r.value > 0.0 && r.converged);
        }
        // bubble constants of N = 4
        assert!((b.k1.value - 13.2407875904).abs() < 0.01);
        assert!((b.k2.value - 2.4961232590).abs() < 0.01);
        assert!((b.k3.value - 10.7446643315).abs() < 0.01);
    }
}
