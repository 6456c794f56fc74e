use serde::{Deserialize, Serialize};

use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_boundary, integrate_halfspace, QuadratureSpec};
use crate::special::sphere_area;

/// Leading coefficients of the eps-expansions. Entries outside their
/// dimension range are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoefficients {
    pub n: u32,
    pub p: f64,
    pub alpha_n: Option<f64>,
    pub beta_n: f64,
    pub gamma_n: Option<f64>,
    pub c1n: Option<f64>,
    pub theta_n: f64,
}

fn compact(spec: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec {
        compactify: true,
        scale: 1.0,
        ..*spec
    }
}

/// C_{1,N} = int (|y'|^2 + y_N (y_N + x0)) / (1 + |y'|^2 + (y_N + x0)^2)^{N-1} dy,
/// finite for N >= 5.
pub fn c1n(dim: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    if dim.n() < 5 {
        return Err(Error::RegimeViolation(format!(
            "C_1N diverges for N = {}",
            dim.n()
        )));
    }
    let x0 = dim.x0();
    let e = dim.nf() - 1.0;
    let r = integrate_halfspace(
        |rho, y| {
            let w = y + x0;
            (rho * rho + y * w) / (1.0 + rho * rho + w * w).powf(e)
        },
        dim,
        &compact(spec),
    )?
    .require()?;
    Ok(r.value)
}

/// alpha_N = ((N-2) k_N^2 / 2) C_{1,N}, N >= 5.
pub fn coefficient_alpha(dim: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    let k = dim.k_n();
    Ok((dim.nf() - 2.0) * k * k / 2.0 * c1n(dim, spec)?)
}

/// beta_N = k_N^{2*} / (2(N-2)) int |y|^2 / (1 + |y'|^2 + (y_N + x0)^2)^N dy.
pub fn coefficient_beta(dim: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    let x0 = dim.x0();
    let n = dim.nf();
    let r = integrate_halfspace(
        |rho, y| {
            let w = y + x0;
            (rho * rho + y * y) / (1.0 + rho * rho + w * w).powf(n)
        },
        dim,
        &compact(spec),
    )?
    .require()?;
    Ok(dim.k_n().powf(dim.two_star()) / (2.0 * (n - 2.0)) * r.value)
}

/// gamma_N = k_N^{2_*} / (4(N-2)) int_{R^{N-1}} |y'|^2 / (1 + |y'|^2 + x0^2)^{N-1} dy', N >= 4.
pub fn coefficient_gamma(dim: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    if dim.n() < 4 {
        return Err(Error::RegimeViolation(
            "gamma_N is defined for N >= 4".into(),
        ));
    }
    let x0 = dim.x0();
    let n = dim.nf();
    let r = integrate_boundary(
        |rho| rho * rho / (1.0 + rho * rho + x0 * x0).powf(n - 1.0),
        dim,
        &compact(spec),
    )?
    .require()?;
    Ok(dim.k_n().powf(dim.two_lower()) / (4.0 * (n - 2.0)) * r.value)
}

/// k_4^2 omega_4 / 2 = 8 pi^2, the eps^2 |ln eps| coefficient of the N = 4 energy.
pub fn log_coefficient_n4() -> f64 {
    let k = Dimension::new(4).unwrap().k_n();
    k * k * sphere_area(4) / 2.0
}

/// theta_N = N - (N-2) p / 2.
pub fn theta_n(dim: Dimension, p: f64) -> f64 {
    dim.nf() - (dim.nf() - 2.0) * p / 2.0
}

pub fn expansion_coefficients(
    dim: Dimension,
    p: f64,
    spec: &QuadratureSpec,
) -> Result<ExpansionCoefficients> {
    dim.check_subcritical(p)?;
    let (alpha_n, c1) = if dim.n() >= 5 {
        (Some(coefficient_alpha(dim, spec)?), Some(c1n(dim, spec)?))
    } else {
        (None, None)
    };
    let gamma_n = if dim.n() >= 4 {
        Some(coefficient_gamma(dim, spec)?)
    } else {
        None
    };
    Ok(ExpansionCoefficients {
        n: dim.n(),
        p,
        alpha_n,
        beta_n: coefficient_beta(dim, spec)?,
        gamma_n,
        c1n: c1,
        theta_n: theta_n(dim, p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::{bubble_value, BubbleParams, HalfSpacePoint};
    use std::f64::consts::PI;

    fn d(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn regimes() {
        let s = QuadratureSpec::default();
        assert!(matches!(
            coefficient_alpha(d(4), &s),
            Err(Error::RegimeViolation(_))
        ));
        assert!(matches!(
            coefficient_gamma(d(3), &s),
            Err(Error::RegimeViolation(_))
        ));
    }

    #[test]
    fn log_coefficient_is_eight_pi_squared() {
        assert!((log_coefficient_n4() - 8.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn gamma4_closed_form() {
        // int_{R^3} rho^2 / (3 + rho^2)^3 = 4 pi * 3 pi / (16 sqrt 3)
        let exact = 8f64.sqrt().powi(3) / 8.0 * 4.0 * PI * 3.0 * PI / (16.0 * 3f64.sqrt());
        let g = coefficient_gamma(d(4), &QuadratureSpec::default()).unwrap();
        assert!((g - exact).abs() < 1e-8 * exact, "{g} vs {exact}");
    }

    #[test]
    fn alpha_matches_mass_identity() {
        // integrating by parts in C_{1,N} gives alpha_N = (N/4) int U_1^2 for N >= 5
        for n in [5, 6] {
            let dim = d(n);
            let p = BubbleParams::new(dim, 1.0, 1.0).unwrap();
            let mass = integrate_halfspace(
                |rho, xn| bubble_value(&p, HalfSpacePoint { rho, xn }).powi(2),
                dim,
                &QuadratureSpec::default(),
            )
            .unwrap();
            let oracle = dim.nf() / 4.0 * mass.value;
            let alpha = coefficient_alpha(dim, &QuadratureSpec::default()).unwrap();
            assert!(
                (alpha - oracle).abs() < 1e-7 * oracle,
                "N={n}: {alpha} vs {oracle}"
            );
        }
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta_n(d(4), 3.0), 1.0);
        assert_eq!(theta_n(d(3), 5.0), 0.5);
    }
}
