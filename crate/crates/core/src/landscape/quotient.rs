//! Sobolev-type quotients
//! ||grad u||^2 / (theta ||u||_{2*}^2 + (1 - theta) ||u||_{2_*, boundary}^2),
//! unweighted or with the weight K in every integral.

use crate::asymptotics::{critical_volume_norm, trace_norm, weighted_energy};
use crate::bubble::{bubble_gradient, bubble_value, BubbleParams, HalfSpacePoint};
use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_boundary, integrate_halfspace, QuadratureSpec};

/// Quotient from the three totals int |grad u|^2, int |u|^{2*}, int_boundary |u|^{2_*}.
pub fn quotient_from_totals(
    dim: Dimension,
    grad_sq: f64,
    vol: f64,
    bnd: f64,
    theta: f64,
) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in (0, 1], got {theta}"
        )));
    }
    let den =
        theta * vol.powf(2.0 / dim.two_star()) + (1.0 - theta) * bnd.powf(2.0 / dim.two_lower());
    if !(den > 0.0) {
        return Err(Error::TrivialFunction);
    }
    Ok(grad_sq / den)
}

/// Quotient of an axisymmetric function given with its gradient. With
/// `weighted`, each integral carries K(x) = exp(|x|^2/4); pass a truncated
/// `QuadratureSpec` in that case.
pub fn sobolev_quotient<F, G>(
    u: F,
    grad: G,
    dim: Dimension,
    theta: f64,
    weighted: bool,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
    G: Fn(f64, f64) -> (f64, f64) + Sync,
{
    let k = |rho: f64, xn: f64| {
        if weighted {
            ((rho * rho + xn * xn) / 4.0).exp()
        } else {
            1.0
        }
    };
    let ts = dim.two_star();
    let tl = dim.two_lower();
    let g = integrate_halfspace(
        |rho, xn| {
            let (a, b) = grad(rho, xn);
            k(rho, xn) * (a * a + b * b)
        },
        dim,
        spec,
    )?
    .require()?;
    let v = integrate_halfspace(|rho, xn| k(rho, xn) * u(rho, xn).abs().powf(ts), dim, spec)?
        .require()?;
    let b =
        integrate_boundary(|rho| k(rho, 0.0) * u(rho, 0.0).abs().powf(tl), dim, spec)?.require()?;
    quotient_from_totals(dim, g.value, v.value, b.value, theta)
}

/// theta = |phi|_{2*}^{2*-2} / (|phi|_{2*}^{2*-2} + tau |phi|_{2_*}^{2_*-2}), the
/// parameter at which the bubble is extremal.
pub fn bubble_theta(params: &BubbleParams, spec: &QuadratureSpec) -> Result<f64> {
    let dim = params.dim;
    let s = QuadratureSpec {
        compactify: true,
        scale: params.eps,
        ..*spec
    };
    let ts = dim.two_star();
    let tl = dim.two_lower();
    let v = integrate_halfspace(
        |rho, xn| bubble_value(params, HalfSpacePoint { rho, xn }).powf(ts),
        dim,
        &s,
    )?
    .require()?;
    let b = integrate_boundary(
        |rho| bubble_value(params, HalfSpacePoint { rho, xn: 0.0 }).powf(tl),
        dim,
        &s,
    )?
    .require()?;
    let k2 = v.value.powf((ts - 2.0) / ts);
    let k3 = b.value.powf((tl - 2.0) / tl);
    Ok(k2 / (k2 + params.tau * k3))
}

/// Unweighted quotient of the bubble over the whole half-space.
pub fn bubble_quotient(params: &BubbleParams, theta: f64, spec: &QuadratureSpec) -> Result<f64> {
    let s = QuadratureSpec {
        compactify: true,
        scale: params.eps,
        ..*spec
    };
    sobolev_quotient(
        |rho, xn| bubble_value(params, HalfSpacePoint { rho, xn }),
        |rho, xn| bubble_gradient(params, HalfSpacePoint { rho, xn }),
        params.dim,
        theta,
        false,
        &s,
    )
}

/// Weighted quotient of the test function K^{-1/2} cutoff U_eps.
pub fn test_function_quotient(
    eps: f64,
    dim: Dimension,
    theta: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let g = weighted_energy(eps, dim, spec)?;
    let v = critical_volume_norm(eps, dim, spec)?;
    let b = trace_norm(eps, dim, spec)?;
    quotient_from_totals(dim, g.value, v.value, b.value, theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_function_rejected() {
        let d = Dimension::new(4).unwrap();
        assert_eq!(
            quotient_from_totals(d, 0.0, 0.0, 0.0, 0.5),
            Err(Error::TrivialFunction)
        );
        assert!(quotient_from_totals(d, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bubble_quotient_eps_independent() {
        let d = Dimension::new(4).unwrap();
        let s = QuadratureSpec::default().with_rel_tol(1e-11);
        let p1 = BubbleParams::new(d, 1.0, 1.0).unwrap();
        let theta = bubble_theta(&p1, &s).unwrap();
        let q1 = bubble_quotient(&p1, theta, &s).unwrap();
        for eps in [0.3, 2.5] {
            let p = BubbleParams::new(d, eps, 1.0).unwrap();
            assert!((bubble_theta(&p, &s).unwrap() - theta).abs() < 1e-9);
            let q = bubble_quotient(&p, theta, &s).unwrap();
            assert!((q - q1).abs() < 1e-7 * q1, "{q} vs {q1}");
        }
    }
}
