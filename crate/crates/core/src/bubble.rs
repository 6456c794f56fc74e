//! The explicit bubble family, the Gaussian weight, the cutoff and the
//! weighted test function built from them.

use serde::{Deserialize, Serialize};

use crate::dim::Dimension;
use crate::error::{Error, Result};

/// Largest |x|^2 accepted by [`weight`].
pub const WEIGHT_GUARD: f64 = 600.0;

/// Parameters (N, eps, tau) of the bubble
/// phi(x) = (eps sqrt(N(N-2)) / (eps^2 + rho^2 + (x_N + eps tau x0)^2))^{(N-2)/2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub dim: Dimension,
    pub eps: f64,
    pub tau: f64,
}

impl BubbleParams {
    pub fn new(dim: Dimension, eps: f64, tau: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tau must be nonnegative, got {tau}"
            )));
        }
        Ok(Self { dim, eps, tau })
    }

    fn shift(&self) -> f64 {
        self.eps * self.tau * self.dim.x0()
    }

    fn denom(&self, x: HalfSpacePoint) -> f64 {
        let w = x.xn + self.shift();
        self.eps * self.eps + x.rho * x.rho + w * w
    }

    /// k_N eps^{(N-2)/2}, the prefactor of D^{-(N-2)/2}.
    fn amplitude(&self) -> f64 {
        self.dim.k_n() * self.eps.powf((self.dim.nf() - 2.0) / 2.0)
    }
}

/// A point (|x'|, x_N) of the closed half-space in axisymmetric coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpacePoint {
    pub rho: f64,
    pub xn: f64,
}

impl HalfSpacePoint {
    pub fn new(rho: f64, xn: f64) -> Result<Self> {
        if !(rho >= 0.0 && xn >= 0.0) || !rho.is_finite() || !xn.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "half-space point needs rho >= 0, x_N >= 0, got ({rho}, {xn})"
            )));
        }
        Ok(Self { rho, xn })
    }

    pub fn norm_sq(self) -> f64 {
        self.rho * self.rho + self.xn * self.xn
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }
}

pub fn bubble_value(p: &BubbleParams, x: HalfSpacePoint) -> f64 {
    let a = (p.dim.nf() - 2.0) / 2.0;
    p.amplitude() * p.denom(x).powf(-a)
}

/// Analytic gradient (d/drho, d/dx_N).
pub fn bubble_gradient(p: &BubbleParams, x: HalfSpacePoint) -> (f64, f64) {
    let n = p.dim.nf();
    let c = -(n - 2.0) * p.amplitude() * p.denom(x).powf(-n / 2.0);
    (c * x.rho, c * (x.xn + p.shift()))
}

/// Second derivatives (phi_rho_rho, phi_rho / rho, phi_xN_xN); the middle
/// entry is the regular limit at the axis.
fn bubble_second(p: &BubbleParams, x: HalfSpacePoint) -> (f64, f64, f64) {
    let n = p.dim.nf();
    let a = (n - 2.0) / 2.0;
    let d = p.denom(x);
    let c = p.amplitude();
    let first = -2.0 * a * c * d.powf(-a - 1.0);
    let second = 4.0 * a * (a + 1.0) * c * d.powf(-a - 2.0);
    let w = x.xn + p.shift();
    (
        first + second * x.rho * x.rho,
        first,
        first + second * w * w,
    )
}

/// Laplacian in N dimensions of the axisymmetric bubble, assembled from the
/// analytic second derivatives: phi_rr + (N-2) phi_r / r + phi_zz.
pub fn bubble_laplacian(p: &BubbleParams, x: HalfSpacePoint) -> f64 {
    let (rr, r_over, zz) = bubble_second(p, x);
    rr + (p.dim.nf() - 2.0) * r_over + zz
}

/// Interior residual -Laplacian(phi) - phi^{2*-1}.
pub fn pde_residual(p: &BubbleParams, x: HalfSpacePoint) -> Result<f64> {
    if x.xn <= 0.0 {
        return Err(Error::BoundaryPoint);
    }
    let phi = bubble_value(p, x);
    Ok(-bubble_laplacian(p, x) - phi.powf(p.dim.two_star() - 1.0))
}

/// Boundary residual (-d phi / d x_N) - tau phi^{2_*-1} on x_N = 0.
pub fn boundary_residual(p: &BubbleParams, rho: f64) -> f64 {
    let x = HalfSpacePoint { rho, xn: 0.0 };
    let (_, dz) = bubble_gradient(p, x);
    -dz - p.tau * bubble_value(p, x).powf(p.dim.two_lower() - 1.0)
}

/// Gaussian weight K(x) = exp(|x|^2 / 4).
pub fn weight(x: HalfSpacePoint) -> Result<f64> {
    let r2 = x.norm_sq();
    if r2 > WEIGHT_GUARD {
        return Err(Error::WeightOverflow(r2));
    }
    Ok((r2 / 4.0).exp())
}

fn smooth_h(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

fn smooth_h_prime(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        smooth_h(s) / (s * s)
    }
}

/// Radial profile of the cutoff: 1 on [0,1], 0 on [2,inf), C-infinity smooth
/// step in between.
pub fn cutoff_profile(r: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 2.0 {
        return 0.0;
    }
    let a = smooth_h(2.0 - r);
    let b = smooth_h(r - 1.0);
    a / (a + b)
}

/// d/dr of [`cutoff_profile`].
pub fn cutoff_profile_derivative(r: f64) -> f64 {
    if r <= 1.0 || r >= 2.0 {
        return 0.0;
    }
    let a = smooth_h(2.0 - r);
    let b = smooth_h(r - 1.0);
    let da = -smooth_h_prime(2.0 - r);
    let db = smooth_h_prime(r - 1.0);
    (da * b - a * db) / ((a + b) * (a + b))
}

pub fn cutoff(x: HalfSpacePoint) -> f64 {
    cutoff_profile(x.norm())
}

fn require_unit_tau(p: &BubbleParams) -> Result<()> {
    if p.tau != 1.0 {
        return Err(Error::TauNotOne(p.tau));
    }
    Ok(())
}

/// Test function K^{-1/2} * cutoff * phi_{eps,1}.
pub fn test_function(p: &BubbleParams, x: HalfSpacePoint) -> Result<f64> {
    require_unit_tau(p)?;
    let phi = cutoff(x);
    if phi == 0.0 {
        return Ok(0.0);
    }
    Ok(phi * bubble_value(p, x) / weight(x)?.sqrt())
}

/// K^{1/2} times the gradient of the test function, i.e.
/// grad(cutoff * U) - (x/4) cutoff * U. Its squared length is the integrand of
/// the weighted energy.
pub fn weighted_test_gradient(p: &BubbleParams, x: HalfSpacePoint) -> Result<(f64, f64)> {
    require_unit_tau(p)?;
    let r = x.norm();
    let phi = cutoff_profile(r);
    let dphi = cutoff_profile_derivative(r);
    if phi == 0.0 && dphi == 0.0 {
        return Ok((0.0, 0.0));
    }
    let u = bubble_value(p, x);
    let (ur, uz) = bubble_gradient(p, x);
    let (er, ez) = if r > 0.0 {
        (x.rho / r, x.xn / r)
    } else {
        (0.0, 0.0)
    };
    let gr = phi * ur + u * dphi * er - 0.25 * x.rho * phi * u;
    let gz = phi * uz + u * dphi * ez - 0.25 * x.xn * phi * u;
    Ok((gr, gz))
}
