//! Dimension-reduced integration over the half-space and its boundary.

pub mod tanh_sinh;

use std::cell::Cell;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bubble::{bubble_gradient, bubble_value, BubbleParams, HalfSpacePoint};
use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::special::sphere_area;
use tanh_sinh::Options;

/// Integration controls. Radial panels are placed at geometric multiples of
/// `scale`, plus 1 and 2 (the cutoff band) when they lie inside the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub radial_truncation: f64,
    /// Node cap per radial panel.
    pub nodes_rho: usize,
    /// Node cap per angular (inner) integral.
    pub nodes_xn: usize,
    pub rel_tol: f64,
    /// Integrate r over [0, inf) via r = s/(1-s) past the last breakpoint,
    /// ignoring `radial_truncation`.
    pub compactify: bool,
    /// Concentration length of the integrand.
    pub scale: f64,
}

impl QuadratureSpec {
    /// Whole half-space, rel_tol 1e-9.
    pub fn compactified() -> Self {
        Self {
            radial_truncation: f64::INFINITY,
            nodes_rho: 512,
            nodes_xn: 512,
            rel_tol: 1e-9,
            compactify: true,
            scale: 1.0,
        }
    }

    /// Hard truncation at radius `r`, rel_tol 1e-9.
    pub fn truncated(r: f64) -> Self {
        Self {
            radial_truncation: r,
            compactify: false,
            ..Self::compactified()
        }
    }

    pub fn with_scale(self, scale: f64) -> Self {
        Self { scale, ..self }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.compactify && !(self.radial_truncation > 0.0 && self.radial_truncation.is_finite())
        {
            return Err(Error::InvalidParameter(
                "radial truncation must be positive".into(),
            ));
        }
        if self.nodes_rho < 16 || self.nodes_xn < 16 {
            return Err(Error::InvalidParameter(
                "node counts must be at least 16".into(),
            ));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol {} outside (0, 1e-2]",
                self.rel_tol
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParameter("scale must be positive".into()));
        }
        Ok(())
    }

    /// Radial panel endpoints; the last entry is +inf when compactified.
    fn breakpoints(&self) -> Vec<f64> {
        let outer = if self.compactify {
            16.0 * self.scale.max(2.0)
        } else {
            self.radial_truncation
        };
        let mut pts = vec![0.0];
        let mut r = self.scale;
        while r < outer {
            pts.push(r);
            r *= 4.0;
        }
        for extra in [1.0, 2.0] {
            if extra < outer {
                pts.push(extra);
            }
        }
        pts.push(outer);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
        if self.compactify {
            pts.push(f64::INFINITY);
        }
        pts
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::compactified()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub nodes_used: usize,
    pub converged: bool,
}

impl IntegralResult {
    /// Converts an unconverged result into an error.
    pub fn require(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Unconverged {
                value: self.value,
                error: self.error_estimate,
            })
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self {
            value: c * self.value,
            error_estimate: c.abs() * self.error_estimate,
            ..self
        }
    }
}

/// Integrates g(r) dr over one panel; an infinite upper end is mapped by
/// r = a + s/(1-s).
fn panel<G: FnMut(f64) -> (f64, f64)>(
    mut g: G,
    a: f64,
    b: f64,
    opts: &Options,
) -> tanh_sinh::Estimate {
    if b.is_infinite() {
        tanh_sinh::integrate_with_aux(
            |s| {
                let one = 1.0 - s;
                if one <= 0.0 {
                    return (0.0, 0.0);
                }
                let r = a + s / one;
                let (v, e) = g(r);
                let jac = 1.0 / (one * one);
                (
                    if v == 0.0 { 0.0 } else { v * jac },
                    if e == 0.0 { 0.0 } else { e * jac },
                )
            },
            0.0,
            1.0,
            opts,
        )
    } else {
        tanh_sinh::integrate_with_aux(g, a, b, opts)
    }
}

fn finish(value: f64, error: f64, nodes: usize, rel_tol: f64) -> IntegralResult {
    let converged = error <= rel_tol * value.abs() || (value == 0.0 && error == 0.0);
    IntegralResult {
        value,
        error_estimate: error,
        nodes_used: nodes,
        converged,
    }
}

/// Integral over the N-dimensional half-space of an axisymmetric f(rho, x_N):
/// |S^{N-2}| * int int f rho^{N-2} drho dx_N, evaluated in polar coordinates
/// of the (rho, x_N) quarter plane.
pub fn integrate_halfspace<F>(f: F, dim: Dimension, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    spec.validate()?;
    let m = dim.nf() - 2.0;
    let outer = Options {
        rel_tol: spec.rel_tol,
        abs_tol: 1e-300,
        max_level: Options::level_for_nodes(spec.nodes_rho),
    };
    let inner = Options {
        rel_tol: 0.1 * spec.rel_tol,
        abs_tol: 1e-300,
        max_level: Options::level_for_nodes(spec.nodes_xn),
    };
    let pts = spec.breakpoints();
    let panels: Vec<(f64, f64)> = pts.windows(2).map(|w| (w[0], w[1])).collect();
    let results: Vec<Result<(f64, f64, usize)>> = panels
        .par_iter()
        .map(|&(a, b)| {
            let bad: Cell<Option<(f64, f64)>> = Cell::new(None);
            let inner_nodes = Cell::new(0usize);
            // the inner error rides along as the auxiliary component
            let g = |r: f64| {
                let e = tanh_sinh::integrate(
                    |psi: f64| {
                        let (s, c) = psi.sin_cos();
                        let rho = r * c;
                        let xn = r * s;
                        let v = f(rho, xn);
                        if !v.is_finite() {
                            bad.set(Some((rho, xn)));
                            return 0.0;
                        }
                        if v == 0.0 {
                            0.0
                        } else {
                            v * rho.powf(m) * r
                        }
                    },
                    0.0,
                    FRAC_PI_2,
                    &inner,
                );
                inner_nodes.set(inner_nodes.get() + e.evals);
                (e.value, e.error)
            };
            let est = panel(g, a, b, &outer);
            if let Some((rho, xn)) = bad.get() {
                return Err(Error::InvalidIntegrand { rho, xn });
            }
            let err = est.error + est.aux.abs();
            Ok((est.value, err, inner_nodes.get()))
        })
        .collect();
    let area = sphere_area(dim.n() - 1);
    let (mut value, mut error, mut nodes) = (0.0, 0.0, 0usize);
    for r in results {
        let (v, e, n) = r?;
        value += v;
        error += e;
        nodes += n;
    }
    Ok(finish(area * value, area * error, nodes, spec.rel_tol))
}

/// Integral over the boundary R^{N-1} of a radial g(rho):
/// |S^{N-2}| * int g(rho) rho^{N-2} drho.
pub fn integrate_boundary<G>(g: G, dim: Dimension, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    G: Fn(f64) -> f64 + Sync,
{
    spec.validate()?;
    let m = dim.nf() - 2.0;
    let opts = Options {
        rel_tol: spec.rel_tol,
        abs_tol: 1e-300,
        max_level: Options::level_for_nodes(spec.nodes_rho),
    };
    let pts = spec.breakpoints();
    let panels: Vec<(f64, f64)> = pts.windows(2).map(|w| (w[0], w[1])).collect();
    let results: Vec<Result<tanh_sinh::Estimate>> = panels
        .par_iter()
        .map(|&(a, b)| {
            let bad: Cell<Option<f64>> = Cell::new(None);
            let est = panel(
                |rho| {
                    let v = g(rho);
                    if !v.is_finite() {
                        bad.set(Some(rho));
                        return (0.0, 0.0);
                    }
                    if v == 0.0 {
                        (0.0, 0.0)
                    } else {
                        (v * rho.powf(m), 0.0)
                    }
                },
                a,
                b,
                &opts,
            );
            match bad.get() {
                Some(rho) => Err(Error::InvalidIntegrand { rho, xn: 0.0 }),
                None => Ok(est),
            }
        })
        .collect();
    let area = sphere_area(dim.n() - 1);
    let (mut value, mut error, mut nodes) = (0.0, 0.0, 0usize);
    for r in results {
        let e = r?;
        value += e.value;
        error += e.error;
        nodes += e.evals;
    }
    Ok(finish(area * value, area * error, nodes, spec.rel_tol))
}

/// K1 = int |grad U|^2, K2 = int U^{2*}, K3 = int_boundary U^{2_*} for the
/// bubble with tau = 1, and A = K1/2 - K2/2* - K3/2_*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleConstants {
    pub n: u32,
    pub eps: f64,
    pub k1: IntegralResult,
    pub k2: IntegralResult,
    pub k3: IntegralResult,
    pub a: f64,
}

impl BubbleConstants {
    /// K1 - K2 - K3, which vanishes identically.
    pub fn identity_residual(&self) -> f64 {
        self.k1.value - self.k2.value - self.k3.value
    }

    /// Error estimate of [`Self::identity_residual`] from the quadratures.
    pub fn identity_error(&self) -> f64 {
        self.k1.error_estimate + self.k2.error_estimate + self.k3.error_estimate
    }

    /// K2/N + K3/(2(N-1)), algebraically equal to A once K1 = K2 + K3.
    pub fn a_reduced(&self) -> f64 {
        let n = self.n as f64;
        self.k2.value / n + self.k3.value / (2.0 * (n - 1.0))
    }
}

/// Bubble constants at eps = 1.
pub fn bubble_constants(dim: Dimension, spec: &QuadratureSpec) -> Result<BubbleConstants> {
    bubble_constants_at(dim, 1.0, spec)
}

/// Bubble constants computed from U_eps; independent of eps by scaling.
pub fn bubble_constants_at(
    dim: Dimension,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<BubbleConstants> {
    let p = BubbleParams::new(dim, eps, 1.0)?;
    let spec = QuadratureSpec {
        compactify: true,
        scale: eps,
        ..*spec
    };
    let ts = dim.two_star();
    let tl = dim.two_lower();
    let (k1, (k2, k3)) = rayon::join(
        || {
            integrate_halfspace(
                |rho, xn| {
                    let (a, b) = bubble_gradient(&p, HalfSpacePoint { rho, xn });
                    a * a + b * b
                },
                dim,
                &spec,
            )
        },
        || {
            rayon::join(
                || {
                    integrate_halfspace(
                        |rho, xn| bubble_value(&p, HalfSpacePoint { rho, xn }).powf(ts),
                        dim,
                        &spec,
                    )
                },
                || {
                    integrate_boundary(
                        |rho| bubble_value(&p, HalfSpacePoint { rho, xn: 0.0 }).powf(tl),
                        dim,
                        &spec,
                    )
                },
            )
        },
    );
    let (k1, k2, k3) = (k1?.require()?, k2?.require()?, k3?.require()?);
    let a = k1.value / 2.0 - k2.value / ts - k3.value / tl;
    Ok(BubbleConstants {
        n: dim.n(),
        eps,
        k1,
        k2,
        k3,
        a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn d(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn gaussian_halfspace() {
        let r = integrate_halfspace(
            |a, b| (-(a * a + b * b)).exp(),
            d(3),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.value - PI.powf(1.5) / 2.0).abs() < 1e-10);
    }

    #[test]
    fn half_ball_volume() {
        let spec = QuadratureSpec::truncated(1.0);
        let r = integrate_halfspace(|_, _| 1.0, d(3), &spec).unwrap();
        assert!((r.value - 2.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn boundary_examples() {
        let r =
            integrate_boundary(|rho| (-rho * rho).exp(), d(3), &QuadratureSpec::default()).unwrap();
        assert!((r.value - PI).abs() < 1e-10);
        let r = integrate_boundary(|_| 1.0, d(4), &QuadratureSpec::truncated(1.0)).unwrap();
        assert!((r.value - 4.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn nan_is_reported() {
        let r = integrate_halfspace(
            |a, _| if a > 0.5 { f64::NAN } else { 1.0 },
            d(3),
            &QuadratureSpec::truncated(1.0),
        );
        assert!(matches!(r, Err(Error::InvalidIntegrand { .. })));
    }

    #[test]
    fn settings_validation() {
        let mut s = QuadratureSpec::default();
        s.nodes_rho = 8;
        assert!(s.validate().is_err());
        let s = QuadratureSpec::default().with_rel_tol(0.5);
        assert!(s.validate().is_err());
    }

    #[test]
    fn constants_n3_frozen() {
        // K3 = 3 pi / 4 for N = 3 (closed form of the boundary integral)
        let c = bubble_constants(d(3), &QuadratureSpec::default()).unwrap();
        assert!((c.k3.value - 0.75 * PI).abs() < 1e-9);
        assert!((c.k1.value - 2.7258806567).abs() < 1e-8);
        assert!((c.k2.value - 0.3696861665).abs() < 1e-8);
        assert!(c.identity_residual().abs() < 1e-8);
        assert!((c.a - c.a_reduced()).abs() < 1e-8);
    }
}
