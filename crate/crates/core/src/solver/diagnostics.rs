//! Eigenvalue, Hardy and Pohozaev diagnostics. The Pohozaev and Hardy
//! integrals are unweighted.

use serde::{Deserialize, Serialize};

use super::fem::{dot, Discretization};
use super::field::AxisymField;
use super::grid::Grid;
use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::landscape::FunctionalParams;
use crate::quadrature::{integrate_halfspace, IntegralResult, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayleighMin {
    pub value: f64,
    pub iterations: usize,
    /// Relative change of the quotient in the last iteration.
    pub last_change: f64,
}

/// Smallest value of int K|grad u|^2 / int K u^2 over the discrete space,
/// by inverse power iteration started from the Gaussian e^{-|x|^2/4}.
pub fn rayleigh_min_on(disc: &Discretization, tol: f64, max_iter: usize) -> Result<RayleighMin> {
    let start = AxisymField::from_fn(disc.grid, disc.dim, |r, z| (-(r * r + z * z) / 4.0).exp())?;
    let mut x = disc.restrict(&start);
    let mut prev = f64::INFINITY;
    for it in 1..=max_iter {
        let y = disc.stiffness_solve(&disc.weighted_mass_apply(&x));
        let my = disc.weighted_mass_apply(&y);
        let norm = dot(&y, &my).sqrt();
        x = y / norm;
        let value = disc.energy_inner(&x, &x) / dot(&x, &disc.weighted_mass_apply(&x));
        let change = ((value - prev) / value).abs();
        if change <= tol {
            return Ok(RayleighMin {
                value,
                iterations: it,
                last_change: change,
            });
        }
        prev = value;
    }
    Err(Error::NotConverged(format!(
        "inverse power iteration after {max_iter} steps"
    )))
}

pub fn rayleigh_min(dim: Dimension, grid: Grid) -> Result<RayleighMin> {
    rayleigh_min_on(&Discretization::new(dim, grid)?, 1e-12, 500)
}

/// Rayleigh quotient of e^{-|x|^2/4} by half-space quadrature.
pub fn gaussian_rayleigh_quotient(dim: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    // K |grad u|^2 = |x|^2/4 e^{-|x|^2/4}, K u^2 = e^{-|x|^2/4}
    let num = integrate_halfspace(
        |r, z| (r * r + z * z) / 4.0 * (-(r * r + z * z) / 4.0).exp(),
        dim,
        spec,
    )?
    .require()?;
    let den = integrate_halfspace(|r, z| (-(r * r + z * z) / 4.0).exp(), dim, spec)?.require()?;
    Ok(num.value / den.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyCheck {
    /// (N^2/4) int u^2
    pub lhs: f64,
    /// int (x . grad u)^2
    pub rhs: f64,
}

impl HardyCheck {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + rel_tol)
    }
}

pub fn hardy_check(disc: &Discretization, u: &AxisymField) -> Result<HardyCheck> {
    let n = disc.dim.nf();
    let l2 = disc.integrate(u, |s| s.w * s.u * s.u)?;
    let xg = disc.integrate(u, |s| {
        let d = s.rho * s.u_rho + s.xn * s.u_xn;
        s.w * d * d
    })?;
    Ok(HardyCheck {
        lhs: n * n / 4.0 * l2,
        rhs: xg,
    })
}

/// Hardy sides for an explicit function with its gradient, by quadrature.
pub fn hardy_check_exact<F, G>(
    u: F,
    grad: G,
    dim: Dimension,
    spec: &QuadratureSpec,
) -> Result<(IntegralResult, IntegralResult)>
where
    F: Fn(f64, f64) -> f64 + Sync,
    G: Fn(f64, f64) -> (f64, f64) + Sync,
{
    let n = dim.nf();
    let l2 = integrate_halfspace(|r, z| u(r, z).powi(2), dim, spec)?.require()?;
    let xg = integrate_halfspace(
        |r, z| {
            let (a, b) = grad(r, z);
            (r * a + z * b).powi(2)
        },
        dim,
        spec,
    )?
    .require()?;
    Ok((l2.scaled(n * n / 4.0), xg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub id_a2_lhs: f64,
    pub id_a2_rhs: f64,
    pub id_a3_lhs: f64,
    pub id_a3_rhs: f64,
    pub id_p1_lhs: f64,
    pub id_p1_rhs: f64,
    pub hardy_lhs: f64,
    pub hardy_rhs: f64,
}

fn relative_gap(l: f64, r: f64) -> f64 {
    let m = l.abs().max(r.abs());
    if m == 0.0 {
        0.0
    } else {
        (l - r).abs() / m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevResiduals {
    pub a2: f64,
    pub a3: f64,
    pub p1: f64,
}

impl PohozaevResiduals {
    pub fn worst(&self) -> f64 {
        self.a2.max(self.a3).max(self.p1)
    }
}

impl PohozaevReport {
    /// |lhs - rhs| / max(|lhs|, |rhs|) per identity.
    pub fn residuals(&self) -> PohozaevResiduals {
        PohozaevResiduals {
            a2: relative_gap(self.id_a2_lhs, self.id_a2_rhs),
            a3: relative_gap(self.id_a3_lhs, self.id_a3_rhs),
            p1: relative_gap(self.id_p1_lhs, self.id_p1_rhs),
        }
    }
}

/// Both sides of
///   ||grad u||^2 - int u f(u) - int_boundary u g(u) = -(N/4) ||u||_2^2,
///   (N-2)/2 ||grad u||^2 - N int F(u) - (N-1) int_boundary G(u) = -1/2 int (x.grad u)^2,
///   mu (N/p - (N-2)/2) ||u||_p^p = 1/2 int (x.grad u)^2 - N(N-2)/8 ||u||_2^2,
/// with f(u) = lambda|u|^{2*-2}u + mu|u|^{p-2}u, g(u) = sqrt(lambda)|u|^{2_*-2}u.
pub fn pohozaev_report(
    disc: &Discretization,
    u: &AxisymField,
    fp: &FunctionalParams,
) -> Result<PohozaevReport> {
    if fp.dim != disc.dim {
        return Err(Error::InvalidParameter(
            "functional and discretisation disagree on N".into(),
        ));
    }
    let n = disc.dim.nf();
    let (ts, tl, p) = (disc.dim.two_star(), disc.dim.two_lower(), fp.p);
    let grad2 = disc.integrate(u, |s| s.w * (s.u_rho * s.u_rho + s.u_xn * s.u_xn))?;
    let l2 = disc.integrate(u, |s| s.w * s.u * s.u)?;
    let xg = disc.integrate(u, |s| {
        let d = s.rho * s.u_rho + s.xn * s.u_xn;
        s.w * d * d
    })?;
    let lp = disc.integrate(u, |s| s.w * s.u.abs().powf(p))?;
    let l2s = disc.integrate(u, |s| s.w * s.u.abs().powf(ts))?;
    let trace = disc.integrate_boundary(u, |s| s.w * s.u.abs().powf(tl))?;

    let uf = fp.lambda * l2s + fp.mu * lp;
    let big_f = fp.lambda * l2s / ts + fp.mu * lp / p;
    let ug = fp.lambda.sqrt() * trace;
    let big_g = ug / tl;
    Ok(PohozaevReport {
        id_a2_lhs: grad2 - uf - ug,
        id_a2_rhs: -n / 4.0 * l2,
        id_a3_lhs: (n - 2.0) / 2.0 * grad2 - n * big_f - (n - 1.0) * big_g,
        id_a3_rhs: -0.5 * xg,
        id_p1_lhs: fp.mu * (n / p - (n - 2.0) / 2.0) * lp,
        id_p1_rhs: 0.5 * xg - n * (n - 2.0) / 8.0 * l2,
        hardy_lhs: n * n / 4.0 * l2,
        hardy_rhs: xg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The field is zero to grid noise.
    Trivial,
    /// The identity cannot balance: rhs - lhs > 0 strictly.
    IdentityViolated,
    /// Gap not positive beyond noise; would contradict the Hardy bound.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceCertificate {
    /// rhs - lhs of the mu-identity.
    pub gap: f64,
    /// (N/4) ||u||_2^2, the lower bound on the gap implied by Hardy.
    pub hardy_floor: f64,
    pub l2_norm_sq: f64,
    pub noise: f64,
    pub verdict: Verdict,
    pub consistent_with_nonexistence: bool,
}

/// For mu <= 0, evaluates 1/2 int (x.grad u)^2 - N(N-2)/8 ||u||^2
/// - mu (N/p - (N-2)/2) ||u||_p^p, which is >= (N/4)||u||^2 by Hardy.
pub fn nonexistence_certificate(
    disc: &Discretization,
    u: &AxisymField,
    fp: &FunctionalParams,
) -> Result<NonexistenceCertificate> {
    if fp.mu > 0.0 {
        return Err(Error::InvalidParameter(format!(
            "certificate needs mu <= 0, got {}",
            fp.mu
        )));
    }
    let rep = pohozaev_report(disc, u, fp)?;
    let n = disc.dim.nf();
    let l2 = rep.hardy_lhs / (n * n / 4.0);
    let gap = rep.id_p1_rhs - rep.id_p1_lhs;
    // roundoff level of the three summed integrals
    let noise = 1e-12 * (rep.id_p1_lhs.abs() + rep.hardy_rhs.abs() + n * n * l2);
    let umax = u.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let verdict = if umax <= 1e-12 || l2 == 0.0 {
        Verdict::Trivial
    } else if gap > noise {
        Verdict::IdentityViolated
    } else {
        Verdict::Inconclusive
    };
    Ok(NonexistenceCertificate {
        gap,
        hardy_floor: n / 4.0 * l2,
        l2_norm_sq: l2,
        noise,
        verdict,
        consistent_with_nonexistence: verdict != Verdict::Inconclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_quotient_is_half_n() {
        let s = QuadratureSpec::default();
        for n in 3..=6 {
            let q = gaussian_rayleigh_quotient(Dimension::new(n).unwrap(), &s).unwrap();
            assert!((q - n as f64 / 2.0).abs() < 1e-8, "N={n}: {q}");
        }
    }

    #[test]
    fn gaussian_hardy_ratio() {
        let s = QuadratureSpec::default();
        for n in 3..=5 {
            let d = Dimension::new(n).unwrap();
            let (l, r) = hardy_check_exact(
                |a, b| (-(a * a + b * b) / 4.0).exp(),
                |a, b| {
                    let e = (-(a * a + b * b) / 4.0).exp();
                    (-a / 2.0 * e, -b / 2.0 * e)
                },
                d,
                &s,
            )
            .unwrap();
            let nf = n as f64;
            assert!((r.value / l.value - (nf + 2.0) / nf).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_field_reports() {
        let d = Dimension::new(4).unwrap();
        let disc = Discretization::new(d, Grid::new(6.0, 6.0, 32, 32, 2.0).unwrap()).unwrap();
        let z = AxisymField::zeros(disc.grid, d);
        let fp = FunctionalParams::new(d, 1.0, -0.5, 3.0).unwrap();
        let rep = pohozaev_report(&disc, &z, &fp).unwrap();
        assert_eq!(rep.residuals().worst(), 0.0);
        assert_eq!(rep.id_a3_lhs, 0.0);
        let h = hardy_check(&disc, &z).unwrap();
        assert_eq!((h.lhs, h.rhs), (0.0, 0.0));
        let c = nonexistence_certificate(&disc, &z, &fp).unwrap();
        assert_eq!(c.verdict, Verdict::Trivial);
        assert!(c.consistent_with_nonexistence);
        let pos = FunctionalParams::new(d, 1.0, 0.5, 3.0).unwrap();
        assert!(nonexistence_certificate(&disc, &z, &pos).is_err());
    }
}
