//! Discrete energies
//! J(u) = 1/2 int K|grad u|^2 - mu/p int K|u|^p - lambda/2* int K|u|^{2*}
//!        - sqrt(lambda)/2_* int_boundary K|u|^{2_*}
//! and its truncation I (u replaced by u_+ in the nonlinear terms).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::fem::{dot, Discretization};
use super::field::AxisymField;
use crate::error::{Error, Result};
use crate::landscape::{fiber_max, FiberCurve, FunctionalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    /// |u|, the even functional J.
    Even,
    /// u_+, the truncated functional I.
    Positive,
}

impl Nonlinearity {
    fn magnitude(self, u: f64) -> f64 {
        match self {
            Self::Even => u.abs(),
            Self::Positive => u.max(0.0),
        }
    }

    /// d/du of |u|^q / q (or u_+^q / q).
    fn derivative(self, u: f64, q: f64) -> f64 {
        let m = self.magnitude(u);
        if m == 0.0 {
            0.0
        } else {
            m.powf(q - 1.0) * u.signum()
        }
    }
}

/// The four integrals entering J: int K|grad u|^2, int K|u|^p,
/// int K|u|^{2*}, int_boundary K|u|^{2_*}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub quadratic: f64,
    pub subcritical: f64,
    pub critical: f64,
    pub trace: f64,
}

impl Totals {
    pub fn energy(&self, fp: &FunctionalParams) -> f64 {
        let (ts, tl) = (fp.dim.two_star(), fp.dim.two_lower());
        self.quadratic / 2.0
            - fp.mu * self.subcritical / fp.p
            - fp.lambda * self.critical / ts
            - fp.lambda.sqrt() * self.trace / tl
    }

    /// Fiber t -> energy of t u.
    pub fn fiber(&self, fp: &FunctionalParams) -> FiberCurve {
        FiberCurve {
            k1e: self.quadratic,
            k2e: fp.lambda * self.critical,
            k3e: fp.lambda.sqrt() * self.trace,
            k4e: self.subcritical,
            mu_weight: fp.mu,
            p: fp.p,
            dim: fp.dim,
        }
    }
}

fn check_params(disc: &Discretization, fp: &FunctionalParams) -> Result<()> {
    if fp.dim != disc.dim {
        return Err(Error::InvalidParameter(
            "functional and discretisation disagree on N".into(),
        ));
    }
    Ok(())
}

pub fn totals(
    disc: &Discretization,
    u: &AxisymField,
    fp: &FunctionalParams,
    part: Nonlinearity,
) -> Result<Totals> {
    check_params(disc, fp)?;
    let (ts, tl, p) = (fp.dim.two_star(), fp.dim.two_lower(), fp.p);
    let x = disc.restrict(u);
    let quadratic = disc.energy_inner(&x, &x);
    let subcritical = disc.integrate(u, |s| s.w * s.k * part.magnitude(s.u).powf(p))?;
    let critical = disc.integrate(u, |s| s.w * s.k * part.magnitude(s.u).powf(ts))?;
    let trace = disc.integrate_boundary(u, |s| s.w * s.k * part.magnitude(s.u).powf(tl))?;
    Ok(Totals {
        quadratic,
        subcritical,
        critical,
        trace,
    })
}

/// The even functional J.
pub fn functional_value(
    disc: &Discretization,
    u: &AxisymField,
    fp: &FunctionalParams,
) -> Result<f64> {
    Ok(totals(disc, u, fp, Nonlinearity::Even)?.energy(fp))
}

/// The truncated functional I.
pub fn truncated_value(
    disc: &Discretization,
    u: &AxisymField,
    fp: &FunctionalParams,
) -> Result<f64> {
    Ok(totals(disc, u, fp, Nonlinearity::Positive)?.energy(fp))
}

#[derive(Debug, Clone)]
pub struct Gradient {
    /// Riesz representative r with (r, v)_A = <J'(u), v>.
    pub riesz: AxisymField,
    /// <J'(u), phi_s> on the free nodes.
    pub dual: DVector<f64>,
    /// ||r||_A.
    pub norm: f64,
}

pub fn gradient(
    disc: &Discretization,
    u: &AxisymField,
    fp: &FunctionalParams,
    part: Nonlinearity,
) -> Result<Gradient> {
    check_params(disc, fp)?;
    let (ts, tl, p, mu, lambda) = (
        fp.dim.two_star(),
        fp.dim.two_lower(),
        fp.p,
        fp.mu,
        fp.lambda,
    );
    let sl = lambda.sqrt();
    let b = disc.load(
        u,
        |x| mu * part.derivative(x, p) + lambda * part.derivative(x, ts),
        |x| sl * part.derivative(x, tl),
    )?;
    let dual = disc.stiffness_apply(&disc.restrict(u)) - b;
    let r = disc.stiffness_solve(&dual);
    let norm = dot(&r, &dual).max(0.0).sqrt();
    Ok(Gradient {
        riesz: disc.extend(&r),
        dual,
        norm,
    })
}

/// Riesz gradient of the even functional J in the int K grad.grad inner
/// product.
pub fn functional_gradient(
    disc: &Discretization,
    u: &AxisymField,
    fp: &FunctionalParams,
) -> Result<AxisymField> {
    Ok(gradient(disc, u, fp, Nonlinearity::Even)?.riesz)
}

/// (x, y)_A for two fields.
pub fn energy_inner(disc: &Discretization, x: &AxisymField, y: &AxisymField) -> f64 {
    disc.energy_inner(&disc.restrict(x), &disc.restrict(y))
}

/// (t*, sup_t I(t u)) for the truncated functional.
pub fn sup_fiber(
    disc: &Discretization,
    u: &AxisymField,
    fp: &FunctionalParams,
) -> Result<(f64, f64)> {
    let t = totals(disc, u, fp, Nonlinearity::Positive)?;
    if !(t.critical > 0.0) {
        return Err(Error::TrivialFunction);
    }
    fiber_max(&t.fiber(fp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dim::Dimension;
    use crate::solver::grid::Grid;

    fn setup() -> (Discretization, FunctionalParams) {
        let d = Dimension::new(4).unwrap();
        let disc = Discretization::new(d, Grid::new(6.0, 6.0, 40, 40, 2.0).unwrap()).unwrap();
        (disc, FunctionalParams::new(d, 1.0, 1.0, 3.0).unwrap())
    }

    #[test]
    fn zero_field() {
        let (disc, fp) = setup();
        let z = AxisymField::zeros(disc.grid, disc.dim);
        assert_eq!(functional_value(&disc, &z, &fp).unwrap(), 0.0);
        let g = gradient(&disc, &z, &fp, Nonlinearity::Even).unwrap();
        assert_eq!(g.norm, 0.0);
        assert!(g.riesz.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn even_and_truncated() {
        let (disc, fp) = setup();
        let u = AxisymField::from_fn(disc.grid, disc.dim, |r, z| {
            0.3 * (-(r * r + z * z) / 4.0).exp() - 0.05
        })
        .unwrap();
        let j = functional_value(&disc, &u, &fp).unwrap();
        let jm = functional_value(&disc, &u.negated(), &fp).unwrap();
        assert!((j - jm).abs() <= 1e-14 * j.abs().max(1.0));
        let i = truncated_value(&disc, &u, &fp).unwrap();
        let im = truncated_value(&disc, &u.negated(), &fp).unwrap();
        assert!(i != im);
    }

    #[test]
    fn quadratic_part_of_gaussian_positive() {
        let (disc, _) = setup();
        let fp0 = FunctionalParams::new(disc.dim, 1e-300, 0.0, 3.0).unwrap();
        let u = AxisymField::from_fn(disc.grid, disc.dim, |r, z| (-(r * r + z * z) / 4.0).exp())
            .unwrap();
        let t = totals(&disc, &u, &fp0, Nonlinearity::Even).unwrap();
        let j = functional_value(&disc, &u, &fp0).unwrap();
        assert!(j > 0.0 && (j - t.quadratic / 2.0).abs() < 1e-12 * j);
    }
}
