//! Inf-sup descent c* = inf_u sup_t I(t u): exact maximisation along the ray,
//! then a Riesz-gradient step on the direction.

use serde::{Deserialize, Serialize};

use super::diagnostics::{pohozaev_report, PohozaevReport};
use super::fem::Discretization;
use super::field::AxisymField;
use super::functional::{energy_inner, gradient, sup_fiber, totals, Nonlinearity};
use super::grid::Grid;
use crate::bubble::{test_function, BubbleParams, HalfSpacePoint};
use crate::error::{Error, Result};
use crate::landscape::FunctionalParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Initial step along the Riesz gradient.
    pub step: f64,
    pub max_outer: usize,
    /// Stop once ||grad||_A <= grad_tol * initial ||grad||_A.
    pub grad_tol: f64,
    /// Largest accepted |g'(t*)| / (t* K1) at the ray maximiser.
    pub inner_t_tol: f64,
    /// Concentration of the initial direction K^{-1/2} * cutoff * U_eps.
    pub init_eps: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step: 1.0,
            max_outer: 5000,
            grad_tol: 1e-6,
            inner_t_tol: 1e-10,
            init_eps: 0.0125,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.step > 0.0
            && self.grad_tol > 0.0
            && self.inner_t_tol > 0.0
            && self.init_eps > 0.0
            && self.init_eps <= 0.5
            && self.max_outer > 0;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "invalid solver configuration {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// max_outer reached above grad_tol.
    MaxIterations,
    /// Backtracking could not lower the level any further.
    Stagnated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    /// Candidate t* u.
    pub field: AxisymField,
    pub level: f64,
    pub t_star: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub initial_level: f64,
    pub grad_norm_initial: f64,
    pub grad_norm_final: f64,
    /// Level after every accepted step, starting with the initial level.
    pub levels: Vec<f64>,
    /// Unweighted int u^2 of the candidate at the start and at the end.
    pub l2_mass_initial: f64,
    pub l2_mass_final: f64,
    /// min u / max u of the candidate.
    pub min_over_max: f64,
}

impl SolveResult {
    pub fn grad_ratio(&self) -> f64 {
        self.grad_norm_final / self.grad_norm_initial
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// Levels never increase along accepted steps.
    pub fn monotone(&self) -> bool {
        self.levels.windows(2).all(|w| w[1] <= w[0])
    }
}

/// K^{-1/2} * cutoff * U_eps sampled on the grid.
pub fn initial_direction(disc: &Discretization, eps: f64) -> Result<AxisymField> {
    let bp = BubbleParams::new(disc.dim, eps, 1.0)?;
    let mut err = None;
    let f = AxisymField::from_fn(disc.grid, disc.dim, |r, z| {
        test_function(&bp, HalfSpacePoint { rho: r, xn: z }).unwrap_or_else(|e| {
            err = Some(e);
            0.0
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    f
}

fn l2_mass(disc: &Discretization, u: &AxisymField) -> Result<f64> {
    disc.integrate(u, |s| s.w * s.u * s.u)
}

fn normalized(disc: &Discretization, u: &AxisymField) -> Result<AxisymField> {
    let n = energy_inner(disc, u, u).sqrt();
    if !(n > 0.0) {
        return Err(Error::TrivialFunction);
    }
    Ok(u.scaled(1.0 / n))
}

fn ray_max(
    disc: &Discretization,
    u: &AxisymField,
    fp: &FunctionalParams,
    tol: f64,
) -> Result<(f64, f64)> {
    let (t, level) = sup_fiber(disc, u, fp)?;
    let tot = totals(disc, u, fp, Nonlinearity::Positive)?;
    let slope = tot.fiber(fp).reduced_derivative(t) / tot.quadratic;
    if slope.abs() > tol {
        return Err(Error::NotConverged(format!(
            "ray maximiser: relative slope {slope:e} at t = {t}"
        )));
    }
    Ok((t, level))
}

/// Descent from a given direction on a prepared discretisation.
pub fn descend(
    disc: &Discretization,
    fp: &FunctionalParams,
    cfg: &SolverConfig,
    start: &AxisymField,
) -> Result<SolveResult> {
    cfg.validate()?;
    let mut u = normalized(disc, start)?;
    let (mut t, mut level) = ray_max(disc, &u, fp, cfg.inner_t_tol)?;
    let initial_level = level;
    let l2_mass_initial = l2_mass(disc, &u.scaled(t))?;
    let mut levels = vec![level];
    let mut step = cfg.step;
    let mut g0 = f64::NAN;
    let mut gn = f64::NAN;
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    for it in 0..cfg.max_outer {
        iterations = it;
        let g = gradient(disc, &u.scaled(t), fp, Nonlinearity::Positive)?;
        gn = g.norm;
        if it == 0 {
            g0 = gn;
            if g0 == 0.0 {
                status = SolveStatus::Converged;
                break;
            }
        }
        if gn <= cfg.grad_tol * g0 {
            status = SolveStatus::Converged;
            break;
        }
        let mut accepted = false;
        while step >= 1e-14 {
            let trial = AxisymField {
                values: u
                    .values
                    .iter()
                    .zip(&g.riesz.values)
                    .map(|(a, r)| a - step * r / t)
                    .collect(),
                ..u.clone()
            };
            let trial = normalized(disc, &trial)?;
            match ray_max(disc, &trial, fp, cfg.inner_t_tol) {
                Ok((tn, ln)) if ln <= level => {
                    u = trial;
                    t = tn;
                    level = ln;
                    levels.push(level);
                    step *= 1.2;
                    accepted = true;
                    break;
                }
                Ok(_) | Err(Error::TrivialFunction) => step *= 0.5,
                Err(e) => return Err(e),
            }
        }
        if !accepted {
            status = SolveStatus::Stagnated;
            iterations = it + 1;
            break;
        }
        iterations = it + 1;
    }
    if status == SolveStatus::MaxIterations {
        gn = gradient(disc, &u.scaled(t), fp, Nonlinearity::Positive)?.norm;
        if gn <= cfg.grad_tol * g0 {
            status = SolveStatus::Converged;
        }
    }
    let field = u.scaled(t);
    let (lo, hi) = (field.min(), field.max());
    Ok(SolveResult {
        l2_mass_final: l2_mass(disc, &field)?,
        min_over_max: if hi > 0.0 { lo / hi } else { f64::NAN },
        field,
        level,
        t_star: t,
        status,
        iterations,
        initial_level,
        grad_norm_initial: g0,
        grad_norm_final: gn,
        levels,
        l2_mass_initial,
    })
}

/// Mountain-pass candidate for the truncated functional, started from the
/// concentrated test function with eps = cfg.init_eps.
pub fn mountain_pass_solve(
    fp: &FunctionalParams,
    grid: Grid,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let disc = Discretization::new(fp.dim, grid)?;
    let start = initial_direction(&disc, cfg.init_eps)?;
    descend(&disc, fp, cfg, &start)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoGridReport {
    pub coarse: SolveResult,
    pub fine: SolveResult,
    pub pohozaev_coarse: PohozaevReport,
    pub pohozaev_fine: PohozaevReport,
    /// |level_fine - level_coarse|.
    pub level_error_estimate: f64,
}

/// Independent cold-start solves on `coarse` and `fine`. Each run stops
/// relative to its own initial gradient norm; a warm start would begin near
/// the critical point and push that reference below the level's rounding floor.
pub fn two_grid_solve(
    fp: &FunctionalParams,
    coarse: Grid,
    fine: Grid,
    cfg: &SolverConfig,
) -> Result<TwoGridReport> {
    let dc = Discretization::new(fp.dim, coarse)?;
    let rc = descend(&dc, fp, cfg, &initial_direction(&dc, cfg.init_eps)?)?;
    let pc = pohozaev_report(&dc, &rc.field, fp)?;
    drop(dc);
    let df = Discretization::new(fp.dim, fine)?;
    let rf = descend(&df, fp, cfg, &initial_direction(&df, cfg.init_eps)?)?;
    let pf = pohozaev_report(&df, &rf.field, fp)?;
    Ok(TwoGridReport {
        level_error_estimate: (rf.level - rc.level).abs(),
        coarse: rc,
        fine: rf,
        pohozaev_coarse: pc,
        pohozaev_fine: pf,
    })
}
