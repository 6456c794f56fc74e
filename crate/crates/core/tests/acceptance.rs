//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Tolerances are fixed here and never adapted to results.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use halfspace_core::asymptotics::fit::fine_end_order;
use halfspace_core::asymptotics::{
    coefficient_alpha, coefficient_gamma, energy_ladder, fit_expansion_with, log_coefficient_n4,
    ExpansionFit, Total, DEFAULT_LADDER,
};
use halfspace_core::bubble::{
    boundary_residual, bubble_value, pde_residual, BubbleParams, HalfSpacePoint,
};
use halfspace_core::landscape::{
    closed_form_t, fiber_max, threshold_a_lambda, verify_threshold, FiberCurve, FunctionalParams,
    MuMode,
};
use halfspace_core::quadrature::{bubble_constants, bubble_constants_at, QuadratureSpec};
use halfspace_core::solver::{
    descend, functional_value, gaussian_rayleigh_quotient, gradient, hardy_check,
    hardy_check_exact, initial_direction, nonexistence_certificate, rayleigh_min_on,
    two_grid_solve, AxisymField, Discretization, Grid, Nonlinearity, SolverConfig, Verdict,
};
use halfspace_core::Dimension;

struct Verdict_ {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict_ {
    Verdict_ { pass, detail }
}

fn d(n: u32) -> Dimension {
    Dimension::new(n).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Criterion 9's fine-grid candidate, reused by criterion 10.
#[derive(Default)]
struct Shared {
    candidate: Option<AxisymField>,
}

fn c1(_: &mut Shared) -> Verdict_ {
    let s = QuadratureSpec::default();
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut ok = true;
    for n in 3..=6 {
        let c = bubble_constants(d(n), &s).unwrap();
        let r = c.identity_residual().abs() / c.k1.value;
        worst = worst.max(r);
        ok &= r <= 1e-6;
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        ok && secs <= 10.0,
        format!("max |K1-K2-K3|/K1 = {worst:.2e} (tol 1e-6), {secs:.2} s (limit 10 s)"),
    )
}

fn c2(_: &mut Shared) -> Verdict_ {
    let s = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for n in 3..=6 {
        let base = bubble_constants_at(d(n), 1.0, &s).unwrap();
        for eps in [0.25, 0.5, 2.0] {
            let c = bubble_constants_at(d(n), eps, &s).unwrap();
            for (a, b) in [(c.k1, base.k1), (c.k2, base.k2), (c.k3, base.k3)] {
                worst = worst.max(rel(a.value, b.value));
            }
        }
    }
    verdict(
        worst <= 1e-7,
        format!("max relative spread over eps in {{0.25, 0.5, 1, 2}}: {worst:.2e} (tol 1e-7)"),
    )
}

fn c3(_: &mut Shared) -> Verdict_ {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut wi, mut wb) = (0.0f64, 0.0f64);
    for n in 3..=5 {
        let dim = d(n);
        for _ in 0..200 {
            let eps = 10f64.powf(rng.random_range(-1.0..1.0));
            let p = BubbleParams::new(dim, eps, 1.0).unwrap();
            let x = HalfSpacePoint {
                rho: 10f64.powf(rng.random_range(-3.0..1.0)),
                xn: 10f64.powf(rng.random_range(-3.0..1.0)),
            };
            let rhs = bubble_value(&p, x).powf(dim.two_star() - 1.0);
            wi = wi.max(pde_residual(&p, x).unwrap().abs() / rhs);
            let rho = x.rho;
            let b = bubble_value(&p, HalfSpacePoint { rho, xn: 0.0 }).powf(dim.two_lower() - 1.0);
            wb = wb.max(boundary_residual(&p, rho).abs() / b);
        }
    }
    verdict(
        wi <= 1e-6 && wb <= 1e-10,
        format!("interior max rel residual {wi:.2e} (tol 1e-6), boundary {wb:.2e} (tol 1e-10), 200 points per N in 3..5"),
    )
}

fn c4(_: &mut Shared) -> Verdict_ {
    let s = QuadratureSpec::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 3..=6 {
        let half = n as f64 / 2.0;
        let q = gaussian_rayleigh_quotient(d(n), &s).unwrap();
        let fine = rayleigh_min_on(
            &Discretization::new(d(n), Grid::default()).unwrap(),
            1e-12,
            500,
        )
        .unwrap();
        let coarse = rayleigh_min_on(
            &Discretization::new(d(n), Grid::with_cells(120).unwrap()).unwrap(),
            1e-12,
            500,
        )
        .unwrap();
        let (ef, ec) = (rel(fine.value, half), rel(coarse.value, half));
        ok &= (q - half).abs() <= 1e-8 && ef <= 0.02 && ef < ec;
        parts.push(format!(
            "N={n}: |Q-N/2|={:.1e}, grid {:.3}% (n=120: {:.3}%)",
            (q - half).abs(),
            100.0 * ef,
            100.0 * ec
        ));
    }
    verdict(ok, parts.join("; "))
}

fn c5(_: &mut Shared) -> Verdict_ {
    let s = QuadratureSpec::default();
    let g = |a: f64, b: f64| (-(a * a + b * b) / 4.0).exp();
    let (l, r) =
        hardy_check_exact(g, |a, b| (-a / 2.0 * g(a, b), -b / 2.0 * g(a, b)), d(3), &s).unwrap();
    let ratio = r.value / l.value;
    let exact_ok = rel(ratio, 5.0 / 3.0) <= 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = 0;
    let mut min_ratio = f64::INFINITY;
    for n in 3..=5 {
        let disc = Discretization::new(d(n), Grid::default()).unwrap();
        let mut tested = 0;
        while tested < 100 {
            let u = AxisymField::random_bumps(disc.grid, d(n), &mut rng).unwrap();
            if u.values.iter().all(|v| *v == 0.0) {
                continue;
            }
            let h = hardy_check(&disc, &u).unwrap();
            min_ratio = min_ratio.min(h.rhs / h.lhs);
            if !h.holds(0.0) {
                failures += 1;
            }
            tested += 1;
        }
    }
    verdict(
        exact_ok && failures == 0,
        format!("Gaussian N=3 rhs/lhs = {ratio:.10} (5/3 to 1e-6); random fields: {failures} failures of 300, min rhs/lhs {min_ratio:.3}"),
    )
}

fn fit(
    n: u32,
    p: f64,
    total: Total,
    rungs: &[halfspace_core::asymptotics::EnergyBreakdown],
) -> ExpansionFit {
    let s = QuadratureSpec::default();
    let c = bubble_constants(d(n), &s).unwrap();
    let limit = match total {
        Total::Energy => c.k1.value,
        Total::Critical => c.k2.value,
        Total::Trace => c.k3.value,
        Total::Subcritical => 0.0,
    };
    let v: Vec<f64> = rungs.iter().map(|b| total.of(b).value).collect();
    fit_expansion_with(
        &DEFAULT_LADDER,
        &v,
        limit,
        total.model(d(n), p),
        total.companion_order(d(n), p),
    )
    .unwrap()
}

fn c6(_: &mut Shared) -> Verdict_ {
    let s = QuadratureSpec::default();
    let t5 = Instant::now();
    let r5 = energy_ladder(&DEFAULT_LADDER, 3.0, d(5), &s).unwrap();
    let a5 = coefficient_alpha(d(5), &s).unwrap();
    let f5 = fit(5, 3.0, Total::Energy, &r5).fitted_coefficient;
    let s5 = t5.elapsed().as_secs_f64();
    let t4 = Instant::now();
    let r4 = energy_ladder(&DEFAULT_LADDER, 3.0, d(4), &s).unwrap();
    let e4 = fit(4, 3.0, Total::Energy, &r4).fitted_coefficient;
    let g4 = coefficient_gamma(d(4), &s).unwrap();
    let tr4 = -fit(4, 3.0, Total::Trace, &r4).fitted_coefficient;
    let o4 = fit(4, 3.0, Total::Subcritical, &r4).fitted_order;
    let s4 = t4.elapsed().as_secs_f64();
    let l = log_coefficient_n4();
    let ok = rel(f5, a5) <= 0.05
        && rel(e4, l) <= 0.10
        && rel(tr4, g4) <= 0.05
        && (o4 - 1.0).abs() <= 0.1
        && s4 <= 300.0
        && s5 <= 300.0;
    verdict(
        ok,
        format!(
            "N=5 alpha fit {f5:.3} vs {a5:.3} ({:.2}%, tol 5%); N=4 log fit {e4:.3} vs 8pi^2 {l:.3} ({:.2}%, tol 10%); \
             N=4 gamma fit {tr4:.4} vs {g4:.4} ({:.2}%, tol 5%); N=4 p=3 slope {o4:.3} (1 +- 0.1); {s4:.1} s / {s5:.1} s",
            100.0 * rel(f5, a5),
            100.0 * rel(e4, l),
            100.0 * rel(tr4, g4)
        ),
    )
}

fn c7(_: &mut Shared) -> Verdict_ {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut unit_worst = 0.0f64;
    for _ in 0..1000 {
        let dim = d(rng.random_range(3..=6));
        let c = FiberCurve {
            k1e: rng.random_range(0.1..100.0),
            k2e: rng.random_range(0.1..100.0),
            k3e: rng.random_range(0.0..100.0),
            k4e: 0.0,
            mu_weight: 0.0,
            p: 2.5,
            dim,
        };
        let t = closed_form_t(&c).unwrap();
        let (tn, _) = fiber_max(&c).unwrap();
        worst = worst.max(rel(tn, t));
        // K1 = K2 + K3 in exactly representable dyadic values
        let k2 = rng.random_range(1..1 << 20) as f64 / 1024.0;
        let k3 = rng.random_range(0..1 << 20) as f64 / 1024.0;
        let u = FiberCurve {
            k1e: k2 + k3,
            k2e: k2,
            k3e: k3,
            ..c
        };
        unit_worst = unit_worst.max((closed_form_t(&u).unwrap() - 1.0).abs());
    }
    verdict(
        worst <= 1e-8 && unit_worst == 0.0,
        format!("max |t_closed - t_numeric|/t = {worst:.2e} on 1000 triples (tol 1e-8); max |t - 1| on K1=K2+K3: {unit_worst:e}"),
    )
}

fn c8(_: &mut Shared) -> Verdict_ {
    let s = QuadratureSpec::default();
    let ladder = [0.1, 0.07, 0.05, 0.035, 0.025];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, n, p, expected) in [("(i) N=4 p=3", 4, 3.0, 1.0), ("(ii) N=3 p=5", 3, 5.0, 0.5)] {
        let r = verify_threshold(d(n), 1.0, MuMode::Fixed { mu: 1.0 }, p, &ladder, &s).unwrap();
        let m: Vec<f64> = r.ladder.iter().map(|x| x.margin).collect();
        let positive = m.iter().all(|&v| v > 0.0);
        let order = if positive {
            fine_end_order(&ladder, &m)
        } else {
            f64::NAN
        };
        let good = positive && (order - expected).abs() <= 0.15;
        ok &= good;
        parts.push(format!(
            "{name}: margins {m:.4?}, order {order:.3} (want {expected} +- 0.15)"
        ));
    }
    let l3 = [0.05, 0.035, 0.025];
    let r = verify_threshold(d(3), 1.0, MuMode::InverseSqrtEps, 3.0, &l3, &s).unwrap();
    let m: Vec<f64> = r.ladder.iter().map(|x| x.margin).collect();
    ok &= m.iter().all(|&v| v > 0.0);
    parts.push(format!(
        "(iii) N=3 p=3 mu=eps^-1/2: margins {m:.4?} at eps {l3:?}"
    ));
    verdict(ok, parts.join("; "))
}

fn c9(sh: &mut Shared) -> Verdict_ {
    let t0 = Instant::now();
    let dim = d(4);
    let fp = FunctionalParams::new(dim, 1.0, 1.0, 3.0).unwrap();
    let disc = Discretization::new(dim, Grid::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut fd_worst = 0.0f64;
    for _ in 0..20 {
        let u = AxisymField::random_bumps(disc.grid, dim, &mut rng).unwrap();
        let v = AxisymField::random_bumps(disc.grid, dim, &mut rng).unwrap();
        let shift = |h: f64| AxisymField {
            values: u
                .values
                .iter()
                .zip(&v.values)
                .map(|(a, b)| a + h * b)
                .collect(),
            ..u.clone()
        };
        let h = 1e-4;
        let fd = (functional_value(&disc, &shift(h), &fp).unwrap()
            - functional_value(&disc, &shift(-h), &fp).unwrap())
            / (2.0 * h);
        let g = gradient(&disc, &u, &fp, Nonlinearity::Even).unwrap();
        let an: f64 = g
            .dual
            .iter()
            .zip(disc.restrict(&v).iter())
            .map(|(a, b)| a * b)
            .sum();
        fd_worst = fd_worst.max((fd - an).abs() / an.abs());
    }
    drop(disc);
    let a = threshold_a_lambda(1.0, dim, &QuadratureSpec::default()).unwrap();
    let rep = two_grid_solve(
        &fp,
        Grid::with_cells(120).unwrap(),
        Grid::default(),
        &SolverConfig::default(),
    )
    .unwrap();
    let (rc, rf) = (
        rep.pohozaev_coarse.residuals(),
        rep.pohozaev_fine.residuals(),
    );
    let decrease = rf.a2 <= rc.a2 && rf.a3 <= rc.a3 && rf.p1 <= rc.p1;
    let f = &rep.fine;
    let secs = t0.elapsed().as_secs_f64();
    let ok = fd_worst <= 1e-5
        && rep.coarse.monotone()
        && f.monotone()
        && f.converged()
        && f.level > 0.0
        && f.level < a
        && rf.worst() <= 0.02
        && decrease
        && secs <= 600.0;
    sh.candidate = Some(f.field.clone());
    verdict(
        ok,
        format!(
            "FD max rel {fd_worst:.2e} (tol 1e-5, 20 pairs); level {:.5} in (0, A={a:.5}), {:?} after {} steps, grad ratio {:.1e}; \
             Pohozaev fine (a2,a3,p1) = ({:.3}%, {:.3}%, {:.3}%) coarse ({:.3}%, {:.3}%, {:.3}%); {secs:.0} s (limit 600 s)",
            f.level,
            f.status,
            f.iterations,
            f.grad_ratio(),
            100.0 * rf.a2,
            100.0 * rf.a3,
            100.0 * rf.p1,
            100.0 * rc.a2,
            100.0 * rc.a3,
            100.0 * rc.p1
        ),
    )
}

fn c10(sh: &mut Shared) -> Verdict_ {
    let dim = d(4);
    let disc = Discretization::new(dim, Grid::default()).unwrap();
    let a = threshold_a_lambda(1.0, dim, &QuadratureSpec::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut ok = true;
    let mut parts = Vec::new();
    for mu in [0.0, -0.5] {
        let fp = FunctionalParams::new(dim, 1.0, mu, 3.0).unwrap();
        let mut fields: Vec<AxisymField> = (0..40)
            .map(|_| AxisymField::random_bumps(disc.grid, dim, &mut rng).unwrap())
            .collect();
        for s in [0.3, 1.0, 3.0] {
            fields.push(
                AxisymField::from_fn(disc.grid, dim, |r, z| (-(r * r + z * z) / s).exp()).unwrap(),
            );
        }
        for eps in [0.0125, 0.05, 0.1] {
            fields.push(initial_direction(&disc, eps).unwrap());
        }
        if let Some(c) = &sh.candidate {
            fields.push(c.clone());
        }
        let mut min_gap = f64::INFINITY;
        let mut nontrivial = 0;
        for u in &fields {
            let c = nonexistence_certificate(&disc, u, &fp).unwrap();
            if c.verdict == Verdict::Trivial {
                continue;
            }
            nontrivial += 1;
            ok &= c.verdict == Verdict::IdentityViolated && c.gap > 0.0;
            min_gap = min_gap.min(c.gap / c.l2_norm_sq);
        }
        parts.push(format!("mu={mu}: {nontrivial} trial fields, min gap/||u||^2 {min_gap:.3} (Hardy floor N/4 = 1)"));
        for eps in [0.05, 0.1] {
            let start = initial_direction(&disc, eps).unwrap();
            let r = descend(&disc, &fp, &SolverConfig::default(), &start).unwrap();
            let drop = r.l2_mass_initial / r.l2_mass_final;
            let min_level = r.levels.iter().copied().fold(f64::INFINITY, f64::min);
            let cert = nonexistence_certificate(&disc, &r.field, &fp).unwrap();
            let good = drop > 10.0 && min_level > a && cert.gap > 0.0 && r.monotone();
            ok &= good;
            parts.push(format!(
                "mu={mu} start eps={eps}: L2 mass {:.3e} -> {:.3e} (x{drop:.1}), min level {min_level:.5} > A={a:.5}, {:?} after {}, final gap {:.3e}",
                r.l2_mass_initial, r.l2_mass_final, r.status, r.iterations, cert.gap
            ));
        }
    }
    verdict(ok, parts.join("; "))
}

fn main() {
    let criteria: [(u32, fn(&mut Shared) -> Verdict_); 10] = [
        (1, c1),
        (2, c2),
        (3, c3),
        (4, c4),
        (5, c5),
        (6, c6),
        (7, c7),
        (8, c8),
        (9, c9),
        (10, c10),
    ];
    let mut shared = Shared::default();
    let mut failed = Vec::new();
    for (k, f) in criteria {
        let t = Instant::now();
        let v = f(&mut shared);
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {k}: {tag} [{:.1} s] {}",
            t.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.pass {
            failed.push(k);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
