//! Acceptance criteria. Each test prints one `CRITERION n PASS|FAIL` line
//! with the measured quantities before asserting.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use irs_robust::baseline::nonrobust_design;
use irs_robust::channel::{ChannelB2I, PhaseShifts, ReflectChannel};
use irs_robust::geometry::{EffectiveAngles, UraGeometry};
use irs_robust::harness::evaluate::{evaluate, Beamformer, EvalMode, EvalReport, Scheme};
use irs_robust::harness::scenario::Scenario;
use irs_robust::harness::sweep::{sweep_power_vs_rate, SweepRow};
use irs_robust::location::{
    error_sensitivity, ErrorSensitivity, LocationError, Position3D, UncertaintyBall,
};
use irs_robust::optimizer::{alternate, DesignSolution};
use irs_robust::parallel::Execution;
use irs_robust::quadratic::{
    exact_received_power, lift_for_w, lift_for_xi, taylor_quadratic, CompositeVector,
    RobustQuadratic,
};
use irs_robust::sdp::{
    self, AffineForm, LinearConstraint, Lmi, Relation, ScalarVar, SdpProblem, SdpStatus, Sense,
    SolverOptions,
};
use irs_robust::trust_region::min_quadratic_over_ball;
use irs_robust::{CMatrix, CVector, Complex64};

fn report(n: u32, passed: bool, elapsed: Duration, detail: &str) {
    println!(
        "CRITERION {n} {}: {detail} ({:.2} s)",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
}

fn cn(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn cvec(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| cn(rng))
}

/// Random instance: BS 2×2, IRS 4×2, user 15–40 m away from the IRS.
struct Instance {
    g_hat: ReflectChannel,
    b2i: ChannelB2I,
    sens: ErrorSensitivity,
    ball: UncertaintyBall,
    w: CVector,
    xi: PhaseShifts,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let irs = UraGeometry::half_wavelength(4, 2).unwrap();
    let n = 4;
    let dir = loop {
        let v = Vector3::new(
            rng.random_range(0.2..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm() > 0.3 {
            break v.normalize();
        }
    };
    let user = Position3D::from_vector(dir * rng.random_range(15.0..40.0));
    let sens = error_sensitivity(Position3D::ORIGIN, user, &irs).unwrap();
    let angles = EffectiveAngles::new(sens.v_hat.z, sens.v_hat.y);
    Instance {
        g_hat: ReflectChannel::new(cn(rng), angles, &irs),
        b2i: ChannelB2I {
            matrix: CMatrix::from_fn(irs.len(), n, |_, _| cn(rng)),
        },
        sens,
        ball: UncertaintyBall::new(rng.random_range(0.5..4.0)).unwrap(),
        w: cvec(rng, n),
        xi: PhaseShifts::from_phases((0..irs.len()).map(|_| rng.random_range(-3.2..3.2))),
    }
}

impl Instance {
    fn composite(&self) -> CompositeVector {
        CompositeVector::new(&self.g_hat, &self.xi, &self.b2i, &self.w).unwrap()
    }
}

fn rel(err: f64, reference: f64) -> f64 {
    err / reference.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn criterion_1_taylor_oracle_fidelity() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_val, mut worst_grad, mut worst_hess) = (0.0f64, 0.0f64, 0.0f64);
    let (mut ratio_lo, mut ratio_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..50 {
        let inst = random_instance(&mut rng);
        let d = inst.composite();
        let rq = taylor_quadratic(&d, &inst.sens, &inst.ball).unwrap();
        let dh = inst.sens.d_hat;
        // Exact power as a function of the normalized error Δ̄ = Δ / d̂.
        let f = |x: Vector3<f64>| {
            exact_received_power(&d, &inst.sens, &LocationError { delta: x * dh })
        };
        let f0 = f(Vector3::zeros());
        worst_val = worst_val.max(rel(f0 - rq.q0, rq.q0));

        let hg = 1e-5;
        let grad = Vector3::from_fn(|k, _| {
            let e = Vector3::ith(k, hg);
            (f(e) - f(-e)) / (2.0 * hg)
        });
        worst_grad = worst_grad.max(rel((grad - rq.phi).norm(), rq.phi.norm()));

        let hh = 1e-4;
        let hess = Matrix3::from_fn(|a, b| {
            let (ea, eb) = (Vector3::ith(a, hh), Vector3::ith(b, hh));
            (f(ea + eb) - f(ea - eb) - f(eb - ea) + f(-ea - eb)) / (4.0 * hh * hh)
        });
        worst_hess = worst_hess.max(rel((hess - rq.phi_mat).norm(), rq.phi_mat.norm()));

        let u: Vector3<f64> = Vector3::from_fn(|_, _| rng.sample(StandardNormal)).normalize();
        let s = 2e-3;
        let remainder = |t: f64| (f(u * t) - rq.eval(&(u * t))).abs();
        let ratio = remainder(s) / remainder(s / 2.0);
        ratio_lo = ratio_lo.min(ratio);
        ratio_hi = ratio_hi.max(ratio);
    }
    let elapsed = t0.elapsed();
    let passed = worst_val <= 1e-5
        && worst_grad <= 1e-5
        && worst_hess <= 1e-5
        && ratio_lo >= 6.0
        && ratio_hi <= 10.0
        && elapsed < Duration::from_secs(10);
    report(
        1,
        passed,
        elapsed,
        &format!(
            "rel err value {worst_val:.1e} grad {worst_grad:.1e} hess {worst_hess:.1e}; \
             remainder ratio in [{ratio_lo:.2}, {ratio_hi:.2}]"
        ),
    );
    assert!(passed);
}

/// Largest `γ` with an S-procedure certificate, from the SDP backend.
fn certify(rq: &RobustQuadratic) -> (f64, f64, SdpProblem) {
    let rho = rq.rho();
    let mut p = SdpProblem::new(1, false, Sense::Maximize);
    let gamma = p.add_scalar(ScalarVar::bounded_below("gamma", -1e3));
    let mu = p.add_scalar(ScalarVar::nonneg("mu"));
    p.objective = AffineForm::default().with_scalar(gamma, 1.0);
    p.linear.push(LinearConstraint {
        form: AffineForm::matrix(CMatrix::identity(1, 1)).with_constant(-1.0),
        relation: Relation::Eq,
    });
    let mut lmi = Lmi::zeros(4);
    *lmi.entry_mut(0, 0) = AffineForm::constant(rq.q0)
        .with_scalar(gamma, -1.0)
        .with_scalar(mu, -1.0);
    for k in 0..3 {
        *lmi.entry_mut(0, k + 1) = AffineForm::constant(0.5 * rq.phi[k]);
        for l in k..3 {
            let mut e = AffineForm::constant(0.5 * rq.phi_mat[(k, l)]);
            if k == l {
                e = e.with_scalar(mu, 1.0 / (rho * rho));
            }
            *lmi.entry_mut(k + 1, l + 1) = e;
        }
    }
    p.lmis.push(lmi);
    let sol = sdp::solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Optimal, "{}", sol.diagnostic);
    let rep = sdp::verify(&p, &sol, 1e-8);
    assert!(rep.max_violation <= 1e-8, "{rep:?}");
    (sol.scalar("gamma").unwrap(), sol.scalar("mu").unwrap(), p)
}

#[test]
fn criterion_2_s_procedure_soundness() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst_oracle = f64::INFINITY;
    let mut worst_sample = f64::INFINITY;
    let mut worst_tightness: f64 = 0.0;
    for _ in 0..50 {
        let inst = random_instance(&mut rng);
        let mut rq = taylor_quadratic(&inst.composite(), &inst.sens, &inst.ball).unwrap();
        // Normalize to q0 = 1 so the absolute tolerance is meaningful.
        let k = 1.0 / rq.q0;
        rq.q0 = 1.0;
        rq.phi *= k;
        rq.phi_mat *= k;
        let (gamma, _mu, _) = certify(&rq);
        let oracle = min_quadratic_over_ball(&rq).value;
        worst_oracle = worst_oracle.min(oracle - gamma);
        worst_tightness = worst_tightness.max((oracle - gamma).abs());
        for _ in 0..1000 {
            let v: Vector3<f64> = Vector3::from_fn(|_, _| rng.sample(StandardNormal)).normalize();
            let r = rq.rho() * rng.random::<f64>().cbrt();
            worst_sample = worst_sample.min(rq.eval(&(v * r)) - gamma);
        }
    }
    let elapsed = t0.elapsed();
    let passed =
        worst_oracle >= -1e-7 && worst_sample >= -1e-7 && elapsed < Duration::from_secs(30);
    report(
        2,
        passed,
        elapsed,
        &format!(
            "min(oracle - gamma) {worst_oracle:.2e}, min(sample - gamma) {worst_sample:.2e}, \
             max |oracle - gamma| {worst_tightness:.1e}"
        ),
    );
    assert!(passed);
}

enum Kind {
    Convex,
    Indefinite,
    Concave,
    Hard,
}

fn random_quadratic(rng: &mut ChaCha8Rng, kind: &Kind) -> RobustQuadratic {
    let q = nalgebra::QR::new(Matrix3::from_fn(|_, _| {
        rng.sample::<f64, _>(StandardNormal)
    }))
    .q();
    let mut eig: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.1..3.0));
    match kind {
        Kind::Convex => {}
        Kind::Indefinite => eig[0] = -eig[0],
        Kind::Concave => eig.iter_mut().for_each(|e| *e = -*e),
        Kind::Hard => {
            eig.sort_by(f64::total_cmp);
            eig[0] = -eig[0];
        }
    }
    let h = q * Matrix3::from_diagonal(&Vector3::from(eig)) * q.transpose();
    let radius = rng.random_range(0.3..2.0);
    let mut g: Vector3<f64> = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    if let Kind::Hard = kind {
        // Orthogonal to the bottom eigenvector and small enough that the
        // shifted solution stays strictly inside the ball.
        let bottom = q.column(0).into_owned();
        g -= bottom * bottom.dot(&g);
        g *= 0.2 * radius * eig[0].abs().min((eig[1] - eig[0]).abs()) / g.norm().max(1e-300);
    }
    RobustQuadratic {
        q0: rng.random_range(-1.0..1.0),
        phi: g,
        phi_mat: h,
        d_hat: 1.0,
        radius,
    }
}

#[test]
fn criterion_3_trust_region_oracle() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let kinds = [Kind::Convex, Kind::Indefinite, Kind::Concave, Kind::Hard];
    // Cubic lattice with about 10⁵ points inside the unit ball.
    let n = 58;
    let step = 2.0 / (n - 1) as f64;
    let lattice: Vec<Vector3<f64>> = (0..n * n * n)
        .map(|i| {
            let c = |k: usize| -1.0 + step * k as f64;
            Vector3::new(c(i % n), c((i / n) % n), c(i / (n * n)))
        })
        .filter(|v| v.norm() <= 1.0)
        .collect();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_fraction: f64 = 0.0;
    for k in 0..100 {
        let rq = random_quadratic(&mut rng, &kinds[k % 4]);
        let rho = rq.rho();
        let best = min_quadratic_over_ball(&rq);
        assert!(best.argmin.norm() <= rho * (1.0 + 1e-12));
        let grid = lattice
            .iter()
            .map(|v| rq.eval(&(v * rho)))
            .fold(f64::INFINITY, f64::min);
        // Every ball point is within √3·h of a lattice point in the ball.
        let h = rho * step * 3f64.sqrt();
        let lip = rq.phi.norm() + rq.phi_mat.norm() * rho;
        let resolution = lip * h + 0.5 * rq.phi_mat.norm() * h * h;
        worst_excess = worst_excess.max(best.value - grid);
        worst_fraction = worst_fraction.max((grid - best.value) / resolution);
    }
    let elapsed = t0.elapsed();
    let passed =
        worst_excess <= 1e-12 && worst_fraction <= 1.0 && elapsed < Duration::from_secs(60);
    report(
        3,
        passed,
        elapsed,
        &format!(
            "{} lattice points; max(oracle - grid) {worst_excess:.1e}; \
             max (grid - oracle)/resolution {worst_fraction:.3}",
            lattice.len()
        ),
    );
    assert!(passed);
}

fn quad_rel_err(a: &RobustQuadratic, b: &RobustQuadratic) -> f64 {
    let scale = a.q0.abs() + a.phi.norm() + a.phi_mat.norm();
    ((a.q0 - b.q0).abs() + (a.phi - b.phi).norm() + (a.phi_mat - b.phi_mat).norm()) / scale
}

#[test]
fn criterion_4_lift_consistency() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut worst_w, mut worst_xi) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let inst = random_instance(&mut rng);
        let direct = taylor_quadratic(&inst.composite(), &inst.sens, &inst.ball).unwrap();
        let lw = lift_for_w(&inst.xi, &inst.g_hat, &inst.b2i, &inst.sens, &inst.ball).unwrap();
        let by_w = lw.evaluate(&(&inst.w * inst.w.adjoint())).unwrap();
        let lx = lift_for_xi(&inst.w, &inst.g_hat, &inst.b2i, &inst.sens, &inst.ball).unwrap();
        let x = inst.xi.as_vector();
        let by_xi = lx.evaluate(&(x * x.adjoint())).unwrap();
        worst_w = worst_w.max(quad_rel_err(&direct, &by_w));
        worst_xi = worst_xi.max(quad_rel_err(&direct, &by_xi));
    }
    let elapsed = t0.elapsed();
    let passed = worst_w <= 1e-8 && worst_xi <= 1e-8 && elapsed < Duration::from_secs(10);
    report(
        4,
        passed,
        elapsed,
        &format!("max rel err beamformer lift {worst_w:.1e}, phase lift {worst_xi:.1e}"),
    );
    assert!(passed);
}

fn desk(upsilon: f64) -> Scenario {
    Scenario {
        upsilon_m: upsilon,
        target_rate_bps_hz: 4.0,
        ..Scenario::default()
    }
}

struct Comparison {
    solution: DesignSolution,
    robust: EvalReport,
    nonrobust: EvalReport,
    nominal_rate: f64,
    elapsed: Duration,
}

fn compare(s: &Scenario, trials: usize) -> Comparison {
    let t0 = Instant::now();
    let real = s.realize().unwrap();
    let sol = alternate(&real.ctx, &s.optimizer_config(Execution::Parallel)).unwrap();
    let base = nonrobust_design(&real.ctx, sol.power).unwrap();
    assert!(
        (base.power - sol.power).abs() <= 1e-9 * sol.power,
        "equal-power fairness"
    );
    let rb = Beamformer {
        scheme: Scheme::Robust,
        w: sol.w.clone(),
        xi: sol.xi.clone(),
    };
    let nb = Beamformer {
        scheme: Scheme::Nonrobust,
        w: base.w,
        xi: base.xi,
    };
    let robust = evaluate(
        &rb,
        s,
        &real,
        trials,
        EvalMode::Model,
        s.seed,
        Execution::Parallel,
    )
    .unwrap();
    let nonrobust = evaluate(
        &nb,
        s,
        &real,
        trials,
        EvalMode::Model,
        s.seed,
        Execution::Parallel,
    )
    .unwrap();
    Comparison {
        solution: sol,
        robust,
        nonrobust,
        nominal_rate: base.nominal_rate,
        elapsed: t0.elapsed(),
    }
}

fn c5() -> &'static Comparison {
    static CELL: OnceLock<Comparison> = OnceLock::new();
    CELL.get_or_init(|| compare(&desk(2.0), 10_000))
}

fn c6_scenario() -> Scenario {
    let s = desk(0.0);
    let d_hat = s.irs_pos().distance(s.user_est_pos());
    desk(0.06 * d_hat)
}

fn c6() -> &'static Comparison {
    static CELL: OnceLock<Comparison> = OnceLock::new();
    CELL.get_or_init(|| compare(&c6_scenario(), 10_000))
}

#[test]
fn criterion_5_worst_case_qos_guarantee() {
    let c = c5();
    let r = &c.robust;
    let passed =
        r.outage <= 0.01 && r.outage_relaxed <= 0.001 && c.elapsed < Duration::from_secs(600);
    report(
        5,
        passed,
        c.elapsed,
        &format!(
            "{} trials, outage at r {:.4}, at r - 0.1 {:.4}, min rate {:.4}, power {:.4e} W",
            r.trials.len(),
            r.outage,
            r.outage_relaxed,
            r.min_rate,
            r.power
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_6_robust_vs_nonrobust_separation() {
    let c = c6();
    let (r, n) = (&c.robust, &c.nonrobust);
    let separation = n.outage - r.outage;
    let spread_ratio = n.spread() / r.spread();
    let passed = separation >= 0.30 && spread_ratio >= 3.0 && c.elapsed < Duration::from_secs(900);
    report(
        6,
        passed,
        c.elapsed,
        &format!(
            "upsilon {:.3} m, power {:.4e} W: outage robust {:.4} nonrobust {:.4} (separation {:.1} pp, need 30); \
             spread robust {:.4} nonrobust {:.4} (ratio {:.2}, need 3); \
             min rate robust {:.4} nonrobust {:.4}; nonrobust nominal rate {:.4}",
            r.upsilon,
            r.power,
            r.outage,
            n.outage,
            100.0 * separation,
            r.spread(),
            n.spread(),
            spread_ratio,
            r.min_rate,
            n.min_rate,
            c.nominal_rate
        ),
    );
    assert!(passed);
}

fn c7() -> &'static (Vec<SweepRow>, Duration) {
    static CELL: OnceLock<(Vec<SweepRow>, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let t0 = Instant::now();
        let rows = sweep_power_vs_rate(
            &desk(1.0),
            &[2.0, 4.0, 6.0],
            &[1.0, 2.0],
            &[16, 36],
            Execution::Parallel,
        )
        .unwrap();
        (rows, t0.elapsed())
    })
}

#[test]
fn criterion_7_power_trends() {
    let (rows, elapsed) = c7();
    let power = |r: f64, u: f64, m: usize| -> Option<f64> {
        rows.iter()
            .find(|x| x.rate == r && x.upsilon == u && x.irs_elements == m)
            .and_then(|x| x.outcome.as_ref().ok().map(|p| p.power))
    };
    let (rates, ups, ms) = ([2.0, 4.0, 6.0], [1.0, 2.0], [16usize, 36]);
    let mut violations = Vec::new();
    let mut compare = |a: Option<f64>, b: Option<f64>, strict: bool, what: String| match (a, b) {
        (Some(a), Some(b)) if (strict && b < a) || (!strict && b >= a) => {}
        _ => violations.push(what),
    };
    for &u in &ups {
        for &m in &ms {
            for w in rates.windows(2) {
                compare(
                    power(w[0], u, m),
                    power(w[1], u, m),
                    false,
                    format!("r {}->{} at ups {u} M {m}", w[0], w[1]),
                );
            }
        }
    }
    for &r in &rates {
        for &m in &ms {
            compare(
                power(r, 1.0, m),
                power(r, 2.0, m),
                false,
                format!("ups 1->2 at r {r} M {m}"),
            );
        }
        for &u in &ups {
            compare(
                power(r, u, 16),
                power(r, u, 36),
                true,
                format!("M 16->36 at r {r} ups {u}"),
            );
        }
    }
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    let passed = violations.len() <= 1 && *elapsed < Duration::from_secs(1800);
    report(
        7,
        passed,
        *elapsed,
        &format!(
            "{} points, {failed} failed, {} monotonicity violations {:?}",
            rows.len(),
            violations.len(),
            violations
        ),
    );
    assert!(passed);
}

struct BehaviorRun {
    monotone: bool,
    converged: bool,
    certified: bool,
    violation: f64,
}

fn c8() -> &'static (Vec<Result<BehaviorRun, String>>, Duration) {
    static CELL: OnceLock<(Vec<Result<BehaviorRun, String>>, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let t0 = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(808);
        let scenarios: Vec<Scenario> = (0..20)
            .map(|k| {
                // Fields evaluate in source order, which fixes the draw order.
                Scenario {
                    seed: 1000 + k,
                    upsilon_m: rng.random_range(0.5..3.0),
                    target_rate_bps_hz: rng.random_range(2.0..6.0),
                    user_true_pos_m: [
                        rng.random_range(10.0..30.0),
                        rng.random_range(10.0..30.0),
                        rng.random_range(-30.0..-10.0),
                    ],
                    ..Scenario::default()
                }
            })
            .collect();
        let runs = irs_robust::parallel::map(Execution::Parallel, &scenarios, |s| {
            let real = s.realize().map_err(|e| e.to_string())?;
            let cfg = s.optimizer_config(Execution::Sequential);
            let sol = alternate(&real.ctx, &cfg).map_err(|e| e.to_string())?;
            let monotone = sol
                .trace
                .windows(2)
                .all(|p| p[1].power <= p[0].power * (1.0 + 1e-6));
            // Independent worst-case check of the final point.
            let d = real.ctx.composite(&sol.w, &sol.xi).unwrap();
            let rq = taylor_quadratic(&d, &real.ctx.sens, &real.ctx.ball).unwrap();
            let worst = min_quadratic_over_ball(&rq).value;
            Ok(BehaviorRun {
                monotone,
                converged: sol.converged && sol.iterations <= cfg.max_outer_iters,
                certified: worst >= real.ctx.gamma(cfg.target_rate),
                violation: sol.max_sdp_violation,
            })
        });
        (runs, t0.elapsed())
    })
}

#[test]
fn criterion_8_algorithm_behavior() {
    let (runs, elapsed) = c8();
    let ok: Vec<&BehaviorRun> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
    let errors: Vec<&String> = runs.iter().filter_map(|r| r.as_ref().err()).collect();
    let converged = ok.iter().filter(|r| r.converged).count();
    let monotone = ok.iter().all(|r| r.monotone);
    let certified = ok.iter().all(|r| r.certified);
    let passed = converged * 100 >= 95 * runs.len()
        && monotone
        && certified
        && *elapsed < Duration::from_secs(1800);
    report(
        8,
        passed,
        *elapsed,
        &format!(
            "{converged}/{} converged, {} errors {errors:?}, traces monotone {monotone}, all certified {certified}",
            runs.len(),
            errors.len()
        ),
    );
    assert!(passed);
}

fn unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// The three analytic toy problems; returns the worst error and verify residual.
fn sdp_toys() -> Result<(f64, f64), String> {
    let opts = SolverOptions::with_tol(1e-8);
    let mut worst_err: f64 = 0.0;
    let mut worst_violation: f64 = 0.0;

    // min tr W s.t. W ⪰ 0, W11 ≥ 1: optimum 1 at e1 e1ᵀ.
    let mut p = SdpProblem::new(3, true, Sense::Minimize);
    p.objective = AffineForm::matrix(CMatrix::identity(3, 3));
    p.linear.push(LinearConstraint {
        form: AffineForm::matrix(unit(3, 0, 0)).with_constant(-1.0),
        relation: Relation::Ge,
    });
    let sol = sdp::solve(&p, &opts).map_err(|e| e.to_string())?;
    if !sol.is_optimal() {
        return Err(format!("trace toy: {:?}", sol.status));
    }
    worst_err = worst_err.max((sol.objective_value - 1.0).abs());
    worst_err = worst_err.max((sol.matrix_value.clone() - unit(3, 0, 0)).norm());
    worst_violation = worst_violation.max(sdp::verify(&p, &sol, 1e-6).max_violation);

    // max v s.t. diag(Ξ) = 1, Ξ ⪰ 0, [Re tr(CΞ) − v] ⪰ 0 with C = [[a, c], [c*, b]]:
    // v* = a + b + 2|c|.
    let (a, b, c) = (0.7, -0.2, Complex64::new(0.3, -0.4));
    let mut cm = CMatrix::zeros(2, 2);
    cm[(0, 0)] = Complex64::new(a, 0.0);
    cm[(1, 1)] = Complex64::new(b, 0.0);
    cm[(0, 1)] = c.conj();
    cm[(1, 0)] = c;
    let mut p = SdpProblem::new(2, true, Sense::Maximize);
    let v = p.add_scalar(ScalarVar::bounded_below("v", -10.0));
    p.objective = AffineForm::default().with_scalar(v, 1.0);
    let mut lmi = Lmi::zeros(1);
    *lmi.entry_mut(0, 0) = AffineForm::matrix(cm).with_scalar(v, -1.0);
    p.lmis.push(lmi);
    for i in 0..2 {
        p.linear.push(LinearConstraint {
            form: AffineForm::matrix(unit(2, i, i)).with_constant(-1.0),
            relation: Relation::Eq,
        });
    }
    let sol = sdp::solve(&p, &opts).map_err(|e| e.to_string())?;
    if !sol.is_optimal() {
        return Err(format!("phase toy: {:?}", sol.status));
    }
    worst_err = worst_err.max((sol.scalar("v").unwrap() - (a + b + 2.0 * c.norm())).abs());
    worst_violation = worst_violation.max(sdp::verify(&p, &sol, 1e-6).max_violation);

    // q0 − γ − μ < 0 for every μ ≥ 0: infeasible.
    let mut p = SdpProblem::new(1, false, Sense::Minimize);
    let mu = p.add_scalar(ScalarVar::nonneg("mu"));
    p.objective = AffineForm::matrix(CMatrix::identity(1, 1));
    let mut lmi = Lmi::zeros(2);
    *lmi.entry_mut(0, 0) = AffineForm::constant(-0.5).with_scalar(mu, -1.0);
    *lmi.entry_mut(1, 1) = AffineForm::matrix(CMatrix::identity(1, 1)).with_scalar(mu, 1.0);
    p.lmis.push(lmi);
    let sol = sdp::solve(&p, &opts).map_err(|e| e.to_string())?;
    if sol.status != SdpStatus::Infeasible {
        return Err(format!("infeasible toy reported {:?}", sol.status));
    }
    Ok((worst_err, worst_violation))
}

#[test]
fn criterion_9_sdp_backend() {
    let t0 = Instant::now();
    let toys = sdp_toys();
    let mut subproblem = vec![
        ("criterion 5", c5().solution.max_sdp_violation),
        ("criterion 6", c6().solution.max_sdp_violation),
    ];
    for r in &c7().0 {
        if let Ok(p) = &r.outcome {
            subproblem.push(("criterion 7", p.max_sdp_violation));
        }
    }
    for r in c8().0.iter().flatten() {
        subproblem.push(("criterion 8", r.violation));
    }
    let worst_sub = subproblem.iter().map(|x| x.1).fold(0.0, f64::max);
    let passed = match &toys {
        Ok((err, viol)) => *err <= 1e-6 && *viol <= 1e-6 && worst_sub <= 1e-6,
        Err(_) => false,
    };
    report(
        9,
        passed,
        t0.elapsed(),
        &format!(
            "toys {:?}; {} design runs, max subproblem violation {worst_sub:.1e}",
            toys.map(|(e, v)| format!("max error {e:.1e}, max violation {v:.1e}")),
            subproblem.len()
        ),
    );
    assert!(passed);
}
