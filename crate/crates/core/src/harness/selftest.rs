//! Quick invariant suite behind the `selftest` subcommand.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::UraGeometry;
use crate::location::{error_sensitivity, LocationError, Position3D, UncertaintyBall};
use crate::optimizer::alternate;
use crate::parallel::Execution;
use crate::quadratic::{
    exact_received_power, lift_for_w, taylor_quadratic, CompositeVector, RobustQuadratic,
};
use crate::sdp::{self, AffineForm, LinearConstraint, Relation, SdpProblem, Sense, SolverOptions};
use crate::trust_region::min_quadratic_over_ball;
use crate::{CMatrix, CVector, Complex64};

use super::evaluate::{evaluate, Beamformer, EvalMode, Scheme};
use super::scenario::Scenario;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn crand(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn taylor_fidelity() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let geom = UraGeometry::half_wavelength(4, 2).expect("valid geometry");
    let sens = error_sensitivity(
        Position3D::ORIGIN,
        Position3D::new(20.0, 20.0, -20.0),
        &geom,
    )
    .expect("distinct positions");
    let ball = UncertaintyBall::new(2.0).expect("valid radius");
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let d = CompositeVector::from_vector(crand(&mut rng, geom.len()));
        let rq = match taylor_quadratic(&d, &sens, &ball) {
            Ok(q) => q,
            Err(e) => return fail("taylor fidelity", e.to_string()),
        };
        let f = |v: Vector3<f64>| exact_received_power(&d, &sens, &LocationError { delta: v });
        let h = 1e-3;
        let scale = rq.q0.abs().max(1e-300);
        for k in 0..3 {
            let e = Vector3::ith(k, h);
            let grad = (f(e) - f(-e)) / (2.0 * h);
            worst = worst.max((grad - rq.phi[k] / sens.d_hat).abs() / scale * sens.d_hat);
            let curv = (f(e) - 2.0 * f(Vector3::zeros()) + f(-e)) / (h * h);
            let model = rq.phi_mat[(k, k)] / (sens.d_hat * sens.d_hat);
            worst = worst.max((curv - model).abs() / scale * sens.d_hat * sens.d_hat);
        }
        worst = worst.max((f(Vector3::zeros()) - rq.q0).abs() / scale);
    }
    check(
        "taylor fidelity",
        worst <= 1e-4,
        format!("max scaled derivative error {worst:.2e}"),
    )
}

fn trust_region_vs_sampling() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst_gap = f64::NEG_INFINITY;
    for _ in 0..20 {
        let a = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let rq = RobustQuadratic {
            q0: rng.random_range(-1.0..1.0),
            phi: Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)),
            phi_mat: a + a.transpose(),
            d_hat: 1.0,
            radius: rng.random_range(0.2..2.0),
        };
        let best = min_quadratic_over_ball(&rq);
        if best.argmin.norm() > rq.rho() * (1.0 + 1e-9) {
            return fail("trust region", "minimizer outside the ball".into());
        }
        for _ in 0..2000 {
            let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            if v.norm() <= 1.0 {
                worst_gap = worst_gap.max(best.value - rq.eval(&(v * rq.rho())));
            }
        }
    }
    check(
        "trust region",
        worst_gap <= 1e-10,
        format!("oracle minus best sample ≤ {worst_gap:.2e}"),
    )
}

fn lift_consistency() -> CheckResult {
    let s = Scenario::default();
    let real = match s.realize() {
        Ok(r) => r,
        Err(e) => return fail("lift consistency", e.to_string()),
    };
    let ctx = &real.ctx;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let w = crand(&mut rng, ctx.b2i.bs_antennas());
        let xi = crate::channel::PhaseShifts::from_phases(
            (0..ctx.b2i.irs_elements()).map(|_| rng.random_range(-3.0..3.0)),
        );
        let direct = ctx
            .composite(&w, &xi)
            .and_then(|d| taylor_quadratic(&d, &ctx.sens, &ctx.ball));
        let lifted = lift_for_w(&xi, &ctx.g_hat, &ctx.b2i, &ctx.sens, &ctx.ball)
            .and_then(|lf| lf.evaluate(&(&w * w.adjoint())));
        let (a, b) = match (direct, lifted) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return fail("lift consistency", e.to_string()),
        };
        let scale = a.q0.abs() + a.phi.norm() + a.phi_mat.norm();
        let err = (a.q0 - b.q0).abs() + (a.phi - b.phi).norm() + (a.phi_mat - b.phi_mat).norm();
        worst = worst.max(err / scale);
    }
    check(
        "lift consistency",
        worst <= 1e-8,
        format!("max relative error {worst:.2e}"),
    )
}

fn sdp_toy() -> CheckResult {
    let n = 3;
    let mut p = SdpProblem::new(n, true, Sense::Minimize);
    p.objective = AffineForm::matrix(CMatrix::identity(n, n));
    let mut e = CMatrix::zeros(n, n);
    e[(0, 0)] = Complex64::new(1.0, 0.0);
    p.linear.push(LinearConstraint {
        form: AffineForm::matrix(e).with_constant(-1.0),
        relation: Relation::Ge,
    });
    match sdp::solve(&p, &SolverOptions::default()) {
        Ok(sol) => {
            let rep = sdp::verify(&p, &sol, 1e-6);
            let err = (sol.objective_value - 1.0).abs();
            check(
                "sdp toy",
                sol.is_optimal() && err <= 1e-6 && rep.passed,
                format!(
                    "objective error {err:.2e}, max violation {:.2e}",
                    rep.max_violation
                ),
            )
        }
        Err(e) => fail("sdp toy", e.to_string()),
    }
}

fn design_and_evaluate(exec: Execution) -> CheckResult {
    let s = Scenario {
        irs_elements_z: 3,
        irs_elements_y: 3,
        upsilon_m: 2.0,
        ..Scenario::default()
    };
    let run = || -> crate::Result<(f64, f64, f64)> {
        let real = s.realize()?;
        let sol = alternate(&real.ctx, &s.optimizer_config(exec))?;
        let bf = Beamformer {
            scheme: Scheme::Robust,
            w: sol.w,
            xi: sol.xi,
        };
        let rep = evaluate(&bf, &s, &real, 1000, EvalMode::Model, s.seed, exec)?;
        Ok((sol.certified_margin, rep.outage, sol.max_sdp_violation))
    };
    match run() {
        Ok((margin, outage, viol)) => check(
            "design and evaluate",
            margin >= 0.0 && outage == 0.0 && viol <= 1e-6,
            format!("margin {margin:.2e} W, model outage {outage}, SDP violation {viol:.1e}"),
        ),
        Err(e) => fail("design and evaluate", e.to_string()),
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

fn fail(name: &'static str, detail: String) -> CheckResult {
    check(name, false, detail)
}

pub fn run_selftest(exec: Execution) -> Vec<CheckResult> {
    vec![
        taylor_fidelity(),
        trust_region_vs_sampling(),
        lift_consistency(),
        sdp_toy(),
        design_and_evaluate(exec),
    ]
}
