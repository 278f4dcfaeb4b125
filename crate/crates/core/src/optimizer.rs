//! Alternating robust design of the beamformer `w` and the phase shifts `ξ`.
//!
//! Each half-step lifts the worst-case constraint into an LMI in a matrix
//! variable (`W̄ = wwᴴ` or `Ξ = ξξᴴ`), drops the rank constraint, solves the
//! SDP and recovers a rank-one point by Gaussian randomization. Every
//! accepted iterate is re-checked with the exact ball oracle.
//!
//! Both SDPs are solved in normalized units. The LMI is scaled by `1/γ` and
//! congruence-transformed by `diag(1, ρI)` with `ρ = Υ/d̂`, giving
//!
//! ```text
//! [ q0/γ − 1 − v − μ    ½ρ φᵀ/γ          ]
//! [ ½ρ φ/γ              ½ρ² Φ/γ + μ I    ]  ⪰ 0
//! ```

use nalgebra::{SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{
    effective_channel, matched_filter, rate_from_snr, snr_for_rate, ChannelB2I, PhaseShifts,
    ReflectChannel,
};
use crate::error::{domain, Error, Result};
use crate::location::{ErrorSensitivity, LocationError, UncertaintyBall};
use crate::parallel::{self, Execution};
use crate::quadratic::{
    assemble_lmi, exact_received_power, lift_for_w, lift_for_xi, taylor_quadratic, CompositeVector,
    LiftedForms,
};
use crate::sdp::{
    self, AffineForm, LinearConstraint, Lmi, Relation, ScalarVar, SdpProblem, SdpSolution,
    SdpStatus, Sense, SolverOptions,
};
use crate::trust_region::{min_quadratic_over_ball, BallMinimum};
use crate::{CMatrix, CVector, Complex64};

/// Relative slack applied when scaling a candidate onto the constraint.
const SCALE_SLACK: f64 = 1e-9;

/// Estimated channels and the uncertainty model of one design problem.
#[derive(Debug, Clone)]
pub struct DesignContext {
    pub g_hat: ReflectChannel,
    pub b2i: ChannelB2I,
    pub sens: ErrorSensitivity,
    pub ball: UncertaintyBall,
    /// σ0² in watts.
    pub noise_power: f64,
}

impl DesignContext {
    /// Received-power threshold `γ = (2^r − 1) σ0²`.
    pub fn gamma(&self, rate: f64) -> f64 {
        snr_for_rate(rate) * self.noise_power
    }

    pub fn composite(&self, w: &CVector, xi: &PhaseShifts) -> Result<CompositeVector> {
        CompositeVector::new(&self.g_hat, xi, &self.b2i, w)
    }

    /// Worst case of the Taylor model of `|hᴴw|²` over the ball.
    pub fn worst_case(&self, w: &CVector, xi: &PhaseShifts) -> Result<BallMinimum> {
        let d = self.composite(w, xi)?;
        Ok(min_quadratic_over_ball(&taylor_quadratic(
            &d, &self.sens, &self.ball,
        )?))
    }

    fn rho(&self) -> f64 {
        self.ball.radius / self.sens.d_hat
    }
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub target_rate: f64,
    pub epsilon: f64,
    pub max_outer_iters: usize,
    pub randomization_count: usize,
    /// Largest admissible power multiplier when scaling a candidate.
    pub power_scale_cap: f64,
    pub rng_seed: u64,
    pub sdp_tol: f64,
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            target_rate: 4.0,
            epsilon: 1e-3,
            max_outer_iters: 30,
            randomization_count: 200,
            power_scale_cap: 1e6,
            rng_seed: 0,
            sdp_tol: 1e-8,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(domain("epsilon must be positive"));
        }
        if self.randomization_count == 0 {
            return Err(domain("randomization_count must be at least 1"));
        }
        if !(self.power_scale_cap >= 1.0) {
            return Err(domain("power_scale_cap must be >= 1"));
        }
        if !(self.target_rate > 0.0) {
            return Err(domain("target rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    /// ‖w‖² after this iteration, W.
    pub power: f64,
    /// Optimal SINR residual of the ξ relaxation, W (`-∞` if infeasible).
    pub v: f64,
    /// Certified worst-case margin `min q − γ` after this iteration, W.
    pub margin: f64,
    /// Optimal value of the w relaxation, W.
    pub sdr_power: f64,
    pub w_accepted: bool,
    pub xi_accepted: bool,
}

#[derive(Debug, Clone)]
pub struct DesignSolution {
    pub w: CVector,
    pub xi: PhaseShifts,
    pub power: f64,
    /// S-procedure multiplier certifying the final point.
    pub mu: f64,
    /// Rate at the Taylor-model worst case.
    pub worst_case_rate: f64,
    pub certified_margin: f64,
    /// Worst-case location error `Δ` found by the ball oracle, m.
    pub worst_delta: Vector3<f64>,
    /// Rate of the untruncated error model at `worst_delta`.
    pub exact_rate_at_worst: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRecord>,
    /// Largest verified constraint violation over all SDPs solved (normalized units).
    pub max_sdp_violation: f64,
    /// SDR value of the last w relaxation.
    pub sdr_power: f64,
}

#[derive(Debug, Clone)]
pub struct WStep {
    /// Relaxed covariance in watts.
    pub w_bar: CMatrix,
    pub mu: f64,
    pub sdr_power: f64,
    pub violation: f64,
}

#[derive(Debug, Clone)]
pub struct XiStep {
    pub xi_bar: CMatrix,
    pub mu: f64,
    /// SINR residual in watts; `-∞` when the relaxation is infeasible.
    pub v: f64,
    pub violation: f64,
}

/// Normalized S-procedure LMI over a lifted variable. Coefficients are
/// divided by `scale`; `threshold` is already normalized.
fn lifted_lmi(
    lf: &LiftedForms,
    rho: f64,
    scale: f64,
    threshold: f64,
    mu: usize,
    v: Option<usize>,
) -> Lmi {
    let k = Complex64::new(1.0 / scale, 0.0);
    let mut lmi = Lmi::zeros(4);
    let mut top = AffineForm::matrix(lf.q0_coeff() * k)
        .with_constant(-threshold)
        .with_scalar(mu, -1.0);
    if let Some(v) = v {
        top = top.with_scalar(v, -1.0);
    }
    *lmi.entry_mut(0, 0) = top;
    for q in 0..3 {
        *lmi.entry_mut(0, q + 1) = AffineForm::matrix(lf.phi_coeff(q) * (k * (0.5 * rho)));
        for l in q..3 {
            let mut f = AffineForm::matrix(lf.phi_mat_coeff(q, l) * (k * (0.5 * rho * rho)));
            if q == l {
                f = f.with_scalar(mu, 1.0);
            }
            *lmi.entry_mut(q + 1, l + 1) = f;
        }
    }
    lmi
}

fn require_optimal(sol: &SdpSolution, context: &str) -> Result<()> {
    if sol.status == SdpStatus::Optimal {
        Ok(())
    } else {
        Err(Error::Solver {
            context: context.to_string(),
            status: sol.status.to_string(),
            detail: sol.diagnostic.clone(),
        })
    }
}

/// Relaxed power minimization for fixed ξ.
pub fn build_w_problem(xi: &PhaseShifts, ctx: &DesignContext) -> Result<(SdpProblem, f64)> {
    let lf = lift_for_w(xi, &ctx.g_hat, &ctx.b2i, &ctx.sens, &ctx.ball)?;
    let h_norm2 = lf.q0_coeff().trace().re;
    if !(h_norm2 > 0.0) {
        return Err(Error::ZeroChannel);
    }
    let n = lf.var_dim();
    let mut p = SdpProblem::new(n, true, Sense::Minimize);
    let mu = p.add_scalar(ScalarVar::nonneg("mu"));
    p.objective = AffineForm::matrix(CMatrix::identity(n, n));
    p.lmis
        .push(lifted_lmi(&lf, ctx.rho(), h_norm2, 1.0, mu, None));
    Ok((p, h_norm2))
}

pub fn solve_w_subproblem(
    xi: &PhaseShifts,
    ctx: &DesignContext,
    cfg: &OptimizerConfig,
) -> Result<WStep> {
    let gamma = ctx.gamma(cfg.target_rate);
    if !(gamma > 0.0) {
        return Err(domain("target threshold must be positive"));
    }
    let (p, h_norm2) = build_w_problem(xi, ctx)?;
    let sol = sdp::solve(&p, &SolverOptions::with_tol(cfg.sdp_tol))?;
    require_optimal(&sol, "w-step")?;
    let violation = sdp::verify(&p, &sol, cfg.sdp_tol).max_violation;
    // W̄ = (γ/‖h‖²)·W̄'
    let p_ref = gamma / h_norm2;
    let w_bar = sdp::hermitian_part(&sol.matrix_value) * Complex64::new(p_ref, 0.0);
    Ok(WStep {
        sdr_power: w_bar.trace().re,
        w_bar,
        mu: sol.scalar("mu").unwrap_or(0.0) * gamma,
        violation,
    })
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Principal vector `√λ₁ u₁` followed by `count` draws `U Λ^{1/2} r`.
fn gaussian_candidates(x: &CMatrix, count: usize, rng: &mut ChaCha8Rng) -> Vec<CVector> {
    let n = x.nrows();
    let eig = SymmetricEigen::new(sdp::hermitian_part(x));
    let sqrt_l = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let mut factor = eig.eigenvectors.clone();
    for (j, mut col) in factor.column_iter_mut().enumerate() {
        col *= Complex64::new(sqrt_l[j], 0.0);
    }
    let top = eig.eigenvalues.imax();
    let mut out = Vec::with_capacity(count + 1);
    out.push(factor.column(top).into_owned());
    for _ in 0..count {
        let r = CVector::from_fn(n, |_, _| complex_normal(rng));
        out.push(&factor * r);
    }
    out
}

/// Recovers a feasible beamformer of minimum power from `W̄`.
pub fn randomize_w(
    w_bar: &CMatrix,
    xi: &PhaseShifts,
    ctx: &DesignContext,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<CVector> {
    let gamma = ctx.gamma(cfg.target_rate);
    let cands = gaussian_candidates(w_bar, cfg.randomization_count, rng);
    // The worst case is homogeneous of degree 2 in w, so the minimal feasible
    // scale of each candidate is closed form.
    let scored: Vec<Result<(f64, f64)>> = parallel::map(cfg.execution, &cands, |c| {
        let q = ctx.worst_case(c, xi)?.value;
        Ok((q, c.norm_squared()))
    });
    let mut best: Option<(f64, usize)> = None;
    let mut best_margin = f64::NEG_INFINITY;
    for (k, s) in scored.into_iter().enumerate() {
        let (q, p) = s?;
        if !(p > 0.0) {
            continue;
        }
        // Margin at the candidate's own SDR scale, to report on failure.
        best_margin = best_margin.max(q - gamma);
        if !(q > 0.0) {
            continue;
        }
        let t = gamma / q * (1.0 + SCALE_SLACK);
        if t > cfg.power_scale_cap {
            continue;
        }
        if best.is_none_or(|(bp, _)| t * p < bp) {
            best = Some((t * p, k));
        }
    }
    match best {
        Some((power, k)) => {
            let c = &cands[k];
            Ok(c * Complex64::new((power / c.norm_squared()).sqrt(), 0.0))
        }
        None => Err(Error::RandomizationFailed { best_margin }),
    }
}

/// Relaxed SINR-residual maximization for fixed w and threshold `gamma`,
/// with `v ≥ v_lower` in normalized units.
fn build_xi_problem_inner(
    w: &CVector,
    ctx: &DesignContext,
    gamma: f64,
    v_lower: f64,
) -> Result<(SdpProblem, f64)> {
    if w.norm() == 0.0 {
        return Err(domain("beamformer must be nonzero"));
    }
    let lf = lift_for_xi(w, &ctx.g_hat, &ctx.b2i, &ctx.sens, &ctx.ball)?;
    let scale = if gamma > 0.0 {
        gamma
    } else {
        lf.q0_coeff().trace().re
    };
    if !(scale > 0.0) {
        return Err(Error::ZeroChannel);
    }
    let m = lf.var_dim();
    let mut p = SdpProblem::new(m, true, Sense::Maximize);
    let mu = p.add_scalar(ScalarVar::nonneg("mu"));
    let v = p.add_scalar(ScalarVar::bounded_below("v", v_lower));
    p.objective = AffineForm::default().with_scalar(v, 1.0);
    p.lmis.push(lifted_lmi(
        &lf,
        ctx.rho(),
        scale,
        gamma / scale,
        mu,
        Some(v),
    ));
    for i in 0..m {
        let mut e = CMatrix::zeros(m, m);
        e[(i, i)] = Complex64::new(1.0, 0.0);
        p.linear.push(LinearConstraint {
            form: AffineForm::matrix(e).with_constant(-1.0),
            relation: Relation::Eq,
        });
    }
    Ok((p, scale))
}

pub fn build_xi_problem(
    w: &CVector,
    ctx: &DesignContext,
    cfg: &OptimizerConfig,
) -> Result<(SdpProblem, f64)> {
    build_xi_problem_inner(w, ctx, ctx.gamma(cfg.target_rate), 0.0)
}

fn solve_xi_inner(
    w: &CVector,
    ctx: &DesignContext,
    cfg: &OptimizerConfig,
    gamma: f64,
    v_lower: f64,
) -> Result<XiStep> {
    let (p, scale) = build_xi_problem_inner(w, ctx, gamma, v_lower)?;
    let sol = sdp::solve(&p, &SolverOptions::with_tol(cfg.sdp_tol))?;
    if sol.status == SdpStatus::Infeasible {
        return Ok(XiStep {
            xi_bar: CMatrix::identity(p.matrix_dim, p.matrix_dim),
            mu: 0.0,
            v: f64::NEG_INFINITY,
            violation: 0.0,
        });
    }
    require_optimal(&sol, "xi-step")?;
    let violation = sdp::verify(&p, &sol, cfg.sdp_tol).max_violation;
    Ok(XiStep {
        xi_bar: sdp::hermitian_part(&sol.matrix_value),
        mu: sol.scalar("mu").unwrap_or(0.0) * scale,
        v: sol.scalar("v").unwrap_or(0.0) * scale,
        violation,
    })
}

/// Lower bound on `v` (normalized) used when solving. With `v ≥ 0` the
/// feasible set has no interior once the current point is already optimal,
/// which stalls the interior-point method; a negative bound keeps it
/// strictly feasible and the sign of the optimum answers the `v ≥ 0` question.
const XI_SOLVE_V_LOWER: f64 = -1.0;

pub fn solve_xi_subproblem(
    w: &CVector,
    ctx: &DesignContext,
    cfg: &OptimizerConfig,
) -> Result<XiStep> {
    let gamma = ctx.gamma(cfg.target_rate);
    let mut step = solve_xi_inner(w, ctx, cfg, gamma, XI_SOLVE_V_LOWER)?;
    let scale = if gamma > 0.0 { gamma } else { 1.0 };
    if step.v < -cfg.sdp_tol * scale {
        step.v = f64::NEG_INFINITY;
    } else {
        step.v = step.v.max(0.0);
    }
    Ok(step)
}

/// Best unit-modulus candidate drawn around `Ξ` and its margin `min q − γ`.
pub fn randomize_xi(
    xi_bar: &CMatrix,
    w: &CVector,
    ctx: &DesignContext,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(PhaseShifts, f64)> {
    let gamma = ctx.gamma(cfg.target_rate);
    let cands: Vec<PhaseShifts> = gaussian_candidates(xi_bar, cfg.randomization_count, rng)
        .iter()
        .map(PhaseShifts::project)
        .collect();
    let margins: Vec<Result<f64>> = parallel::map(cfg.execution, &cands, |xi| {
        Ok(ctx.worst_case(w, xi)?.value - gamma)
    });
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, m) in margins.into_iter().enumerate() {
        let m = m?;
        if m > best.0 {
            best = (m, k);
        }
    }
    Ok((cands[best.1].clone(), best.0))
}

/// Scales `w` onto the worst-case constraint; `None` if no scale works.
fn scale_onto_constraint(
    w: &CVector,
    xi: &PhaseShifts,
    ctx: &DesignContext,
    gamma: f64,
) -> Result<Option<CVector>> {
    let q = ctx.worst_case(w, xi)?.value;
    if !(q > 0.0) {
        return Ok(None);
    }
    let t = gamma / q * (1.0 + SCALE_SLACK);
    Ok(Some(w * Complex64::new(t.sqrt(), 0.0)))
}

/// Phase alignment `ξ_i = exp(−j arg([diag(ĝ) G w]_i))`.
pub fn align_phases(w: &CVector, ctx: &DesignContext) -> Result<PhaseShifts> {
    let d = ctx.composite(w, &PhaseShifts::ones(ctx.b2i.irs_elements()))?;
    Ok(PhaseShifts::project(&d.d.map(|z| z.conj())))
}

/// Matched filter to the composite channel for `xi`.
pub fn mrt(xi: &PhaseShifts, ctx: &DesignContext) -> Result<CVector> {
    matched_filter(&effective_channel(&ctx.g_hat.vector, xi, &ctx.b2i)?)
}

/// Feasible starting point: the align/MRT fixed point with closed-form
/// power scaling. If the aligned point has no positive worst case, the
/// phases are re-chosen by maximizing the worst case directly.
pub fn initialize(
    ctx: &DesignContext,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(CVector, PhaseShifts, f64)> {
    let gamma = ctx.gamma(cfg.target_rate);
    // Converged align/MRT fixed point at unit power.
    let fixed = crate::baseline::nonrobust_design(ctx, 1.0)?;
    let (w1, xi0) = (fixed.w, fixed.xi);
    // Reference: power that meets the nominal (error-free) constraint.
    let nominal = ctx.composite(&w1, &xi0)?.d.sum().norm_sqr();
    if !(nominal > 0.0) {
        return Err(Error::ZeroChannel);
    }
    let cap = cfg.power_scale_cap * gamma / nominal;
    let mut violation: f64 = 0.0;
    let (w, xi) = match scale_onto_constraint(&w1, &xi0, ctx, gamma)? {
        Some(w) => (w, xi0),
        None => {
            let step = solve_xi_inner(&w1, ctx, cfg, 0.0, -1e3)?;
            if !step.v.is_finite() {
                return Err(Error::InfeasibleInit(
                    "worst-case maximization infeasible".into(),
                ));
            }
            violation = violation.max(step.violation);
            let zero = OptimizerConfig {
                target_rate: 0.0,
                ..cfg.clone()
            };
            let (xi, margin) = randomize_xi(&step.xi_bar, &w1, ctx, &zero, rng)?;
            if !(margin > 0.0) {
                return Err(Error::InfeasibleInit(format!(
                    "no phase configuration keeps the worst-case power positive (best {margin:e} W)"
                )));
            }
            let w = scale_onto_constraint(&w1, &xi, ctx, gamma)?.expect("positive worst case");
            (w, xi)
        }
    };
    if w.norm_squared() > cap {
        return Err(Error::InfeasibleInit(format!(
            "required power {:.3e} W exceeds {:.1e} x the nominal requirement",
            w.norm_squared(),
            cfg.power_scale_cap
        )));
    }
    Ok((w, xi, violation))
}

/// Algorithm: alternate relaxed w- and ξ-steps from a feasible start until
/// the fractional power decrease drops below `epsilon`.
pub fn alternate(ctx: &DesignContext, cfg: &OptimizerConfig) -> Result<DesignSolution> {
    alternate_traced(ctx, cfg, &mut Vec::new())
}

/// As [`alternate`], appending trace records to `trace` as they are produced
/// so the partial trace survives a failure.
pub fn alternate_traced(
    ctx: &DesignContext,
    cfg: &OptimizerConfig,
    trace: &mut Vec<TraceRecord>,
) -> Result<DesignSolution> {
    cfg.validate()?;
    trace.clear();
    let gamma = ctx.gamma(cfg.target_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let (mut w, mut xi, mut max_violation) = initialize(ctx, cfg, &mut rng)?;
    let mut power = w.norm_squared();
    let mut margin = ctx.worst_case(&w, &xi)?.value - gamma;
    trace.push(TraceRecord {
        iteration: 0,
        power,
        v: f64::NAN,
        margin,
        sdr_power: f64::NAN,
        w_accepted: true,
        xi_accepted: true,
    });
    let mut converged = false;
    let mut sdr_power = f64::NAN;
    let mut iterations = 0;
    for it in 1..=cfg.max_outer_iters {
        iterations = it;
        let wrap = |e: Error| Error::Iteration {
            iteration: it,
            source: Box::new(e),
        };
        let prev_power = power;

        let ws = solve_w_subproblem(&xi, ctx, cfg).map_err(wrap)?;
        max_violation = max_violation.max(ws.violation);
        sdr_power = ws.sdr_power;
        let w_accepted = match randomize_w(&ws.w_bar, &xi, ctx, cfg, &mut rng) {
            Ok(cand) if cand.norm_squared() <= power * (1.0 + 1e-9) => {
                power = cand.norm_squared();
                w = cand;
                margin = ctx.worst_case(&w, &xi).map_err(wrap)?.value - gamma;
                true
            }
            Ok(_) | Err(Error::RandomizationFailed { .. }) => false,
            Err(e) => return Err(wrap(e)),
        };

        let xs = solve_xi_subproblem(&w, ctx, cfg).map_err(wrap)?;
        max_violation = max_violation.max(xs.violation);
        let mut xi_accepted = false;
        if xs.v.is_finite() {
            let (cand, m) = randomize_xi(&xs.xi_bar, &w, ctx, cfg, &mut rng).map_err(wrap)?;
            if m >= margin {
                xi = cand;
                margin = m;
                xi_accepted = true;
                // Spend the new slack right away: the worst case is quadratic in w.
                if let Some(tight) = scale_onto_constraint(&w, &xi, ctx, gamma).map_err(wrap)? {
                    if tight.norm_squared() < power {
                        w = tight;
                        power = w.norm_squared();
                        margin = ctx.worst_case(&w, &xi).map_err(wrap)?.value - gamma;
                    }
                }
            }
        }
        log::debug!(
            "iteration {it}: power {power:.6e} W, sdr {sdr_power:.6e} W, v {:.3e}, margin {margin:.3e}",
            xs.v
        );
        trace.push(TraceRecord {
            iteration: it,
            power,
            v: xs.v,
            margin,
            sdr_power,
            w_accepted,
            xi_accepted,
        });
        if (prev_power - power) / prev_power < cfg.epsilon {
            converged = true;
            break;
        }
    }

    let d = ctx.composite(&w, &xi)?;
    let rq = taylor_quadratic(&d, &ctx.sens, &ctx.ball)?;
    let worst = min_quadratic_over_ball(&rq);
    let worst_delta = worst.argmin * ctx.sens.d_hat;
    let exact = exact_received_power(&d, &ctx.sens, &LocationError { delta: worst_delta });
    let mu = if ctx.ball.radius > 0.0 {
        assemble_lmi(&rq, gamma)?.best_mu(0.0).0
    } else {
        0.0
    };
    Ok(DesignSolution {
        power: w.norm_squared(),
        w,
        xi,
        mu,
        worst_case_rate: rate_from_snr(worst.value / ctx.noise_power),
        certified_margin: worst.value - gamma,
        worst_delta,
        exact_rate_at_worst: rate_from_snr(exact / ctx.noise_power),
        iterations,
        converged,
        trace: trace.clone(),
        max_sdp_violation: max_violation,
        sdr_power,
    })
}
