//! Non-robust benchmark: treat the estimated channel as exact and maximize
//! the nominal rate at a given power by alternating phase alignment and
//! maximum-ratio transmission.

use crate::channel::{rate_from_snr, PhaseShifts};
use crate::error::{domain, Result};
use crate::optimizer::{align_phases, mrt, DesignContext};
use crate::{CVector, Complex64};

const RATE_TOL: f64 = 1e-6;
const PHASE_TOL: f64 = 1e-10;
const MAX_ROUNDS: usize = 1000;

#[derive(Debug, Clone)]
pub struct BaselineSolution {
    pub w: CVector,
    pub xi: PhaseShifts,
    pub power: f64,
    pub nominal_rate: f64,
    /// Nominal rate after each round.
    pub rate_history: Vec<f64>,
}

fn nominal_rate(ctx: &DesignContext, w: &CVector, xi: &PhaseShifts) -> Result<f64> {
    let q = ctx.composite(w, xi)?.d.sum().norm_sqr();
    Ok(rate_from_snr(q / ctx.noise_power))
}

pub fn nonrobust_design(ctx: &DesignContext, power_budget: f64) -> Result<BaselineSolution> {
    if !(power_budget > 0.0 && power_budget.is_finite()) {
        return Err(domain(format!(
            "power budget must be positive, got {power_budget}"
        )));
    }
    let amp = Complex64::new(power_budget.sqrt(), 0.0);
    let m = ctx.b2i.irs_elements();
    let mut xi = PhaseShifts::ones(m);
    let mut w = mrt(&xi, ctx)? * amp;
    let mut rate = nominal_rate(ctx, &w, &xi)?;
    let mut history = vec![rate];
    for _ in 0..MAX_ROUNDS {
        let next_xi = align_phases(&w, ctx)?;
        let moved = (next_xi.as_vector() - xi.as_vector()).camax();
        xi = next_xi;
        w = mrt(&xi, ctx)? * amp;
        let next = nominal_rate(ctx, &w, &xi)?;
        history.push(next);
        let gain = next - rate;
        rate = next;
        // Rate gains vanish quadratically, so also wait for the phases to settle.
        if gain < RATE_TOL && moved < PHASE_TOL {
            break;
        }
    }
    Ok(BaselineSolution {
        power: w.norm_squared(),
        w,
        xi,
        nominal_rate: rate,
        rate_history: history,
    })
}
