//! Required transmit power over a grid of target rates, uncertainty radii
//! and IRS sizes.

use crate::error::{domain, Result};
use crate::optimizer::alternate;
use crate::parallel::{self, Execution};

use super::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub power: f64,
    pub iterations: usize,
    pub certified_margin: f64,
    pub converged: bool,
    pub max_sdp_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rate: f64,
    pub upsilon: f64,
    pub irs_elements: usize,
    /// Failure reason for points the optimizer could not solve.
    pub outcome: std::result::Result<SweepPoint, String>,
}

/// Side length of a square IRS with `m` elements.
pub fn square_side(m: usize) -> Result<usize> {
    let side = (m as f64).sqrt().round() as usize;
    if side == 0 || side * side != m {
        return Err(domain(format!(
            "IRS size {m} is not a positive perfect square"
        )));
    }
    Ok(side)
}

/// Solves every grid point of `rates × upsilons × m_values` in that nesting
/// order. Grid points run in parallel; each optimizer runs sequentially.
pub fn sweep_power_vs_rate(
    scen: &Scenario,
    rates: &[f64],
    upsilons: &[f64],
    m_values: &[usize],
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    if rates.is_empty() || upsilons.is_empty() || m_values.is_empty() {
        return Err(domain("sweep lists must be nonempty"));
    }
    let sides = m_values
        .iter()
        .map(|&m| square_side(m))
        .collect::<Result<Vec<_>>>()?;
    let mut grid = Vec::new();
    for &r in rates {
        for &u in upsilons {
            for (&m, &side) in m_values.iter().zip(&sides) {
                grid.push((r, u, m, side));
            }
        }
    }
    Ok(parallel::map(exec, &grid, |&(rate, upsilon, m, side)| {
        let mut s = scen.clone();
        s.target_rate_bps_hz = rate;
        s.upsilon_m = upsilon;
        s.irs_elements_z = side;
        s.irs_elements_y = side;
        let outcome = s
            .realize()
            .and_then(|real| alternate(&real.ctx, &s.optimizer_config(Execution::Sequential)))
            .map(|sol| SweepPoint {
                power: sol.power,
                iterations: sol.iterations,
                certified_margin: sol.certified_margin,
                converged: sol.converged,
                max_sdp_violation: sol.max_sdp_violation,
            })
            .map_err(|e| e.to_string());
        if let Err(e) = &outcome {
            log::warn!("sweep point r={rate} upsilon={upsilon} M={m} failed: {e}");
        }
        SweepRow {
            rate,
            upsilon,
            irs_elements: m,
            outcome,
        }
    }))
}
