//! Monte Carlo evaluation of a fixed design under random location errors.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::channel::{achievable_rate, effective_channel, PhaseShifts};
use crate::error::{domain, Result};
use crate::location::{error_vector, ErrorSampler, LocationError};
use crate::parallel::{self, Execution};
use crate::CVector;

use super::scenario::{Realization, Scenario};

/// Trials per independently seeded chunk.
pub const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Robust,
    Nonrobust,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Robust => "robust",
            Self::Nonrobust => "nonrobust",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Reflection channel recomputed from the perturbed position.
    Exact,
    /// `ĝ ⊙ e(Δ)`.
    Model,
}

impl std::str::FromStr for EvalMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Self::Exact),
            "model" => Ok(Self::Model),
            _ => Err(format!("unknown mode `{s}` (exact or model)")),
        }
    }
}

impl std::fmt::Display for EvalMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Model => "model",
        })
    }
}

/// A transmit configuration to evaluate.
#[derive(Debug, Clone)]
pub struct Beamformer {
    pub scheme: Scheme,
    pub w: CVector,
    pub xi: PhaseShifts,
}

impl Beamformer {
    pub fn power(&self) -> f64 {
        self.w.norm_squared()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub delta: Vector3<f64>,
    pub exact_rate: f64,
    pub model_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub scheme: Scheme,
    pub mode: EvalMode,
    pub power: f64,
    pub target_rate: f64,
    pub upsilon: f64,
    pub trials: Vec<TrialRecord>,
    pub min_rate: f64,
    pub max_rate: f64,
    pub mean_rate: f64,
    /// Fraction of trials with rate below the target.
    pub outage: f64,
    /// Fraction of trials with rate below the target minus 0.1 bits/s/Hz.
    pub outage_relaxed: f64,
    /// `(rate, P[R ≤ rate])` on an even grid from `min_rate` to `max_rate`.
    pub cdf: Vec<(f64, f64)>,
}

pub const RELAXED_RATE_SLACK: f64 = 0.1;
const CDF_POINTS: usize = 101;

impl EvalReport {
    pub fn rate(&self, t: &TrialRecord) -> f64 {
        match self.mode {
            EvalMode::Exact => t.exact_rate,
            EvalMode::Model => t.model_rate,
        }
    }

    pub fn rates(&self) -> Vec<f64> {
        self.trials.iter().map(|t| self.rate(t)).collect()
    }

    pub fn spread(&self) -> f64 {
        self.max_rate - self.min_rate
    }
}

/// Empirical CDF on `points` evenly spaced abscissae; right-continuous and
/// ending at 1.
pub fn empirical_cdf(rates: &[f64], points: usize) -> Vec<(f64, f64)> {
    if rates.is_empty() {
        return Vec::new();
    }
    let mut sorted = rates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let n = sorted.len() as f64;
    let points = points.max(2);
    (0..points)
        .map(|k| {
            let x = if k + 1 == points {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (points - 1) as f64
            };
            let count = sorted.partition_point(|r| *r <= x);
            (x, count as f64 / n)
        })
        .collect()
}

pub fn evaluate(
    design: &Beamformer,
    scen: &Scenario,
    real: &Realization,
    trials: usize,
    mode: EvalMode,
    seed: u64,
    exec: Execution,
) -> Result<EvalReport> {
    if trials == 0 {
        return Err(domain("at least one trial is required"));
    }
    let ctx = &real.ctx;
    let noise = ctx.noise_power;
    let chunks = trials.div_ceil(CHUNK);
    let irs = scen.irs_pos();
    let est = scen.user_est_pos();
    let parts: Vec<Result<Vec<TrialRecord>>> = parallel::map_range(exec, chunks, |c| {
        let mut sampler = ErrorSampler::with_stream(ctx.ball, seed, c as u64);
        let n = CHUNK.min(trials - c * CHUNK);
        (0..n)
            .map(|_| {
                let delta = sampler.sample();
                trial(design, real, irs, est, &delta, noise)
            })
            .collect()
    });
    let mut records = Vec::with_capacity(trials);
    for p in parts {
        records.extend(p?);
    }
    let target = scen.target_rate_bps_hz;
    let mut report = EvalReport {
        scheme: design.scheme,
        mode,
        power: design.power(),
        target_rate: target,
        upsilon: ctx.ball.radius,
        trials: records,
        min_rate: 0.0,
        max_rate: 0.0,
        mean_rate: 0.0,
        outage: 0.0,
        outage_relaxed: 0.0,
        cdf: Vec::new(),
    };
    let rates = report.rates();
    let n = rates.len() as f64;
    report.min_rate = rates.iter().copied().fold(f64::INFINITY, f64::min);
    report.max_rate = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report.mean_rate = rates.iter().sum::<f64>() / n;
    report.outage = rates.iter().filter(|r| **r < target).count() as f64 / n;
    report.outage_relaxed = rates
        .iter()
        .filter(|r| **r < target - RELAXED_RATE_SLACK)
        .count() as f64
        / n;
    report.cdf = empirical_cdf(&rates, CDF_POINTS);
    Ok(report)
}

fn trial(
    design: &Beamformer,
    real: &Realization,
    irs: crate::location::Position3D,
    est: crate::location::Position3D,
    delta: &LocationError,
    noise: f64,
) -> Result<TrialRecord> {
    let ctx = &real.ctx;
    let g_true = real.true_reflect_channel(irs, est, delta)?;
    let h_exact = effective_channel(&g_true.vector, &design.xi, &ctx.b2i)?;
    let g_model = ctx
        .g_hat
        .vector
        .component_mul(&error_vector(&ctx.sens, delta));
    let h_model = effective_channel(&g_model, &design.xi, &ctx.b2i)?;
    Ok(TrialRecord {
        delta: delta.delta,
        exact_rate: achievable_rate(&h_exact, &design.w, noise)?,
        model_rate: achievable_rate(&h_model, &design.w, noise)?,
    })
}
