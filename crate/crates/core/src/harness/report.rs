//! On-disk artifacts: the design file (JSON), CSV tables and summary text.
//!
//! Every float is written with Rust's shortest round-trip formatting, so
//! identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{watts_to_dbm, PhaseShifts};
use crate::error::{domain, Error, Result};
use crate::optimizer::{DesignSolution, TraceRecord};
use crate::{CVector, Complex64};

use super::evaluate::{Beamformer, EvalReport, Scheme};
use super::scenario::Scenario;
use super::sweep::SweepRow;

pub const DESIGN_FORMAT: &str = "irs-robust-design/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub power_w: f64,
    /// `None` where the relaxation was not solved or was infeasible.
    pub v_w: Option<f64>,
    pub margin_w: f64,
    pub sdr_power_w: Option<f64>,
    pub w_accepted: bool,
    pub xi_accepted: bool,
}

impl From<&TraceRecord> for TraceRow {
    fn from(t: &TraceRecord) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        Self {
            iteration: t.iteration,
            power_w: t.power,
            v_w: finite(t.v),
            margin_w: t.margin,
            sdr_power_w: finite(t.sdr_power),
            w_accepted: t.w_accepted,
            xi_accepted: t.xi_accepted,
        }
    }
}

/// Serialized robust design together with the scenario it was solved for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub format: String,
    pub scenario: Scenario,
    /// Beamformer entries as `[re, im]`.
    pub w: Vec<[f64; 2]>,
    /// Unit-modulus phase shifts as `[re, im]`.
    pub xi: Vec<[f64; 2]>,
    pub power_w: f64,
    pub power_dbm: f64,
    pub mu: f64,
    pub worst_case_rate_bps_hz: f64,
    pub certified_margin_w: f64,
    pub worst_delta_m: [f64; 3],
    pub exact_rate_at_worst_bps_hz: f64,
    pub iterations: usize,
    pub converged: bool,
    pub max_sdp_violation: f64,
    pub trace: Vec<TraceRow>,
}

fn pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn unpairs(v: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|p| Complex64::new(p[0], p[1])))
}

impl DesignFile {
    pub fn new(scenario: &Scenario, sol: &DesignSolution) -> Self {
        Self {
            format: DESIGN_FORMAT.to_string(),
            scenario: scenario.clone(),
            w: pairs(&sol.w),
            xi: pairs(sol.xi.as_vector()),
            power_w: sol.power,
            power_dbm: watts_to_dbm(sol.power),
            mu: sol.mu,
            worst_case_rate_bps_hz: sol.worst_case_rate,
            certified_margin_w: sol.certified_margin,
            worst_delta_m: [sol.worst_delta.x, sol.worst_delta.y, sol.worst_delta.z],
            exact_rate_at_worst_bps_hz: sol.exact_rate_at_worst,
            iterations: sol.iterations,
            converged: sol.converged,
            max_sdp_violation: sol.max_sdp_violation,
            trace: sol.trace.iter().map(TraceRow::from).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text).map_err(|e| Error::Config {
            line: e.line(),
            msg: format!("design file: {e}"),
        })?;
        if f.format != DESIGN_FORMAT {
            return Err(Error::Config {
                line: 0,
                msg: format!("design file: unsupported format `{}`", f.format),
            });
        }
        f.scenario.validate().map_err(|e| Error::Config {
            line: 0,
            msg: format!("design file scenario: {e}"),
        })?;
        let n = f.scenario.bs_geom()?.len();
        let m = f.scenario.irs_geom()?.len();
        if f.w.len() != n || f.xi.len() != m {
            return Err(Error::Config {
                line: 0,
                msg: format!(
                    "design file: w has {} entries and xi {}, scenario needs {n} and {m}",
                    f.w.len(),
                    f.xi.len()
                ),
            });
        }
        Ok(f)
    }

    pub fn beamformer(&self) -> Result<Beamformer> {
        let xi = PhaseShifts::new(unpairs(&self.xi)).map_err(|e| Error::Config {
            line: 0,
            msg: format!("design file: {e}"),
        })?;
        Ok(Beamformer {
            scheme: Scheme::Robust,
            w: unpairs(&self.w),
            xi,
        })
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| domain(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn trace_csv(trace: &[TraceRecord]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record([
        "iteration",
        "power_w",
        "v_w",
        "margin_w",
        "sdr_power_w",
        "w_accepted",
        "xi_accepted",
    ])
    .map_err(csv_err)?;
    for t in trace {
        w.write_record([
            t.iteration.to_string(),
            num(t.power),
            num(t.v),
            num(t.margin),
            num(t.sdr_power),
            t.w_accepted.to_string(),
            t.xi_accepted.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// One row per trial; the `rate_bps_hz` column is the one the report's mode
/// selects.
pub fn trials_csv(rep: &EvalReport) -> Result<String> {
    let mut w = csv_writer();
    w.write_record([
        "trial",
        "dx_m",
        "dy_m",
        "dz_m",
        "exact_rate_bps_hz",
        "model_rate_bps_hz",
        "rate_bps_hz",
        "outage",
    ])
    .map_err(csv_err)?;
    for (k, t) in rep.trials.iter().enumerate() {
        let r = rep.rate(t);
        w.write_record([
            k.to_string(),
            num(t.delta.x),
            num(t.delta.y),
            num(t.delta.z),
            num(t.exact_rate),
            num(t.model_rate),
            num(r),
            u8::from(r < rep.target_rate).to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn cdf_csv(rep: &EvalReport) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["rate_bps_hz", "cdf"]).map_err(csv_err)?;
    for (x, p) in &rep.cdf {
        w.write_record([num(*x), num(*p)]).map_err(csv_err)?;
    }
    finish(w)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record([
        "target_rate_bps_hz",
        "upsilon_m",
        "irs_elements",
        "power_w",
        "power_dbm",
        "iterations",
        "certified_margin_w",
        "status",
        "reason",
    ])
    .map_err(csv_err)?;
    for r in rows {
        let (p, dbm, it, margin, status, reason) = match &r.outcome {
            Ok(pt) => (
                num(pt.power),
                num(watts_to_dbm(pt.power)),
                pt.iterations.to_string(),
                num(pt.certified_margin),
                "ok",
                String::new(),
            ),
            Err(reason) => (
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "failed",
                reason.clone(),
            ),
        };
        w.write_record([
            num(r.rate),
            num(r.upsilon),
            r.irs_elements.to_string(),
            p,
            dbm,
            it,
            margin,
            status.to_string(),
            reason,
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn design_summary(file: &DesignFile) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "design");
    let _ = writeln!(
        s,
        "  power            {:.6e} W ({:.3} dBm)",
        file.power_w, file.power_dbm
    );
    let _ = writeln!(
        s,
        "  worst-case rate  {:.6} bits/s/Hz",
        file.worst_case_rate_bps_hz
    );
    let _ = writeln!(
        s,
        "  exact at worst   {:.6} bits/s/Hz",
        file.exact_rate_at_worst_bps_hz
    );
    let _ = writeln!(s, "  margin           {:.6e} W", file.certified_margin_w);
    let _ = writeln!(
        s,
        "  iterations       {} ({})",
        file.iterations,
        if file.converged {
            "converged"
        } else {
            "iteration cap"
        }
    );
    let _ = writeln!(s, "  max SDP residual {:.3e}", file.max_sdp_violation);
    s
}

pub fn eval_summary(rep: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} ({} mode)", rep.scheme, rep.mode);
    let _ = writeln!(s, "  trials           {}", rep.trials.len());
    let _ = writeln!(
        s,
        "  power            {:.6e} W ({:.3} dBm)",
        rep.power,
        watts_to_dbm(rep.power)
    );
    let _ = writeln!(s, "  upsilon          {} m", rep.upsilon);
    let _ = writeln!(s, "  target rate      {} bits/s/Hz", rep.target_rate);
    let _ = writeln!(s, "  outage           {:.6}", rep.outage);
    let _ = writeln!(s, "  outage (r - 0.1) {:.6}", rep.outage_relaxed);
    let _ = writeln!(s, "  min rate         {:.6} bits/s/Hz", rep.min_rate);
    let _ = writeln!(s, "  mean rate        {:.6} bits/s/Hz", rep.mean_rate);
    let _ = writeln!(s, "  max rate         {:.6} bits/s/Hz", rep.max_rate);
    s
}

pub fn sweep_summary(rows: &[SweepRow]) -> String {
    let ok = rows.iter().filter(|r| r.outcome.is_ok()).count();
    let mut s = format!("sweep: {ok} of {} points solved\n", rows.len());
    for r in rows {
        let _ = match &r.outcome {
            Ok(p) => writeln!(
                s,
                "  r={} upsilon={} M={}: {:.3} dBm",
                r.rate,
                r.upsilon,
                r.irs_elements,
                watts_to_dbm(p.power)
            ),
            Err(e) => writeln!(
                s,
                "  r={} upsilon={} M={}: failed: {e}",
                r.rate, r.upsilon, r.irs_elements
            ),
        };
    }
    s
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}
