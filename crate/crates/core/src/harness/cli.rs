//! Command-line front end.
//!
//! Exit codes: 0 success, 2 malformed input or configuration, 3 optimizer
//! or self-test failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baseline::nonrobust_design;
use crate::error::{Error, Result};
use crate::optimizer::alternate_traced;
use crate::parallel::Execution;

use super::evaluate::{evaluate, Beamformer, EvalMode, Scheme};
use super::report::{self, DesignFile};
use super::scenario::{Profile, Scenario};
use super::selftest::run_selftest;
use super::sweep::sweep_power_vs_rate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_OPTIMIZER: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "irs-robust",
    version,
    about = "Robust IRS beamforming design and Monte Carlo evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Overrides the scenario seed (channel draw, randomization, Monte Carlo).
    #[arg(long)]
    seed: Option<u64>,
    /// Start from the N = 16, M = 100 profile instead of the desk profile.
    #[arg(long)]
    paper_profile: bool,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn profile(&self) -> Profile {
        if self.paper_profile {
            Profile::Paper
        } else {
            Profile::Desk
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Robust,
    Nonrobust,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Model,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one scenario and write the design file.
    Design {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo evaluation of a design file.
    Evaluate {
        #[arg(long)]
        design: PathBuf,
        /// Defaults to the scenario's trial count.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_enum, default_value = "model")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "both")]
        scheme: SchemeArg,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Overrides the Monte Carlo seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        sequential: bool,
    },
    /// Required power over a grid of target rates, radii and IRS sizes.
    Sweep {
        /// Base scenario; the selected profile when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        rates: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        upsilons: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "16,36")]
        m_values: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in invariant suite.
    Selftest {
        #[arg(long)]
        sequential: bool,
    },
}

/// Exit code for an error escaping a subcommand.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::Domain(_)
        | Error::Dimension { .. }
        | Error::Io(_)
        | Error::Json(_) => EXIT_CONFIG,
        Error::ZeroChannel
        | Error::Solver { .. }
        | Error::RandomizationFailed { .. }
        | Error::InfeasibleInit(_)
        | Error::Iteration { .. } => EXIT_OPTIMIZER,
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config {
        line: 0,
        msg: format!("cannot read {}: {e}", path.display()),
    })
}

fn load_scenario(path: &Path, common: &Common) -> Result<Scenario> {
    let mut s = Scenario::parse_onto(Scenario::profile(common.profile()), &read(path)?).map_err(
        |e| match e {
            Error::Config { line, msg } => Error::Config {
                line,
                msg: format!("{}: {msg}", path.display()),
            },
            other => other,
        },
    )?;
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn design(scenario: &Path, out: &Path, common: &Common) -> Result<i32> {
    let scen = load_scenario(scenario, common)?;
    let real = scen.realize()?;
    let mut trace = Vec::new();
    match alternate_traced(
        &real.ctx,
        &scen.optimizer_config(common.execution()),
        &mut trace,
    ) {
        Ok(sol) => {
            let file = DesignFile::new(&scen, &sol);
            report::write_text(out, &file.to_json()?)?;
            report::write_text(
                &with_suffix(out, ".trace.csv"),
                &report::trace_csv(&sol.trace)?,
            )?;
            let summary = report::design_summary(&file);
            report::write_text(&with_suffix(out, ".summary.txt"), &summary)?;
            print!("{summary}");
            Ok(EXIT_OK)
        }
        Err(e) if exit_code(&e) == EXIT_OPTIMIZER => {
            let path = with_suffix(out, ".failure.txt");
            let mut text = format!("error: {e}\n\nscenario:\n{}\ntrace:\n", scen.to_kv());
            text.push_str(&report::trace_csv(&trace)?);
            report::write_text(&path, &text)?;
            eprintln!("optimizer failed: {e}");
            eprintln!("trace written to {}", path.display());
            Ok(EXIT_OPTIMIZER)
        }
        Err(e) => Err(e),
    }
}

fn run_evaluate(
    design_path: &Path,
    trials: Option<usize>,
    mode: ModeArg,
    scheme: SchemeArg,
    out_dir: &Path,
    seed: Option<u64>,
    exec: Execution,
) -> Result<i32> {
    let file = DesignFile::from_json(&read(design_path)?)?;
    let scen = &file.scenario;
    let real = scen.realize()?;
    let robust = file.beamformer()?;
    let trials = trials.unwrap_or(scen.trials);
    let seed = seed.unwrap_or(scen.seed);
    let mode = match mode {
        ModeArg::Exact => EvalMode::Exact,
        ModeArg::Model => EvalMode::Model,
    };
    let mut designs = Vec::new();
    if matches!(scheme, SchemeArg::Robust | SchemeArg::Both) {
        designs.push(robust.clone());
    }
    if matches!(scheme, SchemeArg::Nonrobust | SchemeArg::Both) {
        // Equal-power comparison.
        let b = nonrobust_design(&real.ctx, robust.power())?;
        designs.push(Beamformer {
            scheme: Scheme::Nonrobust,
            w: b.w,
            xi: b.xi,
        });
    }
    let mut summary = String::new();
    for d in &designs {
        let rep = evaluate(d, scen, &real, trials, mode, seed, exec)?;
        let stem = format!("{}_{}", d.scheme, mode);
        report::write_text(
            &out_dir.join(format!("{stem}_trials.csv")),
            &report::trials_csv(&rep)?,
        )?;
        report::write_text(
            &out_dir.join(format!("{stem}_cdf.csv")),
            &report::cdf_csv(&rep)?,
        )?;
        summary.push_str(&report::eval_summary(&rep));
    }
    let _ = writeln!(summary, "seed {seed}");
    report::write_text(&out_dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(EXIT_OK)
}

fn sweep(
    scenario: Option<&Path>,
    rates: &[f64],
    upsilons: &[f64],
    m_values: &[usize],
    out: &Path,
    common: &Common,
) -> Result<i32> {
    let scen = match scenario {
        Some(p) => load_scenario(p, common)?,
        None => {
            let mut s = Scenario::profile(common.profile());
            if let Some(seed) = common.seed {
                s.seed = seed;
            }
            s
        }
    };
    let rows = sweep_power_vs_rate(&scen, rates, upsilons, m_values, common.execution())?;
    report::write_text(out, &report::sweep_csv(&rows)?)?;
    let summary = report::sweep_summary(&rows);
    report::write_text(&with_suffix(out, ".summary.txt"), &summary)?;
    print!("{summary}");
    if rows.iter().all(|r| r.outcome.is_err()) {
        return Ok(EXIT_OPTIMIZER);
    }
    Ok(EXIT_OK)
}

fn selftest(exec: Execution) -> i32 {
    let results = run_selftest(exec);
    for c in &results {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    if results.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_OPTIMIZER
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let seq = |s: bool| {
        if s {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    };
    let result = match &cli.command {
        Command::Design {
            scenario,
            out,
            common,
        } => design(scenario, out, common),
        Command::Evaluate {
            design,
            trials,
            mode,
            scheme,
            out_dir,
            seed,
            sequential,
        } => run_evaluate(
            design,
            *trials,
            *mode,
            *scheme,
            out_dir,
            *seed,
            seq(*sequential),
        ),
        Command::Sweep {
            scenario,
            rates,
            upsilons,
            m_values,
            out,
            common,
        } => sweep(scenario.as_deref(), rates, upsilons, m_values, out, common),
        Command::Selftest { sequential } => Ok(selftest(seq(*sequential))),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
