//! Command-line front end.
//!
//! Exit codes: 0 pass, 1 usage or config error, 2 envelope violation,
//! 3 numeric failure (non-finite state, failed property suite, ...).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{self, ConfigError};
use crate::error::Error;
use crate::fxtbounds::{self, BoundProblem, Fraction};
use crate::powmath::OddRational;
use crate::selfcheck;
use crate::sim::{self, Baseline, Metrics, Scenario, SimFailure, Trajectory};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VIOLATION: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "ppfxt", version, about = "Prescribed-performance fixed-time helicopter control and settling-time bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its trajectory and report.
    Run(RunArgs),
    /// Sweep the barrier exponent m = n and add the log-ratio baseline.
    SweepUbf(SweepArgs),
    /// Full method against the fixed-band and plain backstepping comparators.
    Compare(RunArgs),
    /// Settling-time bound table as CSV.
    Bounds(BoundsArgs),
    /// Run the randomized property suites.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario file (JSON). Defaults to the built-in attitude-tracking scenario.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Override the integration step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Override the horizon.
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated odd/odd exponents.
    #[arg(long, default_value = "1,1/3,1/5,1/7")]
    pub exponents: String,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// JSON array of `{mu1, mu2, mu3, p, q, tau}` with `p`, `q` as "num/den".
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One pass/fail assertion inside a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario_id: String,
    pub baseline: Baseline,
    pub metrics: Option<Metrics>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub error: Option<String>,
    pub outputs: Vec<PathBuf>,
}

impl RunReport {
    fn exit_code(&self, failure: Option<&Error>) -> u8 {
        match failure {
            Some(e) if e.is_envelope_violation() => EXIT_VIOLATION,
            Some(_) => EXIT_NUMERIC,
            None if self.passed => EXIT_PASS,
            // Every check is a consequence of funnel containment.
            None => EXIT_VIOLATION,
        }
    }
}

/// Assertions on a finished run. The prescribed-performance checks only
/// apply to baselines that actually run against the prescribed funnel.
pub fn assess(sc: &Scenario, tr: &Trajectory, m: &Metrics) -> Vec<Check> {
    let mut checks = vec![Check {
        name: "envelope_violations".into(),
        passed: m.envelope_violations == 0,
        value: m.envelope_violations as f64,
        threshold: 0.0,
    }];
    if matches!(sc.sim.baseline, Baseline::None | Baseline::ClassicalUbf) {
        let band = sc.envelope.e_inf.max(sc.envelope.e_inf_bar);
        checks.push(Check {
            name: "post_deadline_containment".into(),
            passed: m.max_abs_error_after_ts <= band,
            value: m.max_abs_error_after_ts,
            threshold: band,
        });
        checks.push(Check { name: "overshoot".into(), passed: m.overshoot <= band, value: m.overshoot, threshold: band });
    }
    let omega_max = sc.gains.omega_max;
    let omega_out = tr.omega_hat.iter().filter(|w| !(**w >= 0.0 && **w <= omega_max)).count();
    checks.push(Check { name: "omega_hat_in_range".into(), passed: omega_out == 0, value: omega_out as f64, threshold: 0.0 });
    let gap = (0..tr.len())
        .map(|i| tr.z1[i].abs() - (tr.w1[i].abs() + tr.zeta1[i].abs()))
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check { name: "z1_bounded_by_w1_plus_zeta1".into(), passed: gap <= 1e-9, value: gap, threshold: 1e-9 });
    checks
}

fn ensure_dir(dir: &Path) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Run one scenario, write `<id>.csv`, `<id>.report.json` and `<id>.config.json`.
pub fn execute(sc: &Scenario, out: &Path) -> Result<(RunReport, u8), String> {
    let result = sim::run(sc);
    let (tr, failure) = match result {
        Ok(tr) => (tr, None),
        Err(SimFailure { error, partial }) => (partial, Some(error)),
    };
    let csv_path = out.join(format!("{}.csv", sc.id));
    let cfg_path = out.join(format!("{}.config.json", sc.id));
    tr.save_csv(&csv_path).map_err(|e| format!("cannot write {}: {e}", csv_path.display()))?;
    config::save(sc, &cfg_path).map_err(|e| format!("cannot write {}: {e}", cfg_path.display()))?;
    let metrics = if tr.is_empty() { None } else { sim::compute_metrics(&tr, sc).ok() };
    let checks = match (&failure, &metrics) {
        (None, Some(m)) => assess(sc, &tr, m),
        _ => Vec::new(),
    };
    let passed = failure.is_none() && !checks.is_empty() && checks.iter().all(|c| c.passed);
    let report_path = out.join(format!("{}.report.json", sc.id));
    let mut report = RunReport {
        scenario_id: sc.id.clone(),
        baseline: sc.sim.baseline,
        metrics,
        checks,
        passed,
        error: failure.as_ref().map(|e| e.to_string()),
        outputs: vec![csv_path, cfg_path, report_path.clone()],
    };
    let code = report.exit_code(failure.as_ref());
    if !passed && report.error.is_none() {
        report.error = Some("one or more checks failed".into());
    }
    write_json(&report_path, &report)?;
    Ok((report, code))
}

fn load_scenario(args: &RunArgs, default: impl FnOnce() -> Scenario) -> Result<Scenario, ConfigError> {
    let mut sc = match &args.config {
        Some(path) => config::load(path)?,
        None => default(),
    };
    if let Some(dt) = args.dt {
        sc.sim.dt = dt;
    }
    if let Some(t_end) = args.t_end {
        sc.sim.t_end = t_end;
    }
    sc.validate()?;
    Ok(sc)
}

fn summary_line(r: &RunReport) -> String {
    match &r.metrics {
        Some(m) => format!(
            "{:<28} {:<4} violations={} max|e1|(t>=Ts)={:.3e} overshoot={:.3e} energy={:.4e} peak={:.4e}",
            r.scenario_id,
            if r.passed { "PASS" } else { "FAIL" },
            m.envelope_violations,
            m.max_abs_error_after_ts,
            m.overshoot,
            m.control_energy,
            m.peak_input
        ),
        None => format!("{:<28} FAIL {}", r.scenario_id, r.error.as_deref().unwrap_or("")),
    }
}

fn cmd_run(args: &RunArgs) -> u8 {
    let sc = match load_scenario(args, Scenario::simulation_ii) {
        Ok(sc) => sc,
        Err(e) => return usage(e),
    };
    if let Err(e) = ensure_dir(&args.out) {
        return usage(e);
    }
    match execute(&sc, &args.out) {
        Ok((report, code)) => {
            println!("{}", summary_line(&report));
            if let Some(e) = &report.error {
                eprintln!("{e}");
            }
            code
        }
        Err(e) => usage(e),
    }
}

/// Parse "1,1/3,1/5" into exponents; an empty list is a usage error.
pub fn parse_exponents(list: &str) -> Result<Vec<OddRational>, String> {
    let items: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err("exponent list is empty".into());
    }
    items.iter().map(|s| OddRational::from_str(s).map_err(|e| format!("exponent {s:?}: {e}"))).collect()
}

/// Scenarios of the exponent sweep: one per exponent, then the log-ratio baseline.
pub fn sweep_scenarios(base: &Scenario, exponents: &[OddRational]) -> Vec<Scenario> {
    let mut out: Vec<Scenario> = exponents
        .iter()
        .map(|&m| {
            let mut sc = base.clone();
            sc.ubf.m = m;
            sc.ubf.n = m;
            sc.id = format!("{}_m{}", base.id, m.tag());
            sc
        })
        .collect();
    out.push(base.clone().with_baseline(Baseline::ClassicalUbf));
    out
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| e.to_string())?;
    w.write_record(header).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(r).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

fn batch(scenarios: &[Scenario], out: &Path, table: &str, hard: impl Fn(&Scenario) -> bool) -> u8 {
    let results: Vec<Result<(RunReport, u8), String>> = scenarios.par_iter().map(|sc| execute(sc, out)).collect();
    let mut rows = Vec::new();
    let mut code = EXIT_PASS;
    for (sc, res) in scenarios.iter().zip(results) {
        let (report, c) = match res {
            Ok(r) => r,
            Err(e) => return usage(e),
        };
        println!("{}", summary_line(&report));
        if hard(sc) {
            code = code.max(c);
        }
        let m = report.metrics;
        let f = |v: Option<f64>| v.map(|x| format!("{x:.9e}")).unwrap_or_default();
        rows.push(vec![
            sc.id.clone(),
            sc.sim.baseline.label().to_string(),
            sc.ubf.m.to_string(),
            f(m.map(|m| m.control_energy)),
            f(m.map(|m| m.peak_input)),
            m.map(|m| m.envelope_violations.to_string()).unwrap_or_default(),
            f(m.map(|m| m.max_abs_error_after_ts)),
            f(m.map(|m| m.overshoot)),
            f(m.and_then(|m| m.convergence_time)),
            report.passed.to_string(),
        ]);
    }
    let header = [
        "id",
        "baseline",
        "m",
        "control_energy",
        "peak_input",
        "envelope_violations",
        "max_abs_error_after_ts",
        "overshoot",
        "convergence_time",
        "passed",
    ];
    let path = out.join(table);
    if let Err(e) = write_table(&path, &header, &rows) {
        return usage(e);
    }
    println!("table: {}", path.display());
    code
}

fn cmd_sweep(args: &SweepArgs) -> u8 {
    let exponents = match parse_exponents(&args.exponents) {
        Ok(e) => e,
        Err(e) => return usage(e),
    };
    let base = match load_scenario(&args.run, || {
        let mut sc = Scenario::simulation_i(OddRational::ONE);
        sc.id = "sim1".into();
        sc
    }) {
        Ok(sc) => sc,
        Err(e) => return usage(e),
    };
    if let Err(e) = ensure_dir(&args.run.out) {
        return usage(e);
    }
    batch(&sweep_scenarios(&base, &exponents), &args.run.out, "ubf_sweep.csv", |_| true)
}

/// Full method, fixed band, plain backstepping.
pub fn compare_scenarios(base: &Scenario) -> Vec<Scenario> {
    let mut full = base.clone();
    full.sim.baseline = Baseline::None;
    vec![full.clone(), full.clone().with_baseline(Baseline::NoPf), full.with_baseline(Baseline::Cfb)]
}

fn cmd_compare(args: &RunArgs) -> u8 {
    let base = match load_scenario(args, Scenario::simulation_ii) {
        Ok(sc) => sc,
        Err(e) => return usage(e),
    };
    if let Err(e) = ensure_dir(&args.out) {
        return usage(e);
    }
    // The comparators are stand-ins; only the full method decides the exit code.
    batch(&compare_scenarios(&base), &args.out, "compare.csv", |sc| sc.sim.baseline == Baseline::None)
}

/// One row of a bounds parameter file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub p: String,
    pub q: String,
    pub tau: f64,
}

impl BoundSpec {
    pub fn new(mu1: f64, mu2: f64, mu3: f64, p: &str, q: &str, tau: f64) -> Self {
        BoundSpec { mu1, mu2, mu3, p: p.into(), q: q.into(), tau }
    }

    pub fn problem(&self) -> Result<BoundProblem, Error> {
        let p = Fraction::from_str(&self.p)?;
        let q = Fraction::from_str(&self.q)?;
        BoundProblem::with_fractions(self.mu1, self.mu2, self.mu3, p, q, self.tau)
    }
}

/// Rows printed when no parameter file is given.
pub fn default_bound_specs() -> Vec<BoundSpec> {
    vec![
        BoundSpec::new(1.0, 1.0, 0.0, "1/2", "3/2", 0.5),
        BoundSpec::new(1.0, 1.0, 0.5, "1/2", "3/2", 0.5),
        BoundSpec::new(2.0, 0.5, 0.2, "1/3", "5/3", 0.5),
        BoundSpec::new(1.0, 1.0, 0.1, "3/5", "5/3", 0.5),
        BoundSpec::new(1.5, 3.0, 0.3, "1/3", "7/3", 0.4),
    ]
}

pub const BOUNDS_V0: [f64; 4] = [1.0, 1e3, 1e6, 1e9];

pub fn bounds_header() -> Vec<String> {
    let mut h: Vec<String> = ["mu1", "mu2", "mu3", "p", "q", "tau", "residual"].iter().map(|s| s.to_string()).collect();
    h.extend(BOUNDS_V0.iter().map(|v| format!("oracle_v0_{v:e}")));
    h.extend(["t1", "t2", "lemma2", "lemma3", "lemma4", "error"].iter().map(|s| s.to_string()));
    h
}

/// One CSV row; lemma columns are blank when their precondition fails.
pub fn bounds_row(spec: &BoundSpec) -> Vec<String> {
    let num = |v: f64| format!("{v:.12e}");
    let mut row = vec![num(spec.mu1), num(spec.mu2), num(spec.mu3), spec.p.clone(), spec.q.clone(), num(spec.tau)];
    let bp = match spec.problem() {
        Ok(bp) => bp,
        Err(e) => {
            row.resize(bounds_header().len() - 1, String::new());
            row.push(e.to_string());
            return row;
        }
    };
    let cell = |r: crate::Result<f64>| r.map(num).unwrap_or_default();
    row.push(cell(fxtbounds::residual_bound(&bp)));
    for v0 in BOUNDS_V0 {
        row.push(cell(fxtbounds::settle_oracle(&bp, v0).map(|s| s.t_settle)));
    }
    row.push(cell(fxtbounds::t1_bound(&bp)));
    row.push(cell(fxtbounds::t2_classical(&bp)));
    row.push(cell(fxtbounds::t_lemma2(&bp)));
    row.push(match bp.lemma3_order() {
        Some(a) => cell(fxtbounds::t_lemma3(&bp, a)),
        None => String::new(),
    });
    row.push(cell(fxtbounds::t_lemma4(&bp)));
    row.push(String::new());
    row
}

fn cmd_bounds(args: &BoundsArgs) -> u8 {
    let specs = match &args.params {
        None => default_bound_specs(),
        Some(path) => {
            let parsed = fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))
                .and_then(|t| serde_json::from_str::<Vec<BoundSpec>>(&t).map_err(|e| format!("{}: {e}", path.display())));
            match parsed {
                Ok(s) => s,
                Err(e) => return usage(e),
            }
        }
    };
    let rows: Vec<Vec<String>> = specs.par_iter().map(bounds_row).collect();
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let ok = w.write_record(bounds_header()).is_ok() && rows.iter().all(|r| w.write_record(r).is_ok()) && w.flush().is_ok();
        if !ok {
            return usage("cannot format bounds table");
        }
    }
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &buf) {
                return usage(format!("cannot write {}: {e}", path.display()));
            }
        }
        None => print!("{}", String::from_utf8_lossy(&buf)),
    }
    EXIT_PASS
}

fn cmd_selfcheck(args: &SelfcheckArgs) -> u8 {
    let results = selfcheck::run_all(args.seed, selfcheck::Sizes::default());
    for r in &results {
        println!(
            "{:<36} {} cases={:<6} failures={} worst={:.3e}",
            r.name,
            if r.passed() { "PASS" } else { "FAIL" },
            r.cases,
            r.failures,
            r.worst
        );
        if let Some(f) = &r.first_failure {
            println!("    first failure: {f}");
        }
    }
    if let Some(path) = &args.out {
        if let Err(e) = write_json(path, &results) {
            return usage(e);
        }
    }
    if results.iter().all(|r| r.passed()) {
        EXIT_PASS
    } else {
        EXIT_NUMERIC
    }
}

fn usage(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

pub fn dispatch(cli: &Cli) -> u8 {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::SweepUbf(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Selfcheck(a) => cmd_selfcheck(a),
    }
}

/// Parse `std::env::args` and run; clap usage errors map to exit code 1.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(dispatch(&cli))
}

/// The scenarios behind `configs/*.json`.
pub fn shipped_configs() -> Vec<(&'static str, Scenario)> {
    let mut sim1 = Scenario::simulation_i(OddRational::ONE);
    sim1.id = "sim1".into();
    vec![("sim1.json", sim1), ("sim2.json", Scenario::simulation_ii())]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_parsing() {
        assert_eq!(parse_exponents("1, 1/3").unwrap(), vec![OddRational::ONE, OddRational::new(1, 3).unwrap()]);
        assert!(parse_exponents("").is_err());
        assert!(parse_exponents(" , ").is_err());
        assert!(parse_exponents("2/3").is_err());
    }

    #[test]
    fn sweep_has_classical_baseline_last() {
        let base = shipped_configs().remove(0).1;
        let s = sweep_scenarios(&base, &parse_exponents("1,1/3,1/5,1/7").unwrap());
        assert_eq!(s.len(), 5);
        assert_eq!(s[4].sim.baseline, Baseline::ClassicalUbf);
        assert_eq!(s[3].ubf.n, OddRational::new(1, 7).unwrap());
        let ids: std::collections::HashSet<_> = s.iter().map(|s| s.id.clone()).collect();
        assert_eq!(ids.len(), 5);
    }

    #[test]
    fn canonical_bounds_row() {
        let row = bounds_row(&default_bound_specs()[0]);
        let h = bounds_header();
        let col = |name: &str| row[h.iter().position(|c| c == name).unwrap()].parse::<f64>().unwrap();
        assert!((col("t1") - std::f64::consts::PI * 2f64.sqrt()).abs() < 1e-9);
        assert!((col("t2") - 8.0).abs() < 1e-12);
        assert!((col("oracle_v0_1e9") - std::f64::consts::PI).abs() < 1e-4);
        assert!((col("lemma2") - std::f64::consts::PI * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn lemma2_blank_when_p_plus_q_differs_from_two() {
        let row = bounds_row(&BoundSpec::new(1.0, 1.0, 0.1, "3/5", "5/3", 0.5));
        let h = bounds_header();
        assert_eq!(row[h.iter().position(|c| c == "lemma2").unwrap()], "");
        assert!(!row[h.iter().position(|c| c == "lemma4").unwrap()].is_empty());
    }

    #[test]
    fn invalid_row_reports_error() {
        let row = bounds_row(&BoundSpec::new(-1.0, 1.0, 0.1, "1/3", "5/3", 0.5));
        assert_eq!(row.len(), bounds_header().len());
        assert!(row.last().unwrap().contains("mu1"));
    }
}
