//! `bound`, `verify` and `sweep`.
//!
//! Reals are written in Rust's shortest round-trip form, so reruns with the
//! same config and seed produce byte-identical files.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use lrcap::capacity::{self, CapacityReport};
use lrcap::channels::SncInstance;
use lrcap::distance::{self, VerifyOptions, MAX_DIAMOND_CHOI_DIM};

use crate::config::{NetworkConfig, Scenario};
use crate::error::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

pub const DIM_LIMIT_ENV: &str = "LRCAP_DIM_LIMIT";
pub const DEFAULT_DIM_LIMIT: usize = 1 << 12;

pub const BOUND_HEADER: [&str; 15] = [
    "t", "epsilon", "m_a", "m_b", "m_c", "m_q", "m_factor", "m_prime", "m_star", "c1", "c", "cp", "q", "ce", "qc_intermediate",
];
pub const VERIFY_HEADER: [&str; 13] = [
    "t", "epsilon", "induced_lhs", "trace_rhs", "trace_ok", "diamond_lhs", "diamond_rhs", "diamond_ok", "c1", "c", "cp", "q", "ce",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    Time,
    Distance,
}

fn real(x: f64) -> String {
    format!("{x:?}")
}

/// Dimension cap from the environment, or the default.
pub fn dim_limit() -> Result<usize, CliError> {
    match std::env::var(DIM_LIMIT_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{DIM_LIMIT_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_DIM_LIMIT),
    }
}

/// Refuses scenarios whose exact checks would exceed the desk-scale limits.
pub fn check_limits(s: &Scenario, limit: usize) -> Result<(), CliError> {
    let total = s.net.total_dim();
    if total > limit {
        return Err(CliError::DimensionLimit(format!(
            "trace-norm check gated: network dimension {total} exceeds the limit {limit} (set {DIM_LIMIT_ENV} to raise it)"
        )));
    }
    let choi = s.encoding.memory_dim() * s.net.m_b();
    if choi > MAX_DIAMOND_CHOI_DIM {
        return Err(CliError::DimensionLimit(format!(
            "diamond-norm check gated: Choi dimension M_Q*M_B = {choi} exceeds {MAX_DIAMOND_CHOI_DIM}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundRow {
    pub t: f64,
    #[serde(flatten)]
    pub report: CapacityReport,
}

pub fn bound_rows(s: &Scenario) -> Result<Vec<BoundRow>, CliError> {
    let (m_a, m_b, m_c) = (s.net.m_a() as u64, s.net.m_b() as u64, s.net.m_c() as u64);
    let m_q = s.encoding.memory_dim() as u64;
    s.times
        .iter()
        .map(|&t| {
            let eps = s.lr.epsilon_for(&s.net, t)?;
            Ok(BoundRow { t, report: capacity::report_from_epsilon(eps, m_a, m_b, m_c, m_q)? })
        })
        .collect()
}

fn bound_record(r: &BoundRow) -> Vec<String> {
    let p = &r.report;
    vec![
        real(r.t),
        real(p.epsilon),
        p.m_a.to_string(),
        p.m_b.to_string(),
        p.m_c.to_string(),
        p.m_q.to_string(),
        p.m_factor.to_string(),
        p.m_prime.to_string(),
        p.m_star.to_string(),
        real(p.c1_bound),
        real(p.c_bound),
        real(p.cp_bound),
        real(p.q_bound),
        real(p.ce_bound),
        real(p.qc_intermediate),
    ]
}

/// One verified grid point.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct VerifyRow {
    pub t: f64,
    pub epsilon: f64,
    pub induced_lhs: f64,
    pub trace_rhs: f64,
    pub trace_ok: bool,
    pub diamond_lhs: f64,
    pub diamond_rhs: f64,
    pub diamond_ok: bool,
    pub c1: f64,
    pub c: f64,
    pub cp: f64,
    pub q: f64,
    pub ce: f64,
}

impl VerifyRow {
    pub fn satisfied(&self) -> bool {
        self.trace_ok && self.diamond_ok
    }

    fn record(&self) -> Vec<String> {
        vec![
            real(self.t),
            real(self.epsilon),
            real(self.induced_lhs),
            real(self.trace_rhs),
            self.trace_ok.to_string(),
            real(self.diamond_lhs),
            real(self.diamond_rhs),
            self.diamond_ok.to_string(),
            real(self.c1),
            real(self.c),
            real(self.cp),
            real(self.q),
            real(self.ce),
        ]
    }
}

pub fn verify_row(base: &SncInstance, lr: &lrcap::lr::LrParams, t: f64, opts: &VerifyOptions) -> Result<VerifyRow, CliError> {
    let inst = base.at_time(t);
    let rep = distance::verify_bounds(&inst, lr, opts)?;
    let net = inst.net();
    let cap = capacity::report_from_epsilon(
        rep.epsilon,
        net.m_a() as u64,
        net.m_b() as u64,
        net.m_c() as u64,
        inst.memory_dim() as u64,
    )?;
    Ok(VerifyRow {
        t,
        epsilon: rep.epsilon,
        induced_lhs: rep.trace.induced_lower,
        trace_rhs: rep.trace.analytic_rhs,
        trace_ok: rep.trace.satisfied,
        diamond_lhs: rep.diamond.diamond,
        diamond_rhs: rep.diamond.analytic_rhs,
        diamond_ok: rep.diamond.satisfied,
        c1: cap.c1_bound,
        c: cap.c_bound,
        cp: cap.cp_bound,
        q: cap.q_bound,
        ce: cap.ce_bound,
    })
}

fn pool(parallelism: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

/// Verified rows over the scenario's time grid, in grid order.
pub fn verify_rows(s: &Scenario, opts: &VerifyOptions, parallelism: usize) -> Result<Vec<VerifyRow>, CliError> {
    check_limits(s, dim_limit()?)?;
    let base = SncInstance::new(s.net.clone(), s.encoding.clone(), 0.0)?;
    pool(parallelism)?.install(|| s.times.par_iter().map(|&t| verify_row(&base, &s.lr, t, opts)).collect())
}

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| CliError::Io { path: p.display().to_string(), message: e.to_string() })?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn io_err(out: Option<&Path>) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io { path: out.map_or("<stdout>".into(), |p| p.display().to_string()), message: e.to_string() }
}

fn write_csv(out: Option<&Path>, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(open_output(out)?);
    let wrap = |e: csv::Error| CliError::Io { path: out.map_or("<stdout>".into(), |p| p.display().to_string()), message: e.to_string() };
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(&r).map_err(wrap)?;
    }
    w.flush().map_err(io_err(out))
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = open_output(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io { path: "<json>".into(), message: e.to_string() })?;
    writeln!(w).map_err(io_err(out))?;
    w.flush().map_err(io_err(out))
}

pub fn cmd_bound(cfg: &NetworkConfig, out: Option<&Path>, format: Format) -> Result<i32, CliError> {
    let rows = bound_rows(&cfg.build()?)?;
    match format {
        Format::Csv => write_csv(out, &BOUND_HEADER, rows.iter().map(bound_record))?,
        Format::Json => write_json(out, &rows)?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(
    cfg: &NetworkConfig,
    out: Option<&Path>,
    opts: &VerifyOptions,
    parallelism: usize,
    format: Format,
) -> Result<i32, CliError> {
    let rows = verify_rows(&cfg.build()?, opts, parallelism)?;
    match format {
        Format::Csv => write_csv(out, &VERIFY_HEADER, rows.iter().map(VerifyRow::record))?,
        Format::Json => write_json(out, &rows)?,
    }
    Ok(if rows.iter().all(VerifyRow::satisfied) { EXIT_OK } else { EXIT_VIOLATION })
}

/// A sweep row: the swept value and either a verified row or the error it hit.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub param: f64,
    #[serde(flatten)]
    pub row: Option<VerifyRow>,
    pub error: Option<String>,
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        let mut r = vec![real(self.param)];
        match &self.row {
            Some(v) => r.extend(v.record()),
            None => r.extend(std::iter::repeat_n(String::new(), VERIFY_HEADER.len())),
        }
        r.push(self.error.clone().unwrap_or_default());
        r
    }
}

/// Sweep rows in input order; failures are reported per row.
pub fn sweep_rows(cfg: &NetworkConfig, param: SweepParam, opts: &VerifyOptions, parallelism: usize) -> Result<Vec<SweepRow>, CliError> {
    let limit = dim_limit()?;
    let tasks: Vec<(f64, Result<(Scenario, f64), CliError>)> = match param {
        SweepParam::Time => {
            let s = cfg.build()?;
            s.times.iter().map(|&t| (t, Ok((s.clone(), t)))).collect()
        }
        SweepParam::Distance => cfg
            .chain_scenarios()?
            .into_iter()
            .map(|(n, s)| (n as f64, s.map(|s| { let t = s.times[0]; (s, t) })))
            .collect(),
    };
    let run = |task: &(f64, Result<(Scenario, f64), CliError>)| -> SweepRow {
        let (param, scenario) = task;
        let result = match scenario {
            Ok((s, t)) => check_limits(s, limit)
                .and_then(|_| Ok(SncInstance::new(s.net.clone(), s.encoding.clone(), 0.0)?))
                .and_then(|base| verify_row(&base, &s.lr, *t, opts)),
            Err(e) => Err(CliError::Usage(e.to_string())),
        };
        match result {
            Ok(row) => SweepRow { param: *param, row: Some(row), error: None },
            Err(e) => SweepRow { param: *param, row: None, error: Some(e.to_string()) },
        }
    };
    Ok(pool(parallelism)?.install(|| tasks.par_iter().map(run).collect()))
}

pub fn cmd_sweep(
    cfg: &NetworkConfig,
    param: SweepParam,
    out: Option<&Path>,
    opts: &VerifyOptions,
    parallelism: usize,
    format: Format,
) -> Result<i32, CliError> {
    let rows = sweep_rows(cfg, param, opts, parallelism)?;
    match format {
        Format::Csv => {
            let mut header = vec!["param"];
            header.extend(VERIFY_HEADER);
            header.push("error");
            write_csv(out, &header, rows.iter().map(SweepRow::record))?;
        }
        Format::Json => write_json(out, &rows)?,
    }
    if rows.iter().any(|r| r.row.is_some_and(|v| !v.satisfied())) {
        Ok(EXIT_VIOLATION)
    } else if rows.iter().any(|r| r.error.is_some()) {
        Ok(EXIT_USAGE)
    } else {
        Ok(EXIT_OK)
    }
}
