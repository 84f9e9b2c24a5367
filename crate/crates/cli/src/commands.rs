//! Subcommand implementations. Each returns a [`Report`] that [`emit`] renders.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use nclaurent::commutative::{comm_iterate, compare_abelian};
use nclaurent::divcheck::{check_steps, DivisionLimits};
use nclaurent::freealg::write_element;
use nclaurent::pitoracle::{derive_seed, verify_iterate, PitConfig};
use nclaurent::toric::{chart_checks, toric_report};
use nclaurent::{HSpec, IterateResult, Kontsevich};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Check, Format, RunConfig};
use crate::CliError;

/// Seed-stream tag for the matrix evaluation check.
const PIT_STREAM: u64 = 0x0070_6974;

#[derive(Debug, Clone)]
pub enum Body {
    /// A small document with both renderings prepared.
    Doc { json: Value, text: String },
    /// Iterates are rendered lazily, term by term, since they can hold millions of terms.
    Iterates { h: HSpec, timings: bool, items: Vec<IterateResult> },
}

#[derive(Debug, Clone)]
pub struct Report {
    pub body: Body,
    pub pass: bool,
    pub warnings: Vec<String>,
}

impl Report {
    fn doc(json: Value, text: String, pass: bool, warnings: Vec<String>) -> Self {
        Report { body: Body::Doc { json, text }, pass, warnings }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The check could not decide; does not fail the run.
    Inconclusive,
    /// Reported for information only (not a mandatory property for this input).
    Informational,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub mandatory: bool,
    pub summary: String,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    #[serde(rename = "H")]
    pub h: Vec<nclaurent::Coeff>,
    pub k_min: i64,
    pub k_max: i64,
    pub seed: u64,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s =
            format!("verify H = {:?}, k in [{}, {}], seed {}\n", self.h_string(), self.k_min, self.k_max, self.seed);
        for c in &self.checks {
            let status = serde_json::to_value(c.status).unwrap();
            s.push_str(&format!("{:<11} {:<13} {}\n", c.name, status.as_str().unwrap(), c.summary));
        }
        s.push_str(if self.pass { "overall     pass\n" } else { "overall     FAIL\n" });
        s
    }

    fn h_string(&self) -> String {
        self.h.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }
}

impl From<VerifyReport> for Report {
    fn from(v: VerifyReport) -> Self {
        Report::doc(
            serde_json::to_value(&v).expect("verify report serialises"),
            v.to_text(),
            v.pass,
            v.warnings.clone(),
        )
    }
}

fn ks_nonzero(cfg: &RunConfig, bound: i64) -> Result<Vec<i64>, CliError> {
    Ok(cfg.k_range()?.filter(|k| *k != 0 && k.abs() <= bound).collect())
}

pub fn run_verify(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let h = cfg.hspec()?;
    let engine = Kontsevich::new(h.clone(), cfg.budget())?;
    let ks: Vec<i64> = cfg.k_range()?.collect();
    let mut checks = Vec::new();
    for check in cfg.enabled_checks() {
        let start = Instant::now();
        let mut r = run_check(check, cfg, &h, &engine, &ks)?;
        if cfg.timings {
            r.elapsed_ms = Some(start.elapsed().as_millis());
        }
        checks.push(r);
    }
    let pass = checks.iter().all(|c| !(c.mandatory && c.status == Status::Fail));
    Ok(VerifyReport {
        h: h.coeffs.clone(),
        k_min: cfg.k_min,
        k_max: cfg.k_max,
        seed: cfg.seed,
        warnings: h.warnings,
        checks,
        pass,
    })
}

fn result(name: &'static str, ok: bool, mandatory: bool, summary: String, details: Value) -> CheckResult {
    let status = match (ok, mandatory) {
        (true, _) => Status::Pass,
        (false, true) => Status::Fail,
        (false, false) => Status::Informational,
    };
    CheckResult { name, status, mandatory, summary, details, elapsed_ms: None }
}

fn run_check(
    check: Check,
    cfg: &RunConfig,
    h: &HSpec,
    engine: &Kontsevich,
    ks: &[i64],
) -> Result<CheckResult, CliError> {
    let targets = cfg.target.sides();
    Ok(match check {
        Check::Laurent => {
            let mut rows = Vec::new();
            for &k in ks {
                for &t in &targets {
                    let r = engine.iterate(k, t)?;
                    rows.push(json!({"k": k, "target": t.letter(), "laurent": r.laurent, "terms": r.stats.term_count}));
                }
            }
            let ok = rows.iter().all(|r| r["laurent"] == true);
            result("laurent", ok, true, format!("{} iterates Laurent", rows.len()), Value::Array(rows))
        }
        Check::Commutator => {
            let ok = engine.check_commutator()?;
            result("commutator", ok, true, "sigma(q) = q and tau(q) = q".into(), json!({"fixed": ok}))
        }
        Check::Inverse => {
            let r = engine.check_inverse()?;
            result(
                "inverse",
                r.all(),
                true,
                "sigma tau and tau sigma fix x, y".into(),
                serde_json::to_value(&r).unwrap(),
            )
        }
        Check::Abelian => {
            let mut rows = Vec::new();
            let mut ok = true;
            for &k in ks {
                match comm_iterate(h, k) {
                    Ok((l1, l2)) => {
                        let (z, w) = engine.pair(k)?;
                        let ax = compare_abelian(&z, &l1).map_err(|e| CliError::Internal(e.to_string()))?;
                        let ay = compare_abelian(&w, &l2).map_err(|e| CliError::Internal(e.to_string()))?;
                        ok &= ax && ay;
                        rows.push(json!({"k": k, "x": ax, "y": ay}));
                    }
                    Err(e) => {
                        ok = false;
                        rows.push(json!({"k": k, "error": e.to_string()}));
                    }
                }
            }
            result(
                "abelian",
                ok,
                true,
                format!("abelianization matches F^k for {} values of k", rows.len()),
                Value::Array(rows),
            )
        }
        Check::Recurrence => {
            let mut rows = Vec::new();
            for &k in ks.iter().filter(|k| **k < cfg.k_max) {
                rows.push(json!({"k": k, "holds": engine.recurrence_check(k)?}));
            }
            let ok = rows.iter().all(|r| r["holds"] == true);
            result(
                "recurrence",
                ok,
                true,
                format!("{} steps checked by multiplication", rows.len()),
                Value::Array(rows),
            )
        }
        Check::Division => {
            let steps = ks_nonzero(cfg, cfg.division_max_k)?;
            let limits = DivisionLimits { rounds: cfg.division_rounds, ..DivisionLimits::default() };
            let rows = check_steps(engine, steps, &limits)?;
            let failed = rows.iter().any(|s| s.matches_iterate == Some(false));
            let solved = rows.iter().filter(|s| s.matches_iterate == Some(true)).count();
            let status = if failed {
                Status::Fail
            } else if solved == rows.len() {
                Status::Pass
            } else {
                Status::Inconclusive
            };
            CheckResult {
                name: "division",
                status,
                mandatory: true,
                summary: format!("{solved}/{} iterates recovered by left division", rows.len()),
                details: serde_json::to_value(&rows).unwrap(),
                elapsed_ms: None,
            }
        }
        Check::Pit => {
            let pc = PitConfig {
                trials: cfg.trials,
                dims: cfg.dims.clone(),
                prime: cfg.prime,
                seed: derive_seed(cfg.seed, &[PIT_STREAM]),
            };
            let mut rows = Vec::new();
            let mut mismatches = 0;
            for k in cfg.k_range()?.filter(|k| k.abs() <= cfg.pit_max_k) {
                for &t in &targets {
                    let r = verify_iterate(engine, k, t, &pc).map_err(pit_error)?;
                    mismatches += r.mismatches.len();
                    rows.push(serde_json::to_value(&r).unwrap());
                }
            }
            result(
                "pit",
                mismatches == 0,
                true,
                format!("{} evaluation reports, {mismatches} mismatches", rows.len()),
                Value::Array(rows),
            )
        }
        Check::Positivity => {
            let rep = engine.positivity_report(cfg.k_range()?.filter(|k| *k >= 1))?;
            let ok = rep.all_positive_integers();
            let summary = if rep.assertion_grade {
                "coefficients of sigma^k, k >= 1, are positive integers".into()
            } else {
                "positivity is informational for this H".into()
            };
            result("positivity", ok, rep.assertion_grade, summary, serde_json::to_value(&rep).unwrap())
        }
        Check::Toric => {
            let n = cfg.n.unwrap_or(h.n as i64);
            let rep = toric_report(n, cfg.i).map_err(|e| CliError::Usage(e.to_string()))?;
            result(
                "toric",
                rep.pass,
                true,
                format!("lattice checks for n = {n}, i = {}", cfg.i),
                serde_json::to_value(&rep).unwrap(),
            )
        }
        Check::Charts => {
            let rep = chart_checks(h);
            let summary = if rep.pass() {
                format!("{} chart identities hold", rep.checks.len())
            } else {
                format!("ChartMismatch: {}", rep.mismatches.join("; "))
            };
            result("charts", rep.pass(), h.reversible_ok, summary, serde_json::to_value(&rep).unwrap())
        }
    })
}

fn pit_error(e: nclaurent::pitoracle::PitError) -> CliError {
    use nclaurent::pitoracle::PitError as P;
    match e {
        P::Engine(k) => k.into(),
        P::BadPrime(_) | P::ZeroDimension => CliError::Usage(e.to_string()),
        other => CliError::Internal(other.to_string()),
    }
}

pub fn run_iterate(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = cfg.hspec()?;
    let engine = Kontsevich::new(h.clone(), cfg.budget())?;
    let mut items = Vec::new();
    for k in cfg.k_range()? {
        for t in cfg.target.sides() {
            items.push(engine.iterate(k, t)?);
        }
    }
    let warnings = h.warnings.clone();
    Ok(Report { body: Body::Iterates { h, timings: cfg.timings, items }, pass: true, warnings })
}

pub fn run_toric(cfg: &RunConfig) -> Result<Report, CliError> {
    let n = match cfg.n {
        Some(n) => n,
        None => cfg.hspec()?.n as i64,
    };
    let rep = toric_report(n, cfg.i).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut text = format!("toric n = {n}, i = {}\n", cfg.i);
    for f in &rep.fans {
        let dets: Vec<String> = f.cones.iter().map(|c| c.det.to_string()).collect();
        text.push_str(&format!("fan {:<3} dets [{}] singular {}\n", f.fan.label, dets.join(", "), f.singular.len()));
    }
    for c in rep.identities.iter().chain(&rep.pullback.checks) {
        text.push_str(&format!("{} {}\n", if c.pass { "pass" } else { "FAIL" }, c.name));
    }
    for s in &rep.shifts {
        text.push_str(&format!(
            "{} shift Y{} -> Y{} (t-range {})\n",
            if s.pass { "pass" } else { "FAIL" },
            s.i,
            s.i + 1,
            s.range.name()
        ));
    }
    text.push_str(&format!("{} chart identities\n", if rep.charts.pass() { "pass" } else { "FAIL" }));
    Ok(Report::doc(serde_json::to_value(&rep).unwrap(), text, rep.pass, Vec::new()))
}

pub fn run_pit(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = cfg.hspec()?;
    let engine = Kontsevich::new(h.clone(), cfg.budget())?;
    let pc = PitConfig { trials: cfg.trials, dims: cfg.dims.clone(), prime: cfg.prime, seed: cfg.seed };
    let mut reports = Vec::new();
    let mut text = String::new();
    for k in cfg.k_range()? {
        for t in cfg.target.sides() {
            let r = verify_iterate(&engine, k, t, &pc).map_err(pit_error)?;
            text.push_str(&format!(
                "k = {k} target {}: {} checks, {} mismatches, {} resamples\n",
                t.letter(),
                r.checks,
                r.mismatches.len(),
                r.resamples
            ));
            reports.push(r);
        }
    }
    let mismatches: usize = reports.iter().map(|r| r.mismatches.len()).sum();
    let json =
        json!({"H": h.coeffs, "seed": cfg.seed, "reports": reports, "mismatches": mismatches, "pass": mismatches == 0});
    Ok(Report::doc(json, text, mismatches == 0, h.warnings))
}

pub fn run_division(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = cfg.hspec()?;
    let engine = Kontsevich::new(h.clone(), cfg.budget())?;
    // A single `--k K` asks for every step between 0 and K.
    let steps: Vec<i64> = if cfg.k_min == cfg.k_max {
        let k = cfg.k_min;
        if k >= 0 {
            (1..=k).collect()
        } else {
            (k..=-1).rev().collect()
        }
    } else {
        cfg.k_range()?.filter(|k| *k != 0).collect()
    };
    let limits = DivisionLimits { rounds: cfg.division_rounds, ..DivisionLimits::default() };
    let rows = check_steps(&engine, steps, &limits)?;
    let pass = rows.iter().all(|s| s.matches_iterate != Some(false));
    let text = rows
        .iter()
        .map(|s| {
            let m = match s.matches_iterate {
                Some(true) => "matches iterate",
                Some(false) => "DIFFERS from iterate",
                None => "",
            };
            format!("k = {:>3} target {}: {} {m}\n", s.k, s.target, s.outcome)
        })
        .collect();
    let json = json!({"H": h.coeffs, "steps": rows, "pass": pass});
    Ok(Report::doc(json, text, pass, h.warnings))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialise");
    s.push('\n');
    s
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(io_err(path))
}

fn write_pretty<W: Write + ?Sized, T: Serialize>(w: &mut W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    w.write_all(b"\n")
}

fn write_iterates<W: Write + ?Sized>(
    w: &mut W,
    h: &HSpec,
    timings: bool,
    items: &[IterateResult],
    format: Format,
) -> std::io::Result<()> {
    match (format, items) {
        (Format::Json, [one]) => write_pretty(w, &one.doc(h, timings)),
        (Format::Json, _) => {
            struct All<'a>(&'a HSpec, bool, &'a [IterateResult]);
            impl Serialize for All<'_> {
                fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                    s.collect_seq(self.2.iter().map(|r| r.doc(self.0, self.1)))
                }
            }
            write_pretty(w, &All(h, timings, items))
        }
        (Format::Text, [one]) => {
            write_element(&one.value, w)?;
            w.write_all(b"\n")
        }
        (Format::Text, _) => {
            for r in items {
                write!(w, "sigma^{}({}) = ", r.k, r.target.letter())?;
                write_element(&r.value, w)?;
                w.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

/// Render a report in the configured format to `stdout`, writing artifacts
/// under `cfg.out`. For `iterate`, `cfg.out` is a directory with one file per
/// iterate; otherwise it is a copy of the report.
pub fn emit(cfg: &RunConfig, report: &Report, stdout: &mut dyn Write) -> Result<(), CliError> {
    let out_err = |source| CliError::Output(source);
    match &report.body {
        Body::Doc { json, text } => {
            let body = match cfg.format {
                Format::Json => pretty(json),
                Format::Text => text.clone(),
            };
            if let Some(out) = &cfg.out {
                write(out, &body)?;
            }
            stdout.write_all(body.as_bytes()).map_err(out_err)
        }
        Body::Iterates { h, timings, items } => {
            if let Some(out) = &cfg.out {
                std::fs::create_dir_all(out).map_err(io_err(out))?;
                for r in items {
                    let path = out.join(format!("iterate_k{}_{}.json", r.k, r.target.letter()));
                    let mut f = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
                    write_pretty(&mut f, &r.doc(h, *timings)).and_then(|_| f.flush()).map_err(io_err(&path))?;
                }
            }
            write_iterates(stdout, h, *timings, items, cfg.format).map_err(out_err)
        }
    }
}

pub fn write_bundle(out: Option<&Path>, bundle: &str) -> std::io::Result<PathBuf> {
    let path = match out {
        Some(p) if p.is_dir() => p.join("repro.json"),
        Some(p) => p.with_extension("repro.json"),
        None => PathBuf::from("nclaurent-repro.json"),
    };
    std::fs::write(&path, bundle)?;
    Ok(path)
}
