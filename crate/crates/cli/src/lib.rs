//! Command implementations behind the `circle-euler` binary.
//!
//! Every command returns its process exit code; file outputs are written to
//! a temporary name and renamed into place so an aborted run never leaves a
//! truncated file behind.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use circle_euler::analyzer::{self, ModeIndex};
use circle_euler::dynamics::{relative_drift, simulate, DiagnosticsRow, RunStatus, SimulationConfig, Snapshot};
use circle_euler::{InertiaSpec, PeriodicField};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FLAGGED: i32 = 2;

/// Tolerance for `check-inverse`.
pub const INVERSE_TOL: f64 = 1e-10;

pub const CSV_HEADER: &str = "t,mu_u,mu_m,energy_mu,energy_A,linf_u,min_gx";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },

    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("malformed configuration: {0}")]
    Malformed(String),

    #[error(transparent)]
    Core(#[from] circle_euler::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_INVALID
    }
}

/// Parses and validates a JSON configuration.
pub fn parse_config(text: &str) -> Result<SimulationConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: SimulationConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() {
            return CliError::Malformed(inner.to_string());
        }
        let field = if path == "." {
            // missing and unknown fields are reported at the root
            missing_or_unknown(&inner.to_string()).unwrap_or(path)
        } else {
            path
        };
        CliError::Config {
            field,
            message: inner.to_string(),
        }
    })?;
    config.validate().map_err(|e| match e {
        circle_euler::Error::InvalidConfig { field, reason } => CliError::Config {
            field: field.to_string(),
            message: reason,
        },
        other => CliError::Core(other),
    })?;
    Ok(config)
}

fn missing_or_unknown(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

pub fn load_config(path: &Path) -> Result<SimulationConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Diagnostics table with the fixed header; `min_gx` is left empty when the
/// flow is not tracked.
pub fn diagnostics_csv(rows: &[DiagnosticsRow]) -> String {
    let mut out = String::with_capacity(128 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let min_gx = r.min_gx.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.mu_u),
            fmt_f64(r.mu_m),
            fmt_f64(r.energy_mu),
            fmt_f64(r.energy_a),
            fmt_f64(r.linf_u),
            min_gx
        );
    }
    out
}

/// Grid values of one snapshot: `x,u` or `x,u,g`.
pub fn snapshot_csv(snapshot: &Snapshot) -> String {
    let n = snapshot.u.n();
    let mut out = String::from(if snapshot.g.is_some() { "x,u,g\n" } else { "x,u\n" });
    for (j, u) in snapshot.u.samples().iter().enumerate() {
        let x = j as f64 / n as f64;
        let _ = write!(out, "{},{}", fmt_f64(x), fmt_f64(*u));
        if let Some(g) = &snapshot.g {
            let _ = write!(out, ",{}", fmt_f64(g[j]));
        }
        out.push('\n');
    }
    out
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let err = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    #[serde(flatten)]
    pub status: RunStatus,
    pub steps_taken: usize,
    pub t_final: f64,
    pub outputs: usize,
    pub drift_energy_mu: f64,
    pub drift_energy_a: f64,
    pub drift_mu_u: f64,
    pub drift_mu_m: f64,
    pub max_flow_residual: Option<f64>,
    pub snapshot_times: Vec<f64>,
    pub config: SimulationConfig,
}

/// Runs a configured simulation and writes `diagnostics.csv`,
/// `summary.json` and, if requested, `snapshots/snapshot_NNNNN.csv`.
pub fn run_simulation(config: &SimulationConfig, out_dir: &Path) -> Result<RunSummary, CliError> {
    let output = simulate(config)?;
    ensure_dir(out_dir)?;
    if !output.snapshots.is_empty() {
        let dir = out_dir.join("snapshots");
        ensure_dir(&dir)?;
        for (i, s) in output.snapshots.iter().enumerate() {
            write_atomic(&dir.join(format!("snapshot_{i:05}.csv")), &snapshot_csv(s))?;
        }
    }
    write_atomic(&out_dir.join("diagnostics.csv"), &diagnostics_csv(&output.rows))?;

    let rows = &output.rows;
    let summary = RunSummary {
        status: output.status.clone(),
        steps_taken: output.steps_taken,
        t_final: rows.last().map_or(0.0, |r| r.t),
        outputs: rows.len(),
        drift_energy_mu: relative_drift(rows, |r| r.energy_mu, 1e-300),
        drift_energy_a: relative_drift(rows, |r| r.energy_a, 1e-300),
        drift_mu_u: relative_drift(rows, |r| r.mu_u, 1.0),
        drift_mu_m: relative_drift(rows, |r| r.mu_m, 1.0),
        max_flow_residual: output.max_flow_residual(),
        snapshot_times: output.snapshots.iter().map(|s| s.t).collect(),
        config: config.clone(),
    };
    write_atomic(&out_dir.join("summary.json"), &to_json(&summary))?;
    Ok(summary)
}

fn report_error(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

pub fn cmd_simulate(config_path: &Path, out_dir: &Path, quiet: bool) -> i32 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    match run_simulation(&config, out_dir) {
        Ok(summary) => {
            let healthy = summary.status.is_healthy();
            if !quiet {
                println!("status: {}", status_line(&summary.status));
                println!(
                    "steps: {}  t_final: {}  drift(energy_mu): {:e}  drift(mu_u): {:e}",
                    summary.steps_taken, summary.t_final, summary.drift_energy_mu, summary.drift_mu_u
                );
                if let Some(r) = summary.max_flow_residual {
                    println!("max flow residual: {r:e}");
                }
                println!("wrote {}", out_dir.display());
            }
            if healthy {
                EXIT_OK
            } else {
                if quiet {
                    eprintln!("flagged: {}", status_line(&summary.status));
                }
                EXIT_FLAGGED
            }
        }
        Err(e) => report_error(&e),
    }
}

fn status_line(status: &RunStatus) -> String {
    match status {
        RunStatus::Completed => "completed".into(),
        RunStatus::BlowupSuspected { t, reason } => format!("blow-up suspected at t = {t}: {reason}"),
        RunStatus::DiffeomorphismLost { t, min_gx } => {
            format!("diffeomorphism lost at t = {t} (min g_x = {min_gx:e})")
        }
    }
}

pub fn cmd_classify(b: f64, max_k: usize, modes: usize, out_dir: &Path, quiet: bool) -> i32 {
    if !b.is_finite() {
        return report_error(&CliError::Config {
            field: "b".into(),
            message: "must be finite".into(),
        });
    }
    let result = analyzer::classify(b, max_k, modes)
        .map_err(CliError::from)
        .and_then(|report| {
            ensure_dir(out_dir)?;
            write_atomic(&out_dir.join("classification.json"), &to_json(&report))?;
            Ok(report)
        });
    match result {
        Ok(report) => {
            if !quiet {
                for c in &report.checks {
                    println!("{:<24} {:<8} {:e}", c.name, format!("{:?}", c.status).to_lowercase(), c.witness);
                }
                match &report.verdict {
                    analyzer::Verdict::Metric { symbol, .. } => println!("verdict: metric (A = L, {symbol})"),
                    analyzer::Verdict::NonMetric { reason, witness } => {
                        println!("verdict: non-metric ({reason}, witness {witness:e})")
                    }
                }
            }
            EXIT_OK
        }
        Err(e) => report_error(&e),
    }
}

pub fn cmd_check_inverse(n: usize, seed: u64, modes: Option<usize>, trials: usize, quiet: bool) -> i32 {
    let modes = modes.unwrap_or_else(|| (n / 3).min(32));
    match circle_euler::integral_inverse_deviation(n, modes, trials.max(1), seed) {
        Ok(dev) => {
            if !quiet {
                println!("max deviation: {dev:e}");
            }
            if dev <= INVERSE_TOL {
                EXIT_OK
            } else {
                eprintln!("deviation {dev:e} exceeds {INVERSE_TOL:e}");
                EXIT_FLAGGED
            }
        }
        Err(e) => report_error(&e.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeResiduals {
    pub eq7: f64,
    pub eq8: f64,
}

/// Velocity-identity residuals for `A = L`: the first on `cos(2πkx)`, the
/// second on `sin(2πkx)`.
pub fn mode_residuals(b: f64, k: i64) -> Result<ModeResiduals, CliError> {
    let k = ModeIndex::new(k)?;
    let n = (8 * k.k().unsigned_abs() as usize).next_power_of_two().max(16);
    let w = k.wavenumber();
    let cos = PeriodicField::from_fn(n, |x| (w * x).cos())?;
    let sin = PeriodicField::from_fn(n, |x| (w * x).sin())?;
    let l = InertiaSpec::MuMinusDxx;
    Ok(ModeResiduals {
        eq7: analyzer::eq7_residual(&l, b, &cos)?,
        eq8: analyzer::eq8_residual(&l, b, &sin)?,
    })
}

pub fn cmd_residual(b: f64, k: i64, quiet: bool) -> i32 {
    match mode_residuals(b, k) {
        Ok(r) => {
            if !quiet {
                println!("eq7_residual: {:.16e}", r.eq7);
                println!("eq8_residual: {:.16e}", r.eq8);
            }
            EXIT_OK
        }
        Err(e) => report_error(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"dt": 0.01, "t_end": 0.1, "initial": "cos1", "N": 16}"#;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.b, 2.0);
        assert_eq!(c.n, 16);
        assert!(c.dealias);
        assert_eq!(c.blowup_threshold, 1e3);
        assert_eq!(c.inertia, InertiaSpec::MuMinusDxx);
    }

    #[test]
    fn config_errors_name_the_field() {
        let field = |text: &str| match parse_config(text) {
            Err(CliError::Config { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field(r#"{"dt": -1, "t_end": 0.1, "initial": "cos1"}"#), "dt");
        assert_eq!(field(r#"{"dt": "x", "t_end": 0.1, "initial": "cos1"}"#), "dt");
        assert_eq!(field(r#"{"t_end": 0.1, "initial": "cos1"}"#), "dt");
        assert_eq!(field(r#"{"dt": 0.1, "t_end": 0.1, "initial": "cos1", "nope": 1}"#), "nope");
        assert_eq!(
            field(r#"{"dt": 0.1, "t_end": 0.1, "initial": "cos1", "inertia": {"type": "one_minus_lambda_dxx", "lambda": "a"}}"#),
            "inertia"
        );
        assert_eq!(field(r#"{"dt": 0.1, "t_end": 0.1, "initial": "cos1", "N": 7}"#), "N");
    }

    #[test]
    fn csv_formatting() {
        let rows = vec![
            DiagnosticsRow {
                t: 0.0,
                mu_u: 0.1,
                mu_m: 0.1,
                energy_mu: 1.0 / 3.0,
                energy_a: 2.0,
                linf_u: 1.0,
                min_gx: None,
            },
            DiagnosticsRow {
                t: 0.5,
                mu_u: -0.0,
                mu_m: 1e-300,
                energy_mu: 1.0,
                energy_a: 1.0,
                linf_u: 1.0,
                min_gx: Some(0.75),
            },
        ];
        let csv = diagnostics_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].ends_with(','));
        assert!(lines[1].contains("3.3333333333333331e-1"));
        assert!(lines[2].ends_with("7.5000000000000000e-1"));
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 7);
            for field in line.split(',').filter(|f| !f.is_empty()) {
                let v: f64 = field.parse().unwrap();
                assert!(v.is_finite());
            }
        }
        // round trip is exact
        let v: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(v, 1.0 / 3.0);
    }

    #[test]
    fn mode_residual_examples() {
        let r = mode_residuals(2.0, 1).unwrap();
        assert!(r.eq7 <= 1e-9 && r.eq8 <= 1e-9);
        let r = mode_residuals(3.0, 1).unwrap();
        assert!((r.eq7 - std::f64::consts::PI / 4.0).abs() < 1e-9);
        assert!((r.eq8 - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-9);
        assert!(mode_residuals(3.0, 0).is_err());
    }

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        write_atomic(&path, "x\n").unwrap();
        write_atomic(&path, "y\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "y\n");
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }
}
