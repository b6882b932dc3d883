//! `steering-lab` command-line front end.
//!
//! Every command validates its inputs before computing and renders its whole
//! output into memory, so a failing run never leaves partial output behind.
//!
//! Exit codes: 0 success, 2 validation, 3 unphysical state, 4 statistical failure.

pub mod args;

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub use args::{Cli, Command, Format};
use args::{BoundaryArgs, ComputeArgs, RegionsArgs, SimulateArgs, StateArgs, SweepArgs};

use crate::boundary::{
    boundary_curve, crossover_point, default_delta_max, region_map, sweep_eta, BoundaryCurve,
};
use crate::error::Error;
use crate::gaussian::{DEFAULT_PHYSICAL_TOL, StandardFormCM};
use crate::homodyne::{bootstrap_steering, sample_quadratures, BootstrapConfig, MeanStd, RNG_ALGORITHM};
use crate::output::{write_boundary_csv, write_regions_csv, write_sweeps_csv};
use crate::schemes::{Scheme, SchemeParams, REFERENCE_V};
use crate::steering::{classify, nats_to_bits, Direction, Regime, Tolerances};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_UNPHYSICAL: i32 = 3;
pub const EXIT_STATISTICAL: i32 = 4;
const EXIT_IO: i32 = 1;

/// Environment variable capping internal parallelism (0 = automatic).
pub const THREADS_ENV: &str = "STEERING_LAB_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    fn statistical(err: Error) -> Self {
        Self {
            code: EXIT_STATISTICAL,
            message: format!("statistical failure: {err}"),
        }
    }

    fn io(err: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            message: err.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::UnphysicalState { .. } | Error::NonPositiveMatrix(_) => EXIT_UNPHYSICAL,
            Error::StructureViolation { .. } => EXIT_STATISTICAL,
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Applies [`THREADS_ENV`] to the global rayon pool.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::validation(format!("{THREADS_ENV} must be a non-negative integer, got `{raw}`")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(CliError::io)?;
    }
    Ok(())
}

/// Runs a command and writes its output to the requested destination.
pub fn run(cli: &Cli) -> CliResult<()> {
    let (body, output) = execute(cli)?;
    match output {
        Some(path) => fs::write(&path, body).map_err(|e| CliError::io(format!("{}: {e}", path.display()))),
        None => io::stdout().lock().write_all(&body).map_err(CliError::io),
    }
}

/// Runs a command and returns the rendered output with its destination.
pub fn execute(cli: &Cli) -> CliResult<(Vec<u8>, Option<std::path::PathBuf>)> {
    match &cli.command {
        Command::Compute(a) => Ok((cmd_compute(a)?, a.out.output.clone())),
        Command::Sweep(a) => Ok((cmd_sweep(a)?, a.out.output.clone())),
        Command::Regions(a) => Ok((cmd_regions(a)?, a.out.output.clone())),
        Command::Boundary(a) => Ok((cmd_boundary(a)?, a.out.output.clone())),
        Command::Simulate(a) => Ok((cmd_simulate(a)?, a.output.clone())),
    }
}

impl StateArgs {
    fn v(&self) -> CliResult<f64> {
        if self.paper_defaults {
            return Ok(REFERENCE_V);
        }
        self.v
            .ok_or_else(|| CliError::validation("missing --v (or pass --paper-defaults)"))
    }
}

fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut body = serde_json::to_vec_pretty(value).map_err(CliError::io)?;
    body.push(b'\n');
    Ok(body)
}

fn csv_bytes<F>(write: F) -> CliResult<Vec<u8>>
where
    F: FnOnce(&mut Vec<u8>) -> csv::Result<()>,
{
    let mut body = Vec::new();
    write(&mut body).map_err(CliError::io)?;
    Ok(body)
}

fn check_tol(name: &str, tol: f64) -> CliResult<()> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(CliError::validation(format!("--{name} must be >= 0, got {tol}")))
    }
}

#[derive(Debug, Serialize)]
struct ComputeReport {
    alpha: f64,
    beta: f64,
    gamma: f64,
    det_a: f64,
    det_b: f64,
    det_ab: f64,
    g_a_to_b: f64,
    g_b_to_a: f64,
    regime: Regime,
}

fn cmd_compute(a: &ComputeArgs) -> CliResult<Vec<u8>> {
    let params = SchemeParams::new(a.state.scheme, a.state.v()?, a.eta, a.delta)?;
    check_tol("tol", a.tol)?;
    check_tol("physical-tol", a.physical_tol)?;
    let cm = params.cm()?;
    let tol = Tolerances {
        physical: a.physical_tol,
        steering: a.tol,
    };
    let r = classify(&cm, tol)?;
    let unit = |g: f64| if a.bits { nats_to_bits(g) } else { g };
    let report = ComputeReport {
        alpha: cm.alpha,
        beta: cm.beta,
        gamma: cm.gamma,
        det_a: r.det_a,
        det_b: r.det_b,
        det_ab: r.det_ab,
        g_a_to_b: unit(r.g_a_to_b),
        g_b_to_a: unit(r.g_b_to_a),
        regime: r.regime,
    };
    match a.out.format.unwrap_or(Format::Json) {
        Format::Json => json_bytes(&report),
        Format::Csv => csv_bytes(|buf| {
            let mut w = crate::output::csv_writer(buf);
            w.serialize(&report)?;
            w.flush()?;
            Ok(())
        }),
    }
}

fn cmd_sweep(a: &SweepArgs) -> CliResult<Vec<u8>> {
    let v = a.state.v()?;
    let scheme = a.state.scheme;
    let (deltas, with_delta): (Vec<f64>, bool) = match a.delta {
        Some(d) => (vec![d], false),
        None if a.state.paper_defaults => (scheme.reference_deltas().to_vec(), true),
        None => (vec![0.0], false),
    };
    let sweeps = deltas
        .iter()
        .map(|&delta| sweep_eta(scheme, v, delta, a.from, a.to, a.steps))
        .collect::<crate::Result<Vec<_>>>()?;
    match a.out.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_bytes(|buf| write_sweeps_csv(buf, &sweeps, with_delta, a.bits)),
        Format::Json => {
            let mut sweeps = sweeps;
            if a.bits {
                for row in sweeps.iter_mut().flat_map(|s| s.rows.iter_mut()) {
                    row.g_a_to_b = nats_to_bits(row.g_a_to_b);
                    row.g_b_to_a = nats_to_bits(row.g_b_to_a);
                }
            }
            if with_delta {
                json_bytes(&sweeps)
            } else {
                json_bytes(&sweeps[0])
            }
        }
    }
}

#[derive(Debug, Serialize)]
struct RegionCell {
    eta: f64,
    delta: f64,
    regime: Regime,
}

#[derive(Debug, Serialize)]
struct RegionsReport {
    scheme: Scheme,
    v: f64,
    delta_max: f64,
    eta_steps: usize,
    delta_steps: usize,
    cells: Vec<RegionCell>,
}

fn cmd_regions(a: &RegionsArgs) -> CliResult<Vec<u8>> {
    let v = a.state.v()?;
    let scheme = a.state.scheme;
    let eta_steps = a.eta_steps.unwrap_or(a.grid);
    let delta_steps = a.delta_steps.unwrap_or(a.grid);
    let delta_max = a.delta_max.unwrap_or_else(|| default_delta_max(scheme));
    let map = region_map(scheme, v, eta_steps, delta_steps, delta_max)?;
    match a.out.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_bytes(|buf| write_regions_csv(buf, &map)),
        Format::Json => json_bytes(&RegionsReport {
            scheme,
            v,
            delta_max,
            eta_steps,
            delta_steps,
            cells: map
                .iter()
                .map(|(eta, delta, regime)| RegionCell { eta, delta, regime })
                .collect(),
        }),
    }
}

#[derive(Debug, Serialize)]
struct BoundaryReport {
    scheme: Scheme,
    v: f64,
    curves: Vec<BoundaryCurve>,
    crossover: Option<(f64, f64)>,
}

fn cmd_boundary(a: &BoundaryArgs) -> CliResult<Vec<u8>> {
    let v = a.state.v()?;
    let scheme = a.state.scheme;
    if scheme == Scheme::Pure {
        return Err(CliError::validation("the pure TMSS has no steering boundary; pick scheme 1, 2 or 3"));
    }
    let curves = Direction::BOTH
        .iter()
        .map(|&d| boundary_curve(scheme, d, v, a.points))
        .collect::<crate::Result<Vec<_>>>()?;
    let crossover = match scheme {
        Scheme::NoiseOnB | Scheme::NoisyChannel => Some(crossover_point(scheme, v)?),
        _ => None,
    };
    match a.out.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_bytes(|buf| write_boundary_csv(buf, &curves, crossover)),
        Format::Json => json_bytes(&BoundaryReport {
            scheme,
            v,
            curves,
            crossover,
        }),
    }
}

#[derive(Debug, Serialize)]
struct TripleReport {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl From<StandardFormCM> for TripleReport {
    fn from(cm: StandardFormCM) -> Self {
        Self {
            alpha: cm.alpha,
            beta: cm.beta,
            gamma: cm.gamma,
        }
    }
}

#[derive(Debug, Serialize)]
struct QuantifierReport {
    target: f64,
    point: f64,
    mean: f64,
    std: f64,
}

#[derive(Debug, Serialize)]
struct SimulateReport {
    scheme: Scheme,
    v: f64,
    eta: f64,
    delta: f64,
    units: &'static str,
    target: TripleReport,
    target_regime: Regime,
    estimate: TripleReport,
    structure_residual: f64,
    covariance: [[f64; 4]; 4],
    covariance_std_errors: [[f64; 4]; 4],
    g_a_to_b: QuantifierReport,
    g_b_to_a: QuantifierReport,
    estimated_regime: Regime,
    seed: u64,
    n: usize,
    bootstrap: usize,
    structure_tol: f64,
    physical_tol: f64,
    rng: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<Vec<u8>> {
    let params = SchemeParams::new(a.state.scheme, a.state.v()?, a.eta, a.delta)?;
    if a.n < 2 {
        return Err(CliError::validation(format!("--n must be >= 2, got {}", a.n)));
    }
    if a.bootstrap < crate::homodyne::MIN_BOOTSTRAP {
        return Err(CliError::validation(format!(
            "--bootstrap must be >= {}, got {}",
            crate::homodyne::MIN_BOOTSTRAP,
            a.bootstrap
        )));
    }
    if let Some(t) = a.structure_tol {
        check_tol("structure-tol", t)?;
    }
    if let Some(t) = a.physical_tol {
        check_tol("physical-tol", t)?;
    }
    let cm = params.cm()?;
    let target = classify(&cm, Tolerances::default())?;

    let sample = sample_quadratures(&cm, a.n, a.seed, DEFAULT_PHYSICAL_TOL)?;
    let config = BootstrapConfig {
        n_bootstrap: a.bootstrap,
        seed: a.seed,
        structure_tol: a.structure_tol,
        physical_tol: a.physical_tol,
    };
    let boot = bootstrap_steering(&sample, &config).map_err(CliError::statistical)?;

    let unit = |g: f64| if a.bits { nats_to_bits(g) } else { g };
    let quantifier = |target: f64, point: f64, stats: MeanStd| QuantifierReport {
        target: unit(target),
        point: unit(point),
        mean: unit(stats.mean),
        std: unit(stats.std),
    };
    let timestamp = (!a.no_timestamp).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    let report = SimulateReport {
        scheme: params.scheme,
        v: params.v,
        eta: params.eta,
        delta: params.delta,
        units: if a.bits { "bits" } else { "nats" },
        target: cm.into(),
        target_regime: target.regime,
        estimate: boot.projection.into(),
        structure_residual: boot.residual,
        covariance: *boot.estimate.cm.entries(),
        covariance_std_errors: boot.estimate.std_errors,
        g_a_to_b: quantifier(target.g_a_to_b, boot.point.g_a_to_b, boot.g_a_to_b),
        g_b_to_a: quantifier(target.g_b_to_a, boot.point.g_b_to_a, boot.g_b_to_a),
        estimated_regime: boot.point.regime,
        seed: a.seed,
        n: a.n,
        bootstrap: a.bootstrap,
        structure_tol: boot.structure_tol,
        physical_tol: boot.physical_tol,
        rng: RNG_ALGORITHM,
        timestamp,
    };
    let body = json_bytes(&report)?;
    if let Some(path) = &a.samples_csv {
        write_samples(path, &sample)?;
    }
    Ok(body)
}

fn write_samples(path: &Path, sample: &crate::homodyne::QuadratureSample) -> CliResult<()> {
    let file = fs::File::create(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    sample
        .write_csv(io::BufWriter::new(file))
        .map_err(CliError::io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn exec(args: &[&str]) -> CliResult<String> {
        let mut argv = vec!["steering-lab"];
        argv.extend_from_slice(args);
        let cli = Cli::try_parse_from(argv).map_err(|e| CliError::validation(e.to_string()))?;
        execute(&cli).map(|(body, _)| String::from_utf8(body).unwrap())
    }

    #[test]
    fn compute_json_fields() {
        let out = exec(&["compute", "--scheme", "pure", "--v", "1.251"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let obj = v.as_object().unwrap();
        let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        let mut expected = vec![
            "alpha", "beta", "gamma", "det_a", "det_b", "det_ab", "g_a_to_b", "g_b_to_a", "regime",
        ];
        let mut got = keys.clone();
        got.sort();
        expected.sort();
        assert_eq!(got, expected);
        assert_eq!(obj["regime"], "TwoWay");
    }

    #[test]
    fn compute_in_bits() {
        let out = exec(&["compute", "--scheme", "pure", "--v", "2", "--bits"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["g_a_to_b"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_errors_exit_2() {
        for args in [
            &["compute", "--scheme", "1", "--v", "0.9"][..],
            &["compute", "--scheme", "1", "--v", "1.2", "--eta", "1.5"],
            &["compute", "--scheme", "2", "--v", "1.2", "--delta", "-0.5"],
            &["compute", "--scheme", "2"],
            &["sweep", "--scheme", "1", "--v", "1.2", "--steps", "1"],
            &["regions", "--scheme", "1", "--v", "1.2", "--grid", "1"],
            &["boundary", "--scheme", "pure", "--v", "1.2"],
            &["simulate", "--scheme", "pure", "--v", "1.2", "--n", "1"],
            &["simulate", "--scheme", "pure", "--v", "1.2", "--n", "100", "--bootstrap", "5"],
        ] {
            let err = exec(args).unwrap_err();
            assert_eq!(err.code, EXIT_VALIDATION, "{args:?}: {err}");
            assert!(!err.message.contains('\n'), "{args:?}: {err}");
        }
    }

    #[test]
    fn simulate_structure_failure_exits_4() {
        let err = exec(&[
            "simulate", "--scheme", "pure", "--v", "1.251", "--n", "1000", "--bootstrap", "100",
            "--structure-tol", "1e-12", "--no-timestamp",
        ])
        .unwrap_err();
        assert_eq!(err.code, EXIT_STATISTICAL);
    }

    #[test]
    fn error_code_mapping() {
        let unphysical = Error::UnphysicalState {
            nu_minus: 0.5,
            tol: 1e-9,
        };
        assert_eq!(CliError::from(unphysical).code, EXIT_UNPHYSICAL);
        assert_eq!(CliError::from(Error::Domain("x".into())).code, EXIT_VALIDATION);
    }

    #[test]
    fn paper_defaults_conflict_with_v() {
        let argv = ["steering-lab", "compute", "--scheme", "pure", "--v", "1.3", "--paper-defaults"];
        assert!(Cli::try_parse_from(argv).is_err());
    }

    #[test]
    fn paper_defaults_sweep_has_delta_column() {
        let out = exec(&["sweep", "--scheme", "3", "--paper-defaults", "--steps", "11"]).unwrap();
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("delta,eta,g_a_to_b,g_b_to_a,regime"));
        assert_eq!(lines.count(), 33);
    }
}
