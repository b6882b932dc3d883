//! Monte-Carlo homodyne records, covariance estimation and bootstrap error bars.
//!
//! Homodyne detection measures one quadrature per shot, so a measurement
//! consists of two runs: an X run recording `(x_a, x_b)` pairs and a P run
//! recording `(p_a, p_b)` pairs. X-P cross moments are never measured and are
//! set to zero in the estimate, consistent with the standard form.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gaussian::{CovarianceMatrix, GeneralCM, StandardFormCM};
use crate::output::{csv_writer, format_f64};
use crate::steering::{classify, SteeringResult, Tolerances, DEFAULT_STEERING_TOL};

/// Generator and variate method; bit-exact reproduction depends on both.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng/rand_chacha-0.9/seed_from_u64;streams:0=x,1=p,2+b=bootstrap-b;\
normal:StandardNormal-ziggurat/rand_distr-0.5";

pub const DEFAULT_BOOTSTRAP: usize = 200;
pub const MIN_BOOTSTRAP: usize = 100;

const X_STREAM: u64 = 0;
const P_STREAM: u64 = 1;
const BOOTSTRAP_STREAM_OFFSET: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSample {
    pub x_run: Vec<(f64, f64)>,
    pub p_run: Vec<(f64, f64)>,
    pub seed: u64,
    pub n_per_run: usize,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Lower Cholesky factor of `[[a, c], [c, b]]`.
fn cholesky_2x2(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let l11 = a.sqrt();
    let l21 = if l11 > 0.0 { c / l11 } else { 0.0 };
    let l22 = (b - l21 * l21).max(0.0).sqrt();
    (l11, l21, l22)
}

fn draw_run(seed: u64, stream: u64, n: usize, a: f64, b: f64, c: f64) -> Vec<(f64, f64)> {
    let (l11, l21, l22) = cholesky_2x2(a, b, c);
    let mut rng = stream_rng(seed, stream);
    (0..n)
        .map(|_| {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            (l11 * z1, l21 * z1 + l22 * z2)
        })
        .collect()
}

/// Draws `n_per_run` X pairs from `N(0, [[alpha, gamma], [gamma, beta]])` and
/// `n_per_run` P pairs from `N(0, [[alpha, -gamma], [-gamma, beta]])`.
pub fn sample_quadratures(
    cm: &StandardFormCM,
    n_per_run: usize,
    seed: u64,
    physical_tol: f64,
) -> Result<QuadratureSample> {
    if n_per_run < 2 {
        return Err(domain(format!("need at least 2 shots per run, got {n_per_run}")));
    }
    cm.ensure_physical(physical_tol)?;
    let (a, b, c) = (cm.alpha, cm.beta, cm.gamma);
    Ok(QuadratureSample {
        x_run: draw_run(seed, X_STREAM, n_per_run, a, b, c),
        p_run: draw_run(seed, P_STREAM, n_per_run, a, b, -c),
        seed,
        n_per_run,
    })
}

impl QuadratureSample {
    /// CSV with columns `run,index,value_a,value_b`; `run` is `x` or `p`.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv_writer(writer);
        w.write_record(["run", "index", "value_a", "value_b"])?;
        for (run, records) in [("x", &self.x_run), ("p", &self.p_run)] {
            for (i, &(a, b)) in records.iter().enumerate() {
                w.write_record([run, &i.to_string(), &format_f64(a), &format_f64(b)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean-subtracted second moments of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PairMoments {
    var_a: f64,
    var_b: f64,
    cov: f64,
}

impl PairMoments {
    fn of(records: &[(f64, f64)]) -> Self {
        let n = records.len() as f64;
        let (sa, sb) = records
            .iter()
            .fold((0.0, 0.0), |(sa, sb), &(a, b)| (sa + a, sb + b));
        let (ma, mb) = (sa / n, sb / n);
        let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
        for &(a, b) in records {
            let (da, db) = (a - ma, b - mb);
            saa += da * da;
            sbb += db * db;
            sab += da * db;
        }
        let dof = n - 1.0;
        Self {
            var_a: saa / dof,
            var_b: sbb / dof,
            cov: sab / dof,
        }
    }
}

fn assemble(x: PairMoments, p: PairMoments) -> GeneralCM {
    GeneralCM::new([
        [x.var_a, 0.0, x.cov, 0.0],
        [0.0, p.var_a, 0.0, p.cov],
        [x.cov, 0.0, x.var_b, 0.0],
        [0.0, p.cov, 0.0, p.var_b],
    ])
    .expect("assembled covariance is symmetric by construction")
}

/// Sample covariance matrix (unbiased, mean-subtracted) of both runs.
pub fn estimate_cm(sample: &QuadratureSample) -> Result<GeneralCM> {
    if sample.x_run.len() < 2 || sample.p_run.len() < 2 {
        return Err(domain("need at least 2 shots per run to estimate a covariance"));
    }
    Ok(assemble(
        PairMoments::of(&sample.x_run),
        PairMoments::of(&sample.p_run),
    ))
}

/// Slack for estimated matrices: `10 sqrt(2/n)` times the largest variance.
pub fn statistical_tolerance(n_per_run: usize, scale: f64) -> f64 {
    10.0 * (2.0 / n_per_run as f64).sqrt() * scale
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub n_bootstrap: usize,
    pub seed: u64,
    /// Standard-form tolerance for every estimate; `None` uses [`statistical_tolerance`].
    pub structure_tol: Option<f64>,
    /// Physicality slack for every estimate; `None` uses [`statistical_tolerance`].
    pub physical_tol: Option<f64>,
}

impl BootstrapConfig {
    pub fn new(n_bootstrap: usize, seed: u64) -> Self {
        Self {
            n_bootstrap,
            seed,
            structure_tol: None,
            physical_tol: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedCM {
    pub cm: GeneralCM,
    /// Bootstrap standard deviation of every entry.
    pub std_errors: [[f64; 4]; 4],
    pub n_bootstrap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub estimate: EstimatedCM,
    /// Standard-form projection of the full-sample estimate.
    pub projection: StandardFormCM,
    pub residual: f64,
    /// Quantifiers of the full-sample estimate.
    pub point: SteeringResult,
    pub g_a_to_b: MeanStd,
    pub g_b_to_a: MeanStd,
    pub structure_tol: f64,
    pub physical_tol: f64,
}

/// Resampled moments of one run, computed from records centered on the
/// full-sample means so the sums stay well conditioned.
fn resampled_moments(centered: &[(f64, f64)], rng: &mut ChaCha8Rng) -> PairMoments {
    let n = centered.len();
    let bound = u32::try_from(n).expect("run length fits in u32");
    let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let (a, b) = centered[rng.random_range(0..bound) as usize];
        sa += a;
        sb += b;
        saa += a * a;
        sbb += b * b;
        sab += a * b;
    }
    let nf = n as f64;
    let dof = nf - 1.0;
    PairMoments {
        var_a: (saa - sa * sa / nf) / dof,
        var_b: (sbb - sb * sb / nf) / dof,
        cov: (sab - sa * sb / nf) / dof,
    }
}

fn centered(records: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let n = records.len() as f64;
    let (sa, sb) = records
        .iter()
        .fold((0.0, 0.0), |(sa, sb), &(a, b)| (sa + a, sb + b));
    let (ma, mb) = (sa / n, sb / n);
    records.iter().map(|&(a, b)| (a - ma, b - mb)).collect()
}

/// Bootstrap over measurement records: each replicate resamples `(a, b)`
/// pairs with replacement within each run, re-estimates the covariance,
/// projects it onto the standard form and recomputes both quantifiers.
///
/// Replicate `b` draws from its own ChaCha stream, so results do not depend on
/// how rayon schedules replicates.
pub fn bootstrap_steering(
    sample: &QuadratureSample,
    config: &BootstrapConfig,
) -> Result<BootstrapReport> {
    if config.n_bootstrap < MIN_BOOTSTRAP {
        return Err(domain(format!(
            "need at least {MIN_BOOTSTRAP} bootstrap replicates, got {}",
            config.n_bootstrap
        )));
    }
    let longest = sample.x_run.len().max(sample.p_run.len());
    if u32::try_from(longest).is_err() {
        return Err(domain(format!("runs of {longest} shots are too long to resample")));
    }
    let full = estimate_cm(sample)?;
    let scale = (0..4).map(|i| full.get(i, i)).fold(0.0, f64::max);
    let n = sample.x_run.len().min(sample.p_run.len());
    let structure_tol = config
        .structure_tol
        .unwrap_or_else(|| statistical_tolerance(n, scale));
    let physical_tol = config
        .physical_tol
        .unwrap_or_else(|| statistical_tolerance(n, scale));
    let tol = Tolerances {
        physical: physical_tol,
        steering: DEFAULT_STEERING_TOL,
    };

    let projection = full.standard_form_of(structure_tol)?;
    let point = classify(&projection.cm, tol)?;

    let x_centered = centered(&sample.x_run);
    let p_centered = centered(&sample.p_run);
    let replicates = (0..config.n_bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(config.seed, BOOTSTRAP_STREAM_OFFSET + b as u64);
            let x = resampled_moments(&x_centered, &mut rng);
            let p = resampled_moments(&p_centered, &mut rng);
            let cm = assemble(x, p);
            let proj = cm.standard_form_of(structure_tol)?;
            let r = classify(&proj.cm, tol)?;
            Ok((cm, r.g_a_to_b, r.g_b_to_a))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut std_errors = [[0.0; 4]; 4];
    for (i, row) in std_errors.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let entries: Vec<f64> = replicates.iter().map(|(cm, _, _)| cm.get(i, j)).collect();
            *slot = MeanStd::of(&entries).std;
        }
    }
    let g_ab: Vec<f64> = replicates.iter().map(|r| r.1).collect();
    let g_ba: Vec<f64> = replicates.iter().map(|r| r.2).collect();

    Ok(BootstrapReport {
        estimate: EstimatedCM {
            cm: full,
            std_errors,
            n_bootstrap: config.n_bootstrap,
        },
        projection: projection.cm,
        residual: projection.residual,
        point,
        g_a_to_b: MeanStd::of(&g_ab),
        g_b_to_a: MeanStd::of(&g_ba),
        structure_tol,
        physical_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::gaussian::DEFAULT_PHYSICAL_TOL;
    use crate::schemes::tmss_cm;

    const V: f64 = 1.251;

    #[test]
    fn cholesky_reproduces_block() {
        let (l11, l21, l22) = cholesky_2x2(1.4, 1.1, 0.6);
        assert!((l11 * l11 - 1.4).abs() < 1e-14);
        assert!((l11 * l21 - 0.6).abs() < 1e-14);
        assert!((l21 * l21 + l22 * l22 - 1.1).abs() < 1e-14);
    }

    #[test]
    fn vacuum_marginals() {
        let n = 200_000;
        let s = sample_quadratures(&StandardFormCM::VACUUM, n, 7, DEFAULT_PHYSICAL_TOL).unwrap();
        let cm = estimate_cm(&s).unwrap();
        let bound = 5.0 * (2.0 / n as f64).sqrt();
        for i in 0..4 {
            assert!((cm.get(i, i) - 1.0).abs() < bound, "{i}: {}", cm.get(i, i));
        }
        assert_eq!(cm.get(0, 1), 0.0);
    }

    #[test]
    fn same_seed_same_records() {
        let cm = tmss_cm(V).unwrap();
        let a = sample_quadratures(&cm, 1000, 42, DEFAULT_PHYSICAL_TOL).unwrap();
        let b = sample_quadratures(&cm, 1000, 42, DEFAULT_PHYSICAL_TOL).unwrap();
        let c = sample_quadratures(&cm, 1000, 43, DEFAULT_PHYSICAL_TOL).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.x_run, c.x_run);
        assert_ne!(a.x_run, a.p_run);
    }

    #[test]
    fn sampling_preconditions() {
        let cm = tmss_cm(V).unwrap();
        assert!(matches!(sample_quadratures(&cm, 1, 0, 1e-9), Err(Error::Domain(_))));
        let bad = StandardFormCM::new(1.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            sample_quadratures(&bad, 100, 0, 1e-9),
            Err(Error::UnphysicalState { .. })
        ));
    }

    #[test]
    fn constant_records_estimate_zero_matrix() {
        let s = QuadratureSample {
            x_run: vec![(0.0, 0.0); 10],
            p_run: vec![(0.0, 0.0); 10],
            seed: 0,
            n_per_run: 10,
        };
        let cm = estimate_cm(&s).unwrap();
        assert_eq!(cm, GeneralCM::zeros());
        assert!(!cm.is_physical(DEFAULT_PHYSICAL_TOL).unwrap());
    }

    #[test]
    fn shifted_moments_match_two_pass_estimate() {
        let cm = tmss_cm(V).unwrap();
        let s = sample_quadratures(&cm, 5000, 3, DEFAULT_PHYSICAL_TOL).unwrap();
        let c = centered(&s.x_run);
        let nf = c.len() as f64;
        let (sa, sb, sab) = c.iter().fold((0.0, 0.0, 0.0), |(x, y, z), &(a, b)| {
            (x + a, y + b, z + a * b)
        });
        let cov = (sab - sa * sb / nf) / (nf - 1.0);
        assert!((cov - estimate_cm(&s).unwrap().get(0, 2)).abs() < 1e-12);
    }

    #[test]
    fn too_few_replicates() {
        let cm = tmss_cm(V).unwrap();
        let s = sample_quadratures(&cm, 100, 3, DEFAULT_PHYSICAL_TOL).unwrap();
        assert!(bootstrap_steering(&s, &BootstrapConfig::new(10, 1)).is_err());
    }

    #[test]
    fn tight_structure_tolerance_fails() {
        let cm = tmss_cm(V).unwrap();
        let s = sample_quadratures(&cm, 1000, 3, DEFAULT_PHYSICAL_TOL).unwrap();
        let mut cfg = BootstrapConfig::new(100, 1);
        cfg.structure_tol = Some(1e-9);
        assert!(matches!(
            bootstrap_steering(&s, &cfg),
            Err(Error::StructureViolation { .. })
        ));
    }

    #[test]
    fn csv_export_layout() {
        let cm = tmss_cm(V).unwrap();
        let s = sample_quadratures(&cm, 3, 3, DEFAULT_PHYSICAL_TOL).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "run,index,value_a,value_b");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("x,0,"));
        assert!(lines[4].starts_with("p,0,"));
        let a: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(a, s.x_run[0].0);
    }
}
