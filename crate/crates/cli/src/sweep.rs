//! Single-parameter sweeps and the three figure presets built on them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use mmnoma_core::analytic::{AccessMode, AnalyticContext, Method};
use mmnoma_core::montecarlo::{estimate_coverage, estimate_throughput, SimOptions};
use mmnoma_core::SystemConfig;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{render_config, set_param, KEYS};

/// Quantity reported by a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    CoverageNear,
    CoverageFar,
    RateNoma,
    RateOma,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::CoverageNear => "coverage_near",
            Metric::CoverageFar => "coverage_far",
            Metric::RateNoma => "rate_noma",
            Metric::RateOma => "rate_oma",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coverage_near" | "near" => Ok(Metric::CoverageNear),
            "coverage_far" | "far" => Ok(Metric::CoverageFar),
            "rate_noma" | "noma" => Ok(Metric::RateNoma),
            "rate_oma" | "oma" => Ok(Metric::RateOma),
            other => Err(SpecError::Metric(other.to_string())),
        }
    }
}

pub fn parse_method(s: &str) -> Result<Method, SpecError> {
    match s {
        "theorem" | "analytic" => Ok(Method::TheoremIntegral),
        "closed-form" | "closed" => Ok(Method::ClosedForm),
        "monte-carlo" | "mc" => Ok(Method::MonteCarlo),
        other => Err(SpecError::Method(other.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("unknown metric `{0}` (expected coverage_near, coverage_far, rate_noma or rate_oma)")]
    Metric(String),
    #[error("unknown method `{0}` (expected theorem, closed-form or monte-carlo)")]
    Method(String),
    #[error("unknown sweep parameter `{0}`")]
    Param(String),
    #[error("bad grid `{0}`: use `v1,v2,...` or `start:step:end`")]
    Grid(String),
    #[error("grid must be nonempty, finite and strictly increasing")]
    GridOrder,
    #[error("at least one method is required")]
    NoMethods,
    #[error("trials must be positive")]
    NoTrials,
    #[error("a trials grid must hold positive integers")]
    TrialsGrid,
    #[error("variant `{0}` requests no metrics")]
    NoMetrics(String),
}

/// Parses `v1,v2,...` or an inclusive `start:step:end` range.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, SpecError> {
    let bad = || SpecError::Grid(s.to_string());
    let grid: Vec<f64> = if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let [start, step, end] = parts[..] else {
            return Err(bad());
        };
        if step.is_nan() || step <= 0.0 || end < start {
            return Err(bad());
        }
        let count = ((end - start) / step + 1e-9).floor() as usize;
        (0..=count).map(|i| start + step * i as f64).collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    check_grid(&grid)?;
    Ok(grid)
}

fn check_grid(grid: &[f64]) -> Result<(), SpecError> {
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpecError::GridOrder);
    }
    Ok(())
}

/// One curve family within a sweep: fixed overrides plus the metrics to report.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub overrides: Vec<(String, f64)>,
    pub metrics: Vec<Metric>,
}

impl Variant {
    pub fn new(label: impl Into<String>, overrides: &[(&str, f64)], metrics: &[Metric]) -> Self {
        Self {
            label: label.into(),
            overrides: overrides.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            metrics: metrics.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub experiment: String,
    pub param: String,
    pub grid: Vec<f64>,
    pub base: SystemConfig,
    pub variants: Vec<Variant>,
    pub methods: Vec<Method>,
    pub trials: u64,
    pub seed: u64,
    /// Chebyshev node counts `(n1, n2)`.
    pub nodes: (usize, usize),
    /// Reuse one seed at every grid point instead of deriving one per point.
    pub common_random_numbers: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if !KEYS.contains(&self.param.as_str()) && self.param != TRIALS_PARAM {
            return Err(SpecError::Param(self.param.clone()));
        }
        check_grid(&self.grid)?;
        if self.methods.is_empty() {
            return Err(SpecError::NoMethods);
        }
        let trials_swept = self.param == TRIALS_PARAM;
        if trials_swept && self.grid.iter().any(|&t| !(t >= 1.0 && t.fract() == 0.0)) {
            return Err(SpecError::TrialsGrid);
        }
        if self.trials == 0 && !trials_swept && self.methods.contains(&Method::MonteCarlo) {
            return Err(SpecError::NoTrials);
        }
        for v in &self.variants {
            if v.metrics.is_empty() {
                return Err(SpecError::NoMetrics(v.label.clone()));
            }
        }
        Ok(())
    }
}

/// One output line.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub param: String,
    pub x: f64,
    pub variant: String,
    pub method: Method,
    pub metric: Metric,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub trials: Option<u64>,
    pub config_hash: String,
    /// `None` when the row succeeded.
    pub error: Option<String>,
}

/// Sweep output: rows in grid order and every distinct resolved config.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<Row>,
    /// `(hash, rendered config)` in order of first use.
    pub configs: Vec<(String, String)>,
}

impl SweepResult {
    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// First 16 hex digits of the SHA-256 of the rendered config.
pub fn config_hash(rendered: &str) -> String {
    let digest = Sha256::digest(rendered.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Sweeping this name varies the Monte Carlo sample size instead of a config field.
pub const TRIALS_PARAM: &str = "trials";

/// Per-point Monte Carlo seed: reproducible for a given sweep, distinct across points.
fn point_seed(spec: &SweepSpec, variant: &str, x: f64) -> u64 {
    if spec.common_random_numbers {
        return spec.seed;
    }
    let mut h = Sha256::new();
    h.update(spec.seed.to_le_bytes());
    h.update(spec.experiment.as_bytes());
    h.update([0]);
    h.update(variant.as_bytes());
    h.update([0]);
    h.update(x.to_bits().to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("32-byte digest"))
}

struct Outcome {
    value: f64,
    stderr: Option<f64>,
    trials: Option<u64>,
}

fn evaluate(
    spec: &SweepSpec,
    cfg: &SystemConfig,
    method: Method,
    metrics: &[Metric],
    trials: u64,
    seed: u64,
) -> Vec<Result<Outcome, String>> {
    let err = |e: mmnoma_core::Error| e.to_string();
    match method {
        Method::TheoremIntegral | Method::ClosedForm => {
            let ctx = match AnalyticContext::new(*cfg).and_then(|c| c.with_nodes(spec.nodes.0, spec.nodes.1)) {
                Ok(c) => c,
                Err(e) => return metrics.iter().map(|_| Err(err(e.clone()))).collect(),
            };
            let closed = method == Method::ClosedForm;
            metrics
                .iter()
                .map(|m| {
                    let value = match (m, closed) {
                        (Metric::CoverageNear, false) => ctx.coverage_near().map(|r| r.value),
                        (Metric::CoverageNear, true) => ctx.coverage_near_closed().map(|r| r.value),
                        (Metric::CoverageFar, false) => ctx.coverage_far().map(|r| r.value),
                        (Metric::CoverageFar, true) => ctx.coverage_far_closed().map(|r| r.value),
                        (Metric::RateNoma, false) => ctx.throughput(AccessMode::Noma).map(|t| t.rate),
                        (Metric::RateNoma, true) => ctx.throughput_closed(AccessMode::Noma).map(|t| t.rate),
                        (Metric::RateOma, false) => ctx.throughput(AccessMode::Oma).map(|t| t.rate),
                        (Metric::RateOma, true) => ctx.throughput_closed(AccessMode::Oma).map(|t| t.rate),
                    };
                    value.map_err(err).map(|value| Outcome {
                        value,
                        stderr: None,
                        trials: None,
                    })
                })
                .collect()
        }
        Method::MonteCarlo => {
            let opts = SimOptions::default();
            let needs_coverage = metrics
                .iter()
                .any(|m| matches!(m, Metric::CoverageNear | Metric::CoverageFar));
            let coverage = needs_coverage.then(|| estimate_coverage(cfg, &opts, trials, seed));
            metrics
                .iter()
                .map(|m| {
                    let est = match m {
                        Metric::CoverageNear | Metric::CoverageFar => {
                            let c = coverage.as_ref().expect("computed above").clone().map_err(err)?;
                            let e = if *m == Metric::CoverageNear { c.near } else { c.far };
                            (e.p_hat, e.stderr)
                        }
                        Metric::RateNoma | Metric::RateOma => {
                            let mode = if *m == Metric::RateNoma {
                                AccessMode::Noma
                            } else {
                                AccessMode::Oma
                            };
                            let t = estimate_throughput(cfg, &opts, mode, trials, seed).map_err(err)?;
                            (t.rate, t.stderr)
                        }
                    };
                    Ok(Outcome {
                        value: est.0,
                        stderr: Some(est.1),
                        trials: Some(trials),
                    })
                })
                .collect()
        }
    }
}

/// Runs every grid point of every variant with every method. Failures are
/// recorded on their rows and do not stop the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SpecError> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut configs: Vec<(String, String)> = Vec::new();
    for &x in &spec.grid {
        for variant in &spec.variants {
            let mut cfg = spec.base;
            let mut setup_error = None;
            for (k, v) in &variant.overrides {
                if let Err(e) = set_param(&mut cfg, k, *v) {
                    setup_error = Some(e.to_string());
                }
            }
            let trials = if spec.param == TRIALS_PARAM {
                x as u64
            } else {
                if let Err(e) = set_param(&mut cfg, &spec.param, x) {
                    setup_error = Some(e.to_string());
                }
                spec.trials
            };
            let rendered = render_config(&cfg);
            let hash = config_hash(&rendered);
            if !configs.iter().any(|(h, _)| *h == hash) {
                configs.push((hash.clone(), rendered));
            }
            let setup_error =
                setup_error.or_else(|| cfg.validate().err().map(|e| format!("invalid configuration: {e}")));
            let seed = point_seed(spec, &variant.label, x);
            for &method in &spec.methods {
                let results: Vec<Result<Outcome, String>> = match &setup_error {
                    Some(e) => variant.metrics.iter().map(|_| Err(e.clone())).collect(),
                    None => evaluate(spec, &cfg, method, &variant.metrics, trials, seed),
                };
                for (metric, result) in variant.metrics.iter().zip(results) {
                    let (value, stderr, trials, error) = match result {
                        Ok(o) => (Some(o.value), o.stderr, o.trials, None),
                        Err(e) => (None, None, None, Some(e)),
                    };
                    rows.push(Row {
                        experiment: spec.experiment.clone(),
                        param: spec.param.clone(),
                        x,
                        variant: variant.label.clone(),
                        method,
                        metric: *metric,
                        value,
                        stderr,
                        trials,
                        config_hash: hash.clone(),
                        error,
                    });
                }
            }
        }
    }
    Ok(SweepResult { rows, configs })
}

/// Figure presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Coverage versus SNR for two BS densities.
    Fig1,
    /// Coverage versus array size for three `(K, sigma^2)` pairs at 83 dB.
    Fig2,
    /// NOMA and OMA system rate versus SNR for two array sizes.
    Fig3,
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            other => Err(format!("unknown figure `{other}`")),
        }
    }
}

impl Figure {
    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
        }
    }

    pub fn default_methods(&self) -> Vec<Method> {
        vec![Method::TheoremIntegral, Method::ClosedForm, Method::MonteCarlo]
    }

    /// The preset sweep on top of `base`.
    pub fn spec(&self, base: SystemConfig, methods: Vec<Method>, trials: u64, seed: u64) -> SweepSpec {
        let coverage = [Metric::CoverageNear, Metric::CoverageFar];
        let density = |r: f64| 1.0 / (r * r * PI);
        let snr_grid: Vec<f64> = (0..=6).map(|i| 60.0 + 5.0 * i as f64).collect();
        let (param, grid, base, variants) = match self {
            Figure::Fig1 => (
                "snr_db",
                snr_grid,
                base,
                vec![
                    Variant::new("lambda_c=1/(250^2 pi)", &[("lambda_c", density(250.0))], &coverage),
                    Variant::new("lambda_c=1/(100^2 pi)", &[("lambda_c", density(100.0))], &coverage),
                ],
            ),
            Figure::Fig2 => (
                "M",
                (1..=20).map(f64::from).collect(),
                SystemConfig { snr_db: 83.0, ..base },
                vec![
                    Variant::new("K=2;sigma2=100", &[("K", 2.0), ("sigma2", 100.0)], &coverage),
                    Variant::new("K=4;sigma2=100", &[("K", 4.0), ("sigma2", 100.0)], &coverage),
                    Variant::new("K=2;sigma2=50", &[("K", 2.0), ("sigma2", 50.0)], &coverage),
                ],
            ),
            Figure::Fig3 => {
                let mut variants = Vec::new();
                for m in [10.0, 20.0] {
                    for ak in [0.1, 0.6] {
                        variants.push(Variant::new(
                            format!("noma;a_k={ak};M={m}"),
                            &[("a_k", ak), ("M", m)],
                            &[Metric::RateNoma],
                        ));
                    }
                    variants.push(Variant::new(format!("oma;M={m}"), &[("M", m)], &[Metric::RateOma]));
                }
                ("snr_db", snr_grid, base, variants)
            }
        };
        SweepSpec {
            experiment: self.name().to_string(),
            param: param.to_string(),
            grid,
            base,
            variants,
            methods,
            trials,
            seed,
            nodes: (50, 50),
            common_random_numbers: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(
            parse_grid("60:5:90").unwrap(),
            vec![60.0, 65.0, 70.0, 75.0, 80.0, 85.0, 90.0]
        );
        assert_eq!(parse_grid("1, 2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_grid("0:0.1:0.3").unwrap().len(), 4);
        assert!(parse_grid("3,2").is_err());
        assert!(parse_grid("1:0:3").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("").is_err());
    }

    #[test]
    fn names_parse() {
        assert_eq!("far".parse::<Metric>().unwrap(), Metric::CoverageFar);
        assert_eq!(parse_method("closed-form").unwrap(), Method::ClosedForm);
        assert!(parse_method("magic").is_err());
        assert!("fig4".parse::<Figure>().is_err());
    }

    #[test]
    fn hash_is_stable_hex() {
        let h = config_hash(&render_config(&SystemConfig::default()));
        assert_eq!(h.len(), 16);
        assert_eq!(h, config_hash(&render_config(&SystemConfig::default())));
        assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
    }

    #[test]
    fn seeds_differ_by_point_unless_shared() {
        let mut spec = Figure::Fig1.spec(SystemConfig::default(), vec![Method::MonteCarlo], 10, 5);
        assert_ne!(point_seed(&spec, "a", 60.0), point_seed(&spec, "a", 65.0));
        assert_ne!(point_seed(&spec, "a", 60.0), point_seed(&spec, "b", 60.0));
        spec.common_random_numbers = true;
        assert_eq!(point_seed(&spec, "a", 60.0), 5);
    }

    #[test]
    fn figure_presets_have_expected_shape() {
        let base = SystemConfig::default();
        let f1 = Figure::Fig1.spec(base, Figure::Fig1.default_methods(), 10, 1);
        assert_eq!(f1.grid.first(), Some(&60.0));
        assert_eq!(f1.grid.last(), Some(&90.0));
        assert_eq!(f1.variants.len(), 2);
        let f2 = Figure::Fig2.spec(base, vec![Method::ClosedForm], 10, 1);
        assert_eq!(f2.grid.len(), 20);
        assert_eq!(f2.base.snr_db, 83.0);
        let f3 = Figure::Fig3.spec(base, vec![Method::ClosedForm], 10, 1);
        assert_eq!(f3.variants.len(), 6);
        for s in [f1, f2, f3] {
            s.validate().unwrap();
        }
    }

    #[test]
    fn row_errors_do_not_stop_the_sweep() {
        let spec = SweepSpec {
            experiment: "t".into(),
            param: "tau_j".into(),
            // tau_j = 20 makes a_j - tau_j a_k negative.
            grid: vec![0.2, 20.0],
            base: SystemConfig::default(),
            variants: vec![Variant::new("base", &[], &[Metric::CoverageNear])],
            methods: vec![Method::ClosedForm],
            trials: 1,
            seed: 1,
            nodes: (8, 8),
            common_random_numbers: false,
        };
        let out = run_sweep(&spec).unwrap();
        assert_eq!(out.rows.len(), 2);
        assert!(out.rows[0].error.is_none());
        assert!(out.rows[1].error.is_some());
        assert_eq!(out.error_count(), 1);
        assert_eq!(out.configs.len(), 2);
    }
}
