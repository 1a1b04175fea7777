//! Monte Carlo runner: FER/BER estimates with Wilson intervals, parameter
//! sweeps, deterministic seeding and resumable CSV output.
//!
//! Trials run in fixed-size chunks. Each trial's seed depends only on the
//! master seed, the point and the trial index, and results are reduced in
//! trial order, so the thread count never changes a number. The early stop
//! is checked between chunks for the same reason.

mod experiments;

pub use experiments::{Demap, Experiment, PolarConstruction, Preset, TrialOutcome, OLIGO_SUB_SHARE};

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::rng::derive_seed;
use experiments::Prepared;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 14] = [
    "schema_version",
    "pipeline",
    "sweep_name",
    "sweep_value",
    "trials",
    "frame_errors",
    "bit_errors",
    "total_bits",
    "fer",
    "ber",
    "ci_lo",
    "ci_hi",
    "seed",
    "wallclock_s",
];

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("{out} was written by a different config (hash {found}, expected {expected})")]
    ResumeMismatch { out: PathBuf, expected: String, found: String },
    #[error("cannot resume from {out}: {reason}")]
    BadResume { out: PathBuf, reason: String },
    #[error("point {point} ({name}={value}): {source}")]
    Point { point: usize, name: String, value: f64, source: Box<HarnessError> },
    #[error(transparent)]
    Pipeline(#[from] crate::pipelines::PipelineError),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
    #[error(transparent)]
    Lt(#[from] crate::fountain::LtError),
    #[error(transparent)]
    Polar(#[from] crate::polar::PolarError),
    #[error(transparent)]
    Watermark(#[from] crate::watermark::WatermarkError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Threads(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopRule {
    /// Stop a point once this many frame errors are seen.
    pub target_frame_errors: Option<u64>,
    /// Trials per chunk; the stop rule is checked between chunks.
    pub chunk: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { target_frame_errors: Some(100), chunk: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "config_version")]
    pub schema_version: u32,
    /// Written to the `pipeline` CSV column; defaults to the experiment name.
    #[serde(default)]
    pub label: Option<String>,
    pub experiment: Experiment,
    pub sweep: Sweep,
    /// Maximum trials per point.
    pub trials: u64,
    #[serde(default)]
    pub stop: StopRule,
    pub master_seed: u64,
    /// Reuse the same trial seeds at every point, so nested experiments
    /// (more droplets, more overhead) are compared on identical draws.
    #[serde(default)]
    pub common_random_numbers: bool,
    /// Record per-point wallclock; off keeps CSV output byte-reproducible.
    #[serde(default)]
    pub record_wallclock: bool,
}

fn config_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, sweep_name: &str, values: Vec<f64>, trials: u64, master_seed: u64) -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            label: None,
            experiment,
            sweep: Sweep { name: sweep_name.into(), values },
            trials,
            stop: StopRule::default(),
            master_seed,
            common_random_numbers: false,
            record_wallclock: false,
        }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.experiment.name().to_string())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return bad(format!("schema_version {} (expected {CONFIG_SCHEMA_VERSION})", self.schema_version));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.stop.chunk == 0 {
            return bad("stop.chunk must be at least 1".into());
        }
        let v = &self.sweep.values;
        if v.is_empty() {
            return bad("sweep needs at least one value".into());
        }
        if v.iter().any(|x| !x.is_finite()) {
            return bad("sweep values must be finite".into());
        }
        if v.windows(2).any(|w| w[0] > w[1]) {
            return bad("sweep values must be sorted ascending".into());
        }
        if !self.experiment.sweep_names().contains(&self.sweep.name.as_str()) {
            return bad(format!(
                "{} cannot sweep '{}' (allowed: {})",
                self.experiment.name(),
                self.sweep.name,
                self.experiment.sweep_names().join(", ")
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form; guards resumed runs.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn trial_seed(&self, point: usize, trial: u64) -> u64 {
        if self.common_random_numbers {
            derive_seed(self.master_seed, &[trial])
        } else {
            derive_seed(self.master_seed, &[point as u64, trial])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub value: f64,
    pub trials: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub total_bits: u64,
    pub fer: f64,
    pub ber: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub wallclock_s: f64,
}

impl CurvePoint {
    pub fn from_counts(value: f64, trials: u64, frame_errors: u64, bit_errors: u64, total_bits: u64) -> Self {
        let (ci_lo, ci_hi) = wilson(frame_errors, trials, Z95);
        Self {
            value,
            trials,
            frame_errors,
            bit_errors,
            total_bits,
            fer: frame_errors as f64 / trials.max(1) as f64,
            ber: bit_errors as f64 / total_bits.max(1) as f64,
            ci_lo,
            ci_hi,
            wallclock_s: 0.0,
        }
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The bounds are exactly 0 and 1 at the extremes; pin them against rounding.
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Runs one sweep point on the current rayon pool.
pub fn run_point(config: &ExperimentConfig, point: usize, value: f64) -> Result<CurvePoint, HarnessError> {
    let wrap = |e: HarnessError| HarnessError::Point { point, name: config.sweep.name.clone(), value, source: Box::new(e) };
    let start = Instant::now();
    let experiment = config.experiment.with_value(&config.sweep.name, value).map_err(wrap)?;
    let prepared = Prepared::new(&experiment).map_err(wrap)?;
    let (mut trials, mut frame_errors, mut bit_errors, mut total_bits) = (0u64, 0u64, 0u64, 0u64);
    while trials < config.trials {
        let end = (trials + config.stop.chunk as u64).min(config.trials);
        let outcomes: Vec<Result<TrialOutcome, HarnessError>> =
            (trials..end).into_par_iter().map(|t| prepared.trial(config.trial_seed(point, t))).collect();
        for o in outcomes {
            let o = o.map_err(wrap)?;
            frame_errors += o.frame_error as u64;
            bit_errors += o.bit_errors;
            total_bits += o.bits;
        }
        trials = end;
        if config.stop.target_frame_errors.is_some_and(|t| frame_errors >= t) {
            break;
        }
    }
    let mut p = CurvePoint::from_counts(value, trials, frame_errors, bit_errors, total_bits);
    if config.record_wallclock {
        p.wallclock_s = start.elapsed().as_secs_f64();
    }
    Ok(p)
}

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| HarnessError::Threads(e.to_string()))
}

/// Path of the config-hash file kept next to a CSV.
pub fn hash_sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".confighash");
    PathBuf::from(name)
}

fn csv_row(config: &ExperimentConfig, p: &CurvePoint) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record([
        CSV_SCHEMA_VERSION.to_string(),
        config.label(),
        config.sweep.name.clone(),
        p.value.to_string(),
        p.trials.to_string(),
        p.frame_errors.to_string(),
        p.bit_errors.to_string(),
        p.total_bits.to_string(),
        p.fer.to_string(),
        p.ber.to_string(),
        p.ci_lo.to_string(),
        p.ci_hi.to_string(),
        config.master_seed.to_string(),
        p.wallclock_s.to_string(),
    ])?;
    w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
}

/// CSV text (header plus one row per point) for an in-memory sweep.
pub fn to_csv(config: &ExperimentConfig, points: &[CurvePoint]) -> Result<String, HarnessError> {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for p in points {
        out.push_str(std::str::from_utf8(&csv_row(config, p)?).expect("csv output is utf-8"));
    }
    Ok(out)
}

/// Parses harness CSV rows back into points.
pub fn read_csv(path: &Path) -> Result<Vec<CurvePoint>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(HarnessError::BadResume { out: path.into(), reason: format!("unexpected header {header:?}") });
    }
    let bad = |reason: String| HarnessError::BadResume { out: path.into(), reason };
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("column {}: {e}", CSV_HEADER[i])));
        let u = |i: usize| rec[i].parse::<u64>().map_err(|e| bad(format!("column {}: {e}", CSV_HEADER[i])));
        points.push(CurvePoint {
            value: f(3)?,
            trials: u(4)?,
            frame_errors: u(5)?,
            bit_errors: u(6)?,
            total_bits: u(7)?,
            fer: f(8)?,
            ber: f(9)?,
            ci_lo: f(10)?,
            ci_hi: f(11)?,
            wallclock_s: f(13)?,
        });
    }
    Ok(points)
}

/// Runs every sweep point on a pool of `threads` workers. With `out`, each
/// finished point is appended to the CSV and flushed before the next one
/// starts; rerunning the same config on a partial file picks up after the
/// last complete row.
pub fn sweep(config: &ExperimentConfig, out: Option<&Path>, threads: usize) -> Result<Vec<CurvePoint>, HarnessError> {
    config.validate()?;
    let pool = thread_pool(threads)?;
    let mut points = Vec::with_capacity(config.sweep.values.len());
    let mut file = match out {
        Some(path) => Some(open_for_resume(config, path, &mut points)?),
        None => None,
    };
    for (i, &v) in config.sweep.values.iter().enumerate().skip(points.len()) {
        let p = pool.install(|| run_point(config, i, v))?;
        if let Some(f) = file.as_mut() {
            f.write_all(&csv_row(config, &p)?)?;
            f.sync_data()?;
        }
        log::info!("{} {}={} fer={} ber={} trials={}", config.label(), config.sweep.name, v, p.fer, p.ber, p.trials);
        points.push(p);
    }
    Ok(points)
}

fn open_for_resume(config: &ExperimentConfig, path: &Path, done: &mut Vec<CurvePoint>) -> Result<File, HarnessError> {
    let sidecar = hash_sidecar(path);
    let hash = config.hash();
    let has_rows = path.exists() && std::fs::metadata(path)?.len() > 0;
    if has_rows {
        let found = std::fs::read_to_string(&sidecar).unwrap_or_default().trim().to_string();
        if found != hash {
            return Err(HarnessError::ResumeMismatch { out: path.into(), expected: hash, found });
        }
        // A crash can only leave a torn last line; drop it before appending.
        let text = std::fs::read_to_string(path)?;
        if !text.ends_with('\n') {
            let keep = text.rfind('\n').map_or(0, |i| i + 1);
            std::fs::write(path, &text[..keep])?;
        }
        let existing = read_csv(path)?;
        if existing.len() > config.sweep.values.len()
            || existing.iter().zip(&config.sweep.values).any(|(p, &v)| p.value.to_bits() != v.to_bits())
        {
            return Err(HarnessError::BadResume { out: path.into(), reason: "rows do not match the sweep values".into() });
        }
        *done = existing;
        return Ok(OpenOptions::new().append(true).open(path)?);
    }
    std::fs::write(&sidecar, format!("{hash}\n"))?;
    let mut f = File::create(path)?;
    f.write_all(format!("{}\n", CSV_HEADER.join(",")).as_bytes())?;
    f.sync_data()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_estimate() {
        for (k, n) in [(0, 10), (3, 10), (10, 10), (50, 1000)] {
            let (lo, hi) = wilson(k, n, Z95);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && (0.0..=1.0).contains(&lo) && hi <= 1.0);
        }
        let (lo, hi) = wilson(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_994).abs() < 1e-5);
    }

    #[test]
    fn validation() {
        let base = ExperimentConfig::new(Experiment::Bernoulli { p: 0.1 }, "p", vec![0.1, 0.2], 10, 1);
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.sweep.values = vec![0.2, 0.1];
        assert!(c.validate().is_err());
        c.sweep.values = vec![f64::NAN];
        assert!(c.validate().is_err());
        c = base.clone();
        c.trials = 0;
        assert!(c.validate().is_err());
        c = base.clone();
        c.sweep.name = "epsilon".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_tracks_config() {
        let a = ExperimentConfig::new(Experiment::Bernoulli { p: 0.1 }, "p", vec![0.1], 10, 1);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.master_seed = 2;
        assert_ne!(a.hash(), b.hash());
    }
}
