use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use dnafec::base_codec::{constraints_check, parse_fasta, write_fasta, ConstraintSpec};
use dnafec::harness::{self, ExperimentConfig, HarnessError, CSV_HEADER};
use dnafec::pipelines::{decode_archive, encode_archive, ArchiveManifest, PipelineError, PipelineSpec};

/// Channel coding toolkit for DNA data storage.
///
/// Exit status: 0 on success, 1 when a decode or experiment fails, 2 on
/// usage or configuration errors.
#[derive(Parser)]
#[command(name = "dnafec", version)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a file into FASTA oligos plus a JSON manifest.
    Encode {
        /// Scheme: lt_rs, rs_rs, ldpc_wm or polar_wm.
        #[arg(long)]
        pipeline: Option<String>,
        /// Pipeline spec JSON; overrides the scheme defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seed for the scheme's pseudo-random streams.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "in")]
        input: PathBuf,
        /// FASTA output.
        #[arg(long)]
        out: PathBuf,
        /// Manifest output [default: <out>.manifest.json].
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Decode FASTA reads back into the original file.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        /// Manifest written by encode [default: <in>.manifest.json].
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment config in memory and print its CSV.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Run only this sweep value.
        #[arg(long)]
        value: Option<f64>,
        /// CSV output [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment config, appending each point to a resumable CSV.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a FASTA file, manifest, config or result CSV.
    Inspect { path: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the maximum trials per point.
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, env = "DNAFEC_THREADS")]
    threads: Option<usize>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Run(_) => 1,
            Self::Usage(_) => 2,
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(_) => Self::Usage(e.to_string()),
            _ => Self::Run(e.to_string()),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) | HarnessError::ResumeMismatch { .. } => Self::Usage(e.to_string()),
            _ => Self::Run(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(msg) | Failure::Run(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Encode { pipeline, config, seed, input, out, manifest } => {
            let mut spec = pipeline_spec(pipeline.as_deref(), config.as_deref())?;
            if let Some(seed) = seed {
                reseed(&mut spec, seed);
            }
            spec.validate()?;
            let data = read(&input)?;
            let (records, m) = encode_archive(&data, &spec)?;
            write(&out, write_fasta(&records).as_bytes())?;
            let manifest = manifest.unwrap_or_else(|| sibling(&out, ".manifest.json"));
            let json = serde_json::to_string_pretty(&m).expect("manifest serializes");
            write(&manifest, format!("{json}\n").as_bytes())?;
            log::info!("{} bytes -> {} oligos ({})", m.data_bytes, m.oligos, m.pipeline.name());
            Ok(())
        }
        Command::Decode { input, manifest, out } => {
            let manifest = manifest.unwrap_or_else(|| sibling(&input, ".manifest.json"));
            let m: ArchiveManifest = load_json(&manifest)?;
            let text = String::from_utf8(read(&input)?).map_err(|e| Failure::Usage(format!("{}: {e}", input.display())))?;
            let records = parse_fasta(&text).map_err(|e| Failure::Usage(format!("{}: {e}", input.display())))?;
            let data = decode_archive(&records, &m)?;
            write(&out, &data)
        }
        Command::Simulate { run, value, out } => {
            let (config, threads) = experiment(&run)?;
            let points = match value {
                Some(v) => {
                    let Some(i) = config.sweep.values.iter().position(|&x| x == v) else {
                        return Err(Failure::Usage(format!("{v} is not one of the sweep values")));
                    };
                    let pool = harness::thread_pool(threads)?;
                    vec![pool.install(|| harness::run_point(&config, i, v))?]
                }
                None => harness::sweep(&config, None, threads)?,
            };
            let csv = harness::to_csv(&config, &points)?;
            match out {
                Some(path) => write(&path, csv.as_bytes()),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        Command::Sweep { run, out } => {
            let (config, threads) = experiment(&run)?;
            harness::sweep(&config, Some(&out), threads)?;
            Ok(())
        }
        Command::Inspect { path } => inspect(&path),
    }
}

fn pipeline_spec(name: Option<&str>, config: Option<&Path>) -> Result<PipelineSpec, Failure> {
    let spec = match (name, config) {
        (_, Some(path)) => load_json::<PipelineSpec>(path)?,
        (Some(name), None) => {
            PipelineSpec::by_name(name).ok_or_else(|| Failure::Usage(format!("unknown pipeline {name:?}")))?
        }
        (None, None) => return Err(Failure::Usage("encode needs --pipeline or --config".into())),
    };
    match name {
        Some(name) if name != spec.name() => {
            Err(Failure::Usage(format!("--pipeline {name} conflicts with config scheme {}", spec.name())))
        }
        _ => Ok(spec),
    }
}

fn reseed(spec: &mut PipelineSpec, seed: u64) {
    match spec {
        PipelineSpec::LtRs(s) => s.seed_stream = seed,
        PipelineSpec::RsRs(s) => s.filler_seed = seed,
        PipelineSpec::LdpcWm(s) | PipelineSpec::PolarWm(s) => s.watermark_seed = seed,
    }
}

fn experiment(run: &RunArgs) -> Result<(ExperimentConfig, usize), Failure> {
    let mut config: ExperimentConfig = load_json(&run.config)?;
    if let Some(seed) = run.seed {
        config.master_seed = seed;
    }
    if let Some(trials) = run.trials {
        config.trials = trials;
    }
    config.validate()?;
    let threads = match run.threads {
        Some(0) => return Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    Ok((config, threads))
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|msg| Failure::Usage(format!("{}: {msg}", path.display())))
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, String> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let at = format!("line {} column {}", inner.line(), inner.column());
        if path == "." {
            format!("{at}: {inner}")
        } else {
            format!("{at}: field `{path}`: {inner}")
        }
    })?;
    de.end().map_err(|e| format!("line {} column {}: {e}", e.line(), e.column()))?;
    Ok(value)
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn write(path: &Path, data: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, data).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

fn inspect(path: &Path) -> Result<(), Failure> {
    let text = String::from_utf8(read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('>') {
        let records = parse_fasta(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        inspect_fasta(&records.iter().map(|r| r.seq.as_str()).collect::<Vec<_>>());
        return Ok(());
    }
    if text.lines().next().is_some_and(|l| l.trim_end() == CSV_HEADER.join(",")) {
        let points = harness::read_csv(path)?;
        println!("points: {}", points.len());
        for p in points {
            println!(
                "  value={} trials={} fer={:.4e} [{:.4e}, {:.4e}] ber={:.4e}",
                p.value, p.trials, p.fer, p.ci_lo, p.ci_hi, p.ber
            );
        }
        return Ok(());
    }
    let value: serde_json::Value = parse_json(&text).map_err(|msg| Failure::Usage(format!("{}: {msg}", path.display())))?;
    if value.get("experiment").is_some() {
        let config: ExperimentConfig = parse_json(&text).map_err(|msg| Failure::Usage(format!("{}: {msg}", path.display())))?;
        config.validate()?;
        println!("experiment: {}", config.label());
        println!("sweep: {} = {:?}", config.sweep.name, config.sweep.values);
        match config.stop.target_frame_errors {
            Some(n) => println!("trials: {} (stop at {n} frame errors)", config.trials),
            None => println!("trials: {}", config.trials),
        }
        println!("master_seed: {}", config.master_seed);
        println!("config_hash: {}", config.hash());
    } else if value.get("sha256").is_some() {
        let m: ArchiveManifest = parse_json(&text).map_err(|msg| Failure::Usage(format!("{}: {msg}", path.display())))?;
        m.pipeline.validate()?;
        println!("pipeline: {}", m.pipeline.name());
        println!("data_bytes: {}", m.data_bytes);
        println!("oligos: {} x {} nt", m.oligos, m.pipeline.oligo_len_nt());
        println!("units: {}", m.units);
        println!("sha256: {}", m.sha256);
    } else {
        let spec: PipelineSpec = parse_json(&text).map_err(|msg| Failure::Usage(format!("{}: {msg}", path.display())))?;
        spec.validate()?;
        println!("pipeline: {}", spec.name());
        println!("oligo_len_nt: {}", spec.oligo_len_nt());
    }
    Ok(())
}

fn inspect_fasta(seqs: &[&str]) {
    let c = ConstraintSpec::default();
    let reports: Vec<_> = seqs.iter().map(|s| constraints_check(s, &c)).collect();
    let lens = seqs.iter().map(|s| s.len());
    let gc = reports.iter().map(|r| r.gc_fraction);
    println!("oligos: {}", seqs.len());
    if seqs.is_empty() {
        return;
    }
    println!("length: {}..{} nt", lens.clone().min().unwrap_or(0), lens.max().unwrap_or(0));
    println!("gc: {:.3}..{:.3}", gc.clone().fold(f64::INFINITY, f64::min), gc.fold(0.0, f64::max));
    println!("max_homopolymer: {}", reports.iter().map(|r| r.max_run).max().unwrap_or(0));
    println!(
        "within gc [{}, {}] and runs <= {}: {}",
        c.gc_min,
        c.gc_max,
        c.max_homopolymer,
        reports.iter().filter(|r| r.is_valid()).count()
    );
}
