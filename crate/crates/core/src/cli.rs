//! Command-line surface.
//!
//! Exit status is 0 on success, 2 on a usage error and 1 on a runtime error.
//! Runtime errors print one JSON object `{"error": ..., "kind": ...}` on
//! standard error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::acoustic::{load_wav, run_lucier, EmbeddingConfig, LucierConfig};
use crate::chains::{
    aggregate_verdicts, contraction_probe, ergodicity_probe, resonance_verdict, run_chain, ContractionReport,
    ErgodicityReport, ResonanceVerdict, Retention,
};
use crate::drift::{stationarity_onset, PhaseConfig};
use crate::error::{Error, Result};
use crate::io::{read_feature_batch, read_trace, trace_phases, write_gmcf, write_trace, RunConfig, TraceRecord};
use crate::linalg::estimate_gaussian;
use crate::metrics::{trace_row_from_summaries, DriftReferences, MetricConfig};
use crate::taxonomy::{segment_patterns, PatternSegment, TrendConfig};
use crate::types::{MetricTrace, PhaseLabel};

#[derive(Debug, Parser)]
#[command(name = "resonance", version, about = "Generational Markov chain diagnostics")]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a chain from a TOML config and write its trace.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure a directory of per-generation feature files.
    Analyze {
        /// Directory of CSV or GMCF files, ordered by the last number in each name.
        #[arg(long)]
        features: PathBuf,
        /// Use the label column (enables σ_intra and pattern segments).
        #[arg(long)]
        labels: bool,
        /// Write trace files here instead of printing JSON lines.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = MetricConfig::default().k_neighbors)]
        k_neighbors: usize,
        #[arg(long, default_value_t = PhaseConfig::default().window)]
        phase_window: usize,
        #[arg(long, default_value_t = TrendConfig::default().window)]
        trend_window: usize,
    },
    /// Repeatedly filter audio through impulse responses.
    Lucier {
        /// Input recordings; each is its own class.
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        /// Impulse responses.
        #[arg(long, required = true, num_args = 1..)]
        ir: Vec<PathBuf>,
        #[arg(long)]
        generations: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = EmbeddingConfig::default().window_seconds)]
        window_seconds: f64,
        #[arg(long, default_value_t = EmbeddingConfig::default().bands)]
        bands: usize,
        #[arg(long, default_value_t = MetricConfig::default().k_neighbors)]
        k_neighbors: usize,
    },
    /// Ergodicity and contraction probes with a resonance verdict.
    Probe {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-run pattern segmentation on a trace file.
    Classify {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = TrendConfig::default().window)]
        window: usize,
        #[arg(long, default_value_t = TrendConfig::default().theta_slope)]
        theta: f64,
        /// Also write the segments to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                2
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    init_logging(cli.verbose);
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let line = serde_json::json!({ "error": e.to_string(), "kind": e.kind() });
            let _ = writeln!(err, "{line}");
            1
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate { config, out: dir } => simulate(&config, dir, out),
        Command::Analyze {
            features,
            labels,
            out: dir,
            k_neighbors,
            phase_window,
            trend_window,
        } => {
            let metrics = MetricConfig {
                k_neighbors,
                ..MetricConfig::default()
            };
            let phase = PhaseConfig {
                window: phase_window,
                ..PhaseConfig::default()
            };
            let trend = TrendConfig {
                window: trend_window,
                ..TrendConfig::default()
            };
            analyze(&features, labels, dir.as_deref(), &metrics, &phase, &trend, out)
        }
        Command::Lucier {
            input,
            ir,
            generations,
            out: dir,
            window_seconds,
            bands,
            k_neighbors,
        } => {
            let config = LucierConfig {
                embedding: EmbeddingConfig { window_seconds, bands },
                metrics: MetricConfig {
                    k_neighbors,
                    ..MetricConfig::default()
                },
            };
            lucier(&input, &ir, generations, dir.as_deref(), &config, out)
        }
        Command::Probe { config } => probe(&config, out),
        Command::Classify {
            trace,
            window,
            theta,
            out: dest,
        } => {
            let config = TrendConfig {
                window,
                theta_slope: theta,
            };
            classify(&trace, &config, dest.as_deref(), out)
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let stdout_err = |source| Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    serde_json::to_writer(&mut *out, value).map_err(|e| stdout_err(e.into()))?;
    out.write_all(b"\n").map_err(stdout_err)
}

/// Segments when the trace supports them; unlabelled or short traces give none.
fn segments_or_empty(trace: &MetricTrace, config: &TrendConfig) -> Result<Vec<PatternSegment>> {
    match segment_patterns(trace, config) {
        Err(Error::MissingLabels) => Ok(Vec::new()),
        Err(Error::TraceTooShort { len, required }) => {
            log::warn!("trace has {len} generations, segmentation needs {required}; no segments");
            Ok(Vec::new())
        }
        other => other,
    }
}

#[derive(Serialize)]
struct RunSummary {
    generations: usize,
    output: String,
    stationarity_onset: Option<usize>,
    last: TraceRecord,
    segments: Vec<PatternSegment>,
}

fn last_record(trace: &MetricTrace, phases: &[(usize, PhaseLabel)]) -> TraceRecord {
    let r = trace.rows()[trace.len() - 1];
    TraceRecord {
        n: r.n,
        fid_local: r.fid_local,
        fid_cumulative: r.fid_cumulative,
        sigma_intra: r.sigma_intra,
        m_lb: r.m_lb,
        pr_g: r.pr_g,
        phase: phases.last().filter(|p| p.0 == r.n).map(|p| p.1),
    }
}

fn simulate(config_path: &Path, dir: Option<PathBuf>, out: &mut dyn Write) -> Result<()> {
    let config = RunConfig::load(config_path)?;
    let op = config.build_operator()?;
    let initial = config.initial_batch(op.dim())?;
    let run = run_chain(&op, &initial, config.generations, &config.run_options()?)?;
    let dir = dir.unwrap_or_else(|| config.output_dir());

    let phases = trace_phases(&run.trace, &config.phase)?;
    let segments = segments_or_empty(&run.trace, &config.trend)?;
    write_trace(&run.trace, &phases, &segments, dir.join("trace.jsonl"))?;
    if !run.snapshots.is_empty() {
        let snap_dir = dir.join("snapshots");
        std::fs::create_dir_all(&snap_dir).map_err(Error::io(&snap_dir))?;
        for (n, batch) in &run.snapshots {
            write_gmcf(snap_dir.join(format!("gen_{n:05}.gmcf")), batch)?;
        }
    }
    emit(
        out,
        &RunSummary {
            generations: config.generations,
            output: dir.display().to_string(),
            stationarity_onset: stationarity_onset(&phases),
            last: last_record(&run.trace, &phases),
            segments,
        },
    )
}

/// Sort key: the last run of digits in the file stem, then the name.
fn generation_key(path: &Path) -> (Option<u64>, String) {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let digits: String = stem
        .chars()
        .rev()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(char::is_ascii_digit)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    (digits.parse().ok(), stem)
}

fn generation_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(Error::io(dir))?
        .map(|entry| entry.map(|e| e.path()).map_err(Error::io(dir)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
        .collect();
    files.sort_by_key(|p| generation_key(p));
    if files.is_empty() {
        return Err(Error::Config(format!("no feature files in {}", dir.display())));
    }
    Ok(files)
}

fn analyze(
    features: &Path,
    labels: bool,
    dir: Option<&Path>,
    metrics: &MetricConfig,
    phase: &PhaseConfig,
    trend: &TrendConfig,
    out: &mut dyn Write,
) -> Result<()> {
    metrics.validate()?;
    phase.validate()?;
    trend.validate()?;
    let mut trace = MetricTrace::new();
    let mut first = None;
    let mut previous = None;
    for (n, path) in generation_files(features)?.iter().enumerate() {
        let mut batch = read_feature_batch(path)?;
        if !labels {
            batch = batch.without_labels();
        } else if batch.labels().is_none() {
            return Err(Error::MissingLabels).map_err(Error::at_generation(n));
        }
        let summary = estimate_gaussian(&batch).map_err(Error::at_generation(n))?;
        let first_ref = first.get_or_insert_with(|| summary.clone());
        let row = trace_row_from_summaries(
            n,
            &batch,
            &summary,
            DriftReferences {
                previous: previous.as_ref(),
                first: first_ref,
            },
            metrics,
        )
        .map_err(Error::at_generation(n))?;
        trace.push(row)?;
        log::info!("{}: generation {n}", path.display());
        previous = Some(summary);
    }
    let phases = trace_phases(&trace, phase)?;
    let segments = segments_or_empty(&trace, trend)?;
    match dir {
        Some(dir) => {
            write_trace(&trace, &phases, &segments, dir.join("trace.jsonl"))?;
            emit(
                out,
                &RunSummary {
                    generations: trace.len() - 1,
                    output: dir.display().to_string(),
                    stationarity_onset: stationarity_onset(&phases),
                    last: last_record(&trace, &phases),
                    segments,
                },
            )
        }
        None => {
            for r in trace.rows() {
                let rec = TraceRecord {
                    n: r.n,
                    fid_local: r.fid_local,
                    fid_cumulative: r.fid_cumulative,
                    sigma_intra: r.sigma_intra,
                    m_lb: r.m_lb,
                    pr_g: r.pr_g,
                    phase: phases.iter().find(|p| p.0 == r.n).map(|p| p.1),
                };
                emit(out, &rec)?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct LucierSummary {
    generations: usize,
    ir_peak_band: Vec<usize>,
    final_dominant_band: Vec<usize>,
    spectral_entropy: Vec<Vec<f64>>,
    pooled_pr_g: Vec<f64>,
}

fn lucier(
    inputs: &[PathBuf],
    irs: &[PathBuf],
    generations: usize,
    dir: Option<&Path>,
    config: &LucierConfig,
    out: &mut dyn Write,
) -> Result<()> {
    config.embedding.validate()?;
    let inputs = inputs
        .iter()
        .enumerate()
        .map(|(i, p)| load_wav(p).map(|s| (s, i as u32)))
        .collect::<Result<Vec<_>>>()?;
    let irs = irs.iter().map(load_wav).collect::<Result<Vec<_>>>()?;
    let run = run_lucier(&inputs, &irs, generations, config)?;

    if let Some(dir) = dir {
        let trend = TrendConfig::default();
        let phase = PhaseConfig::default();
        let named = run
            .per_ir
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("ir{i}"), t))
            .chain(std::iter::once(("pooled".to_string(), &run.pooled)));
        for (name, trace) in named {
            let phases = trace_phases(trace, &phase)?;
            let segments = segments_or_empty(trace, &trend)?;
            write_trace(trace, &phases, &segments, dir.join(name).join("trace.jsonl"))?;
        }
    }
    emit(
        out,
        &LucierSummary {
            generations,
            ir_peak_band: run.ir_peak_band.clone(),
            final_dominant_band: run.dominant_band.iter().map(|d| d[d.len() - 1]).collect(),
            spectral_entropy: run.spectral_entropy.clone(),
            pooled_pr_g: run.pooled.rows().iter().map(|r| r.pr_g).collect(),
        },
    )
}

#[derive(Serialize)]
struct ProbeRepeat {
    seed: u64,
    verdict: ResonanceVerdict,
    ergodicity: ErgodicityReport,
    contraction: Option<ContractionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contraction_error: Option<String>,
}

#[derive(Serialize)]
struct ProbeOutput {
    verdict: ResonanceVerdict,
    generations: usize,
    repeats: Vec<ProbeRepeat>,
}

fn probe(config_path: &Path, out: &mut dyn Write) -> Result<()> {
    let config = RunConfig::load(config_path)?;
    let probe_config = config.probe.config();
    let mut options = config.run_options()?;
    options.retention = Retention::SummariesOnly;

    let mut repeats = Vec::with_capacity(config.probe.repeats);
    for r in 0..config.probe.repeats as u64 {
        let seed = config.seed.wrapping_add(r);
        let op = config.build_operator_seeded(seed)?;
        let init_a = config.build_initial(&config.initial, op.dim(), seed, "initial/a")?;
        let init_b = config.probe_initial_b(op.dim(), seed)?;
        let ergodicity = ergodicity_probe(&op, &init_a, &init_b, config.generations, &probe_config)?;
        let contraction = run_chain(&op, &init_a, config.generations, &options)
            .and_then(|run| contraction_probe(&run.trace, &config.trend));
        let (contraction, contraction_error) = match contraction {
            Ok(c) => (Some(c), None),
            Err(e) => {
                log::warn!("contraction probe failed: {e}");
                (None, Some(e.to_string()))
            }
        };
        let verdict = match (&contraction, ergodicity.forgets_init) {
            (_, false) => ResonanceVerdict::NonErgodic,
            (Some(c), true) => resonance_verdict(&ergodicity, c),
            (None, true) => ResonanceVerdict::Indeterminate,
        };
        repeats.push(ProbeRepeat {
            seed,
            verdict,
            ergodicity,
            contraction,
            contraction_error,
        });
    }
    let verdicts: Vec<ResonanceVerdict> = repeats.iter().map(|r| r.verdict).collect();
    emit(
        out,
        &ProbeOutput {
            verdict: aggregate_verdicts(&verdicts),
            generations: config.generations,
            repeats,
        },
    )
}

fn classify(trace_path: &Path, config: &TrendConfig, dest: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let (trace, _) = read_trace(trace_path)?;
    let segments = segment_patterns(&trace, config)?;
    if let Some(dest) = dest {
        let text = serde_json::to_string_pretty(&segments).map_err(|e| Error::Io {
            path: dest.to_path_buf(),
            source: e.into(),
        })?;
        std::fs::write(dest, text + "\n").map_err(Error::io(dest))?;
    }
    emit(out, &segments)
}
