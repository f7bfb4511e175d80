use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lectureseg::cost::{bench, BenchReport, MatchProbabilities};
use lectureseg::ingest::{load_frame, load_manifest};
use lectureseg::synth::{seeded_corpus, CorpusParams};
use lectureseg::{build_index, classify_traced, write_index, BuildOptions, Config, Error};

/// Key-frame classification, topic clustering and cost instrumentation for
/// lecture videos.
#[derive(Parser, Debug)]
#[command(name = "lectureseg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the JSON topic index and thumbnails for a frame manifest.
    Index {
        #[arg(long)]
        manifest: PathBuf,
        /// `key = value` configuration file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        thumbs: PathBuf,
        /// Write per-frame classification traces and filter stages here.
        #[arg(long)]
        dump_trace: Option<PathBuf>,
        /// Video title; defaults to the manifest file stem.
        #[arg(long)]
        title: Option<String>,
    },
    /// Print the media type of every manifest frame as TSV.
    Classify {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Simulate clustering workloads and compare call counts with the closed form.
    Bench {
        #[arg(long, default_value_t = 200)]
        frames: usize,
        #[arg(long, default_value_t = 0.89)]
        p_exact: f64,
        #[arg(long, default_value_t = 0.036)]
        p_prev: f64,
        #[arg(long, default_value_t = 0.074)]
        p_new: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Topics per frame used by the closed form; defaults to `p_new`.
        #[arg(long)]
        topic_ratio: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Table row spacing in frames.
        #[arg(long, default_value_t = 25)]
        step: usize,
        /// Write the JSON report here. Without it the JSON goes to stdout
        /// and the table to stderr.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded synthetic lecture (PNG frames plus manifest.tsv).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        frames: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 15_000)]
        interval_ms: u64,
    },
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    match path {
        None => Ok(Config::default()),
        Some(p) => Config::load(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
    }
}

fn run_index(
    manifest: &Path,
    config: Option<&Path>,
    out: &Path,
    thumbs: &Path,
    trace: Option<&Path>,
    title: Option<String>,
) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let index_dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let opts = BuildOptions {
        thumbs_dir: Some(thumbs.to_path_buf()),
        index_dir: Some(index_dir.to_path_buf()),
        trace_dir: trace.map(Path::to_path_buf),
        title,
    };
    let idx = build_index(manifest, &cfg, &opts)?;
    write_index(&idx, out)?;
    let errors = idx.frames.iter().filter(|f| f.error.is_some()).count();
    eprintln!(
        "{} frames, {} topics, {} unreadable; runs: {}",
        idx.frames.len(),
        idx.topics.len(),
        errors,
        idx.runs
    );
    Ok(())
}

fn run_classify(manifest: &Path, config: Option<&Path>) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let entries = load_manifest(manifest)?;
    let stdout = std::io::stdout();
    let mut w = std::io::BufWriter::new(stdout.lock());
    writeln!(w, "frame_id\ttimestamp_ms\tmedia_type\trule")?;
    for e in &entries {
        match load_frame(e) {
            Ok(r) => {
                let c = classify_traced(&r, e.external_label.as_deref(), &cfg);
                writeln!(w, "{}\t{}\t{}\t{:?}", e.frame_id, e.timestamp_ms, c.media_type, c.rule)?;
            }
            Err(err) if err.is_input_error() => {
                let reason = err.to_string().replace(['\t', '\n'], " ");
                writeln!(w, "{}\t{}\terror\t{}", e.frame_id, e.timestamp_ms, reason)?;
            }
            Err(err) => return Err(err.for_frame(e.frame_id).into()),
        }
    }
    w.flush()?;
    Ok(())
}

fn table(report: &BenchReport) -> String {
    let mut s = format!(
        "# frames={} trials={} p=({}, {}, {}) topic_ratio={}\n",
        report.frames,
        report.trials,
        report.probabilities.p_exact,
        report.probabilities.p_previous,
        report.probabilities.p_new_topic,
        report.topic_ratio
    );
    s.push_str(&format!("{:>8} {:>12} {:>12}\n", "f", "observed", "closed_form"));
    for row in &report.rows {
        s.push_str(&format!("{:>8} {:>12.2} {:>12.2}\n", row.frames, row.observed, row.closed_form));
    }
    if let Some(fit) = &report.fit {
        s.push_str(&format!("# fit: M(f) = {:.4} f + {:.6} f^2 (rms {:.3})\n", fit.a, fit.b, fit.residual));
    }
    s.push_str(&format!("# mean topics {:.2}\n", report.mean_topics));
    s
}

#[allow(clippy::too_many_arguments)]
fn run_bench(
    frames: usize,
    p_exact: f64,
    p_prev: f64,
    p_new: f64,
    trials: usize,
    topic_ratio: Option<f64>,
    seed: u64,
    step: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let p = MatchProbabilities::new(p_exact, p_prev, p_new)?;
    let ratio = topic_ratio.unwrap_or(p_new);
    if !(ratio.is_finite() && ratio >= 0.0) {
        return Err(Failure::Input(format!("invalid topic ratio {ratio}")));
    }
    let report = bench(frames, &p, ratio, trials, seed, step)?;
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Internal(e.to_string()))?;
    json.push('\n');
    match out {
        Some(path) => {
            std::fs::write(path, json).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            print!("{}", table(&report));
        }
        None => {
            eprint!("{}", table(&report));
            print!("{json}");
        }
    }
    Ok(())
}

fn run_synth(out: &Path, frames: usize, seed: u64, interval_ms: u64) -> Result<(), Failure> {
    let params = CorpusParams {
        frames,
        ..CorpusParams::default()
    };
    let corpus = seeded_corpus(&params, seed);
    let manifest = corpus.write_manifest(out, interval_ms)?;
    eprintln!("{} frames, {} topics -> {}", corpus.frames.len(), corpus.topics, manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Index {
            manifest,
            config,
            out,
            thumbs,
            dump_trace,
            title,
        } => run_index(&manifest, config.as_deref(), &out, &thumbs, dump_trace.as_deref(), title),
        Command::Classify { manifest, config } => run_classify(&manifest, config.as_deref()),
        Command::Bench {
            frames,
            p_exact,
            p_prev,
            p_new,
            trials,
            topic_ratio,
            seed,
            step,
            out,
        } => run_bench(frames, p_exact, p_prev, p_new, trials, topic_ratio, seed, step, out.as_deref()),
        Command::Synth {
            out,
            frames,
            seed,
            interval_ms,
        } => run_synth(&out, frames, seed, interval_ms),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
