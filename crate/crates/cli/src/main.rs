use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use crnt_core::io::{self, Format};
use crnt_core::pipeline::{self, Options, Stage};
use crnt_core::report::{RunReport, Status};

const EXIT_PARSE: u8 = 2;
const EXIT_REJECTED: u8 = 3;
const EXIT_TIMEOUT: u8 = 4;

#[derive(Parser)]
#[command(name = "crnt", version, about = "Structural translation of chemical reaction networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Species, complexes, linkage classes and deficiency.
    Analyze(Single),
    /// Elementary flux modes and the unitary/coverage checks.
    Efm(Single),
    /// Search for a weakly reversible deficiency-zero translation.
    Translate(Single),
    /// Translation followed by a steady-state parametrization.
    Parametrize(Single),
    /// Run every model file in a directory.
    Batch(BatchArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Input format; inferred from the file extension when omitted.
    #[arg(long)]
    format: Option<Format>,
    /// Per-model wall-clock limit in seconds; 0 disables it.
    #[arg(long, default_value_t = 1200.0)]
    timeout_secs: f64,
    /// Seed for rate constants missing from the input.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// File of `label = value` rate constants.
    #[arg(long)]
    rates_file: Option<PathBuf>,
    /// Pin a phantom parameter, e.g. `--sigma 1=2.5` or `--sigma sigma2=0.3`.
    #[arg(long, value_parser = parse_sigma)]
    sigma: Vec<(usize, f64)>,
    /// Vertex (zero-based) to use as the distinguished vertex of its class.
    #[arg(long)]
    distinguished: Vec<usize>,
    /// Emit JSON.
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Emit plain text (the default).
    #[arg(long)]
    text: bool,
    /// Include per-stage wall-clock times in the report.
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct Single {
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BatchArgs {
    dir: PathBuf,
    /// Directory for per-model JSON reports and `summary.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also attempt a parametrization for translated models.
    #[arg(long)]
    parametrize: bool,
    #[command(flatten)]
    common: Common,
}

fn parse_sigma(s: &str) -> Result<(usize, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected k=v")?;
    let k = k.trim();
    let digits = k
        .strip_prefix("sigma")
        .or_else(|| k.strip_prefix('s'))
        .or_else(|| k.strip_prefix('σ'))
        .unwrap_or(k);
    let idx: usize = digits.parse().map_err(|_| format!("bad sigma index `{k}`"))?;
    if idx == 0 {
        return Err("sigma indices start at 1".into());
    }
    let v: f64 = v.trim().parse().map_err(|_| format!("bad sigma value `{v}`"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err("sigma values must be positive".into());
    }
    Ok((idx - 1, v))
}

fn options(common: &Common, stage: Stage) -> Result<Options, String> {
    let rates = match &common.rates_file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            io::parse_rates(&text).map_err(|e| e.to_string())?
        }
        None => Vec::new(),
    };
    if !(common.timeout_secs >= 0.0 && common.timeout_secs.is_finite()) {
        return Err("--timeout-secs must be a nonnegative number".into());
    }
    Ok(Options {
        timeout: (common.timeout_secs > 0.0).then(|| Duration::from_secs_f64(common.timeout_secs)),
        seed: common.seed,
        rates,
        sigma: common.sigma.clone(),
        distinguished: common.distinguished.clone(),
        stop_after: stage,
        record_timings: common.timings,
    })
}

fn exit_for(report: &RunReport) -> u8 {
    match report.status {
        Some(Status::Timeout) => EXIT_TIMEOUT,
        Some(Status::EfmRejected | Status::BlpInfeasible | Status::Inconsistent) => EXIT_REJECTED,
        _ => 0,
    }
}

fn run_single(single: &Single, stage: Stage) -> u8 {
    let opts = match options(&single.common, stage) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    let doc = match io::load(&single.input, single.common.format) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {}: {e}", single.input.display());
            return EXIT_PARSE;
        }
    };
    let report = match pipeline::run_pipeline(&doc, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    if single.common.json {
        emit(&format!("{}\n", report.to_json()));
    } else {
        emit(&report.to_text());
    }
    exit_for(&report)
}

/// Writes to stdout, treating a closed pipe as the reader being done.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn run_batch(args: &BatchArgs) -> u8 {
    let stage = if args.parametrize { Stage::Parametrize } else { Stage::Translate };
    let opts = match options(&args.common, stage) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    let summary = match pipeline::batch(&args.dir, args.common.format, &opts) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.dir.display());
            return EXIT_PARSE;
        }
    };
    let summary_json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    if let Some(out) = &args.out {
        let written = std::fs::create_dir_all(out)
            .map_err(|e| format!("cannot create {}: {e}", out.display()))
            .and_then(|_| {
                for (file, report) in &summary.reports {
                    write_file(&out.join(format!("{file}.json")), &report.to_json())?;
                }
                write_file(&out.join("summary.json"), &summary_json)
            });
        if let Err(e) = written {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    }
    if args.common.json {
        emit(&format!("{summary_json}\n"));
    } else {
        let mut text = String::new();
        for e in &summary.entries {
            match &e.reason {
                Some(r) => text.push_str(&format!("{}: {} ({r})\n", e.file, e.status)),
                None => text.push_str(&format!("{}: {}\n", e.file, e.status)),
            }
        }
        let counts: Vec<String> = summary.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
        text.push_str(&format!("total {}: {}\n", summary.total, counts.join(" ")));
        emit(&text);
    }
    0
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Analyze(s) => run_single(s, Stage::Structure),
        Command::Efm(s) => run_single(s, Stage::Efm),
        Command::Translate(s) => run_single(s, Stage::Translate),
        Command::Parametrize(s) => run_single(s, Stage::Parametrize),
        Command::Batch(b) => run_batch(b),
    };
    ExitCode::from(code)
}
