//! `evaf`: simulate focal sweeps, locate focus, export curves and frames, and
//! benchmark methods. Machine-readable results go to standard output,
//! diagnostics to standard error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use evaf_core::eval::{default_methods, run_benchmark, MethodSpec};
use evaf_core::io::{read_event_file, write_pgm16, Metadata, EVENTS_HEADER};
use evaf_core::measure::{focus_curve, frame_focus, reconstruct_frame, FrameMeasure, Variant, DEFAULT_CONTRAST};
use evaf_core::search::{egs, egs_trace_report, naive_search, EgsConfig, SearchResult, DEFAULT_MU, GOLDEN_PHI};
use evaf_core::sim::{default_suite, make_dataset, DatasetSpec, MANIFEST_FORMAT};
use evaf_core::{EvafError, EventStream, PrefixIndex};

fn long_version() -> &'static str {
    // clap wants a 'static string
    Box::leak(
        format!(
            "{} (event format `{}`, dataset format `{MANIFEST_FORMAT}`)",
            evaf_core::VERSION,
            EVENTS_HEADER.trim_start_matches("# ")
        )
        .into_boxed_str(),
    )
}

#[derive(Debug, Parser)]
#[command(name = "evaf", version = long_version(), about = "Event-camera autofocus toolkit")]
struct Cli {
    /// More diagnostics on standard error (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate focal sweeps into an event dataset.
    Simulate(SimulateArgs),
    /// Locate the best-focused time of one event file.
    Focus(FocusArgs),
    /// Write the fixed-window focus curve of one event file as CSV.
    Curve(CurveArgs),
    /// Reconstruct a log-intensity frame by direct integration.
    Reconstruct(ReconstructArgs),
    /// Run methods over a dataset and write MAE/RMSE reports.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct Input {
    /// Event file in the `evaf-events v1` CSV format.
    #[arg(long)]
    input: PathBuf,
    /// Metadata sidecar; defaults to the input path with a `.json` extension.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SceneSource {
    /// Scene JSON: one sequence or `{"sequences": [...]}`.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Built-in benchmark suite: every condition class with this many seeds.
    #[arg(long, value_name = "SEEDS")]
    suite: Option<u64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: SceneSource,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Override the seed of every sequence in `--spec`.
    #[arg(long, conflicts_with = "suite")]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Egs,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    SumSquared,
    TotalCount,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::SumSquared => Variant::SumSquared,
            VariantArg::TotalCount => Variant::TotalCount,
        }
    }
}

#[derive(Debug, Args)]
#[group(multiple = false)]
struct WindowArgs {
    /// Accumulation interval in seconds.
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,
    /// Accumulation interval as a fraction of the sweep duration.
    #[arg(long, value_name = "FRACTION")]
    dt_fraction: Option<f64>,
}

impl WindowArgs {
    fn given(&self) -> bool {
        self.dt.is_some() || self.dt_fraction.is_some()
    }

    fn to_us(&self, stream: &EventStream) -> anyhow::Result<f64> {
        match (self.dt, self.dt_fraction) {
            (Some(s), _) => Ok(seconds_to_us(s, "--dt")? as f64),
            (_, Some(f)) => {
                if !(f > 0.0 && f <= 1.0) {
                    bail!("--dt-fraction must lie in (0, 1], got {f}");
                }
                Ok(f * stream.sweep().duration_us() as f64)
            }
            _ => bail!("an accumulation interval is required (--dt or --dt-fraction)"),
        }
    }
}

#[derive(Debug, Args)]
struct FocusArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value_t = Method::Egs)]
    method: Method,
    /// Golden-search stopping threshold relative to the sweep duration.
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
    /// Golden-search shrink factor.
    #[arg(long, default_value_t = GOLDEN_PHI)]
    phi: f64,
    #[command(flatten)]
    window: WindowArgs,
    /// Spacing of naive-search centers in seconds; defaults to the window length.
    #[arg(long, value_name = "SECONDS")]
    stride: Option<f64>,
    #[arg(long, value_enum, default_value_t = VariantArg::SumSquared)]
    variant: VariantArg,
    /// Write the per-iteration golden-search trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    window: WindowArgs,
    /// Spacing of window centers in seconds; defaults to the window length.
    #[arg(long, value_name = "SECONDS")]
    stride: Option<f64>,
    #[arg(long, value_enum, default_value_t = VariantArg::SumSquared)]
    variant: VariantArg,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[command(flatten)]
    input: Input,
    /// Frame time in seconds, on the event file's clock.
    #[arg(long, value_name = "SECONDS")]
    t: f64,
    /// Exponential leak rate per second; 0 integrates plainly.
    #[arg(long, default_value_t = 0.0)]
    decay: f64,
    /// Contrast threshold used to scale events.
    #[arg(long, default_value_t = DEFAULT_CONTRAST)]
    contrast: f64,
    /// Output 16-bit PGM.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Dataset directory written by `evaf simulate`.
    #[arg(long)]
    dataset: PathBuf,
    /// JSON list of methods; the standard set when omitted.
    #[arg(long)]
    methods: Option<PathBuf>,
    /// Report path; `<stem>.csv`, `<stem>.aggregate.csv` and `<stem>.json` are written.
    #[arg(long)]
    out: PathBuf,
}

/// Seconds to whole microseconds, rounding half up.
fn seconds_to_us(s: f64, flag: &str) -> anyhow::Result<u64> {
    if !s.is_finite() || s < 0.0 {
        bail!("{flag} must be a non-negative number of seconds, got {s}");
    }
    Ok((s * 1e6 + 0.5).floor() as u64)
}

fn load(input: &Input) -> anyhow::Result<(EventStream, Metadata)> {
    Ok(read_event_file(&input.input, input.sidecar.as_deref())?)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn print_json(value: &serde_json::Value) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let mut specs = match (&args.source.spec, args.source.suite) {
        (Some(path), _) => DatasetSpec::read(path)?,
        (None, Some(seeds)) => default_suite(seeds),
        (None, None) => unreachable!("clap requires a scene source"),
    };
    if let Some(seed) = args.seed {
        specs.iter_mut().for_each(|s| s.seed = seed);
    }
    let manifest = make_dataset(&specs, &args.out)?;
    print_json(&serde_json::json!({
        "out": args.out,
        "sequences": manifest.sequences.len(),
    }))
}

fn focus(args: &FocusArgs) -> anyhow::Result<()> {
    match args.method {
        Method::Egs if args.window.given() || args.stride.is_some() => {
            bail!("--dt, --dt-fraction and --stride apply to --method naive only")
        }
        Method::Naive if args.trace.is_some() => bail!("--trace applies to --method egs only"),
        Method::Naive if !args.window.given() => bail!("--method naive needs --dt or --dt-fraction"),
        _ => {}
    }
    let cfg = EgsConfig::new(args.mu, args.phi)?;
    let (stream, meta) = load(&args.input)?;
    if stream.is_empty() {
        return Err(EvafError::EmptyStream.into());
    }
    let index = PrefixIndex::build(&stream);
    let result: SearchResult = match args.method {
        Method::Egs => egs(&index, &cfg, args.variant.into())?,
        Method::Naive => {
            let dt = args.window.to_us(&stream)?;
            let stride = match args.stride {
                Some(s) => seconds_to_us(s, "--stride")? as f64,
                None => dt,
            };
            naive_search(&index, dt, stride, args.variant.into())?
        }
    };
    if let Some(path) = &args.trace {
        let report = egs_trace_report(&index, &result, meta.ground_truth_position)?;
        let mut out = create(path)?;
        out.write_all(report.as_bytes())?;
        out.flush()?;
    }
    log::info!("{} events, {} iterations", stream.len(), result.iterations);
    print_json(&serde_json::json!({
        "t_star_us": result.t_star,
        "p_star": result.p_star,
        "method": result.method.as_str(),
        "iterations": result.iterations,
    }))
}

fn curve(args: &CurveArgs) -> anyhow::Result<()> {
    if !args.window.given() {
        bail!("curve needs --dt or --dt-fraction");
    }
    let (stream, _) = load(&args.input)?;
    let dt = args.window.to_us(&stream)?;
    let stride = match args.stride {
        Some(s) => seconds_to_us(s, "--stride")? as f64,
        None => dt,
    };
    let curve = focus_curve(&PrefixIndex::build(&stream), dt, stride, args.variant.into())?;
    match &args.out {
        Some(path) => {
            let mut out = create(path)?;
            curve.write_csv(&mut out)?;
            out.flush()?;
        }
        None => curve.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn reconstruct(args: &ReconstructArgs) -> anyhow::Result<()> {
    let t = seconds_to_us(args.t, "--t")?;
    let (stream, _) = load(&args.input)?;
    let frame = reconstruct_frame(&stream, t, args.decay, args.contrast)?;
    let grid = &frame.log_intensity;
    let mut out = create(&args.out)?;
    write_pgm16(&mut out, grid.width(), grid.height(), grid.data())?;
    out.flush()?;
    let mut scores = serde_json::Map::new();
    for m in FrameMeasure::ALL {
        // frames too small for a kernel simply omit that score
        if let Ok(s) = frame_focus(grid, m) {
            scores.insert(m.as_str().to_string(), s.into());
        }
    }
    print_json(&serde_json::json!({
        "t_us": frame.t,
        "mean_abs": frame.mean_abs(),
        "focus": scores,
        "out": args.out,
    }))
}

fn bench(args: &BenchArgs) -> anyhow::Result<()> {
    let methods: Vec<MethodSpec> = match &args.methods {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("invalid methods file {}", path.display()))?
        }
        None => default_methods(),
    };
    if methods.is_empty() {
        bail!("no methods to run");
    }
    let report = run_benchmark(&args.dataset, &methods)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let written = report.write(&args.out)?;
    print_json(&serde_json::json!({
        "rows": report.rows.len(),
        "skipped": report.warnings.len(),
        "files": written,
    }))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<EvafError>() {
        Some(EvafError::EmptyStream) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version are not errors; usage errors count as malformed input
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    let outcome = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Focus(a) => focus(a),
        Command::Curve(a) => curve(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("evaf: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
