use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use fairstream_core::classifiers::{ClassifierConfig, ClassifierKind};
use fairstream_core::dataset::{write_csv, DatasetDescriptor, Format};
use fairstream_core::engine::{run_chunks, ExperimentConfig, RunOutput, RunSummary, Source};
use fairstream_core::fairness::{CountSource, Technique};
use fairstream_core::generator::{generate_stream, GeneratorConfig, GeneratorMetadata, ScheduleOptions};
use fairstream_core::report::{
    build_report, read_json, read_summary, write_json, write_report, write_summary, write_trace,
};
use fairstream_core::strategy::StrategyKind;
use fairstream_core::stream::into_chunks;

#[derive(Parser)]
#[command(
    name = "fairstream",
    version,
    about = "Discrimination-aware classification on data streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic stream as CSV plus a metadata JSON.
    Generate(GenerateArgs),
    /// Run one experiment and write its trace and summary.
    Run(RunArgs),
    /// Combine run summaries into one table sorted by distance to (0, 1).
    Report(ReportArgs),
    /// Run every classifier x strategy x correction combination.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(long, env = "FAIRSTREAM_OUT", default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 200)]
    chunks: usize,
    /// Instances per Gaussian per chunk; chunks hold 4n instances.
    #[arg(long, default_value_t = 250)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    drifts: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    dimension: usize,
    /// Upper end (exclusive) of the SPP schedule.
    #[arg(long)]
    max_spp: Option<f64>,
    /// Stream CSV path; defaults to `<out-dir>/synthetic_seed<seed>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DatasetKind {
    Census,
    Csv,
    Arff,
    Synthetic,
}

#[derive(Args)]
struct SourceArgs {
    /// Census directory, CSV or ARFF file, or a generated stream.
    #[arg(long)]
    data: Option<PathBuf>,
    /// How to read `--data`; inferred when omitted. Without `--data`,
    /// `synthetic` draws a fresh stream from the seed.
    #[arg(long, value_enum)]
    dataset: Option<DatasetKind>,
    /// Sensitive attribute column (CSV/ARFF).
    #[arg(long)]
    sensitive: Option<String>,
    #[arg(long, default_value = "Female")]
    deprived: String,
    /// Class column (CSV/ARFF).
    #[arg(long, default_value = "income")]
    class: String,
    #[arg(long, default_value = ">50K")]
    granted: String,
    /// Synthetic stream size: instances per Gaussian per chunk.
    #[arg(long)]
    n: Option<usize>,
    /// Synthetic stream length in chunks.
    #[arg(long)]
    chunks: Option<usize>,
    /// Number of drifts in a synthetic stream.
    #[arg(long)]
    drifts: Option<usize>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    epsilon: Option<f64>,
    /// Chunk size; 4n for synthetic streams, 1000 otherwise.
    #[arg(long)]
    chunk: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Counts used for massaging: true_labels or predictions.
    #[arg(long)]
    count_source: Option<CountSource>,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    classifier: Option<ClassifierKind>,
    /// m1, m2, m3, m4, b_nosa or b_reset.
    #[arg(long)]
    strategy: Option<StrategyKind>,
    /// massaging or reweighting.
    #[arg(long)]
    correction: Option<Technique>,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = ClassifierKind::ALL)]
    classifiers: Vec<ClassifierKind>,
    #[arg(long, value_delimiter = ',', default_values_t = StrategyKind::ALL)]
    strategies: Vec<StrategyKind>,
    #[arg(long, value_delimiter = ',', default_values_t = [Technique::Massaging, Technique::Reweighting])]
    corrections: Vec<Technique>,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Summary JSON files, or directories searched for `*.summary.json`.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Report CSV path; defaults to `<out-dir>/report.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Run(args) => run(args),
        Command::Report(args) => report(args),
        Command::Sweep(args) => sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let mut options = ScheduleOptions {
        n: args.n,
        chunks: args.chunks,
        drifts: args.drifts,
        dimension: args.dimension,
        ..ScheduleOptions::default()
    };
    if let Some(max) = args.max_spp {
        options.max_spp = max;
    }
    let cfg = GeneratorConfig::randomized(&options, args.seed)?;
    let (schema, chunks, meta) = generate_stream(cfg)?;
    let out = args
        .out
        .unwrap_or_else(|| args.output.out_dir.join(format!("synthetic_seed{}.csv", args.seed)));
    write_csv(&out, &schema, chunks.iter().flat_map(|c| &c.instances))?;
    let meta_path = out.with_extension("meta.json");
    write_json(&meta_path, &meta)?;
    println!(
        "wrote {} instances in {} chunks to {} ({} drifts, metadata {})",
        meta.instances,
        chunks.len(),
        out.display(),
        meta.drifts.len(),
        meta_path.display()
    );
    Ok(())
}

/// First line of a text file, for sniffing headers.
fn first_line(path: &Path) -> Result<String> {
    let file = fs::File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut line = String::new();
    BufReader::new(file)
        .read_line(&mut line)
        .with_context(|| format!("cannot read {}", path.display()))?;
    Ok(line.trim_end().to_string())
}

/// `None` when no source flag was given.
fn resolve_source(args: &SourceArgs) -> Result<Option<Source>> {
    let kind = match (args.dataset, &args.data) {
        (Some(kind), _) => kind,
        (None, Some(path)) if path.is_dir() => DatasetKind::Census,
        (None, Some(path)) if Format::from_path(path) == Format::Arff => DatasetKind::Arff,
        (None, Some(_)) => DatasetKind::Csv,
        (None, None) if args.n.is_some() || args.chunks.is_some() || args.drifts.is_some() => DatasetKind::Synthetic,
        (None, None) => return Ok(None),
    };
    let source = match (kind, &args.data) {
        (DatasetKind::Census, Some(path)) if path.is_dir() => Source::Census { dir: path.clone() },
        (DatasetKind::Census, Some(path)) => Source::Dataset(DatasetDescriptor {
            paths: vec![path.clone()],
            ..DatasetDescriptor::census(".")
        }),
        (DatasetKind::Census, None) => bail!("--dataset census needs --data <dir>"),
        (DatasetKind::Synthetic, Some(path)) => Source::Dataset(DatasetDescriptor::synthetic(path)),
        (DatasetKind::Synthetic, None) => {
            let mut options = ScheduleOptions::default();
            options.n = args.n.unwrap_or(options.n);
            options.chunks = args.chunks.unwrap_or(options.chunks);
            options.drifts = args.drifts.unwrap_or(options.drifts);
            Source::Synthetic(options)
        }
        (DatasetKind::Csv | DatasetKind::Arff, None) => bail!("--dataset csv/arff needs --data <file>"),
        (DatasetKind::Csv | DatasetKind::Arff, Some(path)) => {
            let format = if kind == DatasetKind::Arff {
                Format::Arff
            } else {
                Format::Csv
            };
            Source::Dataset(describe_file(path, format, args)?)
        }
    };
    Ok(Some(source))
}

/// Column mapping for a single file: explicit flags win, then the generator
/// layout, then the headerless census layout.
fn describe_file(path: &Path, format: Format, args: &SourceArgs) -> Result<DatasetDescriptor> {
    if let Some(sensitive) = &args.sensitive {
        let mut d = DatasetDescriptor::csv(path, sensitive, &args.deprived, &args.class, &args.granted);
        d.format = format;
        return Ok(d);
    }
    if format == Format::Csv {
        let header = first_line(path)?;
        let fields: Vec<&str> = header.split(',').map(str::trim).collect();
        if fields.contains(&"sa") && fields.contains(&"class") {
            return Ok(DatasetDescriptor::synthetic(path));
        }
        if fields.len() == 15 && !fields.contains(&args.class.as_str()) {
            return Ok(DatasetDescriptor {
                paths: vec![path.to_path_buf()],
                ..DatasetDescriptor::census(".")
            });
        }
    }
    let mut d = DatasetDescriptor::csv(path, "sex", &args.deprived, &args.class, &args.granted);
    d.format = format;
    Ok(d)
}

/// Natural chunk size of a synthetic source: 4n, or the size recorded in the
/// metadata next to a generated file.
fn native_chunk(source: &Source) -> Option<usize> {
    match source {
        Source::Synthetic(o) => Some(4 * o.n),
        Source::Generator(g) => Some(g.chunk_size()),
        Source::Dataset(d) => {
            let meta = d.paths.first()?.with_extension("meta.json");
            let meta: GeneratorMetadata = read_json(&meta).ok()?;
            Some(meta.chunk_size)
        }
        Source::Census { .. } => None,
    }
}

/// Applies the shared experiment flags on top of `cfg`.
fn apply_experiment(cfg: &mut ExperimentConfig, args: &ExperimentArgs, chunk_from_file: bool) {
    if let Some(e) = args.epsilon {
        cfg.epsilon = e;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(c) = args.count_source {
        cfg.count_source = c;
    }
    match (args.chunk, native_chunk(&cfg.source)) {
        (Some(c), _) => cfg.chunk = c,
        (None, Some(c)) if !chunk_from_file => cfg.chunk = c,
        _ => {}
    }
}

fn run(args: RunArgs) -> Result<()> {
    let source = resolve_source(&args.source)?;
    let (mut cfg, from_file) = match &args.config {
        Some(path) => {
            let cfg: ExperimentConfig = read_json(path)?;
            (cfg, true)
        }
        None => (
            ExperimentConfig::new(
                Source::Synthetic(ScheduleOptions::default()),
                ClassifierKind::Nb,
                StrategyKind::M1,
                Technique::Massaging,
            ),
            false,
        ),
    };
    let new_source = source.is_some();
    if let Some(s) = source {
        cfg.source = s;
    }
    if let Some(c) = args.classifier {
        cfg.classifier = ClassifierConfig::new(c);
    }
    if let Some(s) = args.strategy {
        cfg.strategy = s;
    }
    if let Some(t) = args.correction {
        cfg.correction = t;
    }
    apply_experiment(&mut cfg, &args.experiment, from_file && !new_source);
    cfg.validate()?;

    log::info!("loading {}", cfg.source.name());
    let (schema, instances) = cfg.source.load(cfg.seed)?;
    let chunks = into_chunks(instances, cfg.chunk)?;
    let output = run_chunks(&cfg, &schema, &chunks)?;
    let summary = save_run(&args.output.out_dir, &cfg, output)?;
    print_summary(&summary);
    Ok(())
}

/// Writes `<label>.trace.csv`, `<label>.summary.json` and `<label>.config.json`.
fn save_run(dir: &Path, cfg: &ExperimentConfig, output: RunOutput) -> Result<RunSummary> {
    let label = cfg.label();
    let trace_path = dir.join(format!("{label}.trace.csv"));
    write_trace(&trace_path, &output.trace)?;
    let mut summary = output.summary;
    summary.trace = Some(trace_path);
    write_summary(&dir.join(format!("{label}.summary.json")), &summary)?;
    write_json(&dir.join(format!("{label}.config.json")), cfg)?;
    Ok(summary)
}

fn print_summary(s: &RunSummary) {
    println!(
        "{}: accuracy {:.4}, discrimination {:.4} over {} chunks ({} resets, {} corrections)",
        s.label, s.mean_accuracy, s.mean_discrimination, s.evaluated_chunks, s.resets, s.corrections
    );
}

fn sweep(args: SweepArgs) -> Result<()> {
    let source = resolve_source(&args.source)?.unwrap_or(Source::Synthetic(ScheduleOptions::default()));
    let mut configs = Vec::new();
    let mut labels = BTreeSet::new();
    for &classifier in &args.classifiers {
        for &strategy in &args.strategies {
            for &correction in &args.corrections {
                let mut cfg = ExperimentConfig::new(source.clone(), classifier, strategy, correction);
                apply_experiment(&mut cfg, &args.experiment, false);
                cfg.validate()?;
                // Baselines ignore the correction, so they run once.
                if labels.insert(cfg.label()) {
                    configs.push(cfg);
                }
            }
        }
    }
    let Some(first) = configs.first() else {
        bail!("nothing to sweep");
    };
    let (schema, instances) = source.load(first.seed)?;
    let chunks = into_chunks(instances, first.chunk)?;
    log::info!("sweeping {} runs over {} chunks", configs.len(), chunks.len());
    let dir = &args.output.out_dir;
    let summaries = configs
        .par_iter()
        .map(|cfg| {
            let out = run_chunks(cfg, &schema, &chunks).with_context(|| format!("run {}", cfg.label()))?;
            save_run(dir, cfg, out)
        })
        .collect::<Result<Vec<_>>>()?;
    for s in &summaries {
        print_summary(s);
    }
    let report_path = dir.join("report.csv");
    write_report(&report_path, &build_report(&summaries))?;
    println!("wrote {}", report_path.display());
    Ok(())
}

fn collect_summaries(inputs: &[PathBuf]) -> Result<Vec<RunSummary>> {
    let mut paths = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("cannot list {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.to_string_lossy().ends_with(".summary.json"))
                .collect();
            found.sort();
            paths.extend(found);
        } else {
            paths.push(input.clone());
        }
    }
    if paths.is_empty() {
        bail!("no summaries found");
    }
    paths.iter().map(|p| Ok(read_summary(p)?)).collect()
}

fn report(args: ReportArgs) -> Result<()> {
    let summaries = collect_summaries(&args.inputs)?;
    let rows = build_report(&summaries);
    let out = args.out.unwrap_or_else(|| args.output.out_dir.join("report.csv"));
    write_report(&out, &rows)?;
    println!(
        "{:<40} {:>9} {:>14} {:>9}",
        "run", "accuracy", "discrimination", "distance"
    );
    for r in &rows {
        println!(
            "{:<40} {:>9.4} {:>14.4} {:>9.4}",
            r.label, r.accuracy, r.discrimination, r.distance
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
