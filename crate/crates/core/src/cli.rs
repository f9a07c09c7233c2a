//! Command-line front end behind the `ouda` binary.
//!
//! Exit codes: 0 success, 1 usage, 2 data or numerical failure,
//! 3 configuration error, 4 oracle failure.

use std::f64::consts::FRAC_PI_3;
use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classify::{ClassifierKind, ClassifierParams};
use crate::datastream::{
    gen_rotating_drift, gen_waveform, load_csv, CsvSchema, DatasetBundle, StreamSpec, WaveformVariant,
};
use crate::error::Error;
use crate::pipeline::{run_stream_detailed, PipelineConfig, Variant};
use crate::report::{ConfigEcho, RunReport, VariantReport};
use crate::verify::{run_verification, VerifyOptions};

/// Source rows drawn by the generators unless overridden.
pub const DEFAULT_SOURCE_SIZE: usize = 300;

#[derive(Debug, Parser)]
#[command(
    name = "ouda",
    version,
    about = "Online unsupervised domain adaptation on data streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one variant over a stream and write its accuracy trace.
    Run(RunArgs),
    /// Run all five variants for each requested classifier.
    Ablate(AblateArgs),
    /// Check the closed forms against their numerical oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Generator {
    Waveform21,
    Waveform40,
    Rotating,
}

impl Generator {
    fn name(self) -> &'static str {
        match self {
            Generator::Waveform21 => "waveform21",
            Generator::Waveform40 => "waveform40",
            Generator::Rotating => "rotating",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassifierArg {
    Knn,
    Svm,
}

impl From<ClassifierArg> for ClassifierKind {
    fn from(c: ClassifierArg) -> Self {
        match c {
            ClassifierArg::Knn => ClassifierKind::Knn,
            ClassifierArg::Svm => ClassifierKind::LinearSvm,
        }
    }
}

#[derive(Debug, Args)]
struct DataArgs {
    /// CSV file: numeric features, integer label in the last column.
    #[arg(long, value_name = "PATH", conflicts_with = "gen")]
    csv: Option<PathBuf>,
    /// Synthetic generator (default: rotating).
    #[arg(long, value_enum)]
    gen: Option<Generator>,
    /// Subspace dimension.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Mini-batch size N_T.
    #[arg(long, default_value_t = 50)]
    batch: usize,
    /// Number of mini-batches (generators only).
    #[arg(long, default_value_t = 60)]
    batches: usize,
    /// Source rows (generators only).
    #[arg(long, default_value_t = DEFAULT_SOURCE_SIZE)]
    source_size: usize,
    /// Leading fraction of CSV rows used as the source set.
    #[arg(long, default_value_t = 0.2)]
    source_frac: f64,
    /// Total rotation in radians over the stream (rotating generator).
    #[arg(long, default_value_t = FRAC_PI_3)]
    rotation: f64,
    /// Feature dimension: generated for rotating, checked for CSV.
    #[arg(long)]
    dim: Option<usize>,
    /// Number of classes (rotating generator).
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Skip one header row in the CSV.
    #[arg(long)]
    header: bool,
    /// Neighbours for the k-NN classifier.
    #[arg(long, default_value_t = 1)]
    neighbors: usize,
    /// Regularization for the linear SVM.
    #[arg(long, default_value_t = 1e-4)]
    lambda: f64,
    /// Training epochs for the linear SVM.
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON trace here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Record principal-angle diagnostics per batch.
    #[arg(long)]
    diagnostics: bool,
    /// Record wall-clock step timings (makes traces non-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// pca, gfk, gfk_fb, gfk_gmean or gfk_gmean_fb.
    #[arg(long, value_parser = parse_variant)]
    variant: Variant,
    #[arg(long, value_enum, default_value = "knn")]
    classifier: ClassifierArg,
}

#[derive(Debug, Args)]
struct AblateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated classifiers.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "knn")]
    classifier: Vec<ClassifierArg>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random instances per property.
    #[arg(long)]
    instances: Option<usize>,
    /// Flip the GFK cross-term sign to test the harness itself.
    #[arg(long)]
    inject_fault: bool,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Lib(Error),
    Oracle(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => {
            let classifiers = [args.classifier];
            cmd_stream("run", &args.data, &[args.variant], &classifiers)
        }
        Command::Ablate(args) => cmd_stream("ablate", &args.data, &Variant::ALL, &args.classifier),
        Command::Verify(args) => cmd_verify(&args),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Oracle(msg)) => {
            eprintln!("verification failed: {msg}");
            4
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                3
            } else {
                2
            }
        }
    }
}

fn load(data: &DataArgs) -> Result<(DatasetBundle, ConfigEcho), Error> {
    let spec = StreamSpec {
        batch_size: data.batch,
        batch_count: data.batches,
        source_size: data.source_size,
        seed: data.seed,
    };
    let (bundle, name) = match (&data.csv, data.gen.unwrap_or(Generator::Rotating)) {
        (Some(path), _) => {
            let schema = CsvSchema {
                dim: data.dim,
                source_fraction: data.source_frac,
                batch_size: data.batch,
                has_header: data.header,
            };
            (load_csv(path, &schema)?, "csv")
        }
        (None, g @ (Generator::Waveform21 | Generator::Waveform40)) => {
            if data.dim.is_some() {
                return Err(Error::InvalidConfig(
                    "--dim applies to the rotating generator and CSV input".into(),
                ));
            }
            let variant = if g == Generator::Waveform21 {
                WaveformVariant::W21
            } else {
                WaveformVariant::W40
            };
            (gen_waveform(&spec, variant)?, g.name())
        }
        (None, Generator::Rotating) => {
            let d = data.dim.unwrap_or(10);
            (gen_rotating_drift(&spec, data.classes, d, data.rotation)?, "rotating")
        }
    };
    let echo = ConfigEcho {
        command: String::new(),
        data: name.to_string(),
        csv: data.csv.as_ref().map(|p| p.display().to_string()),
        dim: bundle.dim(),
        classes: bundle.source.classes(),
        k: data.k,
        batch: data.batch,
        batches: bundle.stream.len(),
        source_rows: bundle.source.len(),
        source_frac: data.csv.is_some().then_some(data.source_frac),
        rotation: (name == "rotating").then_some(data.rotation),
        neighbors: data.neighbors,
        lambda: data.lambda,
        epochs: data.epochs,
        seed: data.seed,
        diagnostics: data.diagnostics,
        timings: data.timings,
    };
    Ok((bundle, echo))
}

fn cmd_stream(
    command: &str,
    data: &DataArgs,
    variants: &[Variant],
    classifiers: &[ClassifierArg],
) -> Result<(), Failure> {
    // catch k against d before paying for data generation where possible
    if let (None, Some(d)) = (&data.csv, data.dim) {
        PipelineConfig::for_variant(Variant::Pca, data.k, ClassifierKind::Knn).validate(d)?;
    }
    let (bundle, mut echo) = load(data)?;
    echo.command = command.to_string();
    let params = ClassifierParams {
        neighbors: data.neighbors,
        lambda: data.lambda,
        epochs: data.epochs,
        seed: data.seed,
    };

    let mut reports = Vec::new();
    for &classifier in classifiers {
        let kind = ClassifierKind::from(classifier);
        for &variant in variants {
            let config = PipelineConfig::for_variant(variant, data.k, kind)
                .with_params(params)
                .with_diagnostics(data.diagnostics);
            let run = run_stream_detailed(&bundle.source, &bundle.stream, &config)?;
            reports.push(VariantReport::new(variant, kind.name(), &run, data.timings));
        }
    }
    let report = RunReport {
        config: echo,
        variants: reports,
    };
    let json = report.to_json();

    match &data.out {
        Some(path) => {
            fs::write(path, &json).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            for v in &report.variants {
                let acc = v.final_accuracy.map_or("n/a".to_string(), |a| format!("{:.4}", a));
                let skipped = v.per_batch.iter().filter(|a| a.is_none()).count();
                println!("{:<14} {:<4} final {}  skipped {}", v.name, v.classifier, acc, skipped);
            }
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let report = run_verification(&VerifyOptions {
        seed: args.seed,
        instances: args.instances,
        inject_fault: args.inject_fault,
    })?;
    println!("{report}");
    if report.all_passed() {
        return Ok(());
    }
    let names: Vec<String> = report
        .failures()
        .map(|c| {
            format!(
                "{} (worst {:.3e} at instance seed {})",
                c.property, c.worst, c.worst_seed
            )
        })
        .collect();
    Err(Failure::Oracle(names.join(", ")))
}
