//! `fcs` command line: validate panel data, run the per-country modelling
//! pipeline, or generate synthetic fixtures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fcs_core::config::{ConfigError, RunConfig};
use fcs_core::ingest::{validate, TargetRange};
use fcs_core::models::ModelKind;
use fcs_core::pipeline::{self, PipelineError};
use fcs_core::report::fmt_f64;
use fcs_core::synth::{write_synthetic, SynthError, SynthSpec, TargetShape};

const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fcs",
    about = "Per-country food consumption score forecasting pipeline",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Panel dataset CSV (country,admin1,date,target,<feature...>)
    #[arg(long)]
    data: PathBuf,
    /// Feature catalog TOML
    #[arg(long)]
    catalog: PathBuf,
    /// Run configuration TOML; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides config)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 = auto (overrides config)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the dataset and print a data-quality report
    Validate(InputArgs),
    /// Run the full pipeline and write all report artifacts
    Run {
        #[command(flatten)]
        input: InputArgs,
        /// Output directory (overrides config)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also dump every fitted model as JSON under <out>/models/
        #[arg(long)]
        dump_models: bool,
    },
    /// Generate a synthetic dataset, catalog and truth file
    Synth {
        /// Output directory for dataset.csv, catalog.toml, truth.json
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        economic: usize,
        #[arg(long, default_value_t = 4)]
        natural: usize,
        #[arg(long, default_value_t = 4)]
        conflict: usize,
        #[arg(long, default_value_t = 600)]
        rows: usize,
        /// Gaussian noise standard deviation on the target
        #[arg(long, default_value_t = 3.0)]
        noise: f64,
        /// Target shape: step or linear
        #[arg(long, default_value = "step")]
        shape: String,
        #[arg(long, default_value_t = 4)]
        features_per_category: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(u8::try_from(error.exit_code()).unwrap_or(EXIT_INTERNAL))
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Validate(input) => run_validate(input),
        Command::Run {
            input,
            out,
            dump_models,
        } => run_pipeline(input, out, dump_models),
        Command::Synth {
            out,
            economic,
            natural,
            conflict,
            rows,
            noise,
            shape,
            features_per_category,
            seed,
        } => {
            let spec = SynthSpec {
                economic_countries: economic,
                natural_countries: natural,
                conflict_countries: conflict,
                rows_per_country: rows,
                noise_sigma: noise,
                shape: parse_shape(&shape)?,
                features_per_category,
                seed,
            };
            run_synth(&spec, &out)
        }
    }
}

fn load_config(input: &InputArgs) -> Result<RunConfig, PipelineError> {
    let mut config = match &input.config {
        Some(path) => {
            let raw =
                std::fs::read_to_string(path).map_err(|source| PipelineError::ReadInput {
                    path: path.clone(),
                    source,
                })?;
            RunConfig::from_toml(&raw)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = input.seed {
        config.seed = seed;
    }
    if let Some(threads) = input.threads {
        config.threads = threads;
    }
    Ok(config)
}

fn run_validate(input: InputArgs) -> Result<(), PipelineError> {
    let config = load_config(&input)?;
    let (dataset, warnings) = pipeline::load_inputs(&input.data, &input.catalog)?;
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }

    let report = validate(
        &dataset,
        TargetRange {
            min: config.target_min,
            max: config.target_max,
        },
    );

    println!(
        "{} observations across {} countries, {} features",
        dataset.observations.len(),
        dataset.countries.len(),
        dataset.catalog.len()
    );
    println!("rows per country:");
    for (country, count) in &report.row_counts_per_country {
        println!("  {country}: {count}");
    }
    if report.is_clean() {
        println!("dataset is clean: no findings");
        return Ok(());
    }
    if !report.target_range_violations.is_empty() {
        println!(
            "target range violations ({}):",
            report.target_range_violations.len()
        );
        for (row, value) in report.target_range_violations.iter().take(20) {
            println!("  row {row}: target {}", fmt_f64(*value));
        }
    }
    if !report.bound_violations.is_empty() {
        println!(
            "feature bound violations ({}):",
            report.bound_violations.len()
        );
        for violation in report.bound_violations.iter().take(20) {
            println!(
                "  row {}: {} = {}",
                violation.row,
                violation.feature,
                fmt_f64(violation.value)
            );
        }
    }
    if !report.duplicate_keys.is_empty() {
        println!(
            "duplicate (country, admin1, date) keys ({}):",
            report.duplicate_keys.len()
        );
        for (country, admin1, date) in report.duplicate_keys.iter().take(20) {
            println!("  {country} / {} / {date}", admin1.as_deref().unwrap_or("-"));
        }
    }
    if !report.conflict_consistency_warnings.is_empty() {
        println!(
            "conflict-consistency warnings (overall < component) on {} rows",
            report.conflict_consistency_warnings.len()
        );
    }
    Ok(())
}

fn run_pipeline(
    input: InputArgs,
    out: Option<PathBuf>,
    dump_models: bool,
) -> Result<(), PipelineError> {
    let mut config = load_config(&input)?;
    if let Some(out) = out {
        config.out_dir = out;
    }
    if dump_models {
        config.dump_models = true;
    }

    let output = pipeline::run(&config, &input.data, &input.catalog)?;
    for warning in &output.parse_warnings {
        eprintln!("warning: {warning}");
    }
    if !output.validation.is_clean() {
        eprintln!(
            "warning: data-quality findings (targets out of range: {}, bound violations: {}, \
             duplicate keys: {}, conflict inconsistencies: {}); run `fcs validate` for details",
            output.validation.target_range_violations.len(),
            output.validation.bound_violations.len(),
            output.validation.duplicate_keys.len(),
            output.validation.conflict_consistency_warnings.len(),
        );
    }

    let report = &output.bundle.report;
    println!(
        "evaluated {} countries ({} skipped)",
        report.evaluations.len(),
        report.skipped.len()
    );
    println!("average MAE per model:");
    for kind in ModelKind::ALL {
        println!("  {kind}: {}", fmt_f64(report.average_mae_per_model[&kind]));
    }
    let mut category_counts = std::collections::BTreeMap::new();
    for category in report.category_assignments.values() {
        *category_counts.entry(*category).or_insert(0usize) += 1;
    }
    if !category_counts.is_empty() {
        println!("famine categories:");
        for (category, count) in &category_counts {
            println!("  {category}: {count}");
        }
    }
    for (country, reason) in &report.skipped {
        println!("skipped {country}: {reason}");
    }
    println!(
        "wrote {} files under {}",
        output.bundle.paths.len(),
        config.out_dir.display()
    );
    Ok(())
}

fn parse_shape(shape: &str) -> Result<TargetShape, PipelineError> {
    match shape {
        "step" => Ok(TargetShape::Step),
        "linear" => Ok(TargetShape::Linear),
        other => Err(PipelineError::Config(ConfigError::Invalid {
            detail: format!("unknown target shape '{other}' (expected step or linear)"),
        })),
    }
}

fn run_synth(spec: &SynthSpec, out: &PathBuf) -> Result<(), PipelineError> {
    let files = write_synthetic(spec, out).map_err(|e| match e {
        SynthError::BadSpec { detail } => {
            PipelineError::Config(ConfigError::Invalid { detail })
        }
        SynthError::Io { path, source } => PipelineError::ReadInput { path, source },
    })?;
    println!("wrote {}", files.dataset_path.display());
    println!("wrote {}", files.catalog_path.display());
    println!("wrote {}", files.truth_path.display());
    println!(
        "{} rows across {} countries (planted: {} economic, {} natural, {} conflict)",
        (spec.economic_countries + spec.natural_countries + spec.conflict_countries)
            * spec.rows_per_country,
        spec.economic_countries + spec.natural_countries + spec.conflict_countries,
        spec.economic_countries,
        spec.natural_countries,
        spec.conflict_countries
    );
    Ok(())
}
