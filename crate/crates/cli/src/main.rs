//! `stackliver` command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stackliver_cli::commands::{self, Method};
use stackliver_cli::error::ErrorRecord;
use stackliver_cli::pipeline::{resolve_out, run_pipeline, Format, RunOptions, Stage};
use stackliver_cli::{CliError, CliResult, PipelineConfig};

#[derive(Parser)]
#[command(name = "stackliver", version, about = "Stacked GBDT + KNN classifier pipeline")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Pipeline config (JSON); defaults apply to omitted fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dataset CSV (pipeline commands) or input CSV (predict, explain).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Output directory; STACKLIVER_OUT takes precedence.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed (default 42)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 forces the serial path.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Ignore and do not write the stage cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Every stage through explanations.
    RunAll,
    /// Ingest, split, winsorize, standardize and undersample.
    Preprocess,
    /// Through the ANOVA screen.
    Anova,
    /// Through RFE-CV feature selection.
    Select,
    /// Through model training; saves the bundle.
    Train,
    /// Through train/test metrics.
    Evaluate,
    /// Through cross-validation.
    Cv,
    /// Scores a CSV with a saved bundle.
    Predict {
        /// model.json written by `train` or `run-all`
        #[arg(long)]
        bundle: PathBuf,
        /// Defaults to `<out>/predictions.csv`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Runs one explainer with a saved bundle.
    Explain {
        /// model.json written by `train` or `run-all`
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Row indices to explain (LIME only).
        #[arg(long, value_delimiter = ',')]
        rows: Vec<usize>,
        /// Defaults to `<out>/explain-<method>.json`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load_config(g: &Global) -> CliResult<PipelineConfig> {
    let mut config = match &g.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(d) = &g.data {
        config.data.path = Some(d.clone());
    }
    if let Some(s) = g.seed {
        config.seed = s;
    }
    config.output = resolve_out(g.out.as_deref(), &config);
    Ok(config)
}

fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let until = match &cli.command {
        Command::RunAll => Stage::Explain,
        Command::Preprocess => Stage::Preprocess,
        Command::Anova => Stage::Anova,
        Command::Select => Stage::Select,
        Command::Train => Stage::Train,
        Command::Evaluate => Stage::Evaluate,
        Command::Cv => Stage::Cv,
        Command::Predict { bundle, output } => {
            let data = g
                .data
                .as_deref()
                .ok_or_else(|| CliError::Config("predict needs --data".into()))?;
            let out = resolve_out(g.out.as_deref(), &PipelineConfig::default());
            let output = output.clone().unwrap_or_else(|| out.join("predictions.csv"));
            let summary = commands::predict(bundle, data, &output)?;
            eprintln!(
                "{}",
                serde_json::json!({"rows": summary.rows, "seconds": summary.seconds, "output": output})
            );
            return Ok(());
        }
        Command::Explain {
            bundle,
            method,
            rows,
            output,
        } => {
            let result = commands::explain(bundle, g.data.as_deref(), *method, rows, g.seed)?;
            let out = resolve_out(g.out.as_deref(), &PipelineConfig::default());
            let name = format!("explain-{}.json", format!("{method:?}").to_lowercase());
            let output = output.clone().unwrap_or_else(|| out.join(name));
            return commands::write_explanation(&output, &result);
        }
    };
    let config = load_config(g)?;
    let opts = RunOptions {
        command: command_name(&cli.command).to_string(),
        until,
        out: config.output.clone(),
        format: g.format,
        use_cache: !g.no_cache,
    };
    run_pipeline(&config, &opts).map(|_| ())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::RunAll => "run-all",
        Command::Preprocess => "preprocess",
        Command::Anova => "anova",
        Command::Select => "select",
        Command::Train => "train",
        Command::Evaluate => "evaluate",
        Command::Cv => "cv",
        Command::Predict { .. } => "predict",
        Command::Explain { .. } => "explain",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = ErrorRecord::new(&e, None);
            eprintln!("{}", serde_json::to_string(&record).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
