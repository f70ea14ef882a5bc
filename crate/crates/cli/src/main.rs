//! `lstm-returns`: train, evaluate and grid-search the LSTM return predictor.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use lstm_returns::data::{format_csv, parse_csv, split_by_date, to_returns, DateSplit, ReturnsSeries};
use lstm_returns::eval::{
    evaluate_model, format_exact, naive_baseline_rmse, prepend_warmup, reference_table, run_grid, GridConfig,
    DEFAULT_LAYERS, DEFAULT_SIZES,
};
use lstm_returns::model::{INPUT_FEATURES, OUTPUT_TARGETS};
use lstm_returns::train::{
    save_checkpoint, train_series, Checkpoint, CurriculumSchedule, TrainConfig,
};
use lstm_returns::{synthetic, Error, ModelConfig};

#[derive(Parser)]
#[command(name = "lstm-returns", version, about = "LSTM daily stock-return predictor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model with the length-doubling curriculum.
    Train(TrainArgs),
    /// Score a checkpoint on the test range.
    Eval(EvalArgs),
    /// Train and score every (layers, size) combination.
    Grid(GridArgs),
    /// RMSE of predicting no change on the test range.
    Baseline(BaselineArgs),
    /// Write a deterministic synthetic OHLCV CSV.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Daily OHLCV CSV (Date,Open,High,Low,Close[,Adj Close],Volume).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "2005-01-01")]
    train_start: NaiveDate,
    #[arg(long, default_value = "2014-12-31")]
    train_end: NaiveDate,
    #[arg(long, default_value = "2015-01-01")]
    test_start: NaiveDate,
    #[arg(long, default_value = "2015-12-31")]
    test_end: NaiveDate,
}

impl DataArgs {
    fn split(&self) -> DateSplit {
        DateSplit {
            train_start: self.train_start,
            train_end: self.train_end,
            test_start: self.test_start,
            test_end: self.test_end,
        }
    }
}

#[derive(Args, Clone)]
struct TrainingArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    batch_size: u64,
    /// Longest curriculum window (a power of two); it gets the 100 final epochs.
    #[arg(long, default_value_t = 256)]
    max_length: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    training: TrainingArgs,
    #[arg(long, default_value_t = 1)]
    layers: usize,
    #[arg(long, default_value_t = 50)]
    hidden: usize,
    /// Checkpoint path.
    #[arg(long)]
    out: PathBuf,
    /// History CSV path; defaults to `<out>.history.csv`.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Training rows run before the test range without being scored.
    #[arg(long, default_value_t = 0)]
    warmup: usize,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    training: TrainingArgs,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAYERS)]
    layers: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIZES)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    warmup: usize,
    /// Cells trained concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "grid.csv")]
    out: PathBuf,
    /// Aligned text table path.
    #[arg(long, default_value = "grid.txt")]
    table: PathBuf,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 400)]
    days: usize,
    #[arg(long, default_value = "2014-01-01")]
    start: NaiveDate,
    /// Constant prices instead of the sine pattern.
    #[arg(long)]
    flat: bool,
    #[arg(long)]
    out: PathBuf,
}

/// A failure reported as `ERROR <code> <message>` on one line.
struct CliError {
    code: &'static str,
    message: String,
}

impl CliError {
    fn new(code: &'static str, message: impl ToString) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } | Error::DuplicateDate(_) | Error::NonPositivePrice { .. } | Error::ZeroVolume(_) => {
                "DATA_INVALID"
            }
            Error::EmptySplit(_) => "EMPTY_SPLIT",
            Error::SeriesTooShort { .. } => "SERIES_TOO_SHORT",
            Error::Checkpoint { .. } => "CKPT_CORRUPT",
            Error::Shape { .. } => "CONFIG_MISMATCH",
            Error::TrainingAborted { .. } | Error::NonFiniteGradient(_) | Error::NonFiniteLoss { .. } => {
                "TRAIN_FAILED"
            }
            Error::NoConvergence { .. } => "NUMERICAL",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::Io(_) => "IO_ERROR",
        };
        CliError::new(code, e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_text(path: &Path, missing_code: &'static str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::new(missing_code, format!("{}: not found", path.display())),
        _ => CliError::new("IO_ERROR", format!("{}: {e}", path.display())),
    })
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::new("IO_ERROR", format!("{}: {e}", path.display())))
}

/// Full returns series plus its train/test split.
fn load_data(args: &DataArgs) -> CliResult<(ReturnsSeries, ReturnsSeries, ReturnsSeries)> {
    let text = read_text(&args.data, "DATA_NOT_FOUND")?;
    let full = to_returns(&parse_csv(&text)?)?;
    let (train, test) = split_by_date(&full, &args.split())?;
    Ok((full, train, test))
}

fn train_config(model: ModelConfig, training: &TrainingArgs, split: DateSplit) -> CliResult<TrainConfig> {
    let mut cfg = TrainConfig::new(model, training.seed);
    cfg.batch_size = training.batch_size as usize;
    cfg.schedule = CurriculumSchedule::doubling_to(training.max_length)?;
    cfg.split = split;
    Ok(cfg)
}

fn cmd_train(args: TrainArgs) -> CliResult<()> {
    let (_, train, _) = load_data(&args.data)?;
    let cfg = train_config(
        ModelConfig::new(args.layers, args.hidden),
        &args.training,
        args.data.split(),
    )?;
    let outcome = train_series(&train, &cfg)?;
    save_checkpoint(&outcome.checkpoint, &args.out)?;
    let history_path = args.history.unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".history.csv");
        PathBuf::from(p)
    });
    write_text(&history_path, &outcome.history.to_csv())?;
    for s in outcome.history.stage_summaries() {
        println!(
            "stage window={} epochs={} mean_loss={}",
            s.window_length,
            s.epochs,
            format_exact(s.mean_loss)
        );
    }
    for w in &outcome.history.skipped {
        println!("stage window={w} skipped");
    }
    println!("checkpoint={}", args.out.display());
    println!("history={}", history_path.display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let text = read_text(&args.checkpoint, "CKPT_NOT_FOUND")?;
    let ckpt = Checkpoint::from_text(&text)?;
    let model = ckpt.to_model()?;
    if model.config.input_dim != INPUT_FEATURES || model.config.output_dim != OUTPUT_TARGETS {
        return Err(CliError::new(
            "CONFIG_MISMATCH",
            format!(
                "checkpoint maps {} inputs to {} outputs, data has {INPUT_FEATURES} features and {OUTPUT_TARGETS} targets",
                model.config.input_dim, model.config.output_dim
            ),
        ));
    }
    let (full, _, test) = load_data(&args.data)?;
    let series = prepend_warmup(&full, &test, args.warmup)?;
    let report = evaluate_model(&model, &series, args.warmup)?;
    println!("rmse={} baseline={}", format_exact(report.rmse), format_exact(report.baseline_rmse));
    Ok(())
}

fn cmd_grid(args: GridArgs) -> CliResult<()> {
    let text = read_text(&args.data.data, "DATA_NOT_FOUND")?;
    let train = train_config(ModelConfig::new(1, 1), &args.training, args.data.split())?;
    let cfg = GridConfig {
        train,
        warmup: args.warmup,
        jobs: args.jobs,
    };
    let report = run_grid(&text, &args.layers, &args.sizes, &cfg)?;
    write_text(&args.out, &report.to_csv())?;
    let table = report.to_table();
    write_text(&args.table, &format!("{table}\n{}", reference_table()))?;
    print!("{table}");
    println!("baseline_rmse={}", format_exact(report.baseline_rmse));
    for cell in &report.cells {
        if let Err(e) = &cell.result {
            eprintln!("cell layers={} size={} failed: {}", cell.layers, cell.size, e.replace('\n', " "));
        }
    }
    if report.succeeded() == 0 {
        return Err(CliError::new("GRID_FAILED", "every grid cell failed"));
    }
    Ok(())
}

fn cmd_baseline(args: BaselineArgs) -> CliResult<()> {
    let (_, _, test) = load_data(&args.data)?;
    println!("baseline_rmse={}", format_exact(naive_baseline_rmse(&test)?));
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> CliResult<()> {
    if args.days < 2 {
        return Err(CliError::new("INVALID_ARGUMENT", "need at least 2 days"));
    }
    let records = if args.flat {
        synthetic::constant_ohlcv(args.days, args.start, 100.0)
    } else {
        synthetic::sine_ohlcv(args.days, args.start)
    };
    write_text(&args.out, &format_csv(&records))?;
    println!(
        "wrote {} days {}..{}",
        records.len(),
        records[0].date,
        records[records.len() - 1].date
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("ERROR USAGE {first}");
            return ExitCode::FAILURE;
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ERROR {} {}", e.code, e.message.replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
