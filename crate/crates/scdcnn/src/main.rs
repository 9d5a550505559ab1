use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use scdcnn::experiments::init_thread_pool;
use scdcnn::{emit_report, run_experiment, Error, ExperimentConfig, ExperimentId, Format};

#[derive(Parser)]
#[command(name = "scdcnn", version, about = "Stochastic-computing DCNN simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named experiment and write its report.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct RunArgs {
    /// table1..table6, fig9, fig10 or fig11.
    experiment: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Stream lengths.
    #[arg(long = "len", value_delimiter = ',')]
    lens: Option<Vec<usize>>,
    /// Input sizes.
    #[arg(long = "n", value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    /// Weight precisions in bits.
    #[arg(long = "w", value_delimiter = ',')]
    ws: Option<Vec<u32>>,
    /// Stanh state counts.
    #[arg(long = "k", value_delimiter = ',')]
    ks: Option<Vec<u32>>,
    /// Noise amplitudes.
    #[arg(long = "amplitude", value_delimiter = ',')]
    amplitudes: Option<Vec<f64>>,
    /// Max-pooling segment length.
    #[arg(long = "c", default_value_t = 16)]
    segment: usize,
    #[arg(long, default_value_t = 32)]
    sng_width: u32,
    /// SCDW weight file.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Directory holding the MNIST test IDX files.
    #[arg(long)]
    mnist: Option<PathBuf>,
    /// Network spec file.
    #[arg(long)]
    net: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutFormat,
    /// Scale trial counts by 0.1.
    #[arg(long)]
    quick: bool,
}

fn run(args: RunArgs) -> Result<(), Error> {
    init_thread_pool()?;
    let id: ExperimentId = args.experiment.parse()?;
    let cfg = ExperimentConfig {
        trials: args.trials,
        seed: args.seed,
        lens: args.lens,
        ns: args.ns,
        ws: args.ws,
        ks: args.ks,
        amplitudes: args.amplitudes,
        segment: args.segment,
        sng_width: args.sng_width,
        quick: args.quick,
        weights: args.weights,
        mnist: args.mnist,
        net: args.net,
        ..ExperimentConfig::new(id)
    };
    let start = Instant::now();
    let report = run_experiment(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let format = match args.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    emit_report(&report, format, args.out.as_deref())?;
    eprintln!("{id}: {} cells in {:.2?}", report.cells.len(), start.elapsed());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Command::Run(args) = cli.command;
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
