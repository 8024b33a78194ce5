use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use blockfactor::metrics::NmiVariant;
use blockfactor_bench::factorize::{factorize_file, format_labels, format_summary, FactorizeRequest};
use blockfactor_bench::realdata::{self, Dataset};
use blockfactor_bench::simulate::{self, RunOptions};
use blockfactor_bench::verify::spot_check;
use blockfactor_bench::winners::{self, WinnerTally};
use blockfactor_bench::{
    data_dir, run_experiment, ExperimentSpec, HarnessError, InitKind, MatrixKind, Method, MethodOptions,
    DATA_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "blockfactor", version, about = "Community detection by symmetric nonnegative factorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect communities in one graph file (.gml or edge list).
    Factorize(FactorizeArgs),
    /// Run a simulation sweep described by a TOML spec and write a CSV.
    Simulate(SimulateArgs),
    /// Score every method on the real networks with known communities.
    Realdata(RealdataArgs),
    /// Count per-replicate best methods over simulation CSVs.
    Winners(WinnersArgs),
    /// Recompute the metrics of a sample of rows in a simulation CSV.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// Matrix the NMF methods factorize.
    #[arg(long, default_value = "laplacian")]
    matrix: MatrixKind,
    /// Partition used to start the NMF methods.
    #[arg(long, default_value = "reg-spectral")]
    init: InitKind,
    /// Regularizer for the regularized Laplacian (default: average degree).
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    #[arg(long, default_value_t = 20)]
    kmeans_restarts: usize,
}

impl SolverArgs {
    fn options(&self) -> MethodOptions {
        let mut opts = MethodOptions {
            matrix: self.matrix,
            init: self.init,
            tau: self.tau,
            seed: self.seed,
            kmeans_restarts: self.kmeans_restarts,
            ..MethodOptions::default()
        };
        opts.solver.max_iters = self.max_iters;
        opts.solver.rel_tol = self.rel_tol;
        opts
    }
}

#[derive(Args)]
struct FactorizeArgs {
    input: PathBuf,
    #[arg(short, long)]
    k: usize,
    #[arg(long, default_value = "osntf")]
    method: Method,
    /// Keep only the largest connected component.
    #[arg(long)]
    lcc: bool,
    /// Ground-truth labels (`name<TAB>label` or `index label` per line).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Write labels here instead of stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "arithmetic")]
    nmi_variant: NmiVariant,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SimulateArgs {
    spec: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    /// Override the replicate count in the spec file.
    #[arg(long)]
    replicates: Option<usize>,
    /// Override the base seed in the spec file.
    #[arg(long)]
    seed: Option<u64>,
    /// Fill the wall_time_ms column (output is then no longer reproducible).
    #[arg(long)]
    record_wall_time: bool,
}

#[derive(Args)]
struct RealdataArgs {
    /// Datasets to run (default: all).
    #[arg(long = "dataset", value_delimiter = ',')]
    datasets: Vec<Dataset>,
    #[arg(long = "method", value_delimiter = ',')]
    methods: Vec<Method>,
    /// Fixture directory (default: $BLOCKFACTOR_DATA_DIR or ./data).
    #[arg(long, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "arithmetic")]
    nmi_variant: NmiVariant,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct WinnersArgs {
    #[arg(required = true)]
    csv: Vec<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    csv: PathBuf,
    /// Check every n-th row.
    #[arg(long, default_value_t = 20)]
    stride: usize,
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| HarnessError::io(path, e))?))
}

fn open(path: &Path) -> Result<File, HarnessError> {
    File::open(path).map_err(|e| HarnessError::io(path, e))
}

fn factorize(args: FactorizeArgs) -> Result<(), HarnessError> {
    let req = FactorizeRequest {
        input: &args.input,
        k: args.k,
        method: args.method,
        lcc: args.lcc,
        truth_file: args.truth.as_deref(),
        options: args.solver.options(),
    };
    let report = factorize_file(&req)?;
    let labels = format_labels(&report.graph, &report.outcome);
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(labels.as_bytes()).map_err(|e| HarnessError::io(path, e))?;
            eprint!("{}", format_summary(&report, args.method, args.nmi_variant));
        }
        None => {
            print!("{labels}");
            eprint!("{}", format_summary(&report, args.method, args.nmi_variant));
        }
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), HarnessError> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    if let Some(r) = args.replicates {
        spec.replicates = r;
    }
    if let Some(s) = args.seed {
        spec.base_seed = s;
    }
    info!(
        "running {} ({} sweep values x {} replicates x {} methods)",
        spec.id,
        spec.sweep.values.len(),
        spec.replicates,
        spec.methods.len()
    );
    let rows = run_experiment(
        &spec,
        RunOptions {
            record_wall_time: args.record_wall_time,
        },
    )?;
    simulate::write_csv(&rows, create(&args.out)?)?;
    print!("{}", simulate::summary_table(&rows));
    Ok(())
}

fn realdata(args: RealdataArgs) -> Result<bool, HarnessError> {
    let datasets = if args.datasets.is_empty() {
        Dataset::ALL.to_vec()
    } else {
        args.datasets
    };
    let methods = if args.methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        args.methods
    };
    let dir = args.data_dir.unwrap_or_else(data_dir);
    let opts = args.solver.options();
    let mut rows = Vec::new();
    let mut all_loaded = true;
    for dataset in datasets {
        match realdata::load_benchmark(dataset, &dir) {
            Ok(bench) => rows.extend(realdata::run_benchmark(&bench, &methods, &opts)?),
            Err(e @ HarnessError::MissingFixture { .. }) => {
                eprintln!("skipping {dataset}: {e}");
                all_loaded = false;
            }
            Err(e) => return Err(e),
        }
    }
    print!("{}", realdata::format_table(&rows, args.nmi_variant));
    if let Some(path) = &args.out {
        realdata::write_csv(&rows, create(path)?)?;
    }
    Ok(all_loaded)
}

fn tally(args: WinnersArgs) -> Result<(), HarnessError> {
    let mut t = WinnerTally::new();
    for path in &args.csv {
        t.add_csv(open(path)?)?;
    }
    print!("{}", winners::format_table(&t.tally()));
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<bool, HarnessError> {
    let rows = simulate::read_csv(open(&args.csv)?)?;
    let report = spot_check(&rows, args.stride)?;
    println!("checked {} of {} rows", report.checked, rows.len());
    for i in &report.mismatches {
        println!("row {i}: stored metrics disagree with its labels");
    }
    Ok(report.mismatches.is_empty())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Factorize(a) => factorize(a).map(|_| true),
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Realdata(a) => realdata(a),
        Command::Winners(a) => tally(a).map(|_| true),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            ExitCode::FAILURE
        }
    }
}
