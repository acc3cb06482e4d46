//! `saga` — config-driven feature-selection experiments.
//!
//! Subcommands: `run` (execute arms and write artifacts), `compare`
//! (time-to-match between persisted result sets), `tables` (rebuild
//! summary tables from persisted results), `schedule` (inspect the
//! sampling schedule and its cost), `synth` (generate bundled synthetic
//! datasets).

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use saga_cli::config::{Arm, ExperimentConfig};
use saga_cli::csv_io::write_table_csv;
use saga_cli::harness::run_experiment;
use saga_cli::synth;
use saga_cli::tables::{self, load_arm_dir, FIG_WINDOW};
use saga_cli::CliError;
use saga_core::{build_schedule, compare_runs, schedule_cost_ratio, CostModel};

#[derive(Parser)]
#[command(
    name = "saga",
    version,
    about = "Wrapper feature selection with a surrogate-assisted genetic search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more algorithm arms on a dataset and write artifacts
    Run(RunArgs),
    /// Where one persisted result set first matches another's final fitness
    Compare(CompareArgs),
    /// Rebuild table.csv and fig_trace.csv from persisted summaries
    Tables(TablesArgs),
    /// Print the sampling schedule and cost ratios for a training-set size
    Schedule(ScheduleArgs),
    /// Generate a bundled synthetic dataset as CSV
    Synth(SynthArgs),
}

fn parse_arm(s: &str) -> Result<Arm, String> {
    s.parse()
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Headered CSV dataset
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Target column index (default: last column)
    #[arg(long = "target-col")]
    target_col: Option<usize>,
    /// Arm to run (repeatable): baseline, chc, or saga
    #[arg(long = "arm", value_parser = parse_arm)]
    arms: Vec<Arm>,
    /// Seeded repetitions per arm
    #[arg(long)]
    reps: Option<u32>,
    /// Train/validation/test shuffle seed
    #[arg(long = "split-seed")]
    split_seed: Option<u64>,
    /// Base run seed; repetition r uses seed + r
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Surrogate levels
    #[arg(long)]
    b: Option<usize>,
    /// Population reduction rate per level, in (0, 1]
    #[arg(long)]
    pr: Option<f64>,
    /// Generations between evolution-control checkpoints
    #[arg(long)]
    z: Option<usize>,
    /// False-optimum prevention on (1) or off (0)
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    fop: Option<u8>,
    /// Surrogate repetitions per level
    #[arg(long)]
    sp: Option<usize>,
    /// Surrogate-only: skip the final full-fidelity stage (1) or not (0)
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    so: Option<u8>,
    /// Initial and final-stage population size
    #[arg(long)]
    p0: Option<usize>,
    /// Geometric base of the sampling schedule
    #[arg(long)]
    a: Option<f64>,
    /// Population size of the plain chc arm
    #[arg(long)]
    pop: Option<usize>,
    /// Shrink the population on every surrogate repetition instead of per level
    #[arg(long = "strict-pseudocode")]
    strict_pseudocode: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Arm directory (containing summary.json) whose final fitness is the target
    #[arg(long)]
    reference: PathBuf,
    /// Arm directory whose traces are searched for the first match
    #[arg(long)]
    baseline: PathBuf,
    /// Output directory for compare.csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TablesArgs {
    /// Arm directory (repeatable); the first is the significance reference
    #[arg(long = "dir", required = true)]
    dirs: Vec<PathBuf>,
    /// Output directory for table.csv and fig_trace.csv
    #[arg(long)]
    out: PathBuf,
    /// Smoothing window of fig_trace.csv
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Args)]
struct ScheduleArgs {
    /// Training-set size
    #[arg(long)]
    n: usize,
    /// Geometric base
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    /// Number of levels
    #[arg(long, default_value_t = 4)]
    b: usize,
    /// Model-build cost exponent (repeatable)
    #[arg(long = "c", default_values_t = [1.0, 2.0, 3.0])]
    exponents: Vec<f64>,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator: oracle8, planted20, or dermlike
    #[arg(long)]
    name: String,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(dataset) = &args.dataset {
        cfg.dataset = dataset.clone();
    }
    if let Some(target) = args.target_col {
        cfg.target_column = Some(target);
    }
    if !args.arms.is_empty() {
        cfg.arms = args.arms.clone();
    }
    if let Some(reps) = args.reps {
        cfg.repetitions = reps;
    }
    if let Some(split_seed) = args.split_seed {
        cfg.split_seed = split_seed;
    }
    if let Some(seed) = args.seed {
        cfg.run_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(b) = args.b {
        cfg.saga.b = b;
    }
    if let Some(pr) = args.pr {
        cfg.saga.pr = pr;
    }
    if let Some(z) = args.z {
        cfg.saga.z = z;
    }
    if let Some(fop) = args.fop {
        cfg.saga.fop = fop == 1;
    }
    if let Some(sp) = args.sp {
        cfg.saga.sp = sp;
    }
    if let Some(so) = args.so {
        cfg.saga.so = so == 1;
    }
    if let Some(p0) = args.p0 {
        cfg.saga.p0 = p0;
    }
    if let Some(a) = args.a {
        cfg.saga.a = a;
    }
    if let Some(pop) = args.pop {
        cfg.chc.pop_size = pop;
    }
    if args.strict_pseudocode {
        cfg.saga.strict_pseudocode = true;
    }
    Ok(cfg)
}

fn run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = build_config(args)?;
    let result = run_experiment(&cfg)?;
    println!(
        "dataset {} (split seed {})",
        result.dataset_id, result.split_seed
    );
    println!(
        "majority-class test accuracy: {:.4}",
        result.majority_test_accuracy
    );
    for arm in &result.arms {
        let label = arm
            .reports
            .first()
            .map_or(arm.arm.as_str(), |r| r.arm.as_str());
        println!(
            "{label}: runs {} | validation {:.4} ± {:.4} | test {:.4} ± {:.4} | instances {:.0} | {:.2}s",
            arm.reports.len(),
            arm.summary.validation_accuracy.mean,
            arm.summary.validation_accuracy.std,
            arm.summary.test_accuracy.mean,
            arm.summary.test_accuracy.std,
            arm.summary.instances_processed.mean,
            arm.summary.elapsed_secs.mean,
        );
    }
    println!("artifacts in {}", cfg.output_dir.display());
    Ok(())
}

fn compare(args: &CompareArgs) -> Result<(), CliError> {
    let reference = load_arm_dir(&args.reference)?;
    let baseline = load_arm_dir(&args.baseline)?;
    let matches = compare_runs(&reference.reports, &baseline.reports)?;
    std::fs::create_dir_all(&args.out)?;
    let path = args.out.join("compare.csv");
    tables::write_compare(&path, &reference, &[&baseline])?;
    let matched = matches.iter().filter(|m| m.is_some()).count();
    println!(
        "{} matched {} of {} {} targets; table in {}",
        baseline.label,
        matched,
        matches.len(),
        reference.label,
        path.display()
    );
    Ok(())
}

fn emit_tables(args: &TablesArgs) -> Result<(), CliError> {
    let arms = args
        .dirs
        .iter()
        .map(|dir| load_arm_dir(dir))
        .collect::<Result<Vec<_>, _>>()?;
    std::fs::create_dir_all(&args.out)?;
    let table_path = args.out.join("table.csv");
    tables::write_table(&table_path, &arms)?;
    let fig_path = args.out.join("fig_trace.csv");
    tables::write_fig_trace(&fig_path, &arms, args.window.unwrap_or(FIG_WINDOW))?;
    println!("wrote {} and {}", table_path.display(), fig_path.display());
    Ok(())
}

fn schedule(args: &ScheduleArgs) -> Result<(), CliError> {
    let schedule = build_schedule(args.n, args.a, args.b)?;
    println!(
        "sample sizes for n = {} (a = {}, b = {}):",
        args.n, args.a, args.b
    );
    for (i, size) in schedule.sizes.iter().enumerate() {
        let level = schedule.levels - i;
        println!("  level {level}: {size} rows");
    }
    for &c in &args.exponents {
        let model = CostModel {
            complexity_exponent: c,
            a: args.a,
            b: args.b,
        };
        let ratio = schedule_cost_ratio(&model)?;
        println!("cost ratio vs full-data runs (c = {c}): {ratio:.6}");
    }
    Ok(())
}

fn synth_cmd(args: &SynthArgs) -> Result<(), CliError> {
    let table = synth::generate(&args.name, args.seed)?;
    write_table_csv(&table, &args.out)?;
    println!(
        "wrote {} ({} rows, {} features, {} classes)",
        args.out.display(),
        table.n_instances(),
        table.n_features(),
        table.n_classes()
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare(args),
        Command::Tables(args) => emit_tables(args),
        Command::Schedule(args) => schedule(args),
        Command::Synth(args) => synth_cmd(args),
    }
}

fn main() {
    // Die quietly when stdout closes early (e.g. `saga schedule | head`)
    // instead of panicking in println!.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
