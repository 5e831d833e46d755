//! Command-line front end: instance validation, exact benchmarks, learner runs
//! and horizon sweeps.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use autobid::benchmarks::{BenchmarkRegistry, OracleError};
use autobid::harness::{run_sweep, ExperimentConfig, HarnessError};
use autobid::instance::{
    check_global_roi_feasibility, check_moderate_budgets, check_per_channel_roi_feasibility,
    validate, Instance, InstanceError,
};
use autobid::learner::{evaluate_output, LearnerConfig, LearnerError, LearnerRegistry};
use autobid::multi_item::{build_expected_conversion_multi, MultiItemError};
use autobid::pwl::{build_expected_conversion, PwlError};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "autobid",
    version,
    about = "Multi-channel autobidding benchmarks and budget-pacing learners"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an instance file and report its assumptions.
    Validate { instance: PathBuf },
    /// Solve an exact benchmark and print it as JSON.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value = "gl")]
        which: String,
        /// Target-ROI grid spacing for `chr`.
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
    },
    /// Run one learner and write its trajectory and summary.
    Run {
        instance: PathBuf,
        #[arg(long, default_value = "sgd-ucb")]
        algo: String,
        #[arg(long = "T", alias = "horizon")]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Run a seed and horizon sweep described by a TOML file.
    Sweep { config: PathBuf },
    /// Print one channel's expected conversion curve as CSV.
    PwlDump {
        instance: PathBuf,
        /// Channel index, starting at 0.
        #[arg(long)]
        channel: usize,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<PwlError> for Failure {
    fn from(e: PwlError) -> Self {
        match e {
            PwlError::InvalidBudget(_) | PwlError::OutOfDomain(..) => Failure::Input(e.to_string()),
            PwlError::Malformed(_) => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<MultiItemError> for Failure {
    fn from(e: MultiItemError) -> Self {
        match e {
            MultiItemError::Pwl(p) => p.into(),
            MultiItemError::Lp(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Lp(_) | OracleError::Numeric(_) => Failure::Numeric(e.to_string()),
            OracleError::MultiItem(m) => m.into(),
            OracleError::InvalidGridStep(_) => Failure::Usage(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<LearnerError> for Failure {
    fn from(e: LearnerError) -> Self {
        match e {
            LearnerError::Config(_) | LearnerError::UnknownAlgorithm(_) => {
                Failure::Usage(e.to_string())
            }
            LearnerError::Instance(i) => i.into(),
            LearnerError::Oracle(o) => o.into(),
            LearnerError::Pwl(p) => p.into(),
            LearnerError::MultiItem(m) => m.into(),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Learner(l) => l.into(),
            HarnessError::Instance(i) => i.into(),
            _ => Failure::Input(e.to_string()),
        }
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) {
    let mut out = io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() != io::ErrorKind::BrokenPipe {
            eprintln!("error: cannot write to stdout: {e}");
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn load_valid(path: &Path) -> Result<Instance, Failure> {
    let inst = Instance::load(path)?;
    let violations = validate(&inst);
    if violations.is_empty() {
        Ok(inst)
    } else {
        let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        Err(Failure::Input(format!(
            "{} is invalid:\n{}",
            path.display(),
            lines.join("\n")
        )))
    }
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    let inst = load_valid(path)?;
    let mut report = format!(
        "{}: valid ({} channels, {} joint outcomes)\n",
        path.display(),
        inst.num_channels(),
        inst.joint_support_size()
    );
    let budgets = match check_moderate_budgets(&inst) {
        Ok(b) => b.to_string(),
        Err(_) => "n/a (unbounded budget)".into(),
    };
    report += &format!("budget binds in every outcome: {budgets}\n");
    report += &format!(
        "ROI-feasible in every joint realization: {}\n",
        check_global_roi_feasibility(&inst)
    );
    report += &format!(
        "ROI-feasible in every channel outcome: {}\n",
        check_per_channel_roi_feasibility(&inst)
    );
    emit(&report);
    Ok(())
}

fn cmd_oracle(path: &Path, which: &str, grid_step: f64) -> Result<(), Failure> {
    let registry = BenchmarkRegistry::with_grid_step(grid_step);
    let bench = registry.get(which).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown benchmark {which:?}; expected one of {}",
            registry.names().join(", ")
        ))
    })?;
    let inst = load_valid(path)?;
    emit(&format!("{}\n", bench.solve(&inst)?.to_json()));
    Ok(())
}

struct RunArgs<'a> {
    instance: &'a Path,
    algo: &'a str,
    config: LearnerConfig,
    out: &'a Path,
}

fn cmd_run(args: RunArgs<'_>) -> Result<(), Failure> {
    let registry = LearnerRegistry::default();
    let learner = registry.get(args.algo)?;
    let inst = load_valid(args.instance)?;
    let log = learner.run(&inst, &args.config)?;
    let metrics = evaluate_output(&inst, &log)?;
    fs::create_dir_all(args.out)
        .map_err(|e| Failure::Input(format!("cannot create {}: {e}", args.out.display())))?;
    write_file(&args.out.join("run.csv"), &log.to_csv())?;
    let summary =
        serde_json::to_string_pretty(&log.summary(&metrics)).expect("plain data serializes");
    write_file(&args.out.join("summary.json"), &summary)?;
    if log.eta_warning {
        eprintln!(
            "warning: step size {} is at or above the dual-boundedness ceiling {}",
            log.eta, log.eta_bound
        );
    }
    emit(&format!("{summary}\n"));
    Ok(())
}

fn cmd_sweep(path: &Path) -> Result<(), Failure> {
    let config = ExperimentConfig::load(path)?;
    let inst = load_valid(&config.instance)?;
    let summary = run_sweep(&config, &inst)?;
    if let Some(dir) = &config.output_dir {
        summary.write_outputs(dir)?;
    }
    emit(&format!("{}\n", summary.to_json()));
    Ok(())
}

fn cmd_pwl_dump(path: &Path, channel: usize) -> Result<(), Failure> {
    let inst = load_valid(path)?;
    let support = inst.channels.get(channel).ok_or_else(|| {
        Failure::Usage(format!(
            "channel {channel} out of range (instance has {})",
            inst.num_channels()
        ))
    })?;
    let curve = if support.is_multi_item() {
        build_expected_conversion_multi(support, inst.rho, inst.alpha)?
    } else {
        build_expected_conversion(support, inst.rho, inst.alpha)?
    };
    emit(&curve.to_csv());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { instance } => cmd_validate(&instance),
        Command::Oracle {
            instance,
            which,
            grid_step,
        } => cmd_oracle(&instance, &which, grid_step),
        Command::Run {
            instance,
            algo,
            horizon,
            seed,
            out,
            eta,
            delta,
            beta,
        } => cmd_run(RunArgs {
            instance: &instance,
            algo: &algo,
            config: LearnerConfig {
                horizon,
                eta,
                delta,
                beta,
                seed,
            },
            out: &out,
        }),
        Command::Sweep { config } => cmd_sweep(&config),
        Command::PwlDump { instance, channel } => cmd_pwl_dump(&instance, channel),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
