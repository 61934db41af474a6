//! `isingc` command-line frontend: compile, verify, stats, render.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 verifier mode mismatch.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use isingc::scheduler::{compile_hadamard_baseline, CompileOptions};
use isingc::simulator::{self, SimError};
use isingc::{circuit, render, scheduler, DeviceModel, GateNetwork, OptimizationOptions, PulseSchedule};

#[derive(Parser)]
#[command(name = "isingc", version, about = "Gate-network compiler for Ising quantum computers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OptFlag {
    Cancel,
    Mod180,
    Negate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Unitary,
    Measurement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RenderFormat {
    Ascii,
    Svg,
}

#[derive(Args)]
struct CompileArgs {
    /// Circuit source file.
    #[arg(long)]
    circuit: PathBuf,
    /// Device config (JSON).
    #[arg(long)]
    device: PathBuf,
    /// Output schedule file (JSON).
    #[arg(long)]
    out: PathBuf,
    /// End with a conventional refocusing stage clearing all residuals.
    #[arg(long)]
    flush: bool,
    /// Optimization passes; `negate` implies `mod180`.
    #[arg(long, value_delimiter = ',', value_enum)]
    opt: Vec<OptFlag>,
    /// Round tracked angles to whole degrees after each period
    /// (hand-calculation style traces).
    #[arg(long)]
    round_degrees: bool,
    /// Compile with immediate Hadamard-isolation refocusing instead of
    /// lazy tracking (comparison baseline).
    #[arg(long)]
    baseline: bool,
    /// Print the tracked-angle table.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    device: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, value_enum, default_value = "unitary")]
    mode: VerifyMode,
    /// Pass tolerance on the distance / deviation.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Qubits measured in measurement mode (default: all).
    #[arg(long, value_delimiter = ',')]
    measured: Vec<usize>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    schedule: PathBuf,
    /// Source circuit; enables the 2*n*p pulse-count bound report.
    #[arg(long)]
    circuit: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, value_enum, default_value = "ascii")]
    format: RenderFormat,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a gate network into a pulse schedule.
    Compile(CompileArgs),
    /// Check a schedule against its source circuit.
    Verify(VerifyArgs),
    /// Pulse counts, duration, and the 2*n*p bound.
    Stats(StatsArgs),
    /// Draw a schedule timeline.
    Render(RenderArgs),
}

enum CliError {
    Input(String),
    VerifyFailed(String),
    ModeMismatch(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Input(_) => 2,
            CliError::ModeMismatch(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::VerifyFailed(m) | CliError::ModeMismatch(m) => m,
        }
    }
}

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn read_file(path: &Path, what: &str) -> Result<String, CliError> {
    if !path.exists() {
        return Err(input_err(format!("{what} file not found: {}", path.display())));
    }
    std::fs::read_to_string(path)
        .map_err(|e| input_err(format!("cannot read {what} file {}: {e}", path.display())))
}

fn load_circuit(path: &Path) -> Result<GateNetwork, CliError> {
    let text = read_file(path, "circuit")?;
    circuit::parse_circuit(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn load_device(path: &Path) -> Result<DeviceModel, CliError> {
    let text = read_file(path, "device")?;
    DeviceModel::from_json(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn load_schedule(path: &Path) -> Result<(PulseSchedule, DeviceModel), CliError> {
    let text = read_file(path, "schedule")?;
    PulseSchedule::from_json(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn opt_from_flags(flags: &[OptFlag]) -> OptimizationOptions {
    OptimizationOptions {
        cancel_nots: flags.contains(&OptFlag::Cancel),
        mod180: flags.contains(&OptFlag::Mod180),
        negate: flags.contains(&OptFlag::Negate),
    }
    .normalized()
}

fn cmd_compile(args: &CompileArgs) -> Result<(), CliError> {
    let network = load_circuit(&args.circuit)?;
    let device = load_device(&args.device)?;
    let result = if args.baseline {
        compile_hadamard_baseline(&network, &device)
    } else {
        let options = CompileOptions {
            flush: args.flush,
            opt: opt_from_flags(&args.opt),
            round_degrees: args.round_degrees,
        };
        scheduler::compile(&network, &device, &options)
    }
    .map_err(|e| input_err(e.to_string()))?;
    std::fs::write(&args.out, result.schedule.to_json(&device))
        .map_err(|e| input_err(format!("cannot write {}: {e}", args.out.display())))?;
    if args.trace {
        print!("{}", render::format_trace_table(&result.trace, network.n_qubits));
    }
    println!(
        "compiled {} -> {}: {} pulses ({} NOT), total delay {:.3} us",
        args.circuit.display(),
        args.out.display(),
        result.schedule.pulse_count(),
        result.schedule.not_count(),
        result.schedule.total_delay_seconds() * 1e6
    );
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let network = load_circuit(&args.circuit)?;
    let device = load_device(&args.device)?;
    let (schedule, _) = load_schedule(&args.schedule)?;
    let u_circuit = simulator::circuit_unitary(&network)
        .map_err(|e| input_err(e.to_string()))?;
    match args.mode {
        VerifyMode::Unitary => {
            let report = simulator::verify_unitary(&u_circuit, &schedule, &device, args.tol)
                .map_err(|e| match e {
                    SimError::NotFlushed { .. } => CliError::ModeMismatch(format!(
                        "unitary mode needs a flushed schedule: {e}"
                    )),
                    other => input_err(other.to_string()),
                })?;
            println!("unitary distance: {:.2e}", report.distance);
            if report.pass {
                println!("PASS (tol {:.1e})", args.tol);
                Ok(())
            } else {
                Err(CliError::VerifyFailed(format!(
                    "unitary verification failed: distance {:.2e} >= tol {:.1e}",
                    report.distance, args.tol
                )))
            }
        }
        VerifyMode::Measurement => {
            let measured: Vec<usize> = if args.measured.is_empty() {
                (0..network.n_qubits).collect()
            } else {
                args.measured.clone()
            };
            for q in &measured {
                if *q >= network.n_qubits {
                    return Err(input_err(format!("measured qubit {q} out of range")));
                }
            }
            let report =
                simulator::verify_measurement(&u_circuit, &schedule, &device, &measured, args.tol)
                    .map_err(|e| input_err(e.to_string()))?;
            println!("measurement max deviation: {:.2e}", report.max_deviation);
            if report.pass {
                println!("PASS (tol {:.1e})", args.tol);
                Ok(())
            } else {
                Err(CliError::VerifyFailed(format!(
                    "measurement verification failed: deviation {:.2e} >= tol {:.1e}",
                    report.max_deviation, args.tol
                )))
            }
        }
    }
}

fn cmd_stats(args: &StatsArgs) -> Result<(), CliError> {
    let (schedule, _) = load_schedule(&args.schedule)?;
    let network = args.circuit.as_deref().map(load_circuit).transpose()?;
    let s = scheduler::stats(&schedule, network.as_ref());
    println!("pulse_count: {}", s.pulse_count);
    println!("not_count: {}", s.not_count);
    println!("total_duration_us: {:.3}", s.total_duration_s * 1e6);
    match s.target_gates {
        Some(p) => {
            let bound = 2 * schedule.n_qubits * p;
            println!("target_gates (p): {p}");
            println!(
                "not_count < 2*n*p: {} < {} -> {}",
                s.not_count,
                bound,
                if s.not_count < bound { "PASS" } else { "FAIL" }
            );
        }
        None => println!("target_gates (p): unknown (pass --circuit for the 2*n*p bound)"),
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs) -> Result<(), CliError> {
    let (schedule, _) = load_schedule(&args.schedule)?;
    let text = match args.format {
        RenderFormat::Ascii => render::render_ascii(&schedule),
        RenderFormat::Svg => render::render_svg(&schedule),
    };
    std::fs::write(&args.out, text)
        .map_err(|e| input_err(format!("cannot write {}: {e}", args.out.display())))?;
    println!("rendered {} -> {}", args.schedule.display(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compile(args) => cmd_compile(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Render(args) => cmd_render(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
