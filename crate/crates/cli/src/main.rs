//! Command-line front end for the qdet simulator.
//!
//! Every command is deterministic for a fixed argument list: rerunning with
//! the same flags and seed produces byte-identical artifacts. Exit codes are
//! 0 on success, 1 when a computation or verification fails, and 2 for
//! configuration problems (bad flags, unreadable inputs, invalid parameters).

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use qdet_core::builders::{
    static_detection, tomography_circuit, walking_detection, DetectionScheme, MeasurementBasis,
};
use qdet_core::circuit::{metrics, Circuit, Topology};
use qdet_core::devices::fitted_noise_model;
use qdet_core::estimator::{fit_with, FitBounds, FitDataset, FitOptions};
use qdet_core::experiment::{
    linspace, run_error_sweep, run_tomography, Branch, DetectionRecord, LogicalStateSpec,
    TomographyResult,
};
use qdet_core::noise::NoiseModel;
use qdet_core::transpile::transpile;
use qdet_core::verify::{run_suite, VerifyOptions};

#[derive(Parser)]
#[command(
    name = "qdet",
    version,
    about = "Simulate, transpile, and fit three-qubit error-detection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the injected error angle and record detection statistics
    Sweep(SweepArgs),
    /// Run logical-qubit tomography over angle grids, with post-selection
    Tomo(TomoArgs),
    /// Fit noise parameters to a tomography dataset
    Fit(FitArgs),
    /// Lower a circuit to the native gate set and report metrics
    Transpile(TranspileArgs),
    /// Run the transpiler and scheme equivalence check suite
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Static,
    Walking,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    /// Noise parameters fitted to the reference chain device
    Fitted,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepAxis {
    /// Azimuthal grid over [0, 2pi) at fixed --theta
    Phi,
    /// Polar grid over [0, pi] at fixed --phi
    Theta,
    /// Phi grid followed by theta grid
    Both,
    /// The four benchmark preparation states
    Bench,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuilderArg {
    /// Detection circuit with a fixed ancilla
    Static,
    /// Detection circuit with a walking ancilla
    Walking,
    /// State-preparation, encode, decode, and basis-change sequence
    Tomography,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    X,
    Y,
    Z,
}

#[derive(Args)]
struct SweepArgs {
    /// Detection scheme
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Number of error angles, evenly spaced over [0, pi]
    #[arg(long, default_value_t = 21)]
    points: usize,
    /// Shots per grid point; omit for exact probabilities
    #[arg(long)]
    shots: Option<u64>,
    /// Sampling seed
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Noise model JSON path, or "none"
    #[arg(long, default_value = "none")]
    noise: String,
    /// Built-in noise profile, instead of a --noise file
    #[arg(long, value_enum, conflicts_with = "noise")]
    profile: Option<ProfileArg>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TomoArgs {
    /// Which grid of preparation states to run
    #[arg(long, value_enum, default_value_t = SweepAxis::Both)]
    sweep: SweepAxis,
    /// Grid size per swept axis
    #[arg(long, default_value_t = 25)]
    points: usize,
    /// Polar angle held fixed while sweeping phi
    #[arg(long, default_value_t = FRAC_PI_2)]
    theta: f64,
    /// Azimuthal angle held fixed while sweeping theta
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Shots per basis circuit; omit for exact probabilities
    #[arg(long)]
    shots: Option<u64>,
    /// Sampling seed
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Noise model JSON path, or "none"
    #[arg(long, default_value = "none")]
    noise: String,
    /// Built-in noise profile, instead of a --noise file
    #[arg(long, value_enum, conflicts_with = "noise")]
    profile: Option<ProfileArg>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Dataset JSON path
    #[arg(long)]
    data: PathBuf,
    /// Optimizer seed
    #[arg(long, default_value_t = 11)]
    seed: u64,
    /// Objective evaluation budget
    #[arg(long, default_value_t = 2000)]
    budget: u64,
    /// Fit one shared depolarization probability instead of two
    #[arg(long)]
    tie: bool,
    /// Output JSON path for the fit result
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["circuit", "builder"])))]
struct TranspileArgs {
    /// Input circuit JSON path
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Built-in circuit to lower instead of reading a file
    #[arg(long, value_enum)]
    builder: Option<BuilderArg>,
    /// Injected error angle for the detection builders
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Preparation polar angle for the tomography builder
    #[arg(long, default_value_t = FRAC_PI_2)]
    theta: f64,
    /// Preparation azimuthal angle for the tomography builder
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Measurement basis for the tomography builder
    #[arg(long, value_enum, default_value_t = BasisArg::Z)]
    basis: BasisArg,
    /// Output path for the lowered circuit JSON
    #[arg(long)]
    out: PathBuf,
    /// Optional output path for the metrics JSON
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Unitary-equivalence tolerance
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Corrupt a rewrite rule to prove the suite catches it
    #[arg(long)]
    inject_fault: bool,
    /// Number of random circuits in the soundness check
    #[arg(long, default_value_t = 25)]
    circuits: usize,
    /// Random-circuit seed
    #[arg(long, default_value_t = 11)]
    seed: u64,
    /// Optional report JSON path
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    /// Bad flags, unreadable or invalid inputs. Exit code 2.
    Config(String),
    /// The computation itself failed. Exit code 1.
    Failure(String),
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn failure(msg: impl Into<String>) -> CliError {
    CliError::Failure(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Tomo(args) => cmd_tomo(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Transpile(args) => cmd_transpile(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn resolve_noise(noise: &str, profile: Option<ProfileArg>) -> Result<Option<NoiseModel>, CliError> {
    if let Some(ProfileArg::Fitted) = profile {
        return Ok(Some(fitted_noise_model()));
    }
    if noise == "none" {
        return Ok(None);
    }
    let text = fs::read_to_string(noise)
        .map_err(|e| config(format!("cannot read noise model {noise}: {e}")))?;
    let model: NoiseModel = serde_json::from_str(&text)
        .map_err(|e| config(format!("cannot parse noise model {noise}: {e}")))?;
    model
        .validate()
        .map_err(|e| config(format!("invalid noise model {noise}: {e}")))?;
    Ok(Some(model))
}

fn write_artifact(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| config(format!("cannot write {}: {e}", path.display())))
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let noise = resolve_noise(&args.noise, args.profile)?;
    let scheme = match args.scheme {
        SchemeArg::Static => DetectionScheme::Static,
        SchemeArg::Walking => DetectionScheme::Walking,
    };
    if args.points == 0 {
        return Err(config("--points must be at least 1"));
    }
    let epsilons = linspace(0.0, PI, args.points);
    let records = run_error_sweep(scheme, &epsilons, noise.as_ref(), args.shots, args.seed)
        .map_err(|e| config(e.to_string()))?;
    write_artifact(&args.out, &sweep_csv(&records))?;
    println!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

fn sweep_csv(records: &[DetectionRecord]) -> String {
    let mut csv = String::from("epsilon,p00,p01,p10,p11,z_anc,z_log_raw,z_log_corrected\n");
    for r in records {
        let [p00, p01, p10, p11] = r.joint_probs;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.epsilon, p00, p01, p10, p11, r.anc_expectation, r.raw_logical, r.corrected_logical
        )
        .unwrap();
    }
    csv
}

fn cmd_tomo(args: TomoArgs) -> Result<(), CliError> {
    let noise = resolve_noise(&args.noise, args.profile)?;
    if args.points < 2 && !matches!(args.sweep, SweepAxis::Bench) {
        return Err(config("--points must be at least 2"));
    }

    let mut specs = Vec::new();
    let phi_grid = |n: usize| (0..n).map(move |k| TAU * k as f64 / n as f64);
    match args.sweep {
        SweepAxis::Phi => {
            for phi in phi_grid(args.points) {
                specs.push((args.theta, phi));
            }
        }
        SweepAxis::Theta => {
            for theta in linspace(0.0, PI, args.points) {
                specs.push((theta, args.phi));
            }
        }
        SweepAxis::Both => {
            for phi in phi_grid(args.points) {
                specs.push((args.theta, phi));
            }
            for theta in linspace(0.0, PI, args.points) {
                specs.push((theta, args.phi));
            }
        }
        SweepAxis::Bench => {
            for spec in qdet_core::devices::benchmark_states() {
                specs.push((spec.theta, spec.phi));
            }
        }
    }

    let mut csv = String::from("theta,phi,branch,x_l,y_l,z_l,fidelity,weight,dropout\n");
    for (i, &(theta, phi)) in specs.iter().enumerate() {
        let spec =
            LogicalStateSpec::new(theta, phi).map_err(|e| config(format!("bad state: {e}")))?;
        // run_tomography burns three sub-seeds, one per measurement basis.
        let point_seed = args.seed.wrapping_add(3 * i as u64);
        let result = run_tomography(&spec, noise.as_ref(), args.shots, point_seed)
            .map_err(|e| config(e.to_string()))?;
        tomo_rows(&mut csv, theta, phi, &result);
    }
    write_artifact(&args.out, &csv)?;
    println!("wrote {} states to {}", specs.len(), args.out.display());
    Ok(())
}

fn tomo_rows(csv: &mut String, theta: f64, phi: f64, result: &TomographyResult) {
    for branch in [Branch::All, Branch::SyndromePlus, Branch::SyndromeMinus] {
        let b = result.branch(branch);
        let [x, y, z] = b.pauli_expectations;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            theta,
            phi,
            branch.label(),
            x,
            y,
            z,
            b.fidelity,
            b.weight,
            result.dropout
        )
        .unwrap();
    }
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.data)
        .map_err(|e| config(format!("cannot read dataset {}: {e}", args.data.display())))?;
    let dataset: FitDataset = serde_json::from_str(&text)
        .map_err(|e| config(format!("cannot parse dataset {}: {e}", args.data.display())))?;
    dataset
        .validate()
        .map_err(|e| config(format!("invalid dataset {}: {e}", args.data.display())))?;

    let options = FitOptions {
        tie_depolarization: args.tie,
    };
    let result = fit_with(&dataset, &FitBounds::default(), args.seed, args.budget, options)
        .map_err(|e| config(e.to_string()))?;
    let json = serde_json::to_string_pretty(&result)
        .map_err(|e| failure(format!("cannot serialize fit result: {e}")))?;
    write_artifact(&args.out, &json)?;
    println!(
        "residual={} evaluations={} budget_exhausted={}",
        result.residual, result.evaluations, result.budget_exhausted
    );
    Ok(())
}

fn cmd_transpile(args: TranspileArgs) -> Result<(), CliError> {
    let circuit = match (&args.circuit, args.builder) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config(format!("cannot read circuit {}: {e}", path.display())))?;
            Circuit::from_json(&text)
                .map_err(|e| config(format!("cannot parse circuit {}: {e}", path.display())))?
        }
        (None, Some(builder)) => build_circuit(builder, &args)?,
        _ => unreachable!("clap enforces exactly one source"),
    };

    let topology =
        Topology::chain(circuit.qubits()).map_err(|e| config(format!("bad circuit: {e}")))?;
    let lowered = transpile(&circuit, &topology).map_err(|e| config(e.to_string()))?;

    let m = metrics(&lowered);
    let report = serde_json::json!({
        "gate_count": lowered.gate_count(),
        "cz_count": m.cz_count,
        "rx_count": m.rx_count,
        "moment_depth": m.moment_depth,
        "two_qubit_depth": m.two_qubit_depth,
    });
    write_artifact(&args.out, &lowered.to_json())?;
    if let Some(path) = &args.metrics {
        let pretty = serde_json::to_string_pretty(&report)
            .map_err(|e| failure(format!("cannot serialize metrics: {e}")))?;
        write_artifact(path, &pretty)?;
    }
    println!("{report}");
    Ok(())
}

fn build_circuit(builder: BuilderArg, args: &TranspileArgs) -> Result<Circuit, CliError> {
    let circuit = match builder {
        BuilderArg::Static => static_detection(args.epsilon),
        BuilderArg::Walking => walking_detection(args.epsilon),
        BuilderArg::Tomography => {
            let basis = match args.basis {
                BasisArg::X => MeasurementBasis::X,
                BasisArg::Y => MeasurementBasis::Y,
                BasisArg::Z => MeasurementBasis::Z,
            };
            tomography_circuit(args.theta, args.phi, basis)
        }
    };
    circuit.map_err(|e| config(format!("cannot build circuit: {e}")))
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    if !(args.tolerance.is_finite() && args.tolerance > 0.0) {
        return Err(config("--tolerance must be positive and finite"));
    }
    let options = VerifyOptions {
        tolerance: args.tolerance,
        inject_fault: args.inject_fault,
        random_circuits: args.circuits,
        seed: args.seed,
    };
    let report = run_suite(&options).map_err(|e| failure(e.to_string()))?;

    for check in &report.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status} {} ({})", check.name, check.detail);
    }
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| failure(format!("cannot serialize report: {e}")))?;
        write_artifact(path, &json)?;
    }
    if report.all_passed {
        Ok(())
    } else {
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        Err(failure(format!(
            "{failed} of {} checks failed",
            report.checks.len()
        )))
    }
}
