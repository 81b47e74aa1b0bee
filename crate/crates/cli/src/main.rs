use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cpr_core::bounds;
use cpr_core::certify;
use cpr_core::decoders::{self, AlternatingOptions};
use cpr_core::harness::{self, ExperimentConfig, Status};
use cpr_core::measurements::{self, harmonic_frame, sample_gaussian, MeasurementMatrix, NoiseModel, Observation};
use cpr_core::{Error, SignalVector};

#[derive(Parser)]
#[command(name = "cpr", version, about = "Phaseless compressed sensing: decoders, certificates and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixKind {
    Gaussian,
    Harmonic,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseKind {
    Gaussian,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Noiseless,
    Noisy,
    SigmaK,
    Alternating,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Rip,
    Srip,
    Nsp,
    Snsp,
    PhaselessIo,
    MixedNsp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Formula {
    Stability,
    SripThreshold,
    RipFromSrip,
    NspFromRip,
    L1Io,
    MixedKtilde,
    MixedNsp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    Stability,
    Io,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a measurement matrix and print it in text form.
    GenMatrix {
        #[arg(long)]
        m: usize,
        #[arg(long = "n", short = 'N')]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "gaussian")]
        model: MatrixKind,
        /// Harmonic frame rotation.
        #[arg(long, default_value_t = 0.0)]
        phase: f64,
        /// Harmonic frame gain: AᵀA = gain·I.
        #[arg(long, default_value_t = 1.5)]
        gain: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute b = |Ax| (+ noise) and print the observation as JSON.
    Measure {
        #[arg(long)]
        matrix: PathBuf,
        /// Signal entries, comma or whitespace separated, or a JSON array.
        #[arg(long)]
        signal: PathBuf,
        #[arg(long, value_enum, default_value = "gaussian")]
        noise: NoiseKind,
        /// File with an explicit error vector; overrides --noise.
        #[arg(long)]
        noise_vector: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode an observation and print the DecodeResult as JSON.
    Decode {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        obs: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Residual radius; defaults to the observation's noise level.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Certify or estimate a matrix property and print the report as JSON.
    Certify {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum)]
        property: Property,
        #[arg(long)]
        k: usize,
        /// Order for rip/srip; defaults to 2k.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// Constant tested by mixed-nsp.
        #[arg(long, default_value_t = 1.0)]
        constant: f64,
    },
    /// Evaluate a closed-form constant.
    Bounds {
        #[arg(long, value_enum)]
        formula: Formula,
        /// JSON object of named parameters.
        #[arg(long)]
        params: String,
    },
    /// Run an experiment and write trials.csv and summary.json.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        serial: bool,
    },
    /// Run an experiment and check a theorem on its certified trials.
    Verify {
        #[arg(value_enum)]
        theorem: Theorem,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        serial: bool,
    },
}

const EXIT_INPUT: u8 = 3;

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Solver(_) => Status::Inconclusive.exit_code() as u8,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| input_failure(format!("{}: {e}", path.display())))
}

fn emit(value: &impl serde::Serialize, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| input_failure(e.to_string()))?;
    match out {
        Some(p) => fs::write(p, text + "\n").map_err(|e| input_failure(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_matrix(path: &Path) -> CliResult<MeasurementMatrix<f64>> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).map_err(|e| input_failure(format!("{}: {e}", path.display())))
    } else {
        Ok(MeasurementMatrix::from_text(&text)?)
    }
}

fn load_vector(path: &Path) -> CliResult<Vec<f64>> {
    let text = read(path)?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).map_err(|e| input_failure(format!("{}: {e}", path.display())));
    }
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| input_failure(format!("{}: {s:?}: {e}", path.display()))))
        .collect()
}

fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    Ok(ExperimentConfig::from_json(&read(path)?)?)
}

fn param(params: &Value, name: &str) -> CliResult<f64> {
    params
        .get(name)
        .and_then(Value::as_f64)
        .ok_or_else(|| input_failure(format!("params: missing numeric {name:?}")))
}

fn param_usize(params: &Value, name: &str) -> CliResult<usize> {
    params
        .get(name)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| input_failure(format!("params: missing integer {name:?}")))
}

fn evaluate(formula: Formula, p: &Value) -> CliResult<Value> {
    let v = match formula {
        Formula::Stability => {
            let rho = p.get("rho").and_then(Value::as_f64).unwrap_or(0.0);
            json!(bounds::stability_constants(param(p, "delta")?, param(p, "t")?, rho)?)
        }
        Formula::SripThreshold => json!(bounds::srip_stability_threshold(
            param(p, "theta_minus")?,
            param(p, "theta_plus")?
        )?),
        Formula::RipFromSrip => json!(bounds::rip_from_srip(param(p, "theta_minus")?, param(p, "theta_plus")?)?),
        Formula::NspFromRip => json!(bounds::nsp_const_from_rip(
            param_usize(p, "a")?,
            param_usize(p, "b")?,
            param(p, "delta")?
        )?),
        Formula::L1Io => json!(bounds::l1_io_constants(
            param(p, "theta_minus")?,
            param(p, "theta_plus")?,
            param(p, "t")?
        )?),
        Formula::MixedKtilde => json!(bounds::mixed_ktilde(param_usize(p, "k")?, param_usize(p, "n")?, param(p, "q")?)?),
        Formula::MixedNsp => json!(bounds::mixed_nsp_constant(param(p, "delta")?, param(p, "p")?, param(p, "q")?)?),
    };
    Ok(v)
}

fn run_bounds(formula: Formula, params: &str) -> CliResult<u8> {
    let p: Value = serde_json::from_str(params).map_err(|e| input_failure(format!("params: {e}")))?;
    let name = formula.to_possible_value().expect("named").get_name().to_string();
    match evaluate(formula, &p) {
        Ok(value) => {
            emit(&json!({"formula": name, "ok": true, "value": value}), None)?;
            Ok(0)
        }
        Err(f) if f.code == EXIT_INPUT => {
            emit(&json!({"formula": name, "ok": false, "diagnostic": f.message}), None)?;
            Ok(EXIT_INPUT)
        }
        Err(f) => Err(f),
    }
}

fn run_certify(
    a: &MeasurementMatrix<f64>,
    property: Property,
    k: usize,
    order: Option<usize>,
    budget: usize,
    seed: u64,
    (p, q, constant): (f64, f64, f64),
) -> CliResult<Value> {
    let order = order.unwrap_or(2 * k);
    let v = match property {
        Property::Rip => json!(certify::rip_constant(a, order)?),
        Property::Srip => json!(certify::srip_bounds(a, order)?),
        Property::Nsp => json!(certify::nsp_constant(a, k)?),
        Property::Snsp => json!(certify::snsp_constant(a, k)?),
        Property::PhaselessIo => json!(certify::phaseless_io_condition_estimate(a, k, budget, seed)?),
        Property::MixedNsp => json!(certify::mixed_nsp_check(a, k, p, q, constant, budget, seed)?),
    };
    Ok(v)
}

fn write_report(report: &harness::ExperimentReport, out: Option<&Path>) -> CliResult<()> {
    if let Some(dir) = out {
        report
            .write_to(dir)
            .map_err(|e| input_failure(format!("{}: {e}", dir.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::GenMatrix {
            m,
            n,
            seed,
            model,
            phase,
            gain,
            out,
        } => {
            let a = match model {
                MatrixKind::Gaussian => sample_gaussian::<f64>(m, n, seed)?,
                MatrixKind::Harmonic => {
                    if n != 2 {
                        return Err(input_failure("the harmonic frame has N = 2"));
                    }
                    harmonic_frame(m, phase, gain)?
                }
            };
            match out {
                Some(p) => fs::write(&p, a.to_text()).map_err(|e| input_failure(format!("{}: {e}", p.display())))?,
                None => print!("{}", a.to_text()),
            }
            Ok(0)
        }
        Command::Measure {
            matrix,
            signal,
            noise,
            noise_vector,
            eps,
            seed,
            out,
        } => {
            let a = load_matrix(&matrix)?;
            let x = SignalVector::new(load_vector(&signal)?)?;
            let clean = measurements::phaseless_measure(&a, &x)?;
            let model = match (noise_vector, noise) {
                (Some(p), _) => NoiseModel::Adversarial(load_vector(&p)?),
                (None, NoiseKind::Gaussian) => NoiseModel::Gaussian,
                (None, NoiseKind::Uniform) => NoiseModel::Uniform,
            };
            let obs = measurements::add_noise(&clean, &model, eps, seed)?;
            emit(&obs, out.as_deref())?;
            Ok(0)
        }
        Command::Decode {
            matrix,
            obs,
            method,
            eps,
            k,
            seed,
        } => {
            let a = load_matrix(&matrix)?;
            let text = read(&obs)?;
            let obs: Observation<f64> =
                serde_json::from_str(&text).map_err(|e| input_failure(format!("observation: {e}")))?;
            let eps = eps.unwrap_or(obs.noise_level);
            let result = match method {
                Method::Noiseless => decoders::decode_noiseless_l1(&a, &obs)?,
                Method::Noisy => decoders::decode_noisy_l1(&a, &obs, eps)?,
                Method::SigmaK => decoders::decode_sigma_k(&a, &obs, k, 1.0)?,
                Method::Alternating => {
                    let opts = AlternatingOptions {
                        seed,
                        ..AlternatingOptions::default()
                    };
                    decoders::decode_alternating(&a, &obs, eps, &opts)?
                }
            };
            emit(&result, None)?;
            Ok(0)
        }
        Command::Certify {
            matrix,
            property,
            k,
            order,
            budget,
            seed,
            p,
            q,
            constant,
        } => {
            let a = load_matrix(&matrix)?;
            let report = run_certify(&a, property, k, order, budget, seed, (p, q, constant))?;
            emit(&report, None)?;
            Ok(0)
        }
        Command::Bounds { formula, params } => run_bounds(formula, &params),
        Command::Experiment { config, out, serial } => {
            let cfg = load_config(&config)?;
            let report = harness::run_experiment(&cfg, !serial)?;
            write_report(&report, Some(&out))?;
            print!("{}", report.summary_json());
            let status = report.summary.stability.status.combine(report.summary.io.status);
            Ok(status.exit_code() as u8)
        }
        Command::Verify {
            theorem,
            config,
            out,
            serial,
        } => {
            let cfg = load_config(&config)?;
            let mut outcomes = Vec::new();
            if matches!(theorem, Theorem::Stability | Theorem::All) {
                let (o, report) = harness::verify_stability_theorem(&cfg, !serial)?;
                write_report(&report, out.as_ref().map(|d| d.join("stability")).as_deref())?;
                outcomes.push(o);
            }
            if matches!(theorem, Theorem::Io | Theorem::All) {
                let (o, report) = harness::verify_io_theorem(&cfg, !serial)?;
                write_report(&report, out.as_ref().map(|d| d.join("io")).as_deref())?;
                outcomes.push(o);
            }
            let status = outcomes
                .iter()
                .map(|o| o.status)
                .fold(Status::Pass, Status::combine);
            emit(&json!({"status": status, "theorems": outcomes}), None)?;
            Ok(status.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
