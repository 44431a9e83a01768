use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sepcrit::classify::{classify, EquivalenceClasses};
use sepcrit::criteria::sweep_multipartite;
use sepcrit::statefile::{encode_matrix, StateFile};
use sepcrit::witness::{compile, detect, witness_expectation};
use sepcrit::{
    CriterionFamily, Density64, Error, Real, Report64, StateSpec, SweepOptions, Witness64,
};

#[derive(Parser)]
#[command(
    name = "sepcrit",
    version,
    about = "Permutation and witness separability criteria"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate criterion families on one state.
    Analyze(AnalyzeArgs),
    /// Group all slot permutations into empirical equivalence classes.
    Classify(ClassifyArgs),
    /// Build the positive map for a witness and run it on a state.
    CompileWitness(WitnessArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// State file (JSON with "dims" and "matrix").
    #[arg(long, value_name = "FILE")]
    state: Option<PathBuf>,
    /// Built-in state: upb3, maxent:D, product:D1,D2,.., ginibre:D1,.., mixed:D1,.., isotropic:D,P
    #[arg(long, value_name = "NAME[:PARAMS]")]
    builtin: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Selector {
    Ppt,
    Realign,
    Perms,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "all")]
    criteria: Selector,
    /// Detection margin above 1.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Seed for random built-ins.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: ReportFormat,
    /// Allow permutation sweeps beyond three subsystems.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Subsystem dimensions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 32)]
    probes: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: ClassFormat,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct WitnessArgs {
    /// Witness file (JSON, two subsystems of equal dimension).
    #[arg(long, value_name = "FILE")]
    witness: PathBuf,
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Construction(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Construction(_) | Error::Numerical(_) => Failure::Construction(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Analyze(a) => analyze(&a),
        Command::Classify(a) => run_classify(&a),
        Command::CompileWitness(a) => compile_witness(&a),
    };
    match out {
        Ok(text) => {
            let mut stdout = io::stdout().lock();
            // a closed pipe is not worth a panic
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Construction(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn read_file(path: &Path) -> Result<StateFile, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(StateFile::from_json(&text)?)
}

fn load_state(source: &Source, seed: u64) -> Result<(String, Density64), Failure> {
    match (&source.state, &source.builtin) {
        (Some(path), _) => Ok((path.display().to_string(), read_file(path)?.to_density()?)),
        (None, Some(name)) => {
            let spec = StateSpec::parse_builtin(name, seed)?;
            Ok((spec.label(), spec.build()?))
        }
        (None, None) => Err(Failure::Input(
            "one of --state or --builtin is required".into(),
        )),
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<String, Failure> {
    if !(args.tol.is_finite() && args.tol >= 0.0) {
        return Err(Failure::Input(format!(
            "--tol must be a non-negative number, got {}",
            args.tol
        )));
    }
    let (label, rho) = load_state(&args.source, args.seed)?;
    let families = match args.criteria {
        Selector::Ppt => vec![CriterionFamily::PptAllCuts],
        Selector::Realign => vec![CriterionFamily::RealignAllPairs],
        Selector::Perms => vec![CriterionFamily::AllPermutations],
        Selector::All => vec![
            CriterionFamily::PptAllCuts,
            CriterionFamily::RealignAllPairs,
            CriterionFamily::AllPermutations,
        ],
    };
    let opts = SweepOptions {
        detect_tol: args.tol,
        force: args.force,
        ..SweepOptions::default()
    };
    let report = sweep_multipartite(&rho, &label, &families, &opts)?;
    Ok(match args.format {
        ReportFormat::Json => to_json(&report),
        ReportFormat::Table => report_table(&report),
    })
}

fn report_table(report: &Report64) -> String {
    let width = report
        .criteria
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(0)
        .max(9);
    let mut s = format!("state    {}\ndims     {:?}\n\n", report.label, report.dims);
    s += &format!(
        "{:<width$}  {:>18}  {:>18}  detected\n",
        "criterion", "norm", "threshold"
    );
    for c in &report.criteria {
        s += &format!(
            "{:<width$}  {:>18}  {:>18}  {}\n",
            c.name,
            sig12(c.norm),
            sig12(c.threshold),
            c.detected
        );
    }
    s += &format!(
        "\nE        {}\nverdict  {}\n",
        sig12(report.e_value),
        verdict_word(report)
    );
    s
}

fn verdict_word(report: &Report64) -> String {
    serde_json::to_value(report.verdict)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Twelve significant digits, fixed notation for ordinary magnitudes.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        format!("{:.*}", (11 - exp).max(0) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn run_classify(args: &ClassifyArgs) -> Result<String, Failure> {
    let opts = SweepOptions::<f64> {
        force: args.force,
        ..SweepOptions::default()
    };
    let classes = classify(&args.dims, args.probes, args.seed, &opts)?;
    match args.format {
        ClassFormat::Json => Ok(to_json(&classes)),
        ClassFormat::Csv => class_csv(&classes),
    }
}

fn class_csv(classes: &EquivalenceClasses<f64>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Failure::Input(e.to_string());
    w.write_record(["class", "representative", "permutation", "class_size"])
        .map_err(io_err)?;
    for (k, class) in classes.classes.iter().enumerate() {
        let rep = class.representative.to_string();
        let size = class.members.len().to_string();
        for tau in &class.members {
            w.write_record([k.to_string().as_str(), &rep, &tau.to_string(), &size])
                .map_err(io_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct WitnessReport {
    witness: String,
    state: String,
    dims: Vec<usize>,
    scale: f64,
    support_rank: usize,
    trace_preserving_residual: f64,
    reduction_residual: f64,
    completeness_residual: f64,
    positivity_min_eigenvalue: f64,
    product_min_expectation: f64,
    witness_expectation: f64,
    expectation: f64,
    norm: f64,
    detected: bool,
    warnings: Vec<String>,
    p_b: Vec<Vec<[f64; 2]>>,
    v: Vec<Vec<[f64; 2]>>,
    v_prime: Vec<Vec<[f64; 2]>>,
}

fn compile_witness(args: &WitnessArgs) -> Result<String, Failure> {
    let w: Witness64 = read_file(&args.witness)?.to_witness()?;
    let (label, rho) = load_state(&args.source, args.seed)?;
    if w.operator().dims() != rho.dims() {
        return Err(Failure::Input(format!(
            "witness dims {:?} do not match state dims {:?}",
            w.operator().dims(),
            rho.dims()
        )));
    }
    let map = compile(&w, f64::tolerances().rank)?;
    let det = detect(&map, &rho)?;
    let report = WitnessReport {
        witness: args.witness.display().to_string(),
        state: label,
        dims: rho.dims().to_vec(),
        scale: map.intermediates.scale,
        support_rank: map.support_rank,
        trace_preserving_residual: map.trace_preserving_residual,
        reduction_residual: map.reduction_residual,
        completeness_residual: map.completeness_residual,
        positivity_min_eigenvalue: map.positivity_min_eigenvalue,
        product_min_expectation: map.product_min_expectation,
        witness_expectation: witness_expectation(&w, &rho)?,
        expectation: det.expectation,
        norm: det.norm,
        detected: det.detected,
        warnings: map.warnings.clone(),
        p_b: encode_matrix(&map.intermediates.p_b),
        v: encode_matrix(&map.intermediates.v),
        v_prime: encode_matrix(&map.intermediates.v_prime),
    };
    Ok(to_json(&report))
}
