//! Benchmark CLI: load a CSV column, run the requested predictors
//! prequentially, and write a CPE report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use streampred::harness::{
    quarter_split, run_one_pass_traced, run_representative_traced, CenterOrder, ExperimentConfig,
    Method, Mode, ReportRow, RunLabels, TraceEntry,
};
use streampred::io::{load_column, render_table, write_error_dump, write_report, DatasetSpec, RunManifest};

#[derive(Parser)]
#[command(name = "streampred", version, about = "Streaming point-prediction benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write the report CSV.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Input CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Column to extract.
    #[arg(long)]
    column: String,
    /// Keep at most this many usable rows.
    #[arg(long)]
    max_rows: Option<usize>,
    /// Drop rows whose cell is blank or non-numeric instead of failing.
    #[arg(long)]
    drop_missing: bool,
    /// Evaluate on four contiguous quarters of the stream as well.
    #[arg(long)]
    quarters: bool,
    /// Comma-separated method list, or "all".
    #[arg(long, default_value = "all")]
    methods: String,
    /// onepass | representative | both
    #[arg(long, default_value = "onepass")]
    mode: String,
    #[arg(long, default_value_t = 0.1)]
    burnin_frac: f64,
    /// Number of partition intervals K.
    #[arg(long, default_value_t = 100)]
    k_intervals: usize,
    /// Sketch depth d (rows).
    #[arg(long, default_value_t = 10)]
    depth: usize,
    /// Sketch width W (counters per row).
    #[arg(long, default_value_t = 50)]
    width: usize,
    /// AR(1) correlation.
    #[arg(long, default_value_t = 0.8)]
    rho: f64,
    /// Bias variance inflation delta^2 (note: squared).
    #[arg(long = "delta", value_name = "D2", default_value_t = 0.01)]
    delta2: f64,
    /// K-means center budget.
    #[arg(long, default_value_t = 200)]
    kmeans_k: usize,
    /// Dirichlet prior mass M.
    #[arg(long, default_value_t = 1.0)]
    dpp_mass: f64,
    /// refit | freeze: GP hyperparameter handling per step.
    #[arg(long, default_value = "refit")]
    hyper: String,
    /// slot | sorted: order of centers handed to GP methods.
    #[arg(long, default_value = "slot")]
    center_order: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report CSV path.
    #[arg(long, default_value = "report.csv")]
    output: PathBuf,
    /// Decimal places for DPP value merging.
    #[arg(long, default_value_t = 1)]
    precision: u32,
    /// Also dump per-step predictions/errors to this CSV for plotting.
    #[arg(long)]
    dump_errors: Option<PathBuf>,
    /// Also write the run manifest (JSON) next to the report.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match execute(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(UsageError(msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
    }
    // runtime failures exit via run_or_fail with code 1
}

struct UsageError(String);

fn parse_methods(s: &str) -> Result<Vec<Method>, UsageError> {
    if s == "all" {
        return Ok(Method::ALL.to_vec());
    }
    s.split(',')
        .map(|tok| Method::parse(tok.trim()).map_err(|e| UsageError(e.to_string())))
        .collect()
}

fn parse_modes(s: &str) -> Result<Vec<Mode>, UsageError> {
    match s {
        "onepass" => Ok(vec![Mode::OnePass]),
        "representative" => Ok(vec![Mode::Representative]),
        "both" => Ok(vec![Mode::OnePass, Mode::Representative]),
        _ => Err(UsageError(format!(
            "unknown mode '{s}'; valid: onepass, representative, both"
        ))),
    }
}

fn fail(msg: impl std::fmt::Display) -> ! {
    eprintln!("error: {msg}");
    std::process::exit(1);
}

fn execute(args: &RunArgs) -> Result<(), UsageError> {
    let methods_all = args.methods == "all";
    let methods = parse_methods(&args.methods)?;
    let modes = parse_modes(&args.mode)?;
    let hyper_refit = match args.hyper.as_str() {
        "refit" => true,
        "freeze" => false,
        other => return Err(UsageError(format!("unknown --hyper '{other}'; valid: refit, freeze"))),
    };
    let center_order = match args.center_order.as_str() {
        "slot" => CenterOrder::Slot,
        "sorted" => CenterOrder::Sorted,
        other => {
            return Err(UsageError(format!(
                "unknown --center-order '{other}'; valid: slot, sorted"
            )))
        }
    };
    if modes.contains(&Mode::OnePass) && !methods_all {
        if let Some(bad) = methods.iter().find(|m| !m.one_pass_capable()) {
            return Err(UsageError(format!(
                "{} cannot run one-pass; use --mode representative",
                bad.as_str()
            )));
        }
    }

    let spec = DatasetSpec {
        path: args.data.clone(),
        column: args.column.clone(),
        max_rows: args.max_rows,
        drop_missing: args.drop_missing,
        quarters: args.quarters,
        precision: args.precision,
    };
    let config = ExperimentConfig {
        burnin_frac: args.burnin_frac,
        k_intervals: args.k_intervals,
        depth: args.depth,
        width: args.width,
        rho: args.rho,
        delta2: args.delta2,
        kmeans_k: args.kmeans_k,
        dpp_mass: args.dpp_mass,
        seed: args.seed,
        precision: args.precision,
        range_expand: 0.05,
        hyper_refit,
        center_order,
    };
    if let Err(e) = config.validate() {
        return Err(UsageError(e.to_string()));
    }

    let stream = load_column(&spec).unwrap_or_else(|e| fail(e));
    let dataset_name = args
        .data
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "-".into());

    let mut segments: Vec<(String, &[f64])> = vec![("full".into(), stream.as_slice())];
    if args.quarters {
        let quarters = quarter_split(&stream).unwrap_or_else(|e| fail(e));
        for (i, q) in quarters.iter().enumerate() {
            segments.push((format!("q{}", i + 1), q));
        }
    }

    let one_pass_methods: Vec<Method> = methods
        .iter()
        .copied()
        .filter(|m| m.one_pass_capable())
        .collect();

    let mut rows: Vec<ReportRow> = Vec::new();
    let mut dump: Vec<(usize, &'static str, &'static str, f64, f64)> = Vec::new();
    for (segment, data) in &segments {
        let labels = RunLabels {
            dataset: &dataset_name,
            segment,
        };
        for &mode in &modes {
            let mut trace: Vec<TraceEntry> = Vec::new();
            let want_trace = args.dump_errors.is_some();
            let trace_opt = want_trace.then_some(&mut trace);
            let segment_rows = match mode {
                Mode::OnePass => {
                    run_one_pass_traced(data, &one_pass_methods, &config, labels, trace_opt)
                }
                Mode::Representative => {
                    run_representative_traced(data, &methods, &config, labels, trace_opt)
                }
            }
            .unwrap_or_else(|e| fail(e));
            rows.extend(segment_rows);
            for e in &trace {
                dump.push((
                    e.step,
                    e.method.as_str(),
                    mode.as_str(),
                    e.prediction,
                    data[e.step],
                ));
            }
        }
    }

    write_report(&args.output, &rows).unwrap_or_else(|e| fail(e));
    if let Some(dump_path) = &args.dump_errors {
        write_error_dump(dump_path, &dump).unwrap_or_else(|e| fail(e));
    }
    if let Some(manifest_path) = &args.manifest {
        let manifest = RunManifest {
            dataset: spec,
            methods: methods.iter().map(|m| m.as_str().to_string()).collect(),
            modes: modes.iter().map(|m| m.as_str().to_string()).collect(),
            burnin_frac: config.burnin_frac,
            k_intervals: config.k_intervals,
            depth: config.depth,
            width: config.width,
            rho: config.rho,
            delta2: config.delta2,
            kmeans_k: config.kmeans_k,
            dpp_mass: config.dpp_mass,
            hyper_refit: config.hyper_refit,
            center_order: config.center_order.as_str().to_string(),
            seed: config.seed,
            output: args.output.clone(),
        };
        let json = serde_json::to_string_pretty(&manifest).unwrap_or_else(|e| fail(e));
        std::fs::write(manifest_path, json).unwrap_or_else(|e| fail(e));
    }
    print!("{}", render_table(&rows));
    println!("report written to {}", args.output.display());
    Ok(())
}
