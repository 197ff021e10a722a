use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use qchan_core::channels::{completeness_deviation, CPTP_TOL};
use qchan_core::optimizer::describe_ensemble;
use qchan_core::{
    audit_channel, capacity_amplitude_scan, capacity_closed_form, capacity_splaying_scan,
    make_channel, optimize_ensemble, CapacityResult, ChannelDefinition, ChannelKind, Convergence,
    Error, Method, OptimizerConfig, QuantumChannel, ScanGrid,
};
use serde::Serialize;
use serde_json::value::RawValue;

#[derive(Parser, Debug)]
#[command(
    name = "qchan",
    version,
    about = "Product-state capacity of single-qubit channels"
)]
struct Cli {
    /// Seed for the ensemble optimizer.
    #[arg(long, global = true, env = "QCHAN_SEED", default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Capacity of one channel.
    Capacity {
        #[arg(value_parser = parse_kind)]
        kind: ChannelKind,
        #[arg(long)]
        eta: Option<f64>,
        /// Defaults to `closed`, or `scan` for the splaying channel.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Capacity over an evenly spaced eta grid, as CSV or JSON.
    Sweep {
        #[arg(value_parser = parse_kind)]
        kind: ChannelKind,
        #[arg(long)]
        eta_min: f64,
        #[arg(long)]
        eta_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// One or more methods, comma separated or repeated.
        #[arg(long, value_enum, value_delimiter = ',')]
        method: Vec<MethodArg>,
    },
    /// Run the general ensemble optimizer.
    Optimize {
        #[arg(value_parser = parse_kind)]
        kind: ChannelKind,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 2)]
        states: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
    /// Print Kraus operators, the affine Bloch map and unitality.
    Describe {
        #[arg(value_parser = parse_kind)]
        kind: ChannelKind,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Check a channel definition file for trace preservation.
    Validate { file: PathBuf },
    /// Compare the optimizer against the closed form over an eta grid.
    Audit {
        #[arg(value_parser = parse_kind)]
        kind: ChannelKind,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5, 0.7, 0.9])]
        grid: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum MethodArg {
    Closed,
    Scan,
    Optimize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    /// Bad arguments or a domain error: exit 2 with usage.
    Usage(String),
    /// Malformed input file: exit 2.
    Malformed(String),
    /// Exit 1.
    Rejected(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn parse_kind(s: &str) -> Result<ChannelKind, String> {
    match s.parse::<ChannelKind>() {
        Ok(ChannelKind::Custom) => Err("custom channels are checked with `validate`".to_string()),
        Ok(kind) => Ok(kind),
        Err(e) => Err(format!("{e}; expected one of {}", kind_list())),
    }
}

fn kind_list() -> String {
    ChannelKind::CATALOG.map(|k| k.name()).join(", ")
}

/// Fixed six-decimal formatting without negative zero.
fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn resolve_eta(kind: ChannelKind, eta: Option<f64>) -> Result<f64, Failure> {
    match (kind.takes_eta(), eta) {
        (true, Some(eta)) => Ok(eta),
        (true, None) => Err(Failure::Usage(format!("--eta is required for {kind}"))),
        (false, Some(_)) => {
            eprintln!("warning: the {kind} channel has fixed parameters; --eta is ignored");
            Ok(0.0)
        }
        (false, None) => Ok(0.0),
    }
}

fn default_method(kind: ChannelKind) -> MethodArg {
    if kind == ChannelKind::Splaying {
        MethodArg::Scan
    } else {
        MethodArg::Closed
    }
}

fn optimizer_config(seed: u64, restarts: usize) -> OptimizerConfig {
    OptimizerConfig {
        restarts,
        seed,
        ..OptimizerConfig::default()
    }
}

fn compute(
    kind: ChannelKind,
    eta: f64,
    method: MethodArg,
    seed: u64,
) -> Result<CapacityResult, Failure> {
    Ok(match method {
        MethodArg::Closed => capacity_closed_form(kind, eta)?,
        MethodArg::Scan => match kind {
            ChannelKind::AmplitudeDamping => capacity_amplitude_scan(eta, &ScanGrid::default())?,
            ChannelKind::Splaying => capacity_splaying_scan(&ScanGrid::default())?.capacity,
            _ => {
                return Err(Failure::Usage(format!(
                    "the restricted scan covers amplitude-damping and splaying, not {kind}"
                )))
            }
        },
        MethodArg::Optimize => {
            let channel = make_channel(kind, eta)?;
            optimize_ensemble(&channel, 2, &optimizer_config(seed, 32))?.capacity
        }
    })
}

fn write_ensemble(out: &mut String, result: &CapacityResult) {
    for (k, (theta, phi, r, prior)) in describe_ensemble(&result.ensemble).into_iter().enumerate() {
        let _ = writeln!(
            out,
            "state {k}: theta={} phi={} r={} prior={}",
            fmt6(theta),
            fmt6(phi),
            fmt6(r),
            fmt6(prior)
        );
    }
}

fn cmd_capacity(
    kind: ChannelKind,
    eta: Option<f64>,
    method: Option<MethodArg>,
    seed: u64,
) -> CmdResult {
    let eta = resolve_eta(kind, eta)?;
    let method = method.unwrap_or_else(|| default_method(kind));
    let mut out = String::new();
    if method == MethodArg::Scan && kind == ChannelKind::Splaying {
        let scan = capacity_splaying_scan(&ScanGrid::default())?;
        let psi = scan.capacity.params.map_or(f64::NAN, |p| p.psi);
        let _ = writeln!(
            out,
            "{} at psi'={}",
            fmt6(scan.capacity.value_bits),
            fmt6(psi)
        );
        let _ = writeln!(out, "method: {}", scan.capacity.method.name());
        let _ = writeln!(out, "restricted: yes");
        let _ = writeln!(out, "orthogonal: {}", fmt6(scan.orthogonal.value_bits));
        write_ensemble(&mut out, &scan.capacity);
    } else {
        let result = compute(kind, eta, method, seed)?;
        match result.params {
            Some(p) if result.method == Method::RestrictedScan => {
                let _ = writeln!(
                    out,
                    "{} at psi={} tau={}",
                    fmt6(result.value_bits),
                    fmt6(p.psi),
                    fmt6(p.tau)
                );
            }
            _ => {
                let _ = writeln!(out, "{}", fmt6(result.value_bits));
            }
        }
        let _ = writeln!(out, "method: {}", result.method.name());
        let _ = writeln!(
            out,
            "restricted: {}",
            if result.restricted { "yes" } else { "no" }
        );
        write_ensemble(&mut out, &result);
    }
    print!("{out}");
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    eta: Box<RawValue>,
    method: &'static str,
    capacity_bits: Box<RawValue>,
    psi: Option<Box<RawValue>>,
    tau: Option<Box<RawValue>>,
}

fn raw(x: f64) -> Box<RawValue> {
    RawValue::from_string(fmt6(x)).expect("fixed-point decimal is valid JSON")
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    kind: ChannelKind,
    eta_min: f64,
    eta_max: f64,
    steps: usize,
    format: Format,
    out: Option<PathBuf>,
    mut methods: Vec<MethodArg>,
    seed: u64,
) -> CmdResult {
    if steps < 2 {
        return Err(Failure::Usage("--steps must be at least 2".into()));
    }
    if !(0.0 <= eta_min && eta_min <= eta_max && eta_max <= 1.0) {
        return Err(Failure::Usage(
            "need 0 <= --eta-min <= --eta-max <= 1".into(),
        ));
    }
    if !kind.takes_eta() {
        eprintln!("warning: the {kind} channel has fixed parameters; eta is ignored");
    }
    if methods.is_empty() {
        methods.push(default_method(kind));
    }
    methods.sort();
    methods.dedup();

    let mut rows = Vec::new();
    for i in 0..steps {
        let eta = if i == steps - 1 {
            eta_max
        } else {
            eta_min + (eta_max - eta_min) * i as f64 / (steps - 1) as f64
        };
        for &method in &methods {
            let channel_eta = if kind.takes_eta() { eta } else { 0.0 };
            let result = compute(kind, channel_eta, method, seed)?;
            rows.push(SweepRow {
                eta: raw(eta),
                method: result.method.name(),
                capacity_bits: raw(result.value_bits),
                psi: result.params.map(|p| raw(p.psi)),
                tau: result.params.map(|p| raw(p.tau)),
            });
        }
    }

    let text = match format {
        Format::Csv => {
            let mut text = String::from("eta,method,capacity_bits,psi,tau\n");
            for r in &rows {
                let opt =
                    |v: &Option<Box<RawValue>>| v.as_ref().map_or("", |v| v.get()).to_string();
                let _ = writeln!(
                    text,
                    "{},{},{},{},{}",
                    r.eta.get(),
                    r.method,
                    r.capacity_bits.get(),
                    opt(&r.psi),
                    opt(&r.tau)
                );
            }
            text
        }
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&rows).expect("rows serialize");
            text.push('\n');
            text
        }
    };

    match out {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| Failure::Rejected(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_optimize(
    kind: ChannelKind,
    eta: Option<f64>,
    states: usize,
    restarts: usize,
    seed: u64,
) -> CmdResult {
    let eta = resolve_eta(kind, eta)?;
    let channel = make_channel(kind, eta)?;
    let result = optimize_ensemble(&channel, states, &optimizer_config(seed, restarts))?;
    let mut out = String::new();
    let _ = writeln!(out, "{}", fmt6(result.capacity.value_bits));
    let _ = writeln!(out, "method: {}", result.capacity.method.name());
    let _ = writeln!(out, "states: {states}");
    let _ = writeln!(out, "seed: {seed}");
    let _ = writeln!(out, "convergence: {}", convergence_name(result.convergence));
    write_ensemble(&mut out, &result.capacity);
    print!("{out}");
    Ok(())
}

fn convergence_name(c: Convergence) -> &'static str {
    match c {
        Convergence::Converged => "converged",
        Convergence::IterationLimit => "iteration-limit",
    }
}

fn fmt_complex(re: f64, im: f64) -> String {
    let im_s = fmt6(im.abs());
    let sign = if im < 0.0 && im_s != "0.000000" {
        '-'
    } else {
        '+'
    };
    format!("{}{sign}{im_s}i", fmt6(re))
}

fn describe_channel(channel: &QuantumChannel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "channel: {}", channel.name());
    let _ = writeln!(
        out,
        "eta: {}",
        channel.eta().map_or_else(|| "n/a".to_string(), fmt6)
    );
    let _ = writeln!(out, "dim_in: {}", channel.dim_in());
    let _ = writeln!(out, "dim_out: {}", channel.dim_out());
    let _ = writeln!(out, "kraus_count: {}", channel.kraus().len());
    for (k, e) in channel.kraus().iter().enumerate() {
        for i in 0..e.rows() {
            let row: Vec<String> = (0..e.cols())
                .map(|j| fmt_complex(e.get(i, j).re, e.get(i, j).im))
                .collect();
            let _ = writeln!(out, "kraus[{k}].row[{i}]: {}", row.join(" "));
        }
    }
    match channel.affine_representation() {
        Ok(map) => {
            for (i, row) in map.linear.iter().enumerate() {
                let row: Vec<String> = row.iter().map(|&x| fmt6(x)).collect();
                let _ = writeln!(out, "T.row[{i}]: {}", row.join(" "));
            }
            let chi = if map.is_diagonal(CPTP_TOL) {
                map.diagonal().map(fmt6).join(" ")
            } else {
                "n/a".to_string()
            };
            let _ = writeln!(out, "chi: {chi}");
            let _ = writeln!(out, "t: {}", map.shift.map(fmt6).join(" "));
        }
        Err(_) => {
            let _ = writeln!(out, "affine: n/a");
        }
    }
    let unitality = match channel.is_unital() {
        Ok(true) => "unital",
        Ok(false) => "non-unital",
        Err(_) => "undefined",
    };
    let _ = writeln!(out, "unitality: {unitality}");
    out
}

fn cmd_describe(kind: ChannelKind, eta: Option<f64>) -> CmdResult {
    let eta = resolve_eta(kind, eta)?;
    let channel = make_channel(kind, eta)?;
    print!("{}", describe_channel(&channel));
    Ok(())
}

fn cmd_validate(path: PathBuf) -> CmdResult {
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Malformed(format!("cannot read {}: {e}", path.display())))?;
    let definition = ChannelDefinition::parse(&text).map_err(|e| match e {
        Error::Parse {
            line,
            column,
            message,
        } => Failure::Malformed(format!(
            "{}: parse error at line {line}, column {column}: {message}",
            path.display()
        )),
        other => Failure::Malformed(other.to_string()),
    })?;
    let kraus = definition
        .kraus_matrices()
        .map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))?;
    let deviation = completeness_deviation(&kraus)
        .map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))?;
    if deviation > CPTP_TOL {
        return Err(Failure::Rejected(format!(
            "rejected: not trace preserving, max deviation {}",
            fmt6(deviation)
        )));
    }
    println!("ok");
    Ok(())
}

fn cmd_audit(kind: ChannelKind, grid: Vec<f64>, seed: u64) -> CmdResult {
    let report = audit_channel(kind, &grid, &optimizer_config(seed, 32))?;
    let mut out = String::new();
    let _ = writeln!(out, "channel: {}", report.kind.name());
    let _ = writeln!(
        out,
        "eta,reference_bits,orthogonal_bits,optimizer_n2,optimizer_n3,gap,convergence,status"
    );
    for row in &report.rows {
        let status = if row.falls_short() {
            "short"
        } else if row.exceeds_reference() {
            "exceeds"
        } else {
            "ok"
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{status}",
            row.eta.map_or_else(String::new, fmt6),
            fmt6(row.reference_bits),
            row.orthogonal_bits.map_or_else(String::new, fmt6),
            fmt6(row.optimizer_n2),
            fmt6(row.optimizer_n3),
            fmt6(row.gap()),
            convergence_name(row.convergence),
        );
    }
    let _ = writeln!(out, "exceedances: {}", report.exceedances().count());
    print!("{out}");
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let seed = cli.seed;
    match cli.command {
        Command::Capacity { kind, eta, method } => cmd_capacity(kind, eta, method, seed),
        Command::Sweep {
            kind,
            eta_min,
            eta_max,
            steps,
            format,
            out,
            method,
        } => cmd_sweep(kind, eta_min, eta_max, steps, format, out, method, seed),
        Command::Optimize {
            kind,
            eta,
            states,
            restarts,
        } => cmd_optimize(kind, eta, states, restarts, seed),
        Command::Describe { kind, eta } => cmd_describe(kind, eta),
        Command::Validate { file } => cmd_validate(file),
        Command::Audit { kind, grid } => cmd_audit(kind, grid, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            let mut cmd = Cli::command();
            cmd.error(clap::error::ErrorKind::ValueValidation, msg)
                .exit()
        }
        Err(Failure::Malformed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Rejected(msg)) => {
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
