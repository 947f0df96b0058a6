use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gensumset::combinat::rep_counts_all;
use gensumset::density::{DEFAULT_SERIES_KMAX, DEFAULT_SERIES_TOL};
use gensumset::experiments;
use gensumset::sampling::sample_set;
use gensumset::sumset::{gen_sumset, tuple_statistics};
use gensumset::{
    rational_serde, Budgets, ExperimentConfig, PhaseConstantsF64, ProbabilitySpec,
    SampleParameters, SampledSet, SignedCombination, VERSION,
};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "gensumset",
    version,
    about = "Generalized sumsets of random subsets of {0..N}"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Phase constants b_{h,k} and critical-decay values g(c; s, d)
    Constants(ConstantsArgs),
    /// Exact representation counts R(n; s, d) for every n
    Rcount(RcountArgs),
    /// Draw a random subset of {0..N} and write it as a set file
    Sample(SampleArgs),
    /// Generalized sumset A_{s,d} of a set file
    Sumset(SumsetArgs),
    /// Collision counts X_k of a set file (small sets only)
    Xk(XkArgs),
    /// Run a Monte Carlo experiment from a JSON config
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Write JSON (the default)
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Write CSV
    #[arg(long)]
    csv: bool,
    /// Output file; standard output if absent
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize, Clone, Copy)]
struct BudgetArgs {
    /// Maximum tuples visited by an exhaustive enumeration
    #[arg(long = "budget-enumeration", default_value_t = Budgets::default().enumeration)]
    budget_enumeration: u64,
    /// Maximum entries in an exact count table
    #[arg(long = "budget-table", default_value_t = Budgets::default().table_entries)]
    budget_table: u64,
    /// Maximum bits in a sumset membership vector
    #[arg(long = "budget-bits", default_value_t = Budgets::default().bits)]
    budget_bits: u64,
}

impl BudgetArgs {
    fn budgets(&self) -> Budgets {
        Budgets {
            enumeration: self.budget_enumeration,
            table_entries: self.budget_table,
            bits: self.budget_bits,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct ConstantsArgs {
    /// Number of summands h = s + d
    #[arg(long, default_value_t = 2)]
    h: u32,
    /// Number of tabulated b_{h,k}
    #[arg(long, default_value_t = 10)]
    kmax: usize,
    /// Values of c at which g(c; s, d) is evaluated for every (s, d) with s + d = h
    #[arg(long, num_args = 1.., default_values_t = [1.0])]
    c: Vec<f64>,
    /// Maximum series terms for g
    #[arg(long = "series-kmax", default_value_t = DEFAULT_SERIES_KMAX)]
    series_kmax: usize,
    /// Relative truncation tolerance for g
    #[arg(long, default_value_t = DEFAULT_SERIES_TOL)]
    tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct ComboArgs {
    /// Number of plus signs
    #[arg(long)]
    s: u32,
    /// Number of minus signs
    #[arg(long, default_value_t = 0)]
    d: u32,
}

impl ComboArgs {
    fn combo(&self) -> gensumset::Result<SignedCombination> {
        SignedCombination::new(self.s, self.d)
    }
}

#[derive(Args, Debug, Serialize)]
struct RcountArgs {
    /// Upper end of the ground set {0..N}
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n_max: u64,
    #[command(flatten)]
    #[serde(flatten)]
    combo: ComboArgs,
    #[command(flatten)]
    #[serde(flatten)]
    budgets: BudgetArgs,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    /// Upper end of the ground set {0..N}
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n_max: u64,
    /// Decay constant: p = c N^{-delta}
    #[arg(long, requires = "delta", conflicts_with = "p")]
    c: Option<f64>,
    /// Decay exponent as an exact rational, e.g. "2/3"
    #[arg(long, requires = "c")]
    delta: Option<String>,
    /// Fixed inclusion probability
    #[arg(long)]
    p: Option<f64>,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trial index (sub-stream of the seed)
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// Output file; standard output if absent
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SumsetArgs {
    /// Set file written by `sample`
    #[arg(long, value_name = "PATH")]
    set: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    combo: ComboArgs,
    #[command(flatten)]
    #[serde(flatten)]
    budgets: BudgetArgs,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct XkArgs {
    /// Set file written by `sample`
    #[arg(long, value_name = "PATH")]
    set: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    combo: ComboArgs,
    /// Largest k for which X_k is reported
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    #[command(flatten)]
    #[serde(flatten)]
    budgets: BudgetArgs,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// JSON experiment config
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the seed in the config
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for one per core; the report does not depend on it
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Refused(String),
    Io(io::Error),
}

impl From<gensumset::Error> for Failure {
    fn from(e: gensumset::Error) -> Self {
        match e {
            gensumset::Error::Io(e) => Failure::Io(e),
            e if e.is_resource_refusal() => Failure::Refused(e.to_string()),
            e => Failure::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Refused(msg)) => {
            eprintln!("refused: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Constants(args) => constants(args),
        Command::Rcount(args) => rcount(args),
        Command::Sample(args) => sample(args),
        Command::Sumset(args) => sumset(args),
        Command::Xk(args) => xk(args),
        Command::Experiment(args) => experiment(args),
    }
}

fn provenance(command: &str, config: &impl Serialize) -> Value {
    json!({
        "tool": "gensumset",
        "version": VERSION,
        "command": command,
        "config": config,
    })
}

/// Provenance as `#` comment lines ahead of a CSV header.
fn csv_preamble(out: &mut Vec<u8>, provenance: &Value) -> io::Result<()> {
    writeln!(
        out,
        "# gensumset {VERSION} {}",
        provenance["command"].as_str().unwrap_or("")
    )?;
    writeln!(out, "# config: {}", provenance["config"])
}

fn emit(bytes: &[u8], out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}

fn emit_json(value: &Value, out: Option<&Path>) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    Ok(emit(text.as_bytes(), out)?)
}

fn read_set(path: &Path) -> CliResult<SampledSet> {
    let file = File::open(path).map_err(|e| {
        Failure::Config(format!("invalid set: cannot open {}: {e}", path.display()))
    })?;
    Ok(SampledSet::read_from(BufReader::new(file))?)
}

fn check_positive(name: &str, value: f64) -> CliResult {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Failure::Config(format!(
            "invalid {name}: {value} is not a positive number"
        )))
    }
}

fn constants(args: ConstantsArgs) -> CliResult {
    for &c in &args.c {
        check_positive("c", c)?;
    }
    check_positive("tol", args.tol)?;
    let table = PhaseConstantsF64::new(args.h, args.kmax)?;
    let series = PhaseConstantsF64::new(args.h, args.series_kmax)?;
    let prov = provenance("constants", &args);
    let out = args.output.out.as_deref();
    if args.output.csv {
        let mut buf = Vec::new();
        csv_preamble(&mut buf, &prov)?;
        writeln!(buf, "k,b_hk")?;
        for (i, b) in table.values().iter().enumerate() {
            writeln!(buf, "{},{b}", i + 1)?;
        }
        return Ok(emit(&buf, out)?);
    }
    let mut g = Vec::new();
    for &c in &args.c {
        for combo in SignedCombination::all_with_h(args.h) {
            let v = series.g_series(c, combo, args.tol)?;
            g.push(json!({
                "c": c,
                "s": combo.s(),
                "d": combo.d(),
                "value": v.value,
                "terms_used": v.terms_used,
            }));
        }
    }
    emit_json(
        &json!({
            "provenance": prov,
            "h": args.h,
            "K_max": args.kmax,
            "quadrature_nodes": table.quadrature_nodes(),
            "b": table.values(),
            "g": g,
        }),
        out,
    )
}

fn rcount(args: RcountArgs) -> CliResult {
    let table = rep_counts_all(args.combo.combo()?, args.n_max, &args.budgets.budgets())?;
    let prov = provenance("rcount", &args);
    let out = args.output.out.as_deref();
    if args.output.csv {
        let mut buf = Vec::new();
        csv_preamble(&mut buf, &prov)?;
        table.write_csv(&mut buf)?;
        return Ok(emit(&buf, out)?);
    }
    // Counts outgrow JSON numbers quickly, so they are decimal strings.
    let counts: Vec<Value> = table
        .iter()
        .map(|(n, c)| json!({ "n": n, "count": c.to_string() }))
        .collect();
    emit_json(
        &json!({
            "provenance": prov,
            "s": table.combo.s(),
            "d": table.combo.d(),
            "N": table.n_max,
            "total": table.total().to_string(),
            "counts": counts,
        }),
        out,
    )
}

fn sample(args: SampleArgs) -> CliResult {
    let spec = match (args.c, &args.delta, args.p) {
        (Some(c), Some(delta), None) => ProbabilitySpec::Decay {
            c,
            delta: rational_serde::parse(delta)
                .map_err(|e| Failure::Config(format!("invalid delta: {e}")))?,
        },
        (None, None, Some(p)) => ProbabilitySpec::Fixed { p },
        _ => {
            return Err(Failure::Config(
                "invalid p: give either --c with --delta, or --p".into(),
            ))
        }
    };
    let params = SampleParameters::new(args.n_max, spec, args.seed, args.trial)?;
    let set = sample_set(&params);
    // The set file format has no room for comments; provenance goes to stderr.
    eprintln!("{}", provenance("sample", &args));
    let mut buf = Vec::new();
    set.write_to(&mut buf)?;
    Ok(emit(&buf, args.out.as_deref())?)
}

fn sumset(args: SumsetArgs) -> CliResult {
    let set = read_set(&args.set)?;
    let result = gen_sumset(&set, args.combo.combo()?, &args.budgets.budgets())?;
    let prov = provenance("sumset", &args);
    let out = args.output.out.as_deref();
    if args.output.csv {
        let mut buf = Vec::new();
        csv_preamble(&mut buf, &prov)?;
        result.write_csv(&mut buf)?;
        return Ok(emit(&buf, out)?);
    }
    let mut value = serde_json::to_value(result.summary()).expect("summary serializes");
    value["provenance"] = prov;
    emit_json(&value, out)
}

fn xk(args: XkArgs) -> CliResult {
    let set = read_set(&args.set)?;
    let stats = tuple_statistics(
        &set,
        args.combo.combo()?,
        args.kmax,
        &args.budgets.budgets(),
    )?;
    let prov = provenance("xk", &args);
    let out = args.output.out.as_deref();
    if args.output.csv {
        let mut buf = Vec::new();
        csv_preamble(&mut buf, &prov)?;
        writeln!(buf, "k,x_k,partial_sum")?;
        for k in 1..=stats.k_max() {
            writeln!(buf, "{k},{},{}", stats.x[k - 1], stats.alternating_sum(k))?;
        }
        return Ok(emit(&buf, out)?);
    }
    let x: Vec<String> = stats.x.iter().map(|v| v.to_string()).collect();
    let partial: Vec<String> = (1..=stats.k_max())
        .map(|m| stats.alternating_sum(m).to_string())
        .collect();
    emit_json(
        &json!({
            "provenance": prov,
            "s": stats.combo.s(),
            "d": stats.combo.d(),
            "N": stats.n_max,
            "cardinality": stats.distinct_values(),
            "max_multiplicity": stats.max_multiplicity(),
            "X": x,
            "partial_sums": partial,
            "repeat_profile": stats.repeat_profile,
        }),
        out,
    )
}

fn experiment(args: ExperimentArgs) -> CliResult {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        Failure::Config(format!(
            "invalid config: cannot read {}: {e}",
            args.config.display()
        ))
    })?;
    let mut config = ExperimentConfig::from_json(&text)
        .map_err(|e| Failure::Config(format!("invalid config: {e}")))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let report = experiments::run(&config, args.workers)?;
    let out = args.output.out.as_deref();
    if args.output.csv {
        let mut buf = Vec::new();
        let config_value = serde_json::to_value(&report.config).expect("config serializes");
        csv_preamble(&mut buf, &provenance("experiment", &config_value))?;
        report.write_csv(&mut buf)?;
        return Ok(emit(&buf, out)?);
    }
    let mut text = report.to_json()?;
    text.push('\n');
    Ok(emit(text.as_bytes(), out)?)
}
