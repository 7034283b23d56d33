//! `pickseq`: optimal non-interleaving picking sequences from the command
//! line. Exit codes: 0 success, 1 input error, 2 internal invariant failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pickseq::assignment::{
    adversarial_instance, price_exact, proposition_lower_bounds, upper_bounds, PriceReport,
    DEFAULT_PERMUTATION_CAP,
};
use pickseq::elicitation::{average_scoring_vector, concentration, LongRecords, ScoreMatrix};
use pickseq::numfmt::g6;
use pickseq::oracle::{
    brute_force_optimize, nondecreasing_optimum_exists, DEFAULT_ORACLE_CAP,
};
use pickseq::simulator::{run_simulation, SimConfig, SimReport};
use pickseq::sweep::{sweep, sweep_to_csv, ScoringSpec, SweepParam, SweepRow, SweepSpec};
use pickseq::utility::UtilityTable;
use pickseq::{
    approx_eq, make_scoring, optimize, Error, ItemPolarity, OptResult, PickVector, ProbModel,
    Result, ScoringKind, ScoringVector, WelfareKind,
};

#[derive(Parser)]
#[command(
    name = "pickseq",
    version,
    about = "Optimal constrained picking sequences: tables, optimization, simulation, price analysis, elicitation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the welfare-optimal pick vector for a model and scoring
    Optimize(OptimizeArgs),
    /// Print the expected-utility table u(k, t)
    Utable(UtableArgs),
    /// Monte Carlo simulation of a fixed pick vector
    Simulate(SimulateArgs),
    /// Re-optimize while sweeping m, lambda, or n
    Sweep(SweepArgs),
    /// Price of assigning agents to picking positions
    Price(PriceArgs),
    /// Ingest elicited utility data
    Elicit(ElicitArgs),
    /// Check the optimizer against exhaustive enumeration over a grid
    OracleCheck(OracleCheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write output to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Number of agents n
    #[arg(long)]
    agents: usize,
    /// Number of items m
    #[arg(long)]
    items: usize,
    /// Scoring vector: borda | lex | orderstat | file:<path>
    #[arg(long, default_value = "borda")]
    scoring: String,
    /// Profile model: fi | fc | mix:<lambda>
    #[arg(long, default_value = "fi")]
    model: ProbModel,
    /// Welfare kind: u | e | n
    #[arg(long, default_value = "u")]
    welfare: WelfareKind,
    /// Treat scores as costs and minimize social cost
    #[arg(long)]
    bads: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct UtableArgs {
    /// Number of items m
    #[arg(long)]
    items: usize,
    /// Scoring vector: borda | lex | orderstat | file:<path>
    #[arg(long, default_value = "borda")]
    scoring: String,
    /// Profile model: fi | fc | mix:<lambda>
    #[arg(long, default_value = "fi")]
    model: ProbModel,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Profile model: fi | fc | mix:<lambda>
    #[arg(long, default_value = "fi")]
    model: ProbModel,
    /// Pick vector, e.g. 2,2,3
    #[arg(long)]
    k: String,
    /// Scoring vector: borda | lex | orderstat | file:<path>
    #[arg(long, default_value = "borda")]
    scoring: String,
    /// Optional cross-check of the item count implied by --k
    #[arg(long)]
    items: Option<usize>,
    /// Number of sampled profiles
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// Master RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Swept parameter: m | lambda | n
    #[arg(long)]
    param: SweepParam,
    /// First swept value
    #[arg(long)]
    from: f64,
    /// Last swept value (inclusive)
    #[arg(long)]
    to: f64,
    /// Step between swept values
    #[arg(long)]
    step: f64,
    /// Fixed agent count (required unless sweeping n)
    #[arg(long)]
    agents: Option<usize>,
    /// Fixed item count (required unless sweeping m)
    #[arg(long)]
    items: Option<usize>,
    /// Scoring vector: borda | lex | orderstat | file:<path>
    #[arg(long, default_value = "borda")]
    scoring: String,
    /// Fixed model (forbidden when sweeping lambda): fi | fc | mix:<lambda>
    #[arg(long)]
    model: Option<ProbModel>,
    /// Welfare kind: u | e | n
    #[arg(long, default_value = "u")]
    welfare: WelfareKind,
    /// Treat scores as costs and minimize social cost
    #[arg(long)]
    bads: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PriceArgs {
    /// Build the adversarial instance: n,d (m = n*d items)
    #[arg(long, conflicts_with = "profile")]
    adversarial: Option<String>,
    /// Load a concrete instance from a JSON file
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Pick vector override, e.g. 2,2,2 (profile mode)
    #[arg(long)]
    k: Option<String>,
    /// Scoring vector: borda | lex | orderstat | file:<path>
    #[arg(long, default_value = "borda")]
    scoring: String,
    /// Welfare kind: u | e | n
    #[arg(long, default_value = "u")]
    welfare: WelfareKind,
    /// Cap on the number of agents (n! orderings are enumerated)
    #[arg(long, default_value_t = DEFAULT_PERMUTATION_CAP)]
    perm_cap: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ElicitArgs {
    /// Matrix-form CSV: one participant per row, no header
    #[arg(long, conflicts_with = "long")]
    scores: Option<PathBuf>,
    /// Long-form CSV with header participant,item,score
    #[arg(long)]
    long: Option<PathBuf>,
    /// Also write the averaged vector as a one-line scoring CSV
    #[arg(long)]
    emit_scoring: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OracleCheckArgs {
    /// Refuse instances with more compositions than this
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: u64,
    /// Largest agent count in the grid
    #[arg(long, default_value_t = 4)]
    max_agents: usize,
    /// Largest item count in the grid
    #[arg(long, default_value_t = 10)]
    max_items: usize,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Internal(_) => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Optimize(args) => cmd_optimize(args),
        Command::Utable(args) => cmd_utable(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Price(args) => cmd_price(args),
        Command::Elicit(args) => cmd_elicit(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    }
}

/// Resolves `borda | lex | orderstat | file:<path>` into a concrete vector
/// of length `m`.
fn resolve_scoring(spec: &str, m: usize) -> Result<ScoringVector> {
    match spec.strip_prefix("file:") {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let s = ScoringVector::from_csv(&text)?;
            if s.m() != m {
                return Err(Error::Dimension(format!(
                    "scoring file {path} has {} entries but the instance needs {m}",
                    s.m()
                )));
            }
            Ok(s)
        }
        None => make_scoring(spec.parse::<ScoringKind>()?, m),
    }
}

fn resolve_scoring_spec(spec: &str) -> Result<ScoringSpec> {
    match spec.strip_prefix("file:") {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Ok(ScoringSpec::Custom(ScoringVector::from_csv(&text)?))
        }
        None => Ok(ScoringSpec::Kind(spec.parse::<ScoringKind>()?)),
    }
}

fn parse_counts(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|f| {
            f.trim()
                .parse::<usize>()
                .map_err(|e| Error::Input(format!("bad count {:?}: {e}", f.trim())))
        })
        .collect()
}

fn polarity(bads: bool) -> ItemPolarity {
    if bads {
        ItemPolarity::Bads
    } else {
        ItemPolarity::Goods
    }
}

fn emit(output: &OutputArgs, mut text: String) -> Result<()> {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &output.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json<T: Serialize>(output: &OutputArgs, value: &T) -> Result<()> {
    emit(output, serde_json::to_string_pretty(value)?)
}

fn opt_result_csv(result: &OptResult) -> String {
    let mut out = String::from("field,values\n");
    out.push_str(&format!(
        "k,{}\n",
        result
            .k
            .counts()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";")
    ));
    out.push_str(&format!("value,{}\n", g6(result.value)));
    out.push_str(&format!(
        "agent_eus,{}\n",
        result
            .agent_eus
            .iter()
            .map(|v| g6(*v))
            .collect::<Vec<_>>()
            .join(";")
    ));
    out.push_str(&format!("model,{}\n", result.model));
    out.push_str(&format!("welfare,{}\n", result.welfare));
    out
}

fn cmd_optimize(args: OptimizeArgs) -> Result<()> {
    let s = resolve_scoring(&args.scoring, args.items)?;
    let table = UtilityTable::build(args.model, &s)?;
    let result = optimize(args.agents, &table, args.welfare, polarity(args.bads))?;
    match args.output.format {
        Format::Json => emit_json(&args.output, &result),
        Format::Csv => emit(&args.output, opt_result_csv(&result)),
    }
}

#[derive(Serialize)]
struct TableReport {
    m: usize,
    model: ProbModel,
    /// Row `k` holds `u(k, 0..=m-k)`.
    rows: Vec<Vec<f64>>,
}

fn cmd_utable(args: UtableArgs) -> Result<()> {
    let s = resolve_scoring(&args.scoring, args.items)?;
    let table = UtilityTable::build(args.model, &s)?;
    match args.output.format {
        Format::Csv => emit(&args.output, table.to_csv()),
        Format::Json => {
            let rows = (0..=table.m())
                .map(|k| (0..=(table.m() - k)).map(|t| table.value(k, t)).collect())
                .collect();
            emit_json(
                &args.output,
                &TableReport {
                    m: table.m(),
                    model: table.model(),
                    rows,
                },
            )
        }
    }
}

fn sim_report_csv(report: &SimReport) -> String {
    let mut out = String::from("agent,mean,stderr\n");
    for (i, (mean, stderr)) in report
        .agent_mean
        .iter()
        .zip(&report.agent_stderr)
        .enumerate()
    {
        out.push_str(&format!("{},{},{}\n", i + 1, g6(*mean), g6(*stderr)));
    }
    out.push_str("welfare,mean,min,max,q25,median,q75\n");
    for (name, s) in [
        ("utilitarian", &report.utilitarian),
        ("egalitarian", &report.egalitarian),
        ("nash", &report.nash),
    ] {
        out.push_str(&format!(
            "{name},{},{},{},{},{},{}\n",
            g6(s.mean),
            g6(s.min),
            g6(s.max),
            g6(s.q25),
            g6(s.median),
            g6(s.q75)
        ));
    }
    out
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let counts = parse_counts(&args.k)?;
    let k = PickVector::new(counts)?;
    if let Some(items) = args.items {
        if items != k.m() {
            return Err(Error::Dimension(format!(
                "--items {items} but --k distributes {} items",
                k.m()
            )));
        }
    }
    let s = resolve_scoring(&args.scoring, k.m())?;
    let cfg = SimConfig::new(args.model, k, s, args.samples, args.seed)?;
    let report = run_simulation(&cfg);
    match args.output.format {
        Format::Json => emit_json(&args.output, &report),
        Format::Csv => emit(&args.output, sim_report_csv(&report)),
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let spec = SweepSpec {
        param: args.param,
        start: args.from,
        stop: args.to,
        step: args.step,
        agents: args.agents,
        items: args.items,
        scoring: resolve_scoring_spec(&args.scoring)?,
        model: args.model,
        welfare: args.welfare,
        polarity: polarity(args.bads),
    };
    let rows: Vec<SweepRow> = sweep(&spec)?;
    match args.output.format {
        Format::Json => emit_json(&args.output, &rows),
        Format::Csv => emit(&args.output, sweep_to_csv(&rows)),
    }
}

fn price_report_csv(report: &PriceReport) -> String {
    let mut out = String::from(
        "welfare,exact_max,exact_min,ratio,infinite,lower_bound,upper_bound\n",
    );
    let bound = |b: &Option<f64>| b.map(g6).unwrap_or_default();
    out.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        report.welfare,
        g6(report.exact_max),
        g6(report.exact_min),
        g6(report.ratio),
        report.infinite,
        bound(&report.lower_bound),
        bound(&report.upper_bound),
    ));
    out
}

fn cmd_price(args: PriceArgs) -> Result<()> {
    let mut report;
    match (&args.adversarial, &args.profile) {
        (Some(pair), None) => {
            let parts = parse_counts(pair)?;
            if parts.len() != 2 {
                return Err(Error::Input(format!(
                    "--adversarial wants n,d but got {pair:?}"
                )));
            }
            let (n, d) = (parts[0], parts[1]);
            let s = resolve_scoring(&args.scoring, n.checked_mul(d).ok_or(
                Error::Overflow("adversarial instance size"),
            )?)?;
            let (profile, k) = adversarial_instance(n, d, &s)?;
            report = price_exact(&profile, &k, &s, args.welfare, args.perm_cap)?;
            report.lower_bound = Some(proposition_lower_bounds(n, d, &s)?.get(args.welfare));
            report.upper_bound = Some(upper_bounds(&k, &s)?.get(args.welfare));
        }
        (None, Some(path)) => {
            let file = pickseq::io::InstanceFile::from_json(&std::fs::read_to_string(path)?)?;
            let profile = file.profile()?;
            let k = match &args.k {
                Some(text) => PickVector::new(parse_counts(text)?)?,
                None => file.pick_vector()?.ok_or_else(|| {
                    Error::Input("no pick vector: add \"k\" to the file or pass --k".into())
                })?,
            };
            let s = match file.scoring()? {
                Some(s) => s,
                None => resolve_scoring(&args.scoring, profile.m())?,
            };
            report = price_exact(&profile, &k, &s, args.welfare, args.perm_cap)?;
            report.upper_bound = Some(upper_bounds(&k, &s)?.get(args.welfare));
        }
        _ => {
            return Err(Error::Input(
                "price needs exactly one of --adversarial n,d or --profile file.json".into(),
            ))
        }
    }
    match args.output.format {
        Format::Json => emit_json(&args.output, &report),
        Format::Csv => emit(&args.output, price_report_csv(&report)),
    }
}

#[derive(Serialize)]
struct AveragedScores {
    participants: usize,
    scores: Vec<f64>,
}

fn cmd_elicit(args: ElicitArgs) -> Result<()> {
    match (&args.scores, &args.long) {
        (Some(path), None) => {
            let (matrix, warnings) = ScoreMatrix::parse_csv(&std::fs::read_to_string(path)?)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let s = average_scoring_vector(&matrix)?;
            if let Some(out) = &args.emit_scoring {
                std::fs::write(out, format!("{}\n", s.to_csv()))?;
            }
            let report = AveragedScores {
                participants: matrix.participants(),
                scores: s.scores().to_vec(),
            };
            match args.output.format {
                Format::Json => emit_json(&args.output, &report),
                Format::Csv => emit(&args.output, s.to_csv()),
            }
        }
        (None, Some(path)) => {
            if args.emit_scoring.is_some() {
                return Err(Error::Input(
                    "--emit-scoring applies to --scores datasets only".into(),
                ));
            }
            let (records, warnings) = LongRecords::parse_csv(&std::fs::read_to_string(path)?)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let report = concentration(&records)?;
            match args.output.format {
                Format::Json => emit_json(&args.output, &report),
                Format::Csv => emit(
                    &args.output,
                    format!(
                        "alpha,lambda,pairs_used,pairs_skipped\n{},{},{},{}\n",
                        g6(report.alpha),
                        g6(report.lambda),
                        report.pairs_used,
                        report.pairs_skipped
                    ),
                ),
            }
        }
        _ => Err(Error::Input(
            "elicit needs exactly one of --scores file.csv or --long file.csv".into(),
        )),
    }
}

#[derive(Serialize)]
struct OracleMismatch {
    scoring: String,
    model: ProbModel,
    agents: usize,
    items: usize,
    welfare: WelfareKind,
    polarity: ItemPolarity,
    dp_value: f64,
    brute_value: f64,
}

#[derive(Serialize)]
struct OracleCheckReport {
    cases: usize,
    mismatches: Vec<OracleMismatch>,
    /// Egalitarian optimal sets lacking a non-decreasing member (expected
    /// empty).
    egalitarian_nondecreasing_violations: usize,
    /// Evidence for the open conjecture: how many goods-polarity Nash
    /// optimal sets contained a non-decreasing vector.
    nash_sets_checked: usize,
    nash_sets_with_nondecreasing_optimum: usize,
}

fn cmd_oracle_check(args: OracleCheckArgs) -> Result<()> {
    let scorings = [
        ("borda", ScoringKind::Borda),
        ("lex", ScoringKind::Lexicographic),
        ("orderstat", ScoringKind::OrderStatistic),
    ];
    let models = [
        ProbModel::FullCorrelation,
        ProbModel::FullIndependence,
        ProbModel::Mixture(0.5),
    ];
    let mut report = OracleCheckReport {
        cases: 0,
        mismatches: Vec::new(),
        egalitarian_nondecreasing_violations: 0,
        nash_sets_checked: 0,
        nash_sets_with_nondecreasing_optimum: 0,
    };
    for (name, kind) in scorings {
        for m in 0..=args.max_items {
            let s = make_scoring(kind, m)?;
            for model in models {
                let table = UtilityTable::build(model, &s)?;
                for n in 1..=args.max_agents {
                    for welfare in WelfareKind::ALL {
                        for pol in [ItemPolarity::Goods, ItemPolarity::Bads] {
                            let dp = optimize(n, &table, welfare, pol)?;
                            let brute =
                                brute_force_optimize(n, &table, welfare, pol, args.oracle_cap)?;
                            report.cases += 1;
                            if !approx_eq(dp.value, brute.best_value) {
                                report.mismatches.push(OracleMismatch {
                                    scoring: name.to_string(),
                                    model,
                                    agents: n,
                                    items: m,
                                    welfare,
                                    polarity: pol,
                                    dp_value: dp.value,
                                    brute_value: brute.best_value,
                                });
                            }
                            if welfare == WelfareKind::Egalitarian
                                && !nondecreasing_optimum_exists(&brute.optimal_set)
                            {
                                report.egalitarian_nondecreasing_violations += 1;
                            }
                            if welfare == WelfareKind::Nash && pol == ItemPolarity::Goods {
                                report.nash_sets_checked += 1;
                                if nondecreasing_optimum_exists(&brute.optimal_set) {
                                    report.nash_sets_with_nondecreasing_optimum += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mismatches = report.mismatches.len();
    match args.output.format {
        Format::Json => emit_json(&args.output, &report)?,
        Format::Csv => emit(
            &args.output,
            format!(
                "cases,mismatches,egalitarian_nondecreasing_violations,nash_sets_checked,nash_sets_with_nondecreasing_optimum\n{},{},{},{},{}\n",
                report.cases,
                mismatches,
                report.egalitarian_nondecreasing_violations,
                report.nash_sets_checked,
                report.nash_sets_with_nondecreasing_optimum
            ),
        )?,
    }
    if mismatches > 0 {
        return Err(Error::Internal(format!(
            "{mismatches} optimizer/oracle mismatches (see report)"
        )));
    }
    Ok(())
}
