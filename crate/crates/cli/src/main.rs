//! `lgga` command-line tool. Results go to stdout, diagnostics to stderr.
//! Exit codes: 1 for unreadable or malformed inputs, 2 for configuration
//! errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use lgga::bench::{
    self, data_efficiency_sweep, experiment_classic_vs_lgga, efficiency_csv, BenchmarkProblem,
    Experiment1Config, SweepConfig,
};
use lgga::dataset::{CsvOptions, Dataset};
use lgga::engine::{Engine, Mode, RunConfig, RunResult};
use lgga::expr::{
    parse_with_names, semantically_equivalent, Alphabet, BinaryOp, ConstantPolicy,
    EquivalenceCheck, UnaryOp,
};
use lgga::truths::{parse_truths, AuxiliaryTruth};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "lgga", version, about = "Symbolic regression guided by auxiliary truths")]
struct Cli {
    /// Seed for every random choice; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for an equation; prints it and writes run artifacts.
    Fit(RunArgs),
    /// Grow a dataset with counterexamples; writes the augmented CSV.
    Augment(RunArgs),
    /// Run a benchmark experiment.
    Bench(BenchArgs),
    /// Sample a benchmark problem's ground truth.
    GenData(GenDataArgs),
    /// Test two expressions for numerical equivalence.
    Equiv(EquivArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Input CSV: one column per variable, then the label.
    #[arg(long)]
    data: PathBuf,
    /// Auxiliary truths, one per line.
    #[arg(long)]
    truths: Option<PathBuf>,
    /// JSON run config; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for `fit`, output CSV path for `augment`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    timeout_secs: Option<f64>,
    /// Omit the provenance column from written CSVs.
    #[arg(long)]
    strip_provenance: bool,
    /// Comma-separated unary operators.
    #[arg(long, default_value = "neg,sin,cos")]
    unary: String,
    /// Comma-separated binary operators.
    #[arg(long, default_value = "add,sub,mul,div")]
    binary: String,
    /// `none`, `int:LO:HI` or `uniform:LO:HI`.
    #[arg(long, default_value = "int:-1:1", allow_hyphen_values = true)]
    constants: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    /// The sixteen tabulated problems.
    Table1,
    /// All sixteen problems plus the unverified extra one.
    Extended,
}

#[derive(Args)]
#[command(group(ArgGroup::new("target").required(true).args(["problem", "suite"])))]
struct BenchArgs {
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    experiment: u8,
    /// Directory for JSON results and the efficiency CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run config shared by every run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    timeout_secs: Option<f64>,
    /// Seeds per problem for experiment 1.
    #[arg(long)]
    seeds: Option<usize>,
    /// Initial oracle sample size for experiment 1.
    #[arg(long)]
    initial_m: Option<usize>,
    /// Trials per problem for experiment 2.
    #[arg(long)]
    trials: Option<usize>,
    /// Largest dataset size probed by experiment 2.
    #[arg(long)]
    max_points: Option<usize>,
    /// Independent classic runs per dataset in experiment 2.
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquivArgs {
    a: String,
    b: String,
    /// Take variable names and ranges from a benchmark problem.
    #[arg(long, conflicts_with = "vars")]
    problem: Option<String>,
    /// Comma-separated variable names.
    #[arg(long)]
    vars: Option<String>,
    /// Comma-separated `lo:hi` ranges, one per variable; default 1:5.
    #[arg(long, allow_hyphen_values = true)]
    ranges: Option<String>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 1e-6)]
    rtol: f64,
}

enum Failure {
    Input(String),
    Config(String),
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{context}: {e}"))
}

fn config_err<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => fit(&args, cli.seed),
        Command::Augment(args) => augment(&args, cli.seed),
        Command::Bench(args) => run_bench(&args, cli.seed),
        Command::GenData(args) => gen_data(&args, cli.seed),
        Command::Equiv(args) => equiv(&args, cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Failure> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            RunConfig::from_json(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn run_config(args: &RunArgs, seed: Option<u64>) -> Result<RunConfig, Failure> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(m) = &args.mode {
        config.mode = m.parse().map_err(config_err)?;
    }
    if let Some(l) = args.lambda {
        config.lambda_truth = l;
    }
    if let Some(g) = args.generations {
        config.num_generations = g;
    }
    if let Some(t) = args.timeout_secs {
        config.timeout_secs = Some(t);
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate().map_err(config_err)?;
    Ok(config)
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn build_alphabet(args: &RunArgs, names: &[String]) -> Result<Alphabet, Failure> {
    let unary = split_list(&args.unary)
        .map(|n| UnaryOp::from_name(n).ok_or_else(|| Failure::Config(format!("unknown unary operator `{n}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let binary = split_list(&args.binary)
        .map(|n| BinaryOp::from_name(n).ok_or_else(|| Failure::Config(format!("unknown binary operator `{n}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    Alphabet::with_ops(names.iter().cloned(), unary, binary, args.constants.parse::<ConstantPolicy>().map_err(config_err)?)
        .map_err(config_err)
}

fn load_truths(path: Option<&Path>, names: &[String]) -> Result<Vec<AuxiliaryTruth>, Failure> {
    let Some(path) = path else {
        return Ok(Vec::new());
    };
    let text = fs::read_to_string(path).map_err(input(&path.display().to_string()))?;
    parse_truths(&text, names).map_err(input(&path.display().to_string()))
}

struct Prepared {
    config: RunConfig,
    data: Dataset,
    truths: Vec<AuxiliaryTruth>,
    alphabet: Alphabet,
}

fn prepare(args: &RunArgs, seed: Option<u64>) -> Result<Prepared, Failure> {
    let config = run_config(args, seed)?;
    let data = Dataset::load_csv(&args.data).map_err(input(&args.data.display().to_string()))?;
    if data.is_empty() {
        return Err(Failure::Input(format!("{}: no data rows", args.data.display())));
    }
    let alphabet = build_alphabet(args, data.names())?;
    let truths = load_truths(args.truths.as_deref(), data.names())?;
    Ok(Prepared {
        config,
        data,
        truths,
        alphabet,
    })
}

fn execute(p: &Prepared) -> Result<RunResult, Failure> {
    let engine = Engine::new(p.config.clone()).map_err(config_err)?;
    engine
        .run(p.data.clone(), &p.truths, &p.alphabet)
        .map_err(|e| Failure::Input(e.to_string()))
}

fn summary(result: &RunResult, names: &[String], initial: usize) -> serde_json::Value {
    serde_json::json!({
        "best_expression": result.best.to_text(names),
        "best_mse": result.best_mse,
        "best_truth_error": result.best_truth_error,
        "generations": result.reports.len(),
        "termination": result.termination,
        "initial_size": initial,
        "final_size": result.augmented.len(),
        "generated": result.augmented.count_generated(),
    })
}

fn describe(result: &RunResult, initial: usize) {
    eprintln!(
        "{} generations ({:?}); best MSE {:.6e}, truth error {:.6e}; dataset {} -> {} points",
        result.reports.len(),
        result.termination,
        result.best_mse,
        result.best_truth_error,
        initial,
        result.augmented.len()
    );
}

fn write_file(path: &Path, contents: &[u8]) -> Outcome {
    fs::write(path, contents).map_err(input(&path.display().to_string()))
}

fn fit(args: &RunArgs, seed: Option<u64>) -> Outcome {
    let prepared = prepare(args, seed)?;
    let result = execute(&prepared)?;
    let names = prepared.alphabet.names.as_slice();
    describe(&result, prepared.data.len());
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(input(&dir.display().to_string()))?;
        let mut lines = String::new();
        for r in &result.reports {
            lines.push_str(&serde_json::to_string(r).map_err(input("reports"))?);
            lines.push('\n');
        }
        write_file(&dir.join("reports.jsonl"), lines.as_bytes())?;
        let options = CsvOptions {
            strip_provenance: args.strip_provenance,
        };
        let csv_path = dir.join("augmented.csv");
        result
            .augmented
            .save_csv(&csv_path, options)
            .map_err(input(&csv_path.display().to_string()))?;
        let mut s = summary(&result, names, prepared.data.len());
        s["config"] = serde_json::to_value(&prepared.config).map_err(input("config"))?;
        write_file(
            &dir.join("summary.json"),
            (serde_json::to_string_pretty(&s).map_err(input("summary"))? + "\n").as_bytes(),
        )?;
    }
    println!("{}", result.best.to_text(names));
    Ok(())
}

fn augment(args: &RunArgs, seed: Option<u64>) -> Outcome {
    let mut prepared = prepare(args, seed)?;
    if prepared.config.mode != Mode::LggaFull {
        eprintln!("note: augment always runs in lgga_full mode");
        prepared.config.mode = Mode::LggaFull;
    }
    let result = execute(&prepared)?;
    describe(&result, prepared.data.len());
    let options = CsvOptions {
        strip_provenance: args.strip_provenance,
    };
    match &args.out {
        Some(path) => {
            result
                .augmented
                .save_csv(path, options)
                .map_err(input(&path.display().to_string()))?;
            let mut s = summary(&result, &prepared.alphabet.names, prepared.data.len());
            s["config"] = serde_json::to_value(&prepared.config).map_err(input("config"))?;
            write_file(
                &path.with_extension("json"),
                (serde_json::to_string_pretty(&s).map_err(input("metadata"))? + "\n").as_bytes(),
            )?;
        }
        None => {
            let stdout = std::io::stdout();
            result
                .augmented
                .write_csv(stdout.lock(), options)
                .map_err(input("stdout"))?;
        }
    }
    Ok(())
}

fn problems_for(args: &BenchArgs) -> Result<Vec<BenchmarkProblem>, Failure> {
    match (&args.problem, args.suite) {
        (Some(name), _) => Ok(vec![bench::problem(name).map_err(config_err)?]),
        (None, Some(Suite::Table1)) => Ok(bench::registry()),
        (None, Some(Suite::Extended)) => Ok(bench::extended_registry()),
        (None, None) => Err(Failure::Config("give --problem or --suite".into())),
    }
}

fn bench_run_config(args: &BenchArgs, base: RunConfig) -> Result<RunConfig, Failure> {
    let mut config = base;
    if let Some(g) = args.generations {
        config.num_generations = g;
    }
    if let Some(p) = args.population {
        config.population_size = p;
    }
    if let Some(l) = args.lambda {
        config.lambda_truth = l;
    }
    if let Some(t) = args.timeout_secs {
        config.timeout_secs = Some(t);
    }
    config.validate().map_err(config_err)?;
    Ok(config)
}

fn run_bench(args: &BenchArgs, seed: Option<u64>) -> Outcome {
    let problems = problems_for(args)?;
    let file_config = args.config.as_deref().map(|p| load_config(Some(p))).transpose()?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(input(&dir.display().to_string()))?;
    }
    let write_out = |name: &str, contents: &str| -> Outcome {
        match &args.out {
            Some(dir) => write_file(&dir.join(name), contents.as_bytes()),
            None => Ok(()),
        }
    };
    if args.experiment == 1 {
        let defaults = Experiment1Config::default();
        let config = Experiment1Config {
            run: bench_run_config(args, file_config.unwrap_or(defaults.run))?,
            seeds: args.seeds.unwrap_or(defaults.seeds),
            initial_m: args.initial_m.unwrap_or(defaults.initial_m),
            base_seed: seed.unwrap_or(defaults.base_seed),
            ..defaults
        };
        let results = experiment_classic_vs_lgga(&problems, &config).map_err(config_err)?;
        for r in &results {
            eprintln!(
                "{}: lgga solved {}/{}, classic solved {}/{}",
                r.problem,
                r.lgga_solves,
                r.seeds.len(),
                r.classic_solves,
                r.seeds.len()
            );
        }
        let json = serde_json::to_string_pretty(&results).map_err(input("results"))? + "\n";
        write_out("experiment1.json", &json)?;
        print!("{json}");
    } else {
        let defaults = SweepConfig::default();
        let consumer = bench_run_config(
            args,
            file_config.clone().map_or(defaults.consumer.clone(), |c| RunConfig {
                mode: Mode::Classic,
                ..c
            }),
        )?;
        let config = SweepConfig {
            consumer,
            trials: args.trials.unwrap_or(defaults.trials),
            max_points: args.max_points.unwrap_or(defaults.max_points),
            consumer_restarts: args.restarts.unwrap_or(defaults.consumer_restarts),
            base_seed: seed.unwrap_or(defaults.base_seed),
            ..defaults
        };
        let mut results = Vec::new();
        for p in &problems {
            let r = data_efficiency_sweep(p, &config).map_err(config_err)?;
            eprintln!("{}: {:?}", r.problem, r.efficiency);
            results.push(r);
        }
        let json = serde_json::to_string_pretty(&results).map_err(input("results"))? + "\n";
        write_out("experiment2.json", &json)?;
        let table = efficiency_csv(&results);
        write_out("efficiency.csv", &table)?;
        print!("{table}");
    }
    std::io::stdout().flush().map_err(input("stdout"))
}

fn gen_data(args: &GenDataArgs, seed: Option<u64>) -> Outcome {
    let problem = bench::problem(&args.problem).map_err(config_err)?;
    let data = problem.sample(args.n, seed.unwrap_or(0));
    let options = CsvOptions {
        strip_provenance: true,
    };
    match &args.out {
        Some(path) => data
            .save_csv(path, options)
            .map_err(input(&path.display().to_string())),
        None => data
            .write_csv(std::io::stdout().lock(), options)
            .map_err(input("stdout")),
    }
}

fn parse_ranges(text: &str, arity: usize) -> Result<Vec<(f64, f64)>, Failure> {
    let bad = || Failure::Config(format!("bad ranges `{text}` (expected lo:hi per variable)"));
    let ranges = split_list(text)
        .map(|r| {
            let (lo, hi) = r.split_once(':').ok_or_else(bad)?;
            Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
        })
        .collect::<Result<Vec<(f64, f64)>, Failure>>()?;
    if ranges.len() != arity {
        return Err(Failure::Config(format!(
            "{} ranges given for {arity} variables",
            ranges.len()
        )));
    }
    Ok(ranges)
}

fn equiv(args: &EquivArgs, seed: Option<u64>) -> Outcome {
    let (names, default_ranges) = match (&args.problem, &args.vars) {
        (Some(p), _) => {
            let p = bench::problem(p).map_err(config_err)?;
            (p.names().to_vec(), p.ranges.clone())
        }
        (None, Some(v)) => {
            let names: Vec<String> = split_list(v).map(String::from).collect();
            let ranges = vec![(1.0, 5.0); names.len()];
            (names, ranges)
        }
        (None, None) => return Err(Failure::Config("give --vars or --problem".into())),
    };
    let ranges = match &args.ranges {
        Some(r) => parse_ranges(r, names.len())?,
        None => default_ranges,
    };
    let a = parse_with_names(&args.a, &names).map_err(input("first expression"))?;
    let b = parse_with_names(&args.b, &names).map_err(input("second expression"))?;
    let check = EquivalenceCheck {
        samples: args.samples,
        rtol: args.rtol,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    let same = semantically_equivalent(&a, &b, &ranges, &mut rng, check).map_err(config_err)?;
    println!("{same}");
    Ok(())
}
