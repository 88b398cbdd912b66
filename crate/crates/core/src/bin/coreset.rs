use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coreset_core::harness::generate_synthetic;
use coreset_core::harness::{
    acquire_round, gnuplot_table, load_dataset, run_experiment, save_dataset, summarize, svg_chart,
    DataSource, Embedding, ExperimentConfig, LearningCurve, PoolState, RoundStep, SyntheticSpec,
};
use coreset_core::kcenter::{greedy_solution, robust_k_center, RobustOptions};
use coreset_core::learner::{Hyperparams, SoftmaxModel};
use coreset_core::strategies::StrategyId;
use coreset_core::theory::{covering_bound, BoundInputs};
use coreset_core::{DistanceOracle, Error, Exec, OracleConfig, Result};

#[derive(Parser)]
#[command(name = "coreset", version, about = "Core-set active learning toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled Gaussian-mixture dataset.
    GenData(GenDataArgs),
    /// Run a multi-round active-learning simulation and write the results CSV.
    Run(RunArgs),
    /// One acquisition round on a dataset; prints the selected indices.
    Select(SelectArgs),
    /// Solve k-Center (greedy, or robust with outliers) on a dataset.
    SolveKcenter(SolveArgs),
    /// Evaluate the covering-radius bound on the core-set loss.
    Bound(BoundArgs),
    /// Turn results CSVs into a gnuplot table and an SVG chart.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Random,
    Entropy,
    Oracle,
    Kmedoids,
    CoresetGreedy,
    CoresetRobust,
}

impl From<StrategyArg> for StrategyId {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Random => StrategyId::Random,
            StrategyArg::Entropy => StrategyId::Entropy,
            StrategyArg::Oracle => StrategyId::Oracle,
            StrategyArg::Kmedoids => StrategyId::KMedoids,
            StrategyArg::CoresetGreedy => StrategyId::CoresetGreedy,
            StrategyArg::CoresetRobust => StrategyId::CoresetRobust,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbeddingArg {
    Raw,
    Logits,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExecArg {
    Sequential,
    Parallel,
}

impl From<ExecArg> for Exec {
    fn from(e: ExecArg) -> Self {
        match e {
            ExecArg::Sequential => Exec::Sequential,
            ExecArg::Parallel => Exec::Parallel,
        }
    }
}

#[derive(Args)]
struct SyntheticArgs {
    #[arg(long, default_value_t = 10)]
    classes: usize,
    #[arg(long, default_value_t = 500)]
    per_class: usize,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    /// Seed of the generated data.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
}

impl SyntheticArgs {
    fn spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            num_classes: self.classes,
            per_class: self.per_class,
            dim: self.dim,
            spread: self.spread,
            seed: self.data_seed,
        }
    }
}

#[derive(Args)]
struct LearnerArgs {
    #[arg(long, default_value_t = Hyperparams::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = Hyperparams::default().learning_rate)]
    learning_rate: f64,
    #[arg(long, default_value_t = Hyperparams::default().l2_penalty)]
    l2_penalty: f64,
}

impl LearnerArgs {
    fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            l2_penalty: self.l2_penalty,
            ..Hyperparams::default()
        }
    }
}

#[derive(Args)]
struct GenDataArgs {
    #[command(flatten)]
    synthetic: SyntheticArgs,
    /// Output file; a `.csv` extension writes CSV, anything else the binary format.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset file. Without it a synthetic mixture is generated.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    synthetic: SyntheticArgs,
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 100)]
    budget: usize,
    #[arg(long, default_value_t = 100)]
    initial: usize,
    #[arg(long, default_value_t = 5)]
    rounds: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 1e-4)]
    xi_frac: f64,
    #[arg(long, default_value_t = 30.0)]
    time_limit_s: f64,
    #[arg(long, value_enum, default_value = "raw")]
    embedding: EmbeddingArg,
    #[command(flatten)]
    learner: LearnerArgs,
    /// Fill the wall_ms column (makes the output nondeterministic).
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, default_value = "parallel")]
    exec: ExecArg,
    /// Results CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 100)]
    budget: usize,
    /// Comma-separated labeled indices.
    #[arg(long, value_delimiter = ',', conflicts_with = "initial")]
    labeled: Option<Vec<usize>>,
    /// Size of a uniformly drawn labeled set, used when --labeled is absent.
    #[arg(long, default_value_t = 100)]
    initial: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    xi_frac: f64,
    #[arg(long, default_value_t = 30.0)]
    time_limit_s: f64,
    #[arg(long, value_enum, default_value = "raw")]
    embedding: EmbeddingArg,
    #[command(flatten)]
    learner: LearnerArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    budget: usize,
    /// Comma-separated fixed centers.
    #[arg(long, value_delimiter = ',', conflicts_with = "initial")]
    centers: Option<Vec<usize>>,
    /// Number of uniformly drawn fixed centers, used when --centers is absent.
    #[arg(long, default_value_t = 1)]
    initial: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Outlier budget. Defaults to floor(xi-frac times the number of
    /// non-center points).
    #[arg(long)]
    max_outliers: Option<usize>,
    #[arg(long, default_value_t = 1e-4)]
    xi_frac: f64,
    #[arg(long, default_value_t = 30.0)]
    time_limit_s: f64,
    /// Farthest-first only.
    #[arg(long)]
    greedy: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    lambda_l: f64,
    #[arg(long)]
    lambda_eta: f64,
    #[arg(long)]
    loss_bound: f64,
    #[arg(long)]
    num_classes: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Results CSVs, optionally as `name=path`; the name defaults to the file stem.
    #[arg(required = true)]
    inputs: Vec<String>,
    /// Output prefix; writes `<out>.dat` and `<out>.svg`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "accuracy vs labeled points")]
    title: String,
}

fn time_limit(seconds: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(seconds)
        .map_err(|_| Error::InvalidArgument(format!("invalid time limit {seconds}")))
}

fn emit(out: Option<&Path>, content: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, content)?,
        None => io::stdout().lock().write_all(content)?,
    }
    Ok(())
}

fn draw(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::BudgetExceedsPool {
            budget: k,
            available: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample(&mut rng, n, k).into_vec())
}

fn gen_data(a: GenDataArgs) -> Result<()> {
    let features = generate_synthetic(&a.synthetic.spec())?;
    save_dataset(&a.out, &features)
}

fn run(a: RunArgs) -> Result<()> {
    let data = match a.data {
        Some(p) => DataSource::File(p),
        None => DataSource::Synthetic(a.synthetic.spec()),
    };
    let config = ExperimentConfig {
        initial: a.initial,
        budget: a.budget,
        rounds: a.rounds,
        seeds: a.seeds,
        xi_frac: a.xi_frac,
        hyperparams: a.learner.hyperparams(),
        time_limit: time_limit(a.time_limit_s)?,
        embedding: match a.embedding {
            EmbeddingArg::Raw => Embedding::Raw,
            EmbeddingArg::Logits => Embedding::Logits,
        },
        record_timing: a.timing,
        exec: a.exec.into(),
        ..ExperimentConfig::new(data, a.strategy.into())
    };
    let curve = run_experiment(&config)?;
    for note in &curve.notes {
        if let Some(round) = note.early_stop {
            eprintln!("note seed={} early_stop_round={round}", note.seed);
        }
        if !note.robust_fallbacks.is_empty() {
            eprintln!(
                "note seed={} robust_timeouts={:?}",
                note.seed, note.robust_fallbacks
            );
        }
    }
    emit(a.out.as_deref(), curve.to_csv_string().as_bytes())
}

fn select(a: SelectArgs) -> Result<()> {
    let features = load_dataset(&a.data)?;
    let labeled = match a.labeled {
        Some(l) => l,
        None => draw(features.len(), a.initial, a.seed)?,
    };
    let pool = PoolState::new(features.len(), &labeled)?;
    let step = RoundStep {
        strategy: a.strategy.into(),
        budget: a.budget,
        seed: a.seed,
        xi_frac: a.xi_frac,
        time_limit: time_limit(a.time_limit_s)?,
        embedding: match a.embedding {
            EmbeddingArg::Raw => Embedding::Raw,
            EmbeddingArg::Logits => Embedding::Logits,
        },
    };
    let model = if step.needs_model() {
        Some(SoftmaxModel::fit(
            &features,
            pool.labeled(),
            a.learner.hyperparams(),
        )?)
    } else {
        None
    };
    let oracle = DistanceOracle::new(&features, OracleConfig::default());
    let selection = acquire_round(&features, &oracle, &pool, model.as_ref(), &step)?;
    let mut out = String::from("index\n");
    for i in &selection.indices {
        out.push_str(&format!("{i}\n"));
    }
    emit(a.out.as_deref(), out.as_bytes())
}

fn solve(a: SolveArgs) -> Result<()> {
    let features = load_dataset(&a.data)?;
    let s0 = match a.centers {
        Some(c) => c,
        None => draw(features.len(), a.initial, a.seed)?,
    };
    let mut oracle = DistanceOracle::new(&features, OracleConfig::default());
    let solution = if a.greedy {
        greedy_solution(&mut oracle, &s0, a.budget)?
    } else {
        let max_outliers = a.max_outliers.unwrap_or_else(|| {
            let rest = features.len().saturating_sub(s0.len());
            (a.xi_frac * rest as f64).floor() as usize
        });
        let options = RobustOptions {
            time_limit: time_limit(a.time_limit_s)?,
        };
        robust_k_center(&mut oracle, &s0, a.budget, max_outliers, &options)?
    };
    let mut out = String::from("kind,value\n");
    out.push_str(&format!("radius,{}\n", solution.radius));
    out.push_str(&format!("optimal,{}\n", solution.optimal));
    for c in &solution.centers {
        out.push_str(&format!("center,{c}\n"));
    }
    for o in &solution.outliers {
        out.push_str(&format!("outlier,{o}\n"));
    }
    emit(a.out.as_deref(), out.as_bytes())
}

fn bound(a: BoundArgs) -> Result<()> {
    let b = covering_bound(&BoundInputs {
        delta: a.delta,
        lambda_l: a.lambda_l,
        lambda_eta: a.lambda_eta,
        loss_bound: a.loss_bound,
        num_classes: a.num_classes,
        n: a.n,
        gamma: a.gamma,
    })?;
    let out = format!(
        "kind,value\nbound,{}\ncover_term,{}\nhoeffding_term,{}\n",
        b.total(),
        b.cover_term,
        b.hoeffding_term
    );
    emit(a.out.as_deref(), out.as_bytes())
}

fn plot(a: PlotArgs) -> Result<()> {
    let mut summaries = Vec::new();
    for input in &a.inputs {
        let (name, path) = match input.split_once('=') {
            Some((n, p)) => (n.to_owned(), PathBuf::from(p)),
            None => {
                let p = PathBuf::from(input);
                let stem = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| input.clone());
                (stem, p)
            }
        };
        let bytes = fs::read(&path)?;
        let curve = LearningCurve::read_csv(&bytes, StrategyId::Random)?;
        if curve.rows.is_empty() {
            return Err(Error::Format(format!("{} has no rows", path.display())));
        }
        summaries.push(summarize(&name, &curve));
    }
    let mut dat = a.out.clone().into_os_string();
    dat.push(".dat");
    let mut svg = a.out.into_os_string();
    svg.push(".svg");
    fs::write(dat, gnuplot_table(&summaries))?;
    fs::write(svg, svg_chart(&summaries, &a.title)?)?;
    Ok(())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("error code=usage message={:?}", one_line(first));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Run(a) => run(a),
        Command::Select(a) => select(a),
        Command::SolveKcenter(a) => solve(a),
        Command::Bound(a) => bound(a),
        Command::Plot(a) => plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "error code={} message={:?}",
                e.code(),
                one_line(&e.to_string())
            );
            ExitCode::FAILURE
        }
    }
}
