//! Command-line front end: fold, train, bench, oracle, render and
//! gen-corpus.

pub mod bench;
pub mod config;
pub mod error;
pub mod render;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use hpfold::baseline::{compare_engines, rollout_uct_fold, CellError, Engine, RolloutConfig};
use hpfold::hp::{moves_to_string, parse_hp_string, parse_sequence_file, FoldRecord, HpSequence};
use hpfold::hpnet::{load_checkpoint, NetEvaluator, Network, NetworkConfig, Trainer};
use hpfold::oracle::{oracle_solve, DEFAULT_LENGTH_GUARD};
use hpfold::ruct::SearchConfig;
use hpfold::selfplay::{fold_episode, generate_corpus, run_training, EpisodeRecord, RunDir};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
pub use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "hpfold", version, about = "HP lattice protein folding by tree search and a policy-value network")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for episode folding.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub run_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fold sequences and print contacts, energy and moves.
    Fold(FoldArgs),
    /// Self-play training with champion gating.
    Train(TrainArgs),
    /// Energy report over a benchmark file.
    Bench(BenchArgs),
    /// Exact optimum of a short sequence.
    Oracle(OracleArgs),
    /// Draw a fold record as SVG or text.
    Render(RenderArgs),
    /// Write random HP sequences, one per line.
    GenCorpus(GenCorpusArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FoldEngine {
    Net,
    Rollout,
}

#[derive(Debug, clap::Args)]
pub struct FoldArgs {
    /// Sequences in HP or run-length form.
    pub sequences: Vec<String>,
    /// File with one sequence per line.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Use a freshly initialized network instead of a checkpoint.
    #[arg(long)]
    pub untrained: bool,
    #[arg(long, value_enum, default_value = "net")]
    pub engine: FoldEngine,
    #[arg(long, default_value_t = 300)]
    pub simulations: u32,
    #[arg(long, default_value_t = 1.0)]
    pub c_alpha: f64,
    /// Also write fold records (JSON lines) here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    /// Continue the run already in the run directory.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchEngine {
    Oracle,
    Rollout,
    Net,
}

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    /// Benchmark file; the bundled table is used when absent.
    #[arg(long)]
    pub benchmark: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "oracle,rollout")]
    pub engines: Vec<BenchEngine>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Simulations per move for the network engine.
    #[arg(long, default_value_t = 300)]
    pub simulations: u32,
    /// Simulations per move for rollout UCT.
    #[arg(long, default_value_t = 1000)]
    pub rollout_simulations: u32,
    #[arg(long, default_value_t = DEFAULT_LENGTH_GUARD)]
    pub oracle_guard: usize,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct OracleArgs {
    pub sequence: String,
    #[arg(long, default_value_t = DEFAULT_LENGTH_GUARD)]
    pub guard: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderFormat {
    Svg,
    Text,
}

#[derive(Debug, clap::Args)]
pub struct RenderArgs {
    /// Fold record file (JSON lines).
    pub input: PathBuf,
    /// Which record of the file, counting from 0.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long, value_enum, default_value = "svg")]
    pub format: RenderFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct GenCorpusArgs {
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub min_length: usize,
    #[arg(long)]
    pub max_length: usize,
    #[arg(long, default_value_t = 0.5)]
    pub h_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub h_max: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments and runs one subcommand, writing its primary output to
/// `out` and diagnostics to stderr. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Fold(args) => cmd_fold(cli, args, out),
        Command::Train(args) => cmd_train(cli, args, out),
        Command::Bench(args) => cmd_bench(cli, args, out),
        Command::Oracle(args) => cmd_oracle(args, out),
        Command::Render(args) => cmd_render(args, out),
        Command::GenCorpus(args) => cmd_gen_corpus(cli, args, out),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(CliError::internal)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_net(path: &Path) -> CliResult<Arc<Network<f32>>> {
    let trainer: Trainer<f32> = load_checkpoint(path, None).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(Arc::new(trainer.net))
}

fn network_config(cli: &Cli) -> CliResult<NetworkConfig> {
    match &cli.config {
        Some(path) => Ok(RunConfig::load(path)?.network),
        None => Ok(NetworkConfig::default()),
    }
}

fn fold_sequences(args: &FoldArgs) -> CliResult<Vec<HpSequence>> {
    let mut seqs = Vec::new();
    for s in &args.sequences {
        seqs.push(parse_hp_string(s).map_err(|e| CliError::Data(format!("{s:?}: {e}")))?);
    }
    if let Some(path) = &args.file {
        let text = read_file(path)?;
        seqs.extend(parse_sequence_file(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?);
    }
    if seqs.is_empty() {
        return Err(CliError::Usage("no sequences given".into()));
    }
    Ok(seqs)
}

fn cmd_fold(cli: &Cli, args: &FoldArgs, out: &mut dyn Write) -> CliResult<()> {
    let seqs = fold_sequences(args)?;
    let seed = cli.seed.unwrap_or(0);
    let search = SearchConfig {
        simulations: args.simulations,
        c_alpha: args.c_alpha,
        ..SearchConfig::default()
    };
    search.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let evaluator = match args.engine {
        FoldEngine::Net => {
            let net = match (&args.checkpoint, args.untrained) {
                (Some(path), false) => load_net(path)?,
                (None, true) => Arc::new(Network::new(network_config(cli)?, seed).map_err(CliError::data)?),
                _ => return Err(CliError::Usage("pass exactly one of --checkpoint or --untrained".into())),
            };
            Some(NetEvaluator::new(net))
        }
        FoldEngine::Rollout => None,
    };
    let mut report = String::from("index\tlength\tcontacts\tenergy\tupper_bound\tstatus\tmoves\n");
    let mut records = String::new();
    for (i, seq) in seqs.iter().enumerate() {
        let episode: EpisodeRecord = match &evaluator {
            Some(eval) => fold_episode(seq, eval, &search, None),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
                let config = RolloutConfig {
                    simulations: args.simulations,
                    exploration: args.c_alpha,
                };
                rollout_uct_fold(seq, &config, &mut rng)
            }
        }
        .map_err(CliError::internal)?;
        let record = episode.fold_record().map_err(CliError::internal)?;
        report.push_str(&format!(
            "{i}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            seq.len(),
            record.contacts,
            record.energy,
            seq.upper_bound(),
            serde_json::to_value(record.status).map_err(CliError::internal)?.as_str().unwrap_or("?"),
            moves_to_string(&episode.moves)
        ));
        records.push_str(&record.with_id(i.to_string()).to_line());
        records.push('\n');
    }
    if let Some(path) = &args.out {
        write_file(path, &records)?;
    }
    write_out(out, &report)
}

fn cmd_train(cli: &Cli, args: &TrainArgs, out: &mut dyn Write) -> CliResult<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("train needs --config".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    if let Some(dir) = &cli.run_dir {
        config.run_dir = dir.clone();
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let corpus = config.corpus.load(base)?;
    let gate_set = config.gate_set.load(base)?;
    let training = config.training();
    training.validate().map_err(CliError::data)?;
    let run_dir = RunDir::new(&config.run_dir);
    let existing = run_dir.latest().exists();
    if existing && !args.resume {
        return Err(CliError::Data(format!(
            "{} already holds a run; pass --resume to continue it",
            config.run_dir.display()
        )));
    }
    if args.resume && !existing {
        return Err(CliError::Data(format!("{} holds no run to resume", config.run_dir.display())));
    }
    fs::create_dir_all(&config.run_dir).map_err(CliError::data)?;
    write_file(&config.run_dir.join("config.toml"), &config.to_toml())?;
    let summary = run_training(&training, &corpus, &gate_set, &run_dir).map_err(|e| match e {
        hpfold::selfplay::TrainingError::Config(_) | hpfold::selfplay::TrainingError::Checkpoint(_) => {
            CliError::data(e)
        }
        other => CliError::internal(other),
    })?;
    let text = serde_json::to_string_pretty(&summary).map_err(CliError::internal)?;
    write_out(out, &format!("{text}\n"))
}

fn cmd_bench(cli: &Cli, args: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    let entries = match &args.benchmark {
        Some(path) => bench::parse_benchmark(&read_file(path)?)?,
        None => bench::bundled(),
    };
    if entries.is_empty() {
        return Err(CliError::Data("benchmark has no entries".into()));
    }
    let seed = cli.seed.unwrap_or(0);
    let net = if args.engines.contains(&BenchEngine::Net) {
        let path = args
            .checkpoint
            .as_ref()
            .ok_or_else(|| CliError::Usage("the net engine needs --checkpoint".into()))?;
        Some(NetEvaluator::new(load_net(path)?))
    } else {
        None
    };
    let search = SearchConfig::with_simulations(args.simulations);
    let rollout = RolloutConfig {
        simulations: args.rollout_simulations,
        ..RolloutConfig::default()
    };
    let guard = args.oracle_guard;
    let mut engines: Vec<Engine<'_>> = Vec::new();
    for engine in &args.engines {
        match engine {
            BenchEngine::Oracle => engines.push(Engine::new("oracle", move |s: &HpSequence| {
                if s.len() > guard {
                    return Err(CellError::Skipped("guard".into()));
                }
                oracle_solve(s, guard)
                    .map(|r| r.optimum)
                    .map_err(|e| CellError::Failed(e.to_string()))
            })),
            BenchEngine::Rollout => {
                let mut index = 0u64;
                engines.push(Engine::new("rollout", move |s: &HpSequence| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index);
                    index += 1;
                    rollout_uct_fold(s, &rollout, &mut rng)
                        .map(|e| e.contacts.contacts)
                        .map_err(|e| CellError::Failed(e.to_string()))
                }))
            }
            BenchEngine::Net => {
                let eval = net.as_ref().expect("loaded above");
                engines.push(Engine::new("net", move |s: &HpSequence| {
                    fold_episode(s, eval, &search, None)
                        .map(|e| e.contacts.contacts)
                        .map_err(|e| CellError::Failed(e.to_string()))
                }))
            }
        }
    }
    let named: Vec<(String, HpSequence)> = entries.iter().map(|e| (e.id.clone(), e.sequence.clone())).collect();
    let table = compare_engines(&named, &mut engines);
    let text = bench::report(&entries, &table);
    if let Some(path) = &args.out {
        write_file(path, &text)?;
    }
    write_out(out, &text)?;
    let violations = table.bound_violations();
    if !violations.is_empty() {
        return Err(CliError::Internal(format!(
            "contact counts above the upper bound: {violations:?}"
        )));
    }
    Ok(())
}

fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> CliResult<()> {
    let seq = parse_hp_string(&args.sequence).map_err(|e| CliError::Data(format!("{:?}: {e}", args.sequence)))?;
    let result = oracle_solve(&seq, args.guard).map_err(CliError::data)?;
    let count = result
        .count_optimal
        .map_or("not counted (stopped at the contact limit)".to_string(), |c| c.to_string());
    write_out(
        out,
        &format!(
            "sequence\t{seq}\noptimum\t{}\nenergy\t{}\nupper_bound\t{}\ncontact_limit\t{}\ncount_optimal\t{count}\nmoves\t{}\nnodes\t{}\n",
            result.optimum,
            -(result.optimum as i64),
            seq.upper_bound(),
            seq.contact_limit(),
            moves_to_string(&result.optimal_fold),
            result.nodes
        ),
    )
}

fn cmd_render(args: &RenderArgs, out: &mut dyn Write) -> CliResult<()> {
    let text = read_file(&args.input)?;
    let line = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .nth(args.index)
        .ok_or_else(|| CliError::Data(format!("{} has no record {}", args.input.display(), args.index)))?;
    let record = FoldRecord::parse_line(line).map_err(|e| CliError::Data(format!("{}: {e}", args.input.display())))?;
    let drawing = match args.format {
        RenderFormat::Svg => render::svg(&record),
        RenderFormat::Text => render::text(&record),
    };
    match &args.out {
        Some(path) => write_file(path, &drawing),
        None => write_out(out, &drawing),
    }
}

fn cmd_gen_corpus(cli: &Cli, args: &GenCorpusArgs, out: &mut dyn Write) -> CliResult<()> {
    let seqs = generate_corpus(
        args.count,
        (args.min_length, args.max_length),
        (args.h_min, args.h_max),
        cli.seed.unwrap_or(0),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut text = String::new();
    for s in seqs {
        text.push_str(&s.to_string());
        text.push('\n');
    }
    match &args.out {
        Some(path) => write_file(path, &text),
        None => write_out(out, &text),
    }
}
