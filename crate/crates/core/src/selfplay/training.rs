use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{fold_with, harvest_samples, EpisodeRecord, NotReady, ReplayMemory, DEFAULT_CAPACITY};
use crate::encode::EncodeError;
use crate::hp::HpSequence;
use crate::hpnet::{
    load_checkpoint, save_checkpoint, CheckpointError, LossParts, NetError, NetEvaluator, Network, NetworkConfig,
    Trainer,
};
use crate::ruct::{SearchConfig, SearchError};

#[derive(Debug, Error)]
pub enum TrainingError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("run directory: {0}")]
    Io(#[from] io::Error),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("training diverged at step {step}: {parts:?}")]
    Diverged { step: u64, parts: LossParts },
}

/// Folds one sequence with the network guiding the search. With `noise`,
/// root priors get Dirichlet noise drawn from that generator.
pub fn fold_episode(
    sequence: &HpSequence,
    evaluator: &NetEvaluator,
    config: &SearchConfig,
    noise: Option<&mut ChaCha8Rng>,
) -> Result<EpisodeRecord, SearchError> {
    let mut leaf = evaluator;
    fold_with(sequence, &mut leaf, config, noise)
}

/// Draws a uniform batch and takes one optimizer step.
pub fn training_iteration(
    memory: &ReplayMemory,
    trainer: &mut Trainer<f32>,
    batch_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Result<LossParts, NotReady>, NetError> {
    match memory.sample(batch_size, rng) {
        Ok(batch) => trainer.train_step(&batch).map(Ok),
        Err(not_ready) => Ok(Err(not_ready)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateResult {
    pub candidate_total: u64,
    pub champion_total: u64,
    pub accepted: bool,
}

impl GateResult {
    pub fn new(candidate_total: u64, champion_total: u64) -> Self {
        Self {
            candidate_total,
            champion_total,
            accepted: candidate_total > champion_total,
        }
    }
}

/// Total contacts of greedy, noise-free folds over a sequence set, folded
/// on up to `workers` threads.
pub fn fold_total(
    net: &Arc<Network<f32>>,
    sequences: &[HpSequence],
    config: &SearchConfig,
    workers: usize,
) -> Result<u64, SearchError> {
    let evaluator = NetEvaluator::new(Arc::clone(net));
    let results = parallel_map(sequences, workers, |seq| {
        fold_episode(seq, &evaluator, config, None).map(|e| u64::from(e.contacts.contacts))
    });
    results.into_iter().sum()
}

/// Candidate against champion on the same sequences; a tie keeps the
/// champion.
pub fn gate(
    candidate: &Arc<Network<f32>>,
    champion: &Arc<Network<f32>>,
    sequences: &[HpSequence],
    config: &SearchConfig,
) -> Result<GateResult, SearchError> {
    Ok(GateResult::new(
        fold_total(candidate, sequences, config, 1)?,
        fold_total(champion, sequences, config, 1)?,
    ))
}

/// Applies `f` to every item on up to `workers` scoped threads. Results come
/// back in input order whatever the worker count.
fn parallel_map<T: Sync, U: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    let workers = workers.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || part.iter().map(f).collect::<Vec<_>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub network: NetworkConfig,
    pub search: SearchConfig,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Self-play episodes folded per round before training.
    pub episodes_per_round: usize,
    /// Optimizer steps per self-play episode.
    pub steps_per_episode: u32,
    /// Optimizer steps between gates.
    pub gate_interval: u64,
    /// Optimizer steps between logged loss summaries.
    pub log_interval: u64,
    pub max_steps: Option<u64>,
    /// Wall-clock budget in seconds.
    pub time_budget_secs: Option<f64>,
    pub workers: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            network: NetworkConfig::default(),
            search: SearchConfig::default(),
            replay_capacity: DEFAULT_CAPACITY,
            batch_size: 256,
            episodes_per_round: 4,
            steps_per_episode: 4,
            gate_interval: 2000,
            log_interval: 50,
            max_steps: None,
            time_budget_secs: None,
            workers: 1,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TrainingError> {
        self.network.validate()?;
        self.search.validate()?;
        let bad = |m: &str| Err(TrainingError::Config(m.into()));
        if self.replay_capacity == 0 || self.batch_size == 0 || self.episodes_per_round == 0 {
            return bad("replay_capacity, batch_size and episodes_per_round must be positive");
        }
        if self.gate_interval == 0 || self.log_interval == 0 {
            return bad("gate_interval and log_interval must be positive");
        }
        if self.workers == 0 {
            return bad("workers must be positive");
        }
        if self.max_steps.is_none() && self.time_budget_secs.is_none() {
            return bad("set max_steps or time_budget_secs");
        }
        if self.time_budget_secs.is_some_and(|t| !(t >= 0.0 && t.is_finite())) {
            return bad("time_budget_secs must be non-negative");
        }
        Ok(())
    }
}

/// One line of the metrics log.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Metric {
    Start { step: u64, resumed: bool },
    Baseline { step: u64, champion_total: u64, mean_contacts: f64 },
    Episode { episode: u64, sequence: String, contacts: u32, decisions: usize, trapped: bool },
    Train { step: u64, steps: u64, value: f64, policy: f64, l2: f64, total: f64, replay: usize },
    Gate { step: u64, candidate_total: u64, champion_total: u64, accepted: bool },
    Stop { step: u64, reason: String, elapsed_secs: f64 },
}

/// Progress persisted next to the checkpoints so a run can resume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct RunState {
    champion_total: u64,
    episodes: u64,
    last_gate_step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingSummary {
    pub steps: u64,
    pub episodes: u64,
    pub baseline_total: Option<u64>,
    pub champion_total: u64,
    pub gates: Vec<GateResult>,
    pub champion_path: PathBuf,
}

/// File layout of a run directory.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.json")
    }

    pub fn metrics(&self) -> PathBuf {
        self.root.join("metrics.jsonl")
    }

    pub fn champion(&self) -> PathBuf {
        self.root.join("champion.ckpt")
    }

    pub fn latest(&self) -> PathBuf {
        self.root.join("latest.ckpt")
    }

    fn state(&self) -> PathBuf {
        self.root.join("state.json")
    }
}

struct MetricsLog {
    out: BufWriter<File>,
}

impl MetricsLog {
    fn open(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            out: BufWriter::new(file),
        })
    }

    fn write(&mut self, metric: &Metric) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, metric)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }
}

/// Alternates noisy self-play with the champion, optimizer steps on the
/// candidate, and periodic gating on `gate_set`. Resumes from the run
/// directory when it already holds checkpoints; the replay memory starts
/// empty again after a resume.
pub fn run_training(
    config: &TrainingConfig,
    corpus: &[HpSequence],
    gate_set: &[HpSequence],
    run_dir: &RunDir,
) -> Result<TrainingSummary, TrainingError> {
    config.validate()?;
    if corpus.is_empty() || gate_set.is_empty() {
        return Err(TrainingError::Config("corpus and gate set must be non-empty".into()));
    }
    let started = Instant::now();
    let budget = config.time_budget_secs.map(Duration::from_secs_f64);
    fs::create_dir_all(&run_dir.root)?;
    fs::write(run_dir.config(), serde_json::to_vec_pretty(config).expect("config serializes"))?;
    let mut log = MetricsLog::open(&run_dir.metrics())?;
    let grid = config.network.grid_size;

    let resumed = run_dir.latest().exists() && run_dir.champion().exists() && run_dir.state().exists();
    let (mut trainer, mut champion, mut state, baseline_total) = if resumed {
        let trainer: Trainer<f32> = load_checkpoint(&run_dir.latest(), Some(&config.network))?;
        let champion: Trainer<f32> = load_checkpoint(&run_dir.champion(), Some(&config.network))?;
        let state: RunState = serde_json::from_slice(&fs::read(run_dir.state())?)
            .map_err(|e| TrainingError::Config(format!("state file: {e}")))?;
        log.write(&Metric::Start {
            step: trainer.step(),
            resumed: true,
        })?;
        (trainer, Arc::new(champion.net), state, None)
    } else {
        let net = Network::<f32>::new(config.network, config.seed)?;
        let champion = Arc::new(net.clone());
        let trainer = Trainer::new(net);
        log.write(&Metric::Start { step: 0, resumed: false })?;
        let total = fold_total(&champion, gate_set, &config.search, config.workers)?;
        log.write(&Metric::Baseline {
            step: 0,
            champion_total: total,
            mean_contacts: total as f64 / gate_set.len() as f64,
        })?;
        save_checkpoint(&run_dir.champion(), &trainer)?;
        let state = RunState {
            champion_total: total,
            episodes: 0,
            last_gate_step: 0,
        };
        (trainer, champion, state, Some(total))
    };

    let memory = ReplayMemory::new(config.replay_capacity);
    let mut sample_rng = ChaCha8Rng::seed_from_u64(config.seed ^ trainer.step().rotate_left(32) ^ 0x5eed);
    let mut gates = Vec::new();
    let mut pending = LossAverage::default();
    let persist = |trainer: &Trainer<f32>, state: &RunState| -> Result<(), TrainingError> {
        save_checkpoint(&run_dir.latest(), trainer)?;
        fs::write(run_dir.state(), serde_json::to_vec(state).expect("state serializes"))?;
        Ok(())
    };

    let reason = loop {
        if config.max_steps.is_some_and(|m| trainer.step() >= m) {
            break "max_steps";
        }
        if budget.is_some_and(|b| started.elapsed() >= b) {
            break "time_budget";
        }

        // self-play with the frozen champion
        let evaluator = NetEvaluator::new(Arc::clone(&champion));
        let first = state.episodes;
        let jobs: Vec<(u64, &HpSequence)> = (first..first + config.episodes_per_round as u64)
            .map(|e| (e, &corpus[(e % corpus.len() as u64) as usize]))
            .collect();
        let episodes = parallel_map(&jobs, config.workers, |&(e, seq)| {
            let mut noise = ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ e);
            fold_episode(seq, &evaluator, &config.search, Some(&mut noise))
        });
        for (&(e, _), episode) in jobs.iter().zip(episodes) {
            let episode = episode?;
            memory.extend(harvest_samples(&episode, grid)?);
            log.write(&Metric::Episode {
                episode: e,
                sequence: episode.sequence.to_string(),
                contacts: episode.contacts.contacts,
                decisions: episode.decisions(),
                trapped: episode.terminal == crate::hp::Status::Trapped,
            })?;
        }
        state.episodes += config.episodes_per_round as u64;

        // optimizer steps on the candidate
        let steps = config.steps_per_episode as u64 * config.episodes_per_round as u64;
        for _ in 0..steps {
            if config.max_steps.is_some_and(|m| trainer.step() >= m) {
                break;
            }
            let parts = match training_iteration(&memory, &mut trainer, config.batch_size, &mut sample_rng) {
                Ok(Ok(parts)) => parts,
                Ok(Err(_not_ready)) => break,
                Err(NetError::NonFinite) => {
                    return Err(TrainingError::Diverged {
                        step: trainer.step(),
                        parts: LossParts {
                            value: f64::NAN,
                            policy: f64::NAN,
                            l2: trainer.net.l2() * config.network.weight_decay,
                        },
                    })
                }
                Err(e) => return Err(e.into()),
            };
            pending.add(&parts);
            if trainer.step() % config.log_interval == 0 {
                log.write(&pending.flush(trainer.step(), memory.len()))?;
            }
            if trainer.step() - state.last_gate_step >= config.gate_interval {
                let result = run_gate(&trainer, &mut champion, &mut state, gate_set, config, run_dir)?;
                log.write(&Metric::Gate {
                    step: trainer.step(),
                    candidate_total: result.candidate_total,
                    champion_total: result.champion_total,
                    accepted: result.accepted,
                })?;
                gates.push(result);
                persist(&trainer, &state)?;
            }
        }
    };

    // the last stretch of training also gets a chance to become champion
    if trainer.step() > state.last_gate_step {
        let result = run_gate(&trainer, &mut champion, &mut state, gate_set, config, run_dir)?;
        log.write(&Metric::Gate {
            step: trainer.step(),
            candidate_total: result.candidate_total,
            champion_total: result.champion_total,
            accepted: result.accepted,
        })?;
        gates.push(result);
    }
    persist(&trainer, &state)?;
    log.write(&Metric::Stop {
        step: trainer.step(),
        reason: reason.into(),
        elapsed_secs: started.elapsed().as_secs_f64(),
    })?;
    Ok(TrainingSummary {
        steps: trainer.step(),
        episodes: state.episodes,
        baseline_total,
        champion_total: state.champion_total,
        gates,
        champion_path: run_dir.champion(),
    })
}

fn run_gate(
    trainer: &Trainer<f32>,
    champion: &mut Arc<Network<f32>>,
    state: &mut RunState,
    gate_set: &[HpSequence],
    config: &TrainingConfig,
    run_dir: &RunDir,
) -> Result<GateResult, TrainingError> {
    let candidate = Arc::new(trainer.net.clone());
    let total = fold_total(&candidate, gate_set, &config.search, config.workers)?;
    let result = GateResult::new(total, state.champion_total);
    if result.accepted {
        *champion = candidate;
        state.champion_total = total;
        save_checkpoint(&run_dir.champion(), trainer)?;
    }
    state.last_gate_step = trainer.step();
    Ok(result)
}

#[derive(Default)]
struct LossAverage {
    sum: LossParts,
    count: u64,
}

impl LossAverage {
    fn add(&mut self, parts: &LossParts) {
        self.sum.value += parts.value;
        self.sum.policy += parts.policy;
        self.sum.l2 += parts.l2;
        self.count += 1;
    }

    fn flush(&mut self, step: u64, replay: usize) -> Metric {
        let n = self.count.max(1) as f64;
        let m = Metric::Train {
            step,
            steps: self.count,
            value: self.sum.value / n,
            policy: self.sum.policy / n,
            l2: self.sum.l2 / n,
            total: (self.sum.value + self.sum.policy + self.sum.l2) / n,
            replay,
        };
        *self = Self::default();
        m
    }
}
