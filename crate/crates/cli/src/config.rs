//! Run configuration file (TOML). Every section and field is required
//! except the two stopping limits, so a missing knob is reported by name.

use std::fs;
use std::path::{Path, PathBuf};

use hpfold::hp::{parse_sequence_file, HpSequence};
use hpfold::hpnet::NetworkConfig;
use hpfold::ruct::SearchConfig;
use hpfold::selfplay::{generate_corpus, TrainingConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub run_dir: PathBuf,
    pub search: SearchConfig,
    pub network: NetworkConfig,
    pub selfplay: SelfPlaySettings,
    pub corpus: CorpusSource,
    pub gate_set: CorpusSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfPlaySettings {
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub episodes_per_round: usize,
    pub steps_per_episode: u32,
    pub gate_interval: u64,
    pub log_interval: u64,
    pub max_steps: Option<u64>,
    pub time_budget_secs: Option<f64>,
}

/// Sequences read from a file, or generated from a seeded description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSource {
    pub path: Option<PathBuf>,
    pub generate: Option<GeneratedCorpus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratedCorpus {
    pub count: usize,
    pub min_length: usize,
    pub max_length: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub seed: u64,
}

impl CorpusSource {
    pub fn load(&self, base: &Path) -> CliResult<Vec<HpSequence>> {
        match (&self.path, &self.generate) {
            (Some(path), None) => {
                let path = base.join(path);
                let text = fs::read_to_string(&path)
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                let seqs = parse_sequence_file(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                if seqs.is_empty() {
                    return Err(CliError::Data(format!("{}: no sequences", path.display())));
                }
                Ok(seqs)
            }
            (None, Some(g)) => generate_corpus(g.count, (g.min_length, g.max_length), (g.h_min, g.h_max), g.seed)
                .map_err(CliError::data),
            _ => Err(CliError::Data("a corpus needs exactly one of `path` or `generate`".into())),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Data(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn training(&self) -> TrainingConfig {
        let s = &self.selfplay;
        TrainingConfig {
            network: self.network,
            search: self.search,
            replay_capacity: s.replay_capacity,
            batch_size: s.batch_size,
            episodes_per_round: s.episodes_per_round,
            steps_per_episode: s.steps_per_episode,
            gate_interval: s.gate_interval,
            log_interval: s.log_interval,
            max_steps: s.max_steps,
            time_budget_secs: s.time_budget_secs,
            workers: self.workers,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DESK: &str = include_str!("../data/desk.toml");

    #[test]
    fn bundled_config_round_trips() {
        let config = RunConfig::parse(DESK).unwrap();
        assert_eq!(RunConfig::parse(&config.to_toml()).unwrap(), config);
        config.training().validate().unwrap();
    }

    #[test]
    fn missing_field_is_named() {
        let text = DESK.replace("batch_size = ", "# batch_size = ");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("batch_size"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn corpus_needs_one_source() {
        let source = CorpusSource {
            path: None,
            generate: None,
        };
        assert!(source.load(Path::new(".")).is_err());
    }
}
