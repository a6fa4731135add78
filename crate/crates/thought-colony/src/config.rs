//! The run configuration file: engine settings, provider blocks, the task
//! source, and output locations. TOML on disk; the key names are the stable
//! contract.

use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::EngineConfig;
use crate::graph::ToTGenConfig;
use crate::providers::http::HttpProviderConfig;
use crate::providers::ExpertRole;
use crate::synth::SynthSpec;

/// Errors raised while loading or validating a configuration.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {reason}")]
    Invalid { reason: String },
}

/// Top-level run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfigFile {
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub providers: ProvidersSection,
    pub task: TaskSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Exactly one task source must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct TaskSection {
    /// A single problem statement; the graph is generated by the configured
    /// thought generator.
    pub problem: Option<String>,
    /// A synthetic planted instance; providers come from the instance.
    pub synth: Option<SynthSpec>,
    /// Path to a JSONL dataset of `{id, problem, answer}` records.
    pub dataset: Option<PathBuf>,
    /// Tree-generation bounds for `problem` and `dataset` tasks.
    pub tot: Option<ToTGenConfig>,
}

/// Provider blocks. Ignored for synthetic tasks, which carry their own
/// experts and default embedder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ProvidersSection {
    pub generator: Option<GeneratorSpec>,
    pub experts: Vec<ExpertSpec>,
    pub embedder: Option<EmbedderSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: ProviderKind,
    /// Seed for the mock generator.
    #[serde(default)]
    pub seed: u64,
    /// Connection settings for the http generator.
    #[serde(flatten)]
    pub http: Option<HttpProviderConfig>,
    /// Overrides the generator's system prompt.
    #[serde(default)]
    pub system_prompt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertSpec {
    pub kind: ProviderKind,
    pub role: ExpertRole,
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub http: Option<HttpProviderConfig>,
    #[serde(default)]
    pub system_prompt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedderSpec {
    /// Embedding dimension of the hash embedder.
    pub dim: usize,
}

impl Default for EmbedderSpec {
    fn default() -> Self {
        EmbedderSpec { dim: 256 }
    }
}

/// Where the run writes its artifacts. Relative paths resolve against the
/// output directory passed on the command line, or the working directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    pub metrics: PathBuf,
    pub result: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            metrics: PathBuf::from("metrics.jsonl"),
            result: PathBuf::from("result.json"),
        }
    }
}

impl RunConfigFile {
    /// Reads and fully validates a configuration file.
    pub fn load(path: &FsPath) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: RunConfigFile = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |reason: String| Err(ConfigError::Invalid { reason });

        self.engine
            .validate()
            .map_err(|e| ConfigError::Invalid {
                reason: e.to_string(),
            })?;

        let sources = [
            self.task.problem.is_some(),
            self.task.synth.is_some(),
            self.task.dataset.is_some(),
        ]
        .iter()
        .filter(|&&s| s)
        .count();
        if sources != 1 {
            return invalid(format!(
                "task must set exactly one of problem, synth, dataset (found {sources})"
            ));
        }

        if let Some(spec) = &self.task.synth {
            spec.validate().map_err(|e| ConfigError::Invalid {
                reason: e.to_string(),
            })?;
            if spec.experts != self.engine.colony.ants {
                return invalid(format!(
                    "synth experts ({}) must match colony ants ({})",
                    spec.experts, self.engine.colony.ants
                ));
            }
        } else {
            // Generated-graph tasks need a generator and one expert per ant.
            let generator = self
                .providers
                .generator
                .as_ref()
                .ok_or_else(|| ConfigError::Invalid {
                    reason: "problem and dataset tasks need a [providers.generator] block".into(),
                })?;
            validate_http_fields("generator", generator.kind, &generator.http)?;
            if self.providers.experts.len() != self.engine.colony.ants {
                return invalid(format!(
                    "{} expert blocks configured but colony wants {} ants",
                    self.providers.experts.len(),
                    self.engine.colony.ants
                ));
            }
            for (i, expert) in self.providers.experts.iter().enumerate() {
                validate_http_fields(&format!("expert {i}"), expert.kind, &expert.http)?;
            }
            if let Some(tot) = &self.task.tot {
                tot.validate().map_err(|e| ConfigError::Invalid {
                    reason: e.to_string(),
                })?;
            }
        }

        if let Some(embedder) = &self.providers.embedder {
            if embedder.dim < 2 {
                return invalid("embedder dim must be at least 2".into());
            }
        }
        Ok(())
    }
}

fn validate_http_fields(
    what: &str,
    kind: ProviderKind,
    http: &Option<HttpProviderConfig>,
) -> Result<(), ConfigError> {
    match kind {
        ProviderKind::Http if http.is_none() => Err(ConfigError::Invalid {
            reason: format!("{what}: http providers need endpoint and model"),
        }),
        _ => Ok(()),
    }
}
