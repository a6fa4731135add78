//! The `run`, `bench`, and `inspect` commands. The binary in `main.rs` is a
//! thin argument parser over these functions, which return typed results so
//! tests can drive them directly.

use std::collections::BTreeMap;
use std::path::{Path as FsPath, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colony::ColonyConfig;
use crate::config::{ConfigError, ProviderKind, RunConfigFile};
use crate::engine::{self, EngineConfig, EngineError, IterationMetrics};
use crate::graph::{generate_tot, GraphDoc, GraphError, ReasoningGraph, ToTGenConfig};
use crate::providers::http::{HttpExpert, HttpGenerator};
use crate::providers::mock::{HashEmbedder, MockExpert, MockGenerator};
use crate::providers::{
    CallCounts, CallLedger, CountingGenerator, Embedder, ExpertProvider, ThoughtGenerator,
};
use crate::scoring::QualityWeights;
use crate::synth::{self, SynthSpec};

/// Command failures, mapped to process exit codes by the binary.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("provider failure: {message}")]
    Provider { message: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for provider failures, 3 for configuration and I/O problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Provider { .. } => 2,
            CliError::Config(_) | CliError::Io { .. } => 3,
        }
    }
}

/// Flags accepted by `run`.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the colony RNG seed from the config file.
    pub seed: Option<u64>,
    /// Ask the generator for a final answer from the best chain.
    pub answer: bool,
    /// Base directory for relative output paths.
    pub out_dir: Option<PathBuf>,
}

/// The result file: the resolved configuration plus the outcome.
#[derive(Debug, Serialize, Deserialize)]
pub struct ResultDoc {
    pub config: RunConfigFile,
    pub outcome: RunOutcome,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RunOutcome {
    Single(Box<SingleRunDoc>),
    Dataset(DatasetDoc),
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SingleRunDoc {
    pub run: crate::engine::RunResult,
    pub calls: CallCounts,
    /// Generator calls spent building the tree (zero for synthetic tasks).
    pub tree_calls: u64,
    pub graph: GraphDoc,
    pub pheromones: BTreeMap<String, f64>,
    pub answer: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetDoc {
    pub items: Vec<DatasetItemDoc>,
    pub exact_match_rate: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetItemDoc {
    pub id: String,
    pub problem: String,
    pub best_chain: Vec<String>,
    pub iterations_run: usize,
    pub converged: bool,
    pub calls: CallCounts,
    pub tree_calls: u64,
    pub answer: Option<String>,
    pub expected: Option<String>,
    pub exact_match: Option<bool>,
}

/// One record of a JSONL dataset task file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatasetRecord {
    id: String,
    problem: String,
    #[serde(default)]
    answer: Option<String>,
}

/// Metrics line, optionally tagged with the dataset item it belongs to.
#[derive(Serialize)]
struct MetricsRecord<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    item: Option<&'a str>,
    #[serde(flatten)]
    metrics: &'a IterationMetrics,
}

/// Marker appended to the metrics stream when a run aborts.
#[derive(Serialize)]
struct AbortRecord<'a> {
    aborted: bool,
    error: &'a str,
}

/// Paths written by a successful `run`.
#[derive(Debug)]
pub struct RunArtifacts {
    pub metrics_path: PathBuf,
    pub result_path: PathBuf,
    pub doc: ResultDoc,
}

fn resolve(base: &Option<PathBuf>, path: &FsPath) -> PathBuf {
    match base {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

fn write_file(path: &FsPath, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        }
    }
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct MetricsWriter {
    path: PathBuf,
    buffer: String,
}

impl MetricsWriter {
    fn new(path: PathBuf) -> Self {
        MetricsWriter {
            path,
            buffer: String::new(),
        }
    }

    fn record(&mut self, item: Option<&str>, metrics: &IterationMetrics) {
        let line = serde_json::to_string(&MetricsRecord { item, metrics })
            .expect("metrics serialization cannot fail");
        self.buffer.push_str(&line);
        self.buffer.push('\n');
    }

    fn record_abort(&mut self, error: &str) {
        let line = serde_json::to_string(&AbortRecord {
            aborted: true,
            error,
        })
        .expect("metrics serialization cannot fail");
        self.buffer.push_str(&line);
        self.buffer.push('\n');
    }

    fn flush(&self) -> Result<(), CliError> {
        write_file(&self.path, &self.buffer)
    }
}

/// Providers assembled for a generated-graph task.
struct BuiltProviders {
    generator: Box<dyn ThoughtGenerator>,
    experts: Vec<Box<dyn ExpertProvider>>,
    embedder: HashEmbedder,
}

fn build_providers(config: &RunConfigFile) -> Result<BuiltProviders, CliError> {
    let invalid = |reason: String| CliError::Config(ConfigError::Invalid { reason });
    let providers = &config.providers;
    let generator_spec = providers
        .generator
        .as_ref()
        .ok_or_else(|| invalid("missing [providers.generator]".into()))?;
    let generator: Box<dyn ThoughtGenerator> = match generator_spec.kind {
        ProviderKind::Mock => Box::new(MockGenerator::new(generator_spec.seed)),
        ProviderKind::Http => {
            let http = generator_spec
                .http
                .clone()
                .ok_or_else(|| invalid("http generator needs endpoint and model".into()))?;
            let mut gen = HttpGenerator::new(http)
                .map_err(|e| invalid(e.to_string()))?;
            if let Some(prompt) = &generator_spec.system_prompt {
                gen = gen.with_system_prompt(prompt.clone());
            }
            Box::new(gen)
        }
    };
    let mut experts: Vec<Box<dyn ExpertProvider>> = Vec::new();
    for spec in &providers.experts {
        let expert: Box<dyn ExpertProvider> = match spec.kind {
            ProviderKind::Mock => Box::new(MockExpert::new(spec.seed, spec.role)),
            ProviderKind::Http => {
                let http = spec
                    .http
                    .clone()
                    .ok_or_else(|| invalid("http expert needs endpoint and model".into()))?;
                let mut expert =
                    HttpExpert::new(http, spec.role).map_err(|e| invalid(e.to_string()))?;
                if let Some(prompt) = &spec.system_prompt {
                    expert = expert.with_system_prompt(prompt.clone());
                }
                Box::new(expert)
            }
        };
        experts.push(expert);
    }
    let dim = providers.embedder.as_ref().map_or(256, |e| e.dim);
    Ok(BuiltProviders {
        generator,
        experts,
        embedder: HashEmbedder::new(dim),
    })
}

/// Builds a graph for one problem, counting generator calls.
fn build_graph(
    problem: &str,
    generator: &dyn ThoughtGenerator,
    tot: &ToTGenConfig,
) -> Result<(ReasoningGraph, u64), CliError> {
    let ledger = CallLedger::new();
    let counting = CountingGenerator::new(generator, &ledger);
    let graph = generate_tot(problem, &counting, tot).map_err(|e| match e {
        GraphError::Generator { .. } => CliError::Provider {
            message: e.to_string(),
        },
        other => CliError::Config(ConfigError::Invalid {
            reason: other.to_string(),
        }),
    })?;
    Ok((graph, ledger.snapshot().generate))
}

/// Executes the task in a config file and writes the metrics stream and the
/// result document.
pub fn cmd_run(config_path: &FsPath, opts: &RunOptions) -> Result<RunArtifacts, CliError> {
    let mut config = RunConfigFile::load(config_path)?;
    if let Some(seed) = opts.seed {
        config.engine.colony.seed = seed;
    }
    if opts.answer && config.task.synth.is_some() {
        return Err(CliError::Config(ConfigError::Invalid {
            reason: "--answer needs a generator provider; synthetic tasks have none".into(),
        }));
    }

    let metrics_path = resolve(&opts.out_dir, &config.output.metrics);
    let result_path = resolve(&opts.out_dir, &config.output.result);
    let mut metrics = MetricsWriter::new(metrics_path.clone());

    let outcome = if let Some(spec) = config.task.synth {
        run_synth_task(&config, &spec, &mut metrics)
    } else if config.task.problem.is_some() {
        run_problem_task(&config, opts, &mut metrics)
    } else {
        run_dataset_task(&config, opts, &mut metrics)
    };
    let outcome = match outcome {
        Ok(outcome) => outcome,
        Err(err @ CliError::Provider { .. }) => {
            // Flush whatever completed plus an abort marker; exit code 2.
            metrics.record_abort(&err.to_string());
            metrics.flush()?;
            return Err(err);
        }
        // Configuration-class failures leave no partial outputs behind.
        Err(err) => return Err(err),
    };

    metrics.flush()?;
    let doc = ResultDoc {
        config,
        outcome,
    };
    let mut rendered =
        serde_json::to_string_pretty(&doc).expect("result serialization cannot fail");
    rendered.push('\n');
    write_file(&result_path, &rendered)?;
    Ok(RunArtifacts {
        metrics_path,
        result_path,
        doc,
    })
}

/// Runs the engine, streaming history into the metrics buffer; on abort the
/// partial history plus a flag line is flushed before the error returns.
fn run_engine_logged(
    graph: &ReasoningGraph,
    experts: &[&dyn ExpertProvider],
    embedder: &dyn Embedder,
    cfg: &EngineConfig,
    item: Option<&str>,
    metrics: &mut MetricsWriter,
) -> Result<engine::RunOutput, CliError> {
    match engine::run(graph, experts, embedder, cfg) {
        Ok(output) => {
            for m in &output.result.history {
                metrics.record(item, m);
            }
            Ok(output)
        }
        Err(EngineError::Aborted {
            iteration,
            source,
            history,
        }) => {
            for m in &history {
                metrics.record(item, m);
            }
            Err(CliError::Provider {
                message: format!("iteration {iteration}: {source}"),
            })
        }
        Err(EngineError::InvalidConfig { reason }) => {
            Err(CliError::Config(ConfigError::Invalid { reason }))
        }
    }
}

fn run_synth_task(
    config: &RunConfigFile,
    spec: &SynthSpec,
    metrics: &mut MetricsWriter,
) -> Result<RunOutcome, CliError> {
    let instance = synth::generate(spec).map_err(|e| {
        CliError::Config(ConfigError::Invalid {
            reason: e.to_string(),
        })
    })?;
    let dim = config.providers.embedder.as_ref().map_or(256, |e| e.dim);
    let embedder = HashEmbedder::new(dim);
    let experts = instance.expert_refs();
    let output = run_engine_logged(
        &instance.graph,
        &experts,
        &embedder,
        &config.engine,
        None,
        metrics,
    )?;
    Ok(RunOutcome::Single(Box::new(SingleRunDoc {
        calls: output.calls,
        tree_calls: 0,
        graph: GraphDoc::from(&instance.graph),
        pheromones: output.pheromones.snapshot(),
        answer: None,
        run: output.result,
    })))
}

fn run_problem_task(
    config: &RunConfigFile,
    opts: &RunOptions,
    metrics: &mut MetricsWriter,
) -> Result<RunOutcome, CliError> {
    let built = build_providers(config)?;
    let problem = config.task.problem.as_deref().expect("validated task");
    let tot = config.task.tot.unwrap_or_default();
    let (graph, tree_calls) = build_graph(problem, &*built.generator, &tot)?;
    let experts: Vec<&dyn ExpertProvider> = built.experts.iter().map(|e| &**e).collect();
    let output = run_engine_logged(
        &graph,
        &experts,
        &built.embedder,
        &config.engine,
        None,
        metrics,
    )?;
    let answer = if opts.answer {
        Some(
            built
                .generator
                .final_answer(problem, &output.result.best_chain)
                .map_err(|e| CliError::Provider {
                    message: e.to_string(),
                })?,
        )
    } else {
        None
    };
    Ok(RunOutcome::Single(Box::new(SingleRunDoc {
        calls: output.calls,
        tree_calls,
        graph: GraphDoc::from(&graph),
        pheromones: output.pheromones.snapshot(),
        answer,
        run: output.result,
    })))
}

fn run_dataset_task(
    config: &RunConfigFile,
    opts: &RunOptions,
    metrics: &mut MetricsWriter,
) -> Result<RunOutcome, CliError> {
    let built = build_providers(config)?;
    let dataset_path = config.task.dataset.as_ref().expect("validated task");
    let text = std::fs::read_to_string(dataset_path).map_err(|source| {
        CliError::Config(ConfigError::Io {
            path: dataset_path.clone(),
            source,
        })
    })?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetRecord =
            serde_json::from_str(line).map_err(|e| {
                CliError::Config(ConfigError::Parse {
                    path: dataset_path.clone(),
                    message: format!("line {}: {e}", lineno + 1),
                })
            })?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(CliError::Config(ConfigError::Invalid {
            reason: "dataset file has no records".into(),
        }));
    }

    let tot = config.task.tot.unwrap_or_default();
    let experts: Vec<&dyn ExpertProvider> = built.experts.iter().map(|e| &**e).collect();
    let mut items = Vec::with_capacity(records.len());
    for record in &records {
        let (graph, tree_calls) = build_graph(&record.problem, &*built.generator, &tot)?;
        let output = run_engine_logged(
            &graph,
            &experts,
            &built.embedder,
            &config.engine,
            Some(&record.id),
            metrics,
        )?;
        let answer = if opts.answer {
            Some(
                built
                    .generator
                    .final_answer(&record.problem, &output.result.best_chain)
                    .map_err(|e| CliError::Provider {
                        message: e.to_string(),
                    })?,
            )
        } else {
            None
        };
        let exact_match = match (&answer, &record.answer) {
            (Some(got), Some(want)) => Some(got.trim() == want.trim()),
            _ => None,
        };
        items.push(DatasetItemDoc {
            id: record.id.clone(),
            problem: record.problem.clone(),
            best_chain: output.result.best_chain.clone(),
            iterations_run: output.result.iterations_run,
            converged: output.result.converged,
            calls: output.calls,
            tree_calls,
            answer,
            expected: record.answer.clone(),
            exact_match,
        });
    }
    let checked: Vec<bool> = items.iter().filter_map(|i| i.exact_match).collect();
    let exact_match_rate = if checked.is_empty() {
        None
    } else {
        Some(checked.iter().filter(|&&m| m).count() as f64 / checked.len() as f64)
    };
    Ok(RunOutcome::Dataset(DatasetDoc {
        items,
        exact_match_rate,
    }))
}

/// One entry of a bench manifest: a synthetic spec plus optional engine
/// overrides for sweep studies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchEntry {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub spec: SynthSpec,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub elitism: Option<bool>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub convergence_window: Option<usize>,
}

impl BenchEntry {
    fn engine_config(&self, seed: u64) -> EngineConfig {
        let defaults = ColonyConfig::default();
        EngineConfig {
            colony: ColonyConfig {
                ants: self.spec.experts,
                alpha: self.alpha.unwrap_or(defaults.alpha),
                beta: self.beta.unwrap_or(defaults.beta),
                rho: self.rho.unwrap_or(defaults.rho),
                seed,
                elitism: self.elitism.unwrap_or(defaults.elitism),
                ..defaults
            },
            weights: QualityWeights::default(),
            max_iterations: self.max_iterations.unwrap_or(10),
            convergence_window: self.convergence_window.unwrap_or(3),
        }
    }

    fn label(&self, index: usize) -> String {
        self.name.clone().unwrap_or_else(|| {
            format!(
                "entry{index}_d{}n{}m{}_a{}b{}",
                self.spec.depth,
                self.spec.branching,
                self.spec.experts,
                self.alpha.unwrap_or(1.0),
                self.beta.unwrap_or(2.0)
            )
        })
    }
}

/// Aggregated outcome of one manifest entry across its repeats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    pub seed: u64,
    pub depth: usize,
    pub branching: usize,
    pub separation: f64,
    pub noise: f64,
    pub experts: usize,
    pub alpha: f64,
    pub beta: f64,
    pub repeats: usize,
    /// Fraction of repeats whose extracted path equals the oracle argmax.
    pub recovery_rate: f64,
    pub converged_rate: f64,
    pub median_iterations: f64,
    pub mean_concentration: f64,
    pub mean_total_calls: f64,
}

#[derive(Debug)]
pub struct BenchSummary {
    pub rows: Vec<BenchRow>,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

struct RepeatOutcome {
    recovered: bool,
    converged: bool,
    iterations: usize,
    concentration: f64,
    total_calls: u64,
}

fn run_bench_repeat(entry: &BenchEntry, repeat: usize) -> Result<RepeatOutcome, CliError> {
    let spec = SynthSpec {
        seed: entry.spec.seed.wrapping_add(repeat as u64),
        ..entry.spec
    };
    let provider_failure = |message: String| CliError::Provider { message };
    let instance = synth::generate(&spec).map_err(|e| {
        CliError::Config(ConfigError::Invalid {
            reason: e.to_string(),
        })
    })?;
    let embedder = HashEmbedder::default();
    let cfg = entry.engine_config(spec.seed);

    let quiet = instance.quiet_experts();
    let quiet_refs: Vec<&dyn ExpertProvider> =
        quiet.iter().map(|e| e as &dyn ExpertProvider).collect();
    let (oracle_path, _) = synth::oracle_best(&instance.graph, &cfg.weights, &embedder, &quiet_refs)
        .map_err(|e| provider_failure(e.to_string()))?;

    let experts = instance.expert_refs();
    let output = engine::run(&instance.graph, &experts, &embedder, &cfg)
        .map_err(|e| provider_failure(e.to_string()))?;
    let last = output
        .result
        .history
        .last()
        .expect("completed runs have history");
    Ok(RepeatOutcome {
        recovered: output.result.best_path == oracle_path,
        converged: output.result.converged,
        iterations: output.result.iterations_run,
        concentration: last.concentration_ratio,
        total_calls: output.calls.total,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN iterations"));
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Runs every manifest entry `repeats` times and writes `summary.csv` and
/// `summary.json` into the output directory.
pub fn cmd_bench(
    manifest_path: &FsPath,
    repeats: usize,
    out_dir: Option<PathBuf>,
) -> Result<BenchSummary, CliError> {
    if repeats == 0 {
        return Err(CliError::Config(ConfigError::Invalid {
            reason: "repeats must be at least 1".into(),
        }));
    }
    let text = std::fs::read_to_string(manifest_path).map_err(|source| {
        CliError::Config(ConfigError::Io {
            path: manifest_path.to_path_buf(),
            source,
        })
    })?;
    let entries: Vec<BenchEntry> = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(ConfigError::Parse {
            path: manifest_path.to_path_buf(),
            message: e.to_string(),
        })
    })?;
    if entries.is_empty() {
        return Err(CliError::Config(ConfigError::Invalid {
            reason: "bench manifest has no entries".into(),
        }));
    }
    for entry in &entries {
        entry.spec.validate().map_err(|e| {
            CliError::Config(ConfigError::Invalid {
                reason: e.to_string(),
            })
        })?;
    }

    let jobs: Vec<(usize, usize)> = (0..entries.len())
        .flat_map(|e| (0..repeats).map(move |r| (e, r)))
        .collect();
    let outcomes: Vec<Result<RepeatOutcome, CliError>> = jobs
        .par_iter()
        .map(|&(e, r)| run_bench_repeat(&entries[e], r))
        .collect();

    let mut rows = Vec::with_capacity(entries.len());
    for (e, entry) in entries.iter().enumerate() {
        let mut recovered = 0usize;
        let mut converged = 0usize;
        let mut iterations = Vec::with_capacity(repeats);
        let mut concentration_sum = 0.0;
        let mut calls_sum = 0u64;
        for (job, outcome) in jobs.iter().zip(&outcomes) {
            if job.0 != e {
                continue;
            }
            let outcome = match outcome {
                Ok(o) => o,
                Err(err) => {
                    return Err(CliError::Provider {
                        message: err.to_string(),
                    })
                }
            };
            recovered += outcome.recovered as usize;
            converged += outcome.converged as usize;
            iterations.push(outcome.iterations as f64);
            concentration_sum += outcome.concentration;
            calls_sum += outcome.total_calls;
        }
        rows.push(BenchRow {
            name: entry.label(e),
            seed: entry.spec.seed,
            depth: entry.spec.depth,
            branching: entry.spec.branching,
            separation: entry.spec.separation,
            noise: entry.spec.noise,
            experts: entry.spec.experts,
            alpha: entry.alpha.unwrap_or(1.0),
            beta: entry.beta.unwrap_or(2.0),
            repeats,
            recovery_rate: recovered as f64 / repeats as f64,
            converged_rate: converged as f64 / repeats as f64,
            median_iterations: median(&mut iterations),
            mean_concentration: concentration_sum / repeats as f64,
            mean_total_calls: calls_sum as f64 / repeats as f64,
        });
    }

    let dir = out_dir.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let csv_path = dir.join("summary.csv");
    let json_path = dir.join("summary.json");

    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        writer.serialize(row).map_err(|e| CliError::Io {
            path: csv_path.clone(),
            source: std::io::Error::other(e),
        })?;
    }
    let csv_bytes = writer.into_inner().map_err(|e| CliError::Io {
        path: csv_path.clone(),
        source: std::io::Error::other(e),
    })?;
    write_file(&csv_path, &String::from_utf8_lossy(&csv_bytes))?;

    let mut json = serde_json::to_string_pretty(&rows).expect("rows serialize");
    json.push('\n');
    write_file(&json_path, &json)?;

    Ok(BenchSummary {
        rows,
        csv_path,
        json_path,
    })
}

/// Renders a result file as readable text, or as a DOT graph with edge
/// widths proportional to pheromone level.
pub fn cmd_inspect(result_path: &FsPath, dot: bool) -> Result<String, CliError> {
    let text = std::fs::read_to_string(result_path).map_err(|source| {
        CliError::Config(ConfigError::Io {
            path: result_path.to_path_buf(),
            source,
        })
    })?;
    let doc: ResultDoc = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(ConfigError::Parse {
            path: result_path.to_path_buf(),
            message: e.to_string(),
        })
    })?;
    match (&doc.outcome, dot) {
        (RunOutcome::Single(single), true) => Ok(render_dot(single)),
        (RunOutcome::Single(single), false) => Ok(render_single_report(&doc.config, single)),
        (RunOutcome::Dataset(_), true) => Err(CliError::Config(ConfigError::Invalid {
            reason: "--dot needs a single-run result file".into(),
        })),
        (RunOutcome::Dataset(dataset), false) => Ok(render_dataset_report(dataset)),
    }
}

fn render_single_report(config: &RunConfigFile, single: &SingleRunDoc) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let run = &single.run;
    let _ = writeln!(out, "converged={}", run.converged);
    let _ = writeln!(
        out,
        "convergence_window={}",
        config.engine.convergence_window
    );
    let _ = writeln!(out, "iterations_run={}", run.iterations_run);
    let _ = writeln!(out, "total_provider_calls={}", single.calls.total);
    let _ = writeln!(out, "best_path={}", run.best_path);
    let _ = writeln!(out, "best chain:");
    for (i, step) in run.best_chain.iter().enumerate() {
        let _ = writeln!(out, "  {}. {step}", i + 1);
    }
    if let Some(answer) = &single.answer {
        let _ = writeln!(out, "answer: {answer}");
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>4} {:>10} {:>10} {:>10} {:>14} {:>10}",
        "iter", "best_q", "agreement", "diversity", "concentration", "calls"
    );
    for m in &run.history {
        let _ = writeln!(
            out,
            "{:>4} {:>10.4} {:>10.2} {:>10.2} {:>14.3} {:>10}",
            m.iteration,
            m.best_quality,
            m.agreement_rate,
            m.path_diversity,
            m.concentration_ratio,
            m.cumulative_calls
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "pheromones:");
    let width = single
        .pheromones
        .keys()
        .map(String::len)
        .max()
        .unwrap_or(0);
    // Order edges numerically rather than by string key.
    let mut edges: Vec<(&String, &f64)> = single.pheromones.iter().collect();
    edges.sort_by_key(|(key, _)| {
        let mut parts = key.split("->").filter_map(|p| p.parse::<u32>().ok());
        (parts.next().unwrap_or(u32::MAX), parts.next().unwrap_or(u32::MAX))
    });
    for (edge, tau) in edges {
        let _ = writeln!(out, "  {edge:<width$}  {tau:.6}");
    }
    out
}

fn render_dataset_report(dataset: &DatasetDoc) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>10} {:>10} {:>10} {:>12}",
        "item", "converged", "iters", "calls", "exact_match"
    );
    for item in &dataset.items {
        let matched = item
            .exact_match
            .map(|m| m.to_string())
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<12} {:>10} {:>10} {:>10} {:>12}",
            item.id, item.converged, item.iterations_run, item.calls.total, matched
        );
    }
    if let Some(rate) = dataset.exact_match_rate {
        let _ = writeln!(out, "exact_match_rate={rate:.3}");
    }
    out
}

/// DOT document with one line per graph edge; `penwidth` grows monotonically
/// with the edge's pheromone level.
fn render_dot(single: &SingleRunDoc) -> String {
    use std::fmt::Write as _;
    let taus: Vec<f64> = single.pheromones.values().copied().collect();
    let min = taus.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = taus.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width_of = |tau: f64| {
        if max <= min {
            1.0
        } else {
            0.5 + 4.0 * (tau - min) / (max - min)
        }
    };
    let mut out = String::from("digraph reasoning {\n  rankdir=TB;\n");
    for node in &single.graph.nodes {
        let label = if node.id == single.graph.s0 {
            "s0".to_string()
        } else if node.id == single.graph.sf {
            "sf".to_string()
        } else {
            let mut text: String = node.text.chars().take(24).collect();
            if text.len() < node.text.len() {
                text.push_str("...");
            }
            format!("{}: {}", node.id, text.replace('"', "'"))
        };
        let _ = writeln!(out, "  n{} [label=\"{label}\"];", node.id);
    }
    for (i, j) in &single.graph.edges {
        let tau = single
            .pheromones
            .get(&format!("{i}->{j}"))
            .copied()
            .unwrap_or(0.0);
        let _ = writeln!(
            out,
            "  n{i} -> n{j} [penwidth={:.3}, tooltip=\"{tau:.6}\"];",
            width_of(tau)
        );
    }
    out.push_str("}\n");
    out
}

