//! The prequential loop: chunk 0 builds the model, every later chunk is
//! predicted, scored and then used for the strategy's update.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierConfig, ClassifierKind};
use crate::dataset::{load_dataset, DatasetDescriptor};
use crate::error::{Error, Result};
use crate::fairness::{Corrector, CountSource, DetectorConfig, Technique};
use crate::generator::{generate_stream, GeneratorConfig, ScheduleOptions};
use crate::schema::Schema;
use crate::strategy::{ChunkMetrics, StrategyKind, StrategyState};
use crate::stream::{into_chunks, Chunk, Instance};

pub const DEFAULT_CHUNK_SIZE: usize = 1000;

/// Where the instances come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    /// The UCI census-income pair `adult.data` + `adult.test` in `dir`.
    Census {
        dir: PathBuf,
    },
    Dataset(DatasetDescriptor),
    /// Random schedule drawn from the experiment seed.
    Synthetic(ScheduleOptions),
    Generator(GeneratorConfig),
}

impl Source {
    /// Short name used in run labels.
    pub fn name(&self) -> String {
        match self {
            Source::Census { .. } => "census".into(),
            Source::Dataset(d) => d
                .paths
                .first()
                .and_then(|p| p.file_stem())
                .map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned()),
            Source::Synthetic(_) | Source::Generator(_) => "synthetic".into(),
        }
    }

    /// Materializes the stream in order.
    pub fn load(&self, seed: u64) -> Result<(Schema, Vec<Instance>)> {
        match self {
            Source::Census { dir } => {
                let ds = load_dataset(&DatasetDescriptor::census(dir))?;
                Ok((ds.schema, ds.instances))
            }
            Source::Dataset(d) => {
                let ds = load_dataset(d)?;
                Ok((ds.schema, ds.instances))
            }
            Source::Synthetic(opts) => {
                let (schema, chunks, _) = generate_stream(GeneratorConfig::randomized(opts, seed)?)?;
                Ok((schema, chunks.into_iter().flat_map(|c| c.instances).collect()))
            }
            Source::Generator(cfg) => {
                let (schema, chunks, _) = generate_stream(cfg.clone())?;
                Ok((schema, chunks.into_iter().flat_map(|c| c.instances).collect()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: Source,
    pub classifier: ClassifierConfig,
    pub strategy: StrategyKind,
    /// Ignored by the baselines.
    pub correction: Technique,
    #[serde(default)]
    pub count_source: CountSource,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_chunk")]
    pub chunk: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_chunk() -> usize {
    DEFAULT_CHUNK_SIZE
}

impl ExperimentConfig {
    pub fn new(source: Source, classifier: ClassifierKind, strategy: StrategyKind, correction: Technique) -> Self {
        ExperimentConfig {
            source,
            classifier: ClassifierConfig::new(classifier),
            strategy,
            correction,
            count_source: CountSource::default(),
            epsilon: 0.0,
            chunk: DEFAULT_CHUNK_SIZE,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk == 0 {
            return Err(Error::Config("chunk size must be at least 1".into()));
        }
        DetectorConfig::new(self.epsilon)?;
        Ok(())
    }

    /// `source_classifier_strategy[_correction]`; baselines carry no correction.
    pub fn label(&self) -> String {
        let mut s = format!("{}_{}_{}", self.source.name(), self.classifier.kind, self.strategy);
        if !self.strategy.is_baseline() {
            s.push('_');
            s.push_str(self.correction.as_str());
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub classifier: ClassifierKind,
    pub strategy: StrategyKind,
    pub correction: Option<Technique>,
    pub evaluated_chunks: usize,
    pub mean_accuracy: f64,
    pub mean_discrimination: f64,
    pub mean_true_discrimination: f64,
    pub resets: usize,
    pub corrections: usize,
    pub massaged: usize,
    /// Path of the per-chunk trace, once written.
    #[serde(default)]
    pub trace: Option<PathBuf>,
    /// Metrics of a trailing short chunk, kept out of the means.
    #[serde(default)]
    pub partial_chunk: Option<ChunkMetrics>,
}

/// Aggregates of a trace, without run identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSummary {
    pub chunks: usize,
    pub mean_accuracy: f64,
    pub mean_discrimination: f64,
    pub mean_true_discrimination: f64,
    pub resets: usize,
    pub corrections: usize,
    pub massaged: usize,
}

pub fn summarize(trace: &[ChunkMetrics]) -> Result<TraceSummary> {
    if trace.is_empty() {
        return Err(Error::Contract("cannot summarize an empty trace".into()));
    }
    let n = trace.len() as f64;
    let mean = |f: fn(&ChunkMetrics) -> f64| trace.iter().map(f).sum::<f64>() / n;
    Ok(TraceSummary {
        chunks: trace.len(),
        mean_accuracy: mean(|m| m.accuracy),
        mean_discrimination: mean(|m| m.discrimination),
        mean_true_discrimination: mean(|m| m.true_discrimination),
        resets: trace.iter().filter(|m| m.reset).count(),
        corrections: trace.iter().filter(|m| m.corrected).count(),
        massaged: trace.iter().map(|m| m.massaged).sum(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    /// One entry per full chunk after the first.
    pub trace: Vec<ChunkMetrics>,
    pub summary: RunSummary,
}

/// Loads the source and runs the experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let (schema, instances) = cfg.source.load(cfg.seed)?;
    let chunks = into_chunks(instances, cfg.chunk)?;
    run_chunks(cfg, &schema, &chunks)
}

/// Runs the experiment over an already chunked stream. `cfg.source` only
/// contributes to the run label.
pub fn run_chunks(cfg: &ExperimentConfig, schema: &Schema, chunks: &[Chunk]) -> Result<RunOutput> {
    cfg.validate()?;
    let full = chunks.iter().take_while(|c| c.len() == cfg.chunk).count();
    if full < 2 {
        return Err(Error::Config(format!(
            "stream has {full} full chunk(s) of {}; at least 2 are needed",
            cfg.chunk
        )));
    }
    if chunks.len() > full + 1 {
        return Err(Error::Contract("only the last chunk may be short".into()));
    }
    for c in chunks {
        c.validate(schema)?;
    }
    let detector = DetectorConfig::new(cfg.epsilon)?;
    let corrector = Corrector::new(cfg.correction).with_count_source(cfg.count_source);
    let mut state = StrategyState::initialize(
        cfg.strategy,
        &cfg.classifier,
        schema.clone(),
        detector,
        corrector,
        &chunks[0],
    )?;
    let mut trace = Vec::with_capacity(full - 1);
    for chunk in &chunks[1..full] {
        let out = state.step(chunk)?;
        log::debug!(
            "{} chunk {}: acc {:.4} disc {:.4}{}",
            cfg.label(),
            chunk.index,
            out.metrics.accuracy,
            out.metrics.discrimination,
            if out.metrics.reset { " reset" } else { "" }
        );
        trace.push(out.metrics);
    }
    let partial_chunk = match chunks.get(full) {
        Some(rest) => {
            let mut m = state.evaluate(rest)?.metrics;
            m.partial = true;
            Some(m)
        }
        None => None,
    };
    let s = summarize(&trace)?;
    let summary = RunSummary {
        label: cfg.label(),
        classifier: cfg.classifier.kind,
        strategy: cfg.strategy,
        correction: (!cfg.strategy.is_baseline()).then_some(cfg.correction),
        evaluated_chunks: s.chunks,
        mean_accuracy: s.mean_accuracy,
        mean_discrimination: s.mean_discrimination,
        mean_true_discrimination: s.mean_true_discrimination,
        resets: s.resets,
        corrections: s.corrections,
        massaged: s.massaged,
        trace: None,
        partial_chunk,
    };
    Ok(RunOutput { trace, summary })
}
