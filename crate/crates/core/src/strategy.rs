//! Per-chunk update policies: the four fairness-aware strategies and the two
//! baselines, over any learner.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierConfig, Learner, Model, Prediction};
use crate::error::{Error, Result};
use crate::fairness::{detect, CorrectionOutcome, Corrector, DetectorConfig};
use crate::parity::{accuracy, partition_communities, true_label_counts, CommunityCounts};
use crate::schema::{Label, Schema};
use crate::stream::{Chunk, Instance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyKind {
    /// Always update; use the corrected chunk when discrimination is detected.
    #[serde(rename = "m1")]
    M1,
    /// Like M1, but reset before training on a corrected chunk.
    #[serde(rename = "m2")]
    M2,
    /// Update only when discrimination is detected, from the corrected chunk.
    #[serde(rename = "m3")]
    M3,
    /// Like M3, but reset before each update.
    #[serde(rename = "m4")]
    M4,
    /// Baseline: never sees the sensitive attribute, always trains on raw chunks.
    #[serde(rename = "b_nosa")]
    NoSa,
    /// Baseline: reset on detection, but train on the raw chunk.
    #[serde(rename = "b_reset")]
    Reset,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::M1,
        StrategyKind::M2,
        StrategyKind::M3,
        StrategyKind::M4,
        StrategyKind::NoSa,
        StrategyKind::Reset,
    ];

    pub fn is_baseline(self) -> bool {
        matches!(self, StrategyKind::NoSa | StrategyKind::Reset)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::M1 => "m1",
            StrategyKind::M2 => "m2",
            StrategyKind::M3 => "m3",
            StrategyKind::M4 => "m4",
            StrategyKind::NoSa => "b_nosa",
            StrategyKind::Reset => "b_reset",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace(['.', '-'], "_");
        match norm.as_str() {
            "m1" => Ok(StrategyKind::M1),
            "m2" => Ok(StrategyKind::M2),
            "m3" => Ok(StrategyKind::M3),
            "m4" => Ok(StrategyKind::M4),
            "b_nosa" | "nosa" | "b1" => Ok(StrategyKind::NoSa),
            "b_reset" | "reset" | "b2" => Ok(StrategyKind::Reset),
            _ => Err(Error::Config(format!("unknown strategy '{s}'"))),
        }
    }
}

/// What one chunk did to the model and what it measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChunkMetrics {
    pub t: usize,
    pub size: usize,
    pub accuracy: f64,
    /// Statistical parity of the predictions.
    pub discrimination: f64,
    /// Statistical parity of the true labels.
    pub true_discrimination: f64,
    pub triggered: bool,
    pub massaged: usize,
    pub reset: bool,
    pub corrected: bool,
    /// A group was empty in the predicted or true counts.
    pub degenerate: bool,
    /// Shorter than the configured chunk size; evaluated only.
    pub partial: bool,
    pub predicted_counts: CommunityCounts,
    pub true_counts: CommunityCounts,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyCounters {
    pub resets: usize,
    pub corrections: usize,
    pub massaged_total: usize,
}

/// Effect of one update on the learner.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UpdateReport {
    pub reset: bool,
    pub trained: bool,
    pub correction: Option<CorrectionOutcome>,
}

/// Drops the sensitive column from every feature vector.
pub fn mask_sa(chunk: &Chunk, schema: &Schema) -> Chunk {
    let sa = schema.sensitive_index();
    Chunk::new(
        chunk.index,
        chunk
            .instances
            .iter()
            .map(|i| Instance {
                features: i
                    .features
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != sa)
                    .map(|(_, &v)| v)
                    .collect(),
                label: i.label,
                weight: i.weight,
            })
            .collect(),
    )
}

/// Applies one strategy's update rule. `correct` is called at most once, and
/// only when the rule needs the corrected chunk.
pub fn apply_update<L: Learner>(
    kind: StrategyKind,
    learner: &mut L,
    chunk: &Chunk,
    triggered: bool,
    correct: impl FnOnce(&Chunk) -> Result<CorrectionOutcome>,
) -> Result<UpdateReport> {
    let mut report = UpdateReport::default();
    let (reset, use_corrected, train) = match (kind, triggered) {
        (StrategyKind::M1, false) | (StrategyKind::M2, false) | (StrategyKind::Reset, false) => (false, false, true),
        (StrategyKind::M1, true) | (StrategyKind::M3, true) => (false, true, true),
        (StrategyKind::M2, true) | (StrategyKind::M4, true) => (true, true, true),
        (StrategyKind::M3, false) | (StrategyKind::M4, false) => (false, false, false),
        (StrategyKind::NoSa, _) => (false, false, true),
        (StrategyKind::Reset, true) => (true, false, true),
    };
    if reset {
        learner.reset();
        report.reset = true;
    }
    if use_corrected {
        let outcome = correct(chunk)?;
        learner.train_chunk(&outcome.chunk);
        report.correction = Some(outcome);
        report.trained = true;
    } else if train {
        learner.train_chunk(chunk);
        report.trained = true;
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub predictions: Vec<Prediction>,
    pub metrics: ChunkMetrics,
}

/// A learner plus its update policy, detector and corrector.
#[derive(Clone, Debug)]
pub struct StrategyState {
    kind: StrategyKind,
    schema: Schema,
    detector: DetectorConfig,
    corrector: Corrector,
    learner: Model,
    counters: StrategyCounters,
}

impl StrategyState {
    /// Builds the initial model from the first chunk: corrected for M1–M4, raw
    /// for B_RESET, SA-masked for B_NOSA. Emits no metrics.
    pub fn initialize(
        kind: StrategyKind,
        classifier: &ClassifierConfig,
        schema: Schema,
        detector: DetectorConfig,
        corrector: Corrector,
        first: &Chunk,
    ) -> Result<Self> {
        first.validate(&schema)?;
        let learner = match kind {
            StrategyKind::NoSa => classifier.build(&schema.masked_attributes()),
            _ => classifier.build(schema.attributes()),
        };
        let mut state = StrategyState {
            kind,
            schema,
            detector,
            corrector,
            learner,
            counters: StrategyCounters::default(),
        };
        match kind {
            StrategyKind::NoSa => {
                let masked = mask_sa(first, &state.schema);
                state.learner.train_chunk(&masked);
            }
            StrategyKind::Reset => state.learner.train_chunk(first),
            _ => {
                let outcome = state.corrector.correct(first, &state.schema, None)?;
                state.record_correction(&outcome);
                state.learner.train_chunk(&outcome.chunk);
            }
        }
        Ok(state)
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn learner(&self) -> &Model {
        &self.learner
    }

    pub fn counters(&self) -> StrategyCounters {
        self.counters
    }

    fn record_correction(&mut self, outcome: &CorrectionOutcome) {
        if outcome.applied {
            self.counters.corrections += 1;
            self.counters.massaged_total += outcome.massaged_count;
        }
    }

    fn learner_view<'a>(&self, chunk: &'a Chunk) -> Cow<'a, Chunk> {
        if self.kind == StrategyKind::NoSa {
            Cow::Owned(mask_sa(chunk, &self.schema))
        } else {
            Cow::Borrowed(chunk)
        }
    }

    /// Predicts and scores a chunk with the current model without updating it.
    pub fn evaluate(&self, chunk: &Chunk) -> Result<StepOutcome> {
        chunk.validate(&self.schema)?;
        if chunk.is_empty() {
            return Err(Error::Contract(format!("chunk {} is empty", chunk.index)));
        }
        let view = self.learner_view(chunk);
        let predictions = self.learner.predict_chunk(&view);
        let predicted: Vec<Label> = predictions.iter().map(|p| p.label).collect();
        let truths = chunk.labels();
        let predicted_counts = partition_communities(chunk, &predicted, &self.schema, false)?;
        let true_counts = true_label_counts(chunk, &self.schema, false);
        let detection = detect(&predicted_counts, &self.detector);
        let metrics = ChunkMetrics {
            t: chunk.index,
            size: chunk.len(),
            accuracy: accuracy(&predicted, &truths)?,
            discrimination: detection.score,
            true_discrimination: crate::parity::statistical_parity(&true_counts),
            triggered: detection.triggered,
            massaged: 0,
            reset: false,
            corrected: false,
            degenerate: predicted_counts.is_degenerate() || true_counts.is_degenerate(),
            partial: false,
            predicted_counts,
            true_counts,
        };
        Ok(StepOutcome { predictions, metrics })
    }

    /// Prequential step: predict with the incoming model, score, detect, then update.
    pub fn step(&mut self, chunk: &Chunk) -> Result<StepOutcome> {
        let mut outcome = self.evaluate(chunk)?;
        let triggered = outcome.metrics.triggered;
        let predicted: Vec<Label> = outcome.predictions.iter().map(|p| p.label).collect();
        let view = self.learner_view(chunk);
        let (schema, corrector) = (&self.schema, self.corrector);
        let report = apply_update(self.kind, &mut self.learner, &view, triggered, |c| {
            corrector.correct(c, schema, Some(&predicted))
        })?;
        if report.reset {
            self.counters.resets += 1;
        }
        if let Some(correction) = &report.correction {
            self.record_correction(correction);
            outcome.metrics.massaged = correction.massaged_count;
            outcome.metrics.corrected = correction.applied;
        }
        outcome.metrics.reset = report.reset;
        Ok(outcome)
    }
}
