//! Discrimination detection and the two chunk corrections: massaging
//! (label swaps chosen by a Naive Bayes ranker) and re-weighting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{Learner, NaiveBayes};
use crate::error::{Error, Result};
use crate::parity::{partition_communities, statistical_parity, true_label_counts, CommunityCounts};
use crate::schema::{Group, Label, Schema};
use crate::stream::Chunk;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub epsilon: f64,
}

impl DetectorConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [0, 1], got {epsilon}")));
        }
        Ok(DetectorConfig { epsilon })
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig { epsilon: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection {
    pub score: f64,
    pub triggered: bool,
}

/// Scores predicted-label counts; fires only when the score strictly exceeds epsilon.
pub fn detect(counts: &CommunityCounts, cfg: &DetectorConfig) -> Detection {
    let score = statistical_parity(counts);
    Detection {
        score,
        triggered: score > cfg.epsilon,
    }
}

/// Number of labels to swap in each of the DR and FG communities so that the
/// chunk's parity reaches zero. Rounded half up; negative values become 0.
pub fn massaging_count(counts: &CommunityCounts, chunk_size: usize) -> usize {
    if chunk_size == 0 {
        return 0;
    }
    let raw = (counts.fg * counts.deprived() - counts.dg * counts.favored()) / chunk_size as f64;
    let rounded = (raw + 0.5).floor();
    if rounded > 0.0 {
        rounded as usize
    } else {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Massaging,
    Reweighting,
}

impl Technique {
    pub const ALL: [Technique; 2] = [Technique::Massaging, Technique::Reweighting];

    pub fn as_str(self) -> &'static str {
        match self {
            Technique::Massaging => "massaging",
            Technique::Reweighting => "reweighting",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "massaging" | "msg" => Ok(Technique::Massaging),
            "reweighting" | "re-weighting" | "rw" => Ok(Technique::Reweighting),
            other => Err(Error::Config(format!("unknown correction technique '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionOutcome {
    pub chunk: Chunk,
    pub technique: Technique,
    /// Swaps requested per community (0 for re-weighting).
    pub massaged_count: usize,
    /// Labels actually changed across both communities.
    pub relabeled: usize,
    /// Requested swaps that could not be made because a community was too small.
    pub shortfall: usize,
    /// False when the chunk was passed through untouched.
    pub applied: bool,
}

impl CorrectionOutcome {
    fn unchanged(chunk: &Chunk, technique: Technique) -> Self {
        CorrectionOutcome {
            chunk: chunk.clone(),
            technique,
            massaged_count: 0,
            relabeled: 0,
            shortfall: 0,
            applied: false,
        }
    }
}

/// Swaps `m` labels in each of DR (to granted, highest ranker score first)
/// and FG (to rejected, lowest score first). Equal scores go to the earlier
/// instance. `ranker` should have been trained on `chunk`.
pub fn massage(chunk: &Chunk, schema: &Schema, m: usize, ranker: &impl Learner) -> CorrectionOutcome {
    if m == 0 {
        return CorrectionOutcome::unchanged(chunk, Technique::Massaging);
    }
    let mut promote = Vec::new();
    let mut demote = Vec::new();
    for (pos, inst) in chunk.instances.iter().enumerate() {
        match (schema.group_of(&inst.features), inst.label) {
            (Group::Deprived, Label::Rejected) => promote.push((ranker.predict(inst).p_granted, pos)),
            (Group::Favored, Label::Granted) => demote.push((ranker.predict(inst).p_granted, pos)),
            _ => {}
        }
    }
    promote.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    demote.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut corrected = chunk.clone();
    let mut relabeled = 0;
    for &(_, pos) in promote.iter().take(m).chain(demote.iter().take(m)) {
        let inst = &mut corrected.instances[pos];
        inst.label = inst.label.flipped();
        relabeled += 1;
    }
    let shortfall = m.saturating_sub(promote.len()) + m.saturating_sub(demote.len());
    if shortfall > 0 {
        log::warn!(
            "chunk {}: massaging wanted {m} swaps per community, short by {shortfall}",
            chunk.index
        );
    }
    CorrectionOutcome {
        chunk: corrected,
        technique: Technique::Massaging,
        massaged_count: m,
        relabeled,
        shortfall,
        applied: true,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityWeights {
    pub w_dr: f64,
    pub w_dg: f64,
    pub w_fr: f64,
    pub w_fg: f64,
}

impl CommunityWeights {
    pub fn get(&self, group: Group, label: Label) -> f64 {
        match (group, label) {
            (Group::Deprived, Label::Rejected) => self.w_dr,
            (Group::Deprived, Label::Granted) => self.w_dg,
            (Group::Favored, Label::Rejected) => self.w_fr,
            (Group::Favored, Label::Granted) => self.w_fg,
        }
    }
}

/// Expected community mass under independence of group and label, divided by
/// the observed mass. An empty community gets weight 1.
pub fn community_weights(counts: &CommunityCounts) -> CommunityWeights {
    let total = counts.total();
    let w = |group_mass: f64, label_mass: f64, cell: f64| {
        if cell > 0.0 {
            group_mass * label_mass / (total * cell)
        } else {
            1.0
        }
    };
    CommunityWeights {
        w_dr: w(counts.deprived(), counts.rejected(), counts.dr),
        w_dg: w(counts.deprived(), counts.granted(), counts.dg),
        w_fr: w(counts.favored(), counts.rejected(), counts.fr),
        w_fg: w(counts.favored(), counts.granted(), counts.fg),
    }
}

/// Sets every instance's weight to its community's weight, computed from the
/// chunk's true-label counts.
pub fn reweight(chunk: &Chunk, schema: &Schema) -> (CorrectionOutcome, CommunityWeights) {
    let weights = community_weights(&true_label_counts(chunk, schema, false));
    let mut corrected = chunk.clone();
    for inst in &mut corrected.instances {
        inst.weight = weights.get(schema.group_of(&inst.features), inst.label);
    }
    let outcome = CorrectionOutcome {
        chunk: corrected,
        technique: Technique::Reweighting,
        massaged_count: 0,
        relabeled: 0,
        shortfall: 0,
        applied: true,
    };
    (outcome, weights)
}

/// Which community counts feed the massaging amount and the sign check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountSource {
    #[default]
    TrueLabels,
    Predictions,
}

impl CountSource {
    pub fn as_str(self) -> &'static str {
        match self {
            CountSource::TrueLabels => "true_labels",
            CountSource::Predictions => "predictions",
        }
    }
}

impl FromStr for CountSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "true_labels" | "labels" | "truth" => Ok(CountSource::TrueLabels),
            "predictions" | "predicted" => Ok(CountSource::Predictions),
            other => Err(Error::Config(format!("unknown count source '{other}'"))),
        }
    }
}

/// A configured correction step: technique plus count source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corrector {
    pub technique: Technique,
    pub count_source: CountSource,
}

impl Corrector {
    pub fn new(technique: Technique) -> Self {
        Corrector {
            technique,
            count_source: CountSource::TrueLabels,
        }
    }

    pub fn with_count_source(mut self, count_source: CountSource) -> Self {
        self.count_source = count_source;
        self
    }

    /// Corrects `chunk`. `predictions` are only consulted when the count
    /// source is `Predictions`; pass `None` otherwise (e.g. for the
    /// initialization chunk, which has none).
    pub fn correct(&self, chunk: &Chunk, schema: &Schema, predictions: Option<&[Label]>) -> Result<CorrectionOutcome> {
        if chunk.is_empty() {
            return Ok(CorrectionOutcome::unchanged(chunk, self.technique));
        }
        let counts = match (self.count_source, predictions) {
            (CountSource::Predictions, Some(p)) => partition_communities(chunk, p, schema, false)?,
            _ => true_label_counts(chunk, schema, false),
        };
        if statistical_parity(&counts) < 0.0 {
            log::info!("chunk {}: deprived group favored, no correction applied", chunk.index);
            return Ok(CorrectionOutcome::unchanged(chunk, self.technique));
        }
        Ok(match self.technique {
            Technique::Massaging => {
                let m = massaging_count(&counts, chunk.len());
                if m == 0 {
                    return Ok(CorrectionOutcome::unchanged(chunk, self.technique));
                }
                let mut ranker = NaiveBayes::new(schema.attributes());
                ranker.train_chunk(chunk);
                massage(chunk, schema, m, &ranker)
            }
            Technique::Reweighting => reweight(chunk, schema).0,
        })
    }
}
