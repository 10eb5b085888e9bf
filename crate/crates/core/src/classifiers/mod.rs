//! Online classifiers behind one weighted, chunk-at-a-time contract.

mod aue;
mod hoeffding;
mod knn;
mod naive_bayes;
mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::schema::{Attribute, Label};
use crate::stream::{Chunk, Instance};

pub use aue::{member_weight, Aue, DEFAULT_MAX_MEMBERS};
pub use hoeffding::{hoeffding_bound, HoeffdingConfig, HoeffdingTree};
pub use knn::{Knn, DEFAULT_K};
pub use naive_bayes::NaiveBayes;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub p_granted: f64,
}

impl Prediction {
    /// `Granted` only when strictly more likely than not.
    pub fn from_probability(p_granted: f64) -> Self {
        Prediction {
            label: if p_granted > 0.5 {
                Label::Granted
            } else {
                Label::Rejected
            },
            p_granted,
        }
    }
}

impl Default for Prediction {
    fn default() -> Self {
        Prediction {
            label: Label::Rejected,
            p_granted: 0.5,
        }
    }
}

/// The contract every online classifier implements.
///
/// `predict` takes `&self`, so it cannot change the model. A learner that has
/// never been trained, or has just been reset, predicts `Rejected`.
pub trait Learner {
    fn train_chunk(&mut self, chunk: &Chunk);

    fn predict(&self, instance: &Instance) -> Prediction;

    /// Back to the freshly constructed state.
    fn reset(&mut self);

    fn uses_weights(&self) -> bool;

    fn predict_chunk(&self, chunk: &Chunk) -> Vec<Prediction> {
        chunk.instances.iter().map(|i| self.predict(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Nb,
    Ht,
    Aue,
    Knn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::Nb,
        ClassifierKind::Ht,
        ClassifierKind::Aue,
        ClassifierKind::Knn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Nb => "nb",
            ClassifierKind::Ht => "ht",
            ClassifierKind::Aue => "aue",
            ClassifierKind::Knn => "knn",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nb" | "naive-bayes" => Ok(ClassifierKind::Nb),
            "ht" | "hoeffding" => Ok(ClassifierKind::Ht),
            "aue" => Ok(ClassifierKind::Aue),
            "knn" => Ok(ClassifierKind::Knn),
            other => Err(Error::Config(format!("unknown classifier '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    #[serde(default)]
    pub hoeffding: HoeffdingConfig,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_max_members")]
    pub max_members: usize,
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_max_members() -> usize {
    DEFAULT_MAX_MEMBERS
}

impl ClassifierConfig {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierConfig {
            kind,
            hoeffding: HoeffdingConfig::default(),
            k: DEFAULT_K,
            max_members: DEFAULT_MAX_MEMBERS,
        }
    }

    pub fn build(&self, attributes: &[Attribute]) -> Model {
        match self.kind {
            ClassifierKind::Nb => Model::NaiveBayes(NaiveBayes::new(attributes)),
            ClassifierKind::Ht => Model::HoeffdingTree(HoeffdingTree::new(attributes, self.hoeffding)),
            ClassifierKind::Aue => Model::Aue(Aue::new(attributes, self.hoeffding, self.max_members)),
            ClassifierKind::Knn => Model::Knn(Knn::new(attributes, self.k)),
        }
    }
}

/// Any of the supported learners, so strategies can own one by value and
/// snapshot it with `Clone`.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    NaiveBayes(NaiveBayes),
    HoeffdingTree(HoeffdingTree),
    Aue(Aue),
    Knn(Knn),
}

impl Model {
    fn inner(&self) -> &dyn Learner {
        match self {
            Model::NaiveBayes(m) => m,
            Model::HoeffdingTree(m) => m,
            Model::Aue(m) => m,
            Model::Knn(m) => m,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Learner {
        match self {
            Model::NaiveBayes(m) => m,
            Model::HoeffdingTree(m) => m,
            Model::Aue(m) => m,
            Model::Knn(m) => m,
        }
    }
}

impl Learner for Model {
    fn train_chunk(&mut self, chunk: &Chunk) {
        self.inner_mut().train_chunk(chunk)
    }

    fn predict(&self, instance: &Instance) -> Prediction {
        self.inner().predict(instance)
    }

    fn reset(&mut self) {
        self.inner_mut().reset()
    }

    fn uses_weights(&self) -> bool {
        self.inner().uses_weights()
    }
}
