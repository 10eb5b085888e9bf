//! Incremental, instance-weighted Naive Bayes.

use crate::schema::{Attribute, AttributeKind, Label, Value};
use crate::stream::{Chunk, Instance};

use super::stats::WeightedGaussian;
use super::{Learner, Prediction};

/// Per-class observations of one attribute.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum AttributeObserver {
    /// `counts[class][value]`
    Categorical { counts: [Vec<f64>; 2] },
    Numeric {
        per_class: [WeightedGaussian; 2],
        min: [f64; 2],
        max: [f64; 2],
    },
}

impl AttributeObserver {
    fn for_attribute(attr: &Attribute) -> Self {
        match &attr.kind {
            AttributeKind::Categorical { values } => AttributeObserver::Categorical {
                counts: [vec![0.0; values.len()], vec![0.0; values.len()]],
            },
            AttributeKind::Numeric => AttributeObserver::Numeric {
                per_class: Default::default(),
                min: [f64::INFINITY; 2],
                max: [f64::NEG_INFINITY; 2],
            },
        }
    }

    fn observe(&mut self, value: Value, class: usize, weight: f64) {
        match (self, value) {
            (AttributeObserver::Categorical { counts }, Value::Categorical(v)) => {
                counts[class][v as usize] += weight;
            }
            (AttributeObserver::Numeric { per_class, min, max }, Value::Numeric(x)) => {
                per_class[class].add(x, weight);
                min[class] = min[class].min(x);
                max[class] = max[class].max(x);
            }
            _ => {}
        }
    }

    /// Log likelihood of `value` under each class, or `None` when the
    /// attribute carries no usable evidence for this value.
    fn log_likelihoods(&self, value: Value) -> Option<[f64; 2]> {
        match (self, value) {
            (AttributeObserver::Categorical { counts }, Value::Categorical(v)) => {
                let card = counts[0].len() as f64;
                Some(std::array::from_fn(|c| {
                    let total: f64 = counts[c].iter().sum();
                    ((counts[c][v as usize] + 1.0) / (total + card)).ln()
                }))
            }
            (AttributeObserver::Numeric { per_class, .. }, Value::Numeric(x)) => {
                if per_class.iter().any(|g| g.mass() <= 0.0) {
                    return None;
                }
                Some(std::array::from_fn(|c| per_class[c].log_density(x)))
            }
            _ => None,
        }
    }
}

/// Class masses plus per-attribute class-conditional observers. This is the
/// whole Naive Bayes model, and also the statistics kept at Hoeffding tree leaves.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct ConditionalStats {
    pub(crate) class_mass: [f64; 2],
    pub(crate) observers: Vec<AttributeObserver>,
}

impl ConditionalStats {
    pub(crate) fn new(attributes: &[Attribute]) -> Self {
        Self::with_class_mass(attributes, [0.0; 2])
    }

    pub(crate) fn with_class_mass(attributes: &[Attribute], class_mass: [f64; 2]) -> Self {
        ConditionalStats {
            class_mass,
            observers: attributes.iter().map(AttributeObserver::for_attribute).collect(),
        }
    }

    pub(crate) fn total_mass(&self) -> f64 {
        self.class_mass[0] + self.class_mass[1]
    }

    pub(crate) fn observe(&mut self, inst: &Instance) {
        if inst.weight <= 0.0 {
            return;
        }
        let class = inst.label.index();
        self.class_mass[class] += inst.weight;
        for (obs, &value) in self.observers.iter_mut().zip(&inst.features) {
            obs.observe(value, class, inst.weight);
        }
    }

    /// Posterior probability of `Granted`; 0.5 when nothing has been observed.
    pub(crate) fn posterior_granted(&self, features: &[Value]) -> f64 {
        if self.total_mass() <= 0.0 {
            return 0.5;
        }
        let mut log_post: [f64; 2] = std::array::from_fn(|c| self.class_mass[c].ln());
        for (obs, &value) in self.observers.iter().zip(features) {
            if let Some(ll) = obs.log_likelihoods(value) {
                log_post[0] += ll[0];
                log_post[1] += ll[1];
            }
        }
        two_class_softmax(log_post)
    }

    pub(crate) fn majority_granted(&self) -> f64 {
        let total = self.total_mass();
        if total <= 0.0 {
            0.5
        } else {
            self.class_mass[1] / total
        }
    }
}

/// P(granted) from unnormalised log scores of [rejected, granted].
fn two_class_softmax(log_post: [f64; 2]) -> f64 {
    let [r, g] = log_post;
    match (r.is_finite(), g.is_finite()) {
        (true, true) => 1.0 / (1.0 + (r - g).exp()),
        (false, true) => 1.0,
        (true, false) => 0.0,
        (false, false) => 0.5,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NaiveBayes {
    attributes: Vec<Attribute>,
    stats: ConditionalStats,
}

impl NaiveBayes {
    pub fn new(attributes: &[Attribute]) -> Self {
        NaiveBayes {
            attributes: attributes.to_vec(),
            stats: ConditionalStats::new(attributes),
        }
    }

    pub fn train_instance(&mut self, inst: &Instance) {
        self.stats.observe(inst);
    }

    pub fn class_mass(&self, label: Label) -> f64 {
        self.stats.class_mass[label.index()]
    }

    /// Weighted (mass, mean, variance) of a numeric attribute for one class.
    pub fn numeric_moments(&self, attribute: usize, label: Label) -> Option<(f64, f64, f64)> {
        match &self.stats.observers[attribute] {
            AttributeObserver::Numeric { per_class, .. } => {
                let g = &per_class[label.index()];
                Some((g.mass(), g.mean(), g.variance()))
            }
            AttributeObserver::Categorical { .. } => None,
        }
    }

    pub fn categorical_mass(&self, attribute: usize, label: Label, code: u32) -> Option<f64> {
        match &self.stats.observers[attribute] {
            AttributeObserver::Categorical { counts } => Some(counts[label.index()][code as usize]),
            AttributeObserver::Numeric { .. } => None,
        }
    }
}

impl Learner for NaiveBayes {
    fn train_chunk(&mut self, chunk: &Chunk) {
        chunk.instances.iter().for_each(|i| self.train_instance(i));
    }

    fn predict(&self, inst: &Instance) -> Prediction {
        Prediction::from_probability(self.stats.posterior_granted(&inst.features))
    }

    fn reset(&mut self) {
        self.stats = ConditionalStats::new(&self.attributes);
    }

    fn uses_weights(&self) -> bool {
        true
    }
}
