//! k-nearest neighbours over a one-chunk buffer.
//!
//! Numeric attributes are standardised by the running mean and standard
//! deviation of everything trained on so far; categorical attributes add 0/1
//! per mismatch. Missing values are imputed with the running mean or mode.
//! Instance weights are ignored.

use crate::schema::{Attribute, AttributeKind, Label, Value};
use crate::stream::{Chunk, Instance};

use super::stats::WeightedGaussian;
use super::{Learner, Prediction};

pub const DEFAULT_K: usize = 10;

#[derive(Clone, Debug, PartialEq)]
enum ColumnSummary {
    Numeric(WeightedGaussian),
    Categorical(Vec<u64>),
}

impl ColumnSummary {
    fn observe(&mut self, value: Value) {
        match (self, value) {
            (ColumnSummary::Numeric(g), Value::Numeric(x)) => g.add(x, 1.0),
            (ColumnSummary::Categorical(counts), Value::Categorical(c)) => counts[c as usize] += 1,
            _ => {}
        }
    }

    fn impute(&self) -> Value {
        match self {
            ColumnSummary::Numeric(g) => Value::Numeric(g.mean()),
            ColumnSummary::Categorical(counts) => {
                let mode = counts
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, &n)| if n > counts[best] { i } else { best });
                Value::Categorical(mode as u32)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Knn {
    k: usize,
    attributes: Vec<Attribute>,
    summaries: Vec<ColumnSummary>,
    /// Imputed copies of the last trained chunk's feature vectors.
    buffer: Vec<(Vec<Value>, Label)>,
}

impl Knn {
    pub fn new(attributes: &[Attribute], k: usize) -> Self {
        Knn {
            k: k.max(1),
            attributes: attributes.to_vec(),
            summaries: attributes
                .iter()
                .map(|a| match &a.kind {
                    AttributeKind::Numeric => ColumnSummary::Numeric(WeightedGaussian::default()),
                    AttributeKind::Categorical { values } => ColumnSummary::Categorical(vec![0; values.len()]),
                })
                .collect(),
            buffer: Vec::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    fn imputed(&self, features: &[Value]) -> Vec<Value> {
        features
            .iter()
            .zip(&self.summaries)
            .map(|(&v, s)| if v.is_missing() { s.impute() } else { v })
            .collect()
    }

    fn distance_sq(&self, a: &[Value], b: &[Value]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.summaries)
            .map(|((x, y), summary)| match (x, y, summary) {
                (Value::Numeric(x), Value::Numeric(y), ColumnSummary::Numeric(g)) => {
                    let sd = g.std_dev();
                    let d = if sd > 0.0 { (x - y) / sd } else { x - y };
                    d * d
                }
                (Value::Categorical(x), Value::Categorical(y), _) => f64::from(u8::from(x != y)),
                _ => 0.0,
            })
            .sum()
    }
}

impl Learner for Knn {
    fn train_chunk(&mut self, chunk: &Chunk) {
        for inst in &chunk.instances {
            for (summary, &v) in self.summaries.iter_mut().zip(&inst.features) {
                summary.observe(v);
            }
        }
        self.buffer = chunk
            .instances
            .iter()
            .map(|i| (self.imputed(&i.features), i.label))
            .collect();
    }

    fn predict(&self, inst: &Instance) -> Prediction {
        if self.buffer.is_empty() {
            return Prediction::default();
        }
        let query = self.imputed(&inst.features);
        let mut scored: Vec<(f64, usize)> = self
            .buffer
            .iter()
            .enumerate()
            .map(|(i, (f, _))| (self.distance_sq(&query, f), i))
            .collect();
        let k = self.k.min(scored.len());
        // (distance, buffer position) is a total order, so ties break by position.
        scored.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let granted = scored[..k]
            .iter()
            .filter(|&&(_, i)| self.buffer[i].1.is_granted())
            .count();
        Prediction::from_probability(granted as f64 / k as f64)
    }

    fn reset(&mut self) {
        *self = Knn::new(&self.attributes, self.k);
    }

    fn uses_weights(&self) -> bool {
        false
    }
}
