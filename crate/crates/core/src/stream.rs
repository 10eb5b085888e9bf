use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{Label, Schema, Value};

/// One labeled, weighted feature vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub features: Vec<Value>,
    pub label: Label,
    pub weight: f64,
}

impl Instance {
    pub fn new(features: Vec<Value>, label: Label) -> Self {
        Instance {
            features,
            label,
            weight: 1.0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(Error::Contract(format!(
                "instance weight must be finite and nonnegative, got {}",
                self.weight
            )));
        }
        schema.check_features(&self.features)
    }
}

/// An ordered batch of consecutive stream instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chunk {
    pub index: usize,
    pub instances: Vec<Instance>,
}

impl Chunk {
    pub fn new(index: usize, instances: Vec<Instance>) -> Self {
        Chunk { index, instances }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(|i| i.label).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.instances.iter().map(|i| i.weight).sum()
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        self.instances.iter().try_for_each(|i| i.validate(schema))
    }
}

/// Cuts a sequence into consecutive chunks of `size`; the last one may be shorter.
pub fn into_chunks(instances: Vec<Instance>, size: usize) -> Result<Vec<Chunk>> {
    if size == 0 {
        return Err(Error::Config("chunk size must be at least 1".into()));
    }
    let mut chunks = Vec::with_capacity(instances.len().div_ceil(size));
    let mut iter = instances.into_iter().peekable();
    while iter.peek().is_some() {
        let batch: Vec<Instance> = iter.by_ref().take(size).collect();
        chunks.push(Chunk::new(chunks.len(), batch));
    }
    Ok(chunks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(x: f64) -> Instance {
        Instance::new(vec![Value::Numeric(x)], Label::Rejected)
    }

    #[test]
    fn chunking_preserves_order_and_keeps_remainder() {
        let data: Vec<Instance> = (0..7).map(|i| inst(i as f64)).collect();
        let chunks = into_chunks(data.clone(), 3).unwrap();
        assert_eq!(chunks.len(), 3);
        assert_eq!(chunks[2].len(), 1);
        assert_eq!(chunks[1].index, 1);
        let flat: Vec<Instance> = chunks.into_iter().flat_map(|c| c.instances).collect();
        assert_eq!(flat, data);
    }

    #[test]
    fn zero_chunk_size_rejected() {
        assert!(into_chunks(vec![inst(0.0)], 0).is_err());
    }

    #[test]
    fn negative_weight_rejected() {
        use crate::schema::{Attribute, ClassAttribute};
        let schema = Schema::new(
            vec![Attribute::numeric("x"), Attribute::categorical("sa", ["a", "b"])],
            1,
            "a",
            ClassAttribute::new("c", "n", "y"),
        )
        .unwrap();
        let i = Instance::new(vec![Value::Numeric(0.0), Value::Categorical(0)], Label::Granted);
        assert!(i.validate(&schema).is_ok());
        assert!(i.with_weight(-1.0).validate(&schema).is_err());
    }
}
