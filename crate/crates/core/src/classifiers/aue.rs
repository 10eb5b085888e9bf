//! Accuracy-updated ensemble of Hoeffding trees.
//!
//! Each chunk yields one candidate tree. Members and the candidate are weighted
//! by `1 / (MSE + MSE_r + ε)` on that chunk, where `MSE_r` is the error of a
//! predictor that always outputs the chunk's class prior. The best
//! `max_members` survive and the surviving old members keep training.

use crate::schema::{Attribute, Label};
use crate::stream::{Chunk, Instance};

use super::hoeffding::{HoeffdingConfig, HoeffdingTree};
use super::{Learner, Prediction};

pub const DEFAULT_MAX_MEMBERS: usize = 10;
const WEIGHT_EPSILON: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
struct Member {
    tree: HoeffdingTree,
    weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aue {
    attributes: Vec<Attribute>,
    tree_config: HoeffdingConfig,
    max_members: usize,
    members: Vec<Member>,
}

/// Weighted mean squared error of `p_granted` against 0/1 truths.
fn chunk_mse(chunk: &Chunk, mut p_granted: impl FnMut(&Instance) -> f64) -> f64 {
    let (mut err, mut mass) = (0.0, 0.0);
    for inst in &chunk.instances {
        let truth = if inst.label == Label::Granted { 1.0 } else { 0.0 };
        let d = truth - p_granted(inst);
        err += inst.weight * d * d;
        mass += inst.weight;
    }
    if mass > 0.0 {
        err / mass
    } else {
        0.0
    }
}

/// MSE of always predicting the chunk's (weighted) granted rate `p`: `p(1-p)`.
fn prior_mse(chunk: &Chunk) -> f64 {
    let total = chunk.total_weight();
    if total <= 0.0 {
        return 0.0;
    }
    let granted: f64 = chunk
        .instances
        .iter()
        .filter(|i| i.label.is_granted())
        .map(|i| i.weight)
        .sum();
    let p = granted / total;
    p * (1.0 - p)
}

pub fn member_weight(mse: f64, mse_prior: f64) -> f64 {
    1.0 / (mse + mse_prior + WEIGHT_EPSILON)
}

impl Aue {
    pub fn new(attributes: &[Attribute], tree_config: HoeffdingConfig, max_members: usize) -> Self {
        Aue {
            attributes: attributes.to_vec(),
            tree_config,
            max_members: max_members.max(1),
            members: Vec::new(),
        }
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn member_weights(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.weight).collect()
    }
}

impl Learner for Aue {
    fn train_chunk(&mut self, chunk: &Chunk) {
        if chunk.is_empty() {
            return;
        }
        let mse_prior = prior_mse(chunk);
        let mut candidate = HoeffdingTree::new(&self.attributes, self.tree_config);
        candidate.train_chunk(chunk);
        let candidate_mse = chunk_mse(chunk, |i| candidate.predict(i).p_granted);

        for m in &mut self.members {
            let mse = chunk_mse(chunk, |i| m.tree.predict(i).p_granted);
            m.weight = member_weight(mse, mse_prior);
        }
        // Older members first: a stable sort keeps them ahead of an equally
        // weighted candidate.
        self.members.push(Member {
            tree: candidate,
            weight: member_weight(candidate_mse, mse_prior),
        });
        let candidate_pos = self.members.len() - 1;
        let mut order: Vec<usize> = (0..self.members.len()).collect();
        order.sort_by(|&a, &b| self.members[b].weight.total_cmp(&self.members[a].weight));
        order.truncate(self.max_members);
        order.sort_unstable();

        let mut retained = Vec::with_capacity(order.len());
        for (pos, member) in std::mem::take(&mut self.members).into_iter().enumerate() {
            if order.binary_search(&pos).is_ok() {
                retained.push((pos, member));
            }
        }
        for (pos, member) in &mut retained {
            if *pos != candidate_pos {
                member.tree.train_chunk(chunk);
            }
        }
        self.members = retained.into_iter().map(|(_, m)| m).collect();
    }

    fn predict(&self, inst: &Instance) -> Prediction {
        let total: f64 = self.members.iter().map(|m| m.weight).sum();
        if self.members.is_empty() || total <= 0.0 {
            return Prediction::default();
        }
        let p = self
            .members
            .iter()
            .map(|m| m.weight * m.tree.predict(inst).p_granted)
            .sum::<f64>()
            / total;
        Prediction::from_probability(p)
    }

    fn reset(&mut self) {
        self.members.clear();
    }

    fn uses_weights(&self) -> bool {
        true
    }
}
