//! Hoeffding tree (VFDT) for the binary class, with information-gain splits,
//! Gaussian-approximated numeric split points and NB-adaptive leaves.

use serde::{Deserialize, Serialize};

use crate::schema::{Attribute, Value};
use crate::stream::{Chunk, Instance};

use super::naive_bayes::{AttributeObserver, ConditionalStats};
use super::stats::entropy;
use super::{Learner, Prediction};

/// Range of information gain for a two-class problem (log2 of 2 classes).
const GAIN_RANGE: f64 = 1.0;
/// Candidate thresholds tried between a numeric attribute's observed extremes.
const NUMERIC_SPLIT_POINTS: usize = 10;
/// A split needs at least two branches holding this fraction of the mass.
const MIN_BRANCH_FRACTION: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoeffdingConfig {
    /// One minus the confidence of each split decision.
    pub delta: f64,
    pub tie_threshold: f64,
    /// Leaf mass accumulated between split attempts.
    pub grace_period: f64,
}

impl Default for HoeffdingConfig {
    fn default() -> Self {
        HoeffdingConfig {
            delta: 1e-7,
            tie_threshold: 0.05,
            grace_period: 200.0,
        }
    }
}

/// `sqrt(R² ln(1/δ) / 2n)`
pub fn hoeffding_bound(range: f64, delta: f64, n: f64) -> f64 {
    (range * range * (1.0 / delta).ln() / (2.0 * n)).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
enum SplitTest {
    /// Left branch takes values `<= threshold`.
    Threshold(f64),
    /// One branch per declared value.
    Categorical,
}

#[derive(Clone, Debug, PartialEq)]
struct LeafNode {
    stats: ConditionalStats,
    mass_at_last_attempt: f64,
    majority_correct: f64,
    nb_correct: f64,
}

impl LeafNode {
    fn new(attributes: &[Attribute], class_mass: [f64; 2]) -> Self {
        let stats = ConditionalStats::with_class_mass(attributes, class_mass);
        LeafNode {
            mass_at_last_attempt: stats.total_mass(),
            stats,
            majority_correct: 0.0,
            nb_correct: 0.0,
        }
    }

    fn p_granted(&self, features: &[Value]) -> f64 {
        if self.nb_correct > self.majority_correct {
            self.stats.posterior_granted(features)
        } else {
            self.stats.majority_granted()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Leaf(LeafNode),
    Split {
        attribute: usize,
        test: SplitTest,
        children: Vec<usize>,
        /// Mass routed down each branch; missing values follow the heaviest.
        branch_mass: Vec<f64>,
    },
}

struct SplitCandidate {
    attribute: usize,
    test: SplitTest,
    merit: f64,
    branches: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoeffdingTree {
    config: HoeffdingConfig,
    attributes: Vec<Attribute>,
    /// Arena; index 0 is the root.
    nodes: Vec<Node>,
}

impl HoeffdingTree {
    pub fn new(attributes: &[Attribute], config: HoeffdingConfig) -> Self {
        HoeffdingTree {
            config,
            attributes: attributes.to_vec(),
            nodes: vec![Node::Leaf(LeafNode::new(attributes, [0.0; 2]))],
        }
    }

    pub fn config(&self) -> &HoeffdingConfig {
        &self.config
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    /// Attribute tested at the root, if the root has split.
    pub fn root_split_attribute(&self) -> Option<usize> {
        match &self.nodes[0] {
            Node::Split { attribute, .. } => Some(*attribute),
            Node::Leaf(_) => None,
        }
    }

    fn branch_for(&self, attribute: usize, test: &SplitTest, branch_mass: &[f64], value: Value) -> usize {
        match (test, value) {
            (SplitTest::Threshold(t), Value::Numeric(x)) => usize::from(x > *t),
            (SplitTest::Categorical, Value::Categorical(c)) => c as usize,
            _ => {
                debug_assert!(value.is_missing(), "attribute {attribute} holds {value:?}");
                heaviest(branch_mass)
            }
        }
    }

    fn leaf_index(&self, features: &[Value]) -> usize {
        let mut idx = 0;
        while let Node::Split {
            attribute,
            test,
            children,
            branch_mass,
        } = &self.nodes[idx]
        {
            idx = children[self.branch_for(*attribute, test, branch_mass, features[*attribute])];
        }
        idx
    }

    pub fn train_instance(&mut self, inst: &Instance) {
        if inst.weight <= 0.0 {
            return;
        }
        let mut idx = 0;
        loop {
            let next = match &self.nodes[idx] {
                Node::Split {
                    attribute,
                    test,
                    children,
                    branch_mass,
                } => {
                    let b = self.branch_for(*attribute, test, branch_mass, inst.features[*attribute]);
                    Some((b, children[b]))
                }
                Node::Leaf(_) => None,
            };
            match next {
                Some((b, child)) => {
                    if let Node::Split { branch_mass, .. } = &mut self.nodes[idx] {
                        branch_mass[b] += inst.weight;
                    }
                    idx = child;
                }
                None => break,
            }
        }

        let Node::Leaf(leaf) = &mut self.nodes[idx] else {
            unreachable!()
        };
        let truth = inst.label.index();
        if leaf.stats.total_mass() > 0.0 {
            let majority = usize::from(leaf.stats.class_mass[1] > leaf.stats.class_mass[0]);
            if majority == truth {
                leaf.majority_correct += inst.weight;
            }
            let nb = usize::from(leaf.stats.posterior_granted(&inst.features) > 0.5);
            if nb == truth {
                leaf.nb_correct += inst.weight;
            }
        }
        leaf.stats.observe(inst);
        let mass = leaf.stats.total_mass();
        if mass - leaf.mass_at_last_attempt >= self.config.grace_period {
            leaf.mass_at_last_attempt = mass;
            self.attempt_split(idx);
        }
    }

    fn attempt_split(&mut self, idx: usize) {
        let Node::Leaf(leaf) = &self.nodes[idx] else {
            return;
        };
        let class_mass = leaf.stats.class_mass;
        if class_mass[0] <= 0.0 || class_mass[1] <= 0.0 {
            return;
        }
        let mut candidates: Vec<SplitCandidate> = leaf
            .stats
            .observers
            .iter()
            .enumerate()
            .filter_map(|(a, obs)| best_split_for(a, obs, class_mass))
            .collect();
        candidates.sort_by(|a, b| b.merit.total_cmp(&a.merit));
        let Some(best) = candidates.first() else {
            return;
        };
        if best.merit <= 0.0 {
            return;
        }
        let should_split = match candidates.get(1) {
            None => true,
            Some(second) => {
                let bound = hoeffding_bound(GAIN_RANGE, self.config.delta, class_mass[0] + class_mass[1]);
                best.merit - second.merit > bound || bound < self.config.tie_threshold
            }
        };
        if !should_split {
            return;
        }
        let best = candidates.swap_remove(0);
        let first_child = self.nodes.len();
        for dist in &best.branches {
            self.nodes.push(Node::Leaf(LeafNode::new(&self.attributes, *dist)));
        }
        let children = (first_child..self.nodes.len()).collect();
        self.nodes[idx] = Node::Split {
            attribute: best.attribute,
            test: best.test,
            children,
            branch_mass: best.branches.iter().map(|d| d[0] + d[1]).collect(),
        };
    }
}

fn heaviest(masses: &[f64]) -> usize {
    masses
        .iter()
        .enumerate()
        .fold(0, |best, (i, &m)| if m > masses[best] { i } else { best })
}

/// Information gain of splitting `pre` into `branches`; `None` when fewer than
/// two branches carry a meaningful share of the mass.
fn info_gain(pre: [f64; 2], branches: &[[f64; 2]]) -> Option<f64> {
    let total = pre[0] + pre[1];
    let substantial = branches
        .iter()
        .filter(|b| (b[0] + b[1]) / total >= MIN_BRANCH_FRACTION)
        .count();
    if substantial < 2 {
        return None;
    }
    let post: f64 = branches.iter().map(|b| (b[0] + b[1]) / total * entropy(*b)).sum();
    Some(entropy(pre) - post)
}

fn best_split_for(attribute: usize, obs: &AttributeObserver, pre: [f64; 2]) -> Option<SplitCandidate> {
    match obs {
        AttributeObserver::Categorical { counts } => {
            let branches: Vec<[f64; 2]> = (0..counts[0].len()).map(|v| [counts[0][v], counts[1][v]]).collect();
            let merit = info_gain(pre, &branches)?;
            Some(SplitCandidate {
                attribute,
                test: SplitTest::Categorical,
                merit,
                branches,
            })
        }
        AttributeObserver::Numeric { per_class, min, max } => {
            let lo = min[0].min(min[1]);
            let hi = max[0].max(max[1]);
            // Also rejects NaN bounds.
            if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                return None;
            }
            let mut best: Option<SplitCandidate> = None;
            for i in 1..=NUMERIC_SPLIT_POINTS {
                let t = lo + (hi - lo) * i as f64 / (NUMERIC_SPLIT_POINTS + 1) as f64;
                let mut left = [0.0; 2];
                let mut right = [0.0; 2];
                for c in 0..2 {
                    let mass = per_class[c].mass();
                    let below = if mass <= 0.0 || t < min[c] {
                        0.0
                    } else if t >= max[c] {
                        mass
                    } else {
                        per_class[c].mass_below(t).clamp(0.0, mass)
                    };
                    left[c] = below;
                    right[c] = mass - below;
                }
                let branches = vec![left, right];
                if let Some(merit) = info_gain(pre, &branches) {
                    if best.as_ref().is_none_or(|b| merit > b.merit) {
                        best = Some(SplitCandidate {
                            attribute,
                            test: SplitTest::Threshold(t),
                            merit,
                            branches,
                        });
                    }
                }
            }
            best
        }
    }
}

impl Learner for HoeffdingTree {
    fn train_chunk(&mut self, chunk: &Chunk) {
        chunk.instances.iter().for_each(|i| self.train_instance(i));
    }

    fn predict(&self, inst: &Instance) -> Prediction {
        let Node::Leaf(leaf) = &self.nodes[self.leaf_index(&inst.features)] else {
            unreachable!()
        };
        Prediction::from_probability(leaf.p_granted(&inst.features))
    }

    fn reset(&mut self) {
        *self = HoeffdingTree::new(&self.attributes, self.config);
    }

    fn uses_weights(&self) -> bool {
        true
    }
}

impl HoeffdingTree {
    /// Tree shape plus every leaf's sufficient statistics, without the
    /// NB-vs-majority bookkeeping that depends on presentation order.
    pub fn structure_eq(&self, other: &HoeffdingTree) -> bool {
        self.nodes.len() == other.nodes.len()
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| match (a, b) {
                (Node::Leaf(x), Node::Leaf(y)) => stats_close(&x.stats, &y.stats),
                (
                    Node::Split {
                        attribute: a1,
                        test: t1,
                        children: c1,
                        branch_mass: m1,
                    },
                    Node::Split {
                        attribute: a2,
                        test: t2,
                        children: c2,
                        branch_mass: m2,
                    },
                ) => a1 == a2 && t1 == t2 && c1 == c2 && m1 == m2,
                _ => false,
            })
    }
}

fn stats_close(a: &ConditionalStats, b: &ConditionalStats) -> bool {
    a.class_mass == b.class_mass
        && a.observers.iter().zip(&b.observers).all(|pair| match pair {
            (AttributeObserver::Categorical { counts: x }, AttributeObserver::Categorical { counts: y }) => x == y,
            (
                AttributeObserver::Numeric {
                    per_class: g1,
                    min: lo1,
                    max: hi1,
                },
                AttributeObserver::Numeric {
                    per_class: g2,
                    min: lo2,
                    max: hi2,
                },
            ) => {
                lo1 == lo2
                    && hi1 == hi2
                    && g1.iter().zip(g2).all(|(p, q)| {
                        p.mass() == q.mass()
                            && (p.mean() - q.mean()).abs() < 1e-9
                            && (p.variance() - q.variance()).abs() < 1e-9
                    })
            }
            _ => false,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Label;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bound_at_reference_point() {
        // sqrt(ln(1e7) / 2000)
        let expected = (1e7f64.ln() / 2000.0).sqrt();
        assert_abs_diff_eq!(hoeffding_bound(1.0, 1e-7, 1000.0), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(hoeffding_bound(1.0, 1e-7, 1000.0), 0.0898, epsilon = 1e-4);
    }

    fn separator_data(n: usize, seed: u64) -> (Vec<Attribute>, Vec<Instance>) {
        let attrs = vec![
            Attribute::categorical("noise", ["a", "b"]),
            Attribute::categorical("sep", ["x", "y"]),
            Attribute::numeric("u"),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n)
            .map(|_| {
                let sep: bool = rng.random();
                Instance::new(
                    vec![
                        Value::Categorical(rng.random_range(0..2)),
                        Value::Categorical(u32::from(sep)),
                        Value::Numeric(rng.random()),
                    ],
                    if sep { Label::Granted } else { Label::Rejected },
                )
            })
            .collect();
        (attrs, data)
    }

    #[test]
    fn splits_on_perfect_separator() {
        let (attrs, data) = separator_data(10_000, 3);
        let mut ht = HoeffdingTree::new(&attrs, HoeffdingConfig::default());
        ht.train_chunk(&Chunk::new(0, data.clone()));
        assert_eq!(ht.root_split_attribute(), Some(1));
        let hits = data.iter().filter(|i| ht.predict(i).label == i.label).count();
        assert_eq!(hits, data.len());
    }

    #[test]
    fn no_split_below_grace_period() {
        let (attrs, data) = separator_data(199, 4);
        let mut ht = HoeffdingTree::new(&attrs, HoeffdingConfig::default());
        ht.train_chunk(&Chunk::new(0, data));
        assert_eq!(ht.node_count(), 1);
    }

    #[test]
    fn numeric_threshold_split() {
        let attrs = vec![Attribute::numeric("x")];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data: Vec<Instance> = (0..2000)
            .map(|_| {
                let x: f64 = rng.random_range(-1.0..1.0);
                Instance::new(
                    vec![Value::Numeric(x)],
                    if x > 0.0 { Label::Granted } else { Label::Rejected },
                )
            })
            .collect();
        let mut ht = HoeffdingTree::new(&attrs, HoeffdingConfig::default());
        ht.train_chunk(&Chunk::new(0, data.clone()));
        assert_eq!(ht.root_split_attribute(), Some(0));
        let acc = data.iter().filter(|i| ht.predict(i).label == i.label).count() as f64 / 2000.0;
        assert!(acc > 0.95, "accuracy {acc}");
    }

    #[test]
    fn missing_values_follow_heaviest_branch() {
        let attrs = vec![Attribute::categorical("sep", ["x", "y"]).with_missing()];
        let mut data = Vec::new();
        for i in 0..600 {
            let granted = i % 3 != 0;
            data.push(Instance::new(
                vec![Value::Categorical(u32::from(granted))],
                if granted { Label::Granted } else { Label::Rejected },
            ));
        }
        let mut ht = HoeffdingTree::new(&attrs, HoeffdingConfig::default());
        ht.train_chunk(&Chunk::new(0, data));
        assert_eq!(ht.root_split_attribute(), Some(0));
        let p = ht.predict(&Instance::new(vec![Value::Missing], Label::Rejected));
        assert_eq!(p.label, Label::Granted);
    }

    #[test]
    fn untrained_and_reset() {
        let (attrs, data) = separator_data(1000, 5);
        let mut ht = HoeffdingTree::new(&attrs, HoeffdingConfig::default());
        assert_eq!(
            ht.predict(&data[0]),
            Prediction {
                label: Label::Rejected,
                p_granted: 0.5
            }
        );
        ht.train_chunk(&Chunk::new(0, data.clone()));
        ht.reset();
        assert_eq!(ht, HoeffdingTree::new(&attrs, HoeffdingConfig::default()));
    }

    #[test]
    fn node_count_never_shrinks() {
        let (attrs, data) = separator_data(5000, 6);
        let mut ht = HoeffdingTree::new(&attrs, HoeffdingConfig::default());
        let mut last = ht.node_count();
        for (t, c) in data.chunks(250).enumerate() {
            ht.train_chunk(&Chunk::new(t, c.to_vec()));
            assert!(ht.node_count() >= last);
            last = ht.node_count();
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn integer_weight_equals_unit_copies(
            rows in prop::collection::vec((0u32..2, 0u32..2, -3.0f64..3.0, 1u32..=5), 1..30)
        ) {
            let attrs = vec![
                Attribute::categorical("a", ["p", "q"]),
                Attribute::numeric("x"),
            ];
            // Total mass stays below the grace period, so no split is attempted
            // mid-instance in either presentation.
            let mut weighted = HoeffdingTree::new(&attrs, HoeffdingConfig::default());
            let mut copies = HoeffdingTree::new(&attrs, HoeffdingConfig::default());
            for (a, g, x, w) in rows {
                let i = Instance::new(
                    vec![Value::Categorical(a), Value::Numeric(x)],
                    Label::from_index(g as usize),
                );
                weighted.train_instance(&i.clone().with_weight(w as f64));
                for _ in 0..w {
                    copies.train_instance(&i);
                }
            }
            prop_assert!(weighted.structure_eq(&copies));
        }
    }
}
