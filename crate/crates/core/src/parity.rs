//! Community partitioning and the statistical-parity discrimination score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{Group, Label, Schema};
use crate::stream::Chunk;

/// Masses of the four (sensitive group, label) communities of a chunk.
///
/// Stored as reals so weighted masses and plain counts share one type.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CommunityCounts {
    /// deprived rejected
    pub dr: f64,
    /// deprived granted
    pub dg: f64,
    /// favored rejected
    pub fr: f64,
    /// favored granted
    pub fg: f64,
}

impl CommunityCounts {
    pub fn new(dr: f64, dg: f64, fr: f64, fg: f64) -> Self {
        CommunityCounts { dr, dg, fr, fg }
    }

    pub fn get(&self, group: Group, label: Label) -> f64 {
        match (group, label) {
            (Group::Deprived, Label::Rejected) => self.dr,
            (Group::Deprived, Label::Granted) => self.dg,
            (Group::Favored, Label::Rejected) => self.fr,
            (Group::Favored, Label::Granted) => self.fg,
        }
    }

    pub fn add(&mut self, group: Group, label: Label, mass: f64) {
        let slot = match (group, label) {
            (Group::Deprived, Label::Rejected) => &mut self.dr,
            (Group::Deprived, Label::Granted) => &mut self.dg,
            (Group::Favored, Label::Rejected) => &mut self.fr,
            (Group::Favored, Label::Granted) => &mut self.fg,
        };
        *slot += mass;
    }

    pub fn total(&self) -> f64 {
        self.dr + self.dg + self.fr + self.fg
    }

    pub fn deprived(&self) -> f64 {
        self.dr + self.dg
    }

    pub fn favored(&self) -> f64 {
        self.fr + self.fg
    }

    pub fn granted(&self) -> f64 {
        self.dg + self.fg
    }

    pub fn rejected(&self) -> f64 {
        self.dr + self.fr
    }

    /// True when either group is empty, so its positive rate is undefined.
    pub fn is_degenerate(&self) -> bool {
        self.deprived() == 0.0 || self.favored() == 0.0
    }

    /// Exchange the deprived and favored roles.
    pub fn swapped(&self) -> Self {
        CommunityCounts {
            dr: self.fr,
            dg: self.fg,
            fr: self.dr,
            fg: self.dg,
        }
    }
}

/// Tallies each instance into its community using the supplied labels (true
/// labels or predictions). With `weighted`, instances contribute their weight.
pub fn partition_communities(
    chunk: &Chunk,
    labels: &[Label],
    schema: &Schema,
    weighted: bool,
) -> Result<CommunityCounts> {
    if labels.len() != chunk.len() {
        return Err(Error::Contract(format!(
            "{} labels for a chunk of {} instances",
            labels.len(),
            chunk.len()
        )));
    }
    let mut counts = CommunityCounts::default();
    for (inst, &label) in chunk.instances.iter().zip(labels) {
        let mass = if weighted { inst.weight } else { 1.0 };
        counts.add(schema.group_of(&inst.features), label, mass);
    }
    Ok(counts)
}

/// Community counts of a chunk under its own (true) labels.
pub fn true_label_counts(chunk: &Chunk, schema: &Schema, weighted: bool) -> CommunityCounts {
    let mut counts = CommunityCounts::default();
    for inst in &chunk.instances {
        let mass = if weighted { inst.weight } else { 1.0 };
        counts.add(schema.group_of(&inst.features), inst.label, mass);
    }
    counts
}

/// Favored positive rate minus deprived positive rate. A group with zero mass
/// contributes a rate of 0.
pub fn statistical_parity(counts: &CommunityCounts) -> f64 {
    fn rate(granted: f64, total: f64) -> f64 {
        if total > 0.0 {
            granted / total
        } else {
            0.0
        }
    }
    rate(counts.fg, counts.favored()) - rate(counts.dg, counts.deprived())
}

pub fn accuracy(predictions: &[Label], truths: &[Label]) -> Result<f64> {
    if predictions.len() != truths.len() {
        return Err(Error::Contract(format!(
            "{} predictions vs {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Contract("accuracy of an empty sequence".into()));
    }
    let hits = predictions.iter().zip(truths).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / predictions.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{Attribute, ClassAttribute, Value};
    use crate::stream::Instance;
    use proptest::prelude::*;

    fn schema() -> Schema {
        Schema::new(
            vec![Attribute::categorical("sa", ["s", "sbar"])],
            0,
            "s",
            ClassAttribute::new("c", "rejected", "granted"),
        )
        .unwrap()
    }

    fn inst(deprived: bool, label: Label) -> Instance {
        Instance::new(vec![Value::Categorical(if deprived { 0 } else { 1 })], label)
    }

    #[test]
    fn one_per_cell() {
        let chunk = Chunk::new(
            0,
            vec![
                inst(true, Label::Rejected),
                inst(true, Label::Granted),
                inst(false, Label::Rejected),
                inst(false, Label::Granted),
            ],
        );
        let c = true_label_counts(&chunk, &schema(), false);
        assert_eq!(c, CommunityCounts::new(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn thousand_instance_tally() {
        let mut v = Vec::new();
        v.extend((0..400).map(|_| inst(false, Label::Granted)));
        v.extend((0..100).map(|_| inst(false, Label::Rejected)));
        v.extend((0..100).map(|_| inst(true, Label::Granted)));
        v.extend((0..400).map(|_| inst(true, Label::Rejected)));
        let chunk = Chunk::new(0, v);
        let labels = chunk.labels();
        let c = partition_communities(&chunk, &labels, &schema(), false).unwrap();
        assert_eq!(c, CommunityCounts::new(400.0, 100.0, 100.0, 400.0));
    }

    #[test]
    fn weighted_mass() {
        let chunk = Chunk::new(
            0,
            vec![
                inst(false, Label::Granted).with_weight(0.5),
                inst(false, Label::Granted).with_weight(1.5),
            ],
        );
        let c = partition_communities(&chunk, &chunk.labels(), &schema(), true).unwrap();
        assert_eq!(c.fg, 2.0);
        assert_eq!(c.total(), 2.0);
    }

    #[test]
    fn label_count_mismatch_is_an_error() {
        let chunk = Chunk::new(0, vec![inst(true, Label::Granted)]);
        let err = partition_communities(&chunk, &[], &schema(), false);
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn parity_examples() {
        let p = statistical_parity(&CommunityCounts::new(40.0, 10.0, 20.0, 30.0));
        assert!((p - 0.4).abs() < 1e-15);
        assert_eq!(statistical_parity(&CommunityCounts::new(7.0, 7.0, 7.0, 7.0)), 0.0);
        let degenerate = CommunityCounts::new(0.0, 0.0, 20.0, 30.0);
        assert!((statistical_parity(&degenerate) - 0.6).abs() < 1e-15);
        assert!(degenerate.is_degenerate());
    }

    #[test]
    fn accuracy_examples() {
        use Label::*;
        assert_eq!(accuracy(&[Granted, Rejected], &[Granted, Rejected]).unwrap(), 1.0);
        assert_eq!(accuracy(&[Granted, Rejected], &[Rejected, Granted]).unwrap(), 0.0);
        let p = [Granted, Granted, Rejected, Rejected];
        let t = [Granted, Granted, Rejected, Granted];
        assert_eq!(accuracy(&p, &t).unwrap(), 0.75);
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&[Granted], &[]).is_err());
    }

    fn arb_chunk() -> impl Strategy<Value = Chunk> {
        prop::collection::vec((any::<bool>(), any::<bool>(), 0.0f64..5.0), 0..200).prop_map(|v| {
            Chunk::new(
                0,
                v.into_iter()
                    .map(|(d, g, w)| inst(d, if g { Label::Granted } else { Label::Rejected }).with_weight(w))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn partition_sums_to_size(chunk in arb_chunk()) {
            let s = schema();
            let plain = true_label_counts(&chunk, &s, false);
            prop_assert_eq!(plain.total(), chunk.len() as f64);
            let weighted = true_label_counts(&chunk, &s, true);
            prop_assert!((weighted.total() - chunk.total_weight()).abs() < 1e-9);
        }

        #[test]
        fn swapping_roles_negates_parity(chunk in arb_chunk()) {
            let s = schema();
            let c = true_label_counts(&chunk, &s, false);
            let swapped = true_label_counts(&chunk, &s.with_roles_swapped(), false);
            prop_assert_eq!(swapped, c.swapped());
            let a = statistical_parity(&c);
            let b = statistical_parity(&swapped);
            prop_assert!((a + b).abs() < 1e-12);
            prop_assert!(a.abs() <= 1.0);
        }

        #[test]
        fn proportional_rates_give_zero(dg in 1u32..50, dr in 1u32..50, k in 1u32..10) {
            // fg = k*dg, fr = k*dr, so fg*dr == dg*fr
            let c = CommunityCounts::new(dr as f64, dg as f64, (k * dr) as f64, (k * dg) as f64);
            prop_assert!(statistical_parity(&c).abs() < 1e-12);
        }
    }
}
