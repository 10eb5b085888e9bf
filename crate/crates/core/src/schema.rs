//! Attribute declarations and the designation of the sensitive and class attributes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary class label. `Granted` is the desirable (target) outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Rejected,
    Granted,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Rejected, Label::Granted];

    pub fn index(self) -> usize {
        match self {
            Label::Rejected => 0,
            Label::Granted => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Label::Rejected
        } else {
            Label::Granted
        }
    }

    pub fn is_granted(self) -> bool {
        self == Label::Granted
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Rejected => Label::Granted,
            Label::Granted => Label::Rejected,
        }
    }
}

/// Membership in the sensitive attribute's two groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    Deprived,
    Favored,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    Categorical { values: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
    #[serde(default)]
    pub allows_missing: bool,
}

impl Attribute {
    pub fn numeric(name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Numeric,
            allows_missing: false,
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Categorical {
                values: values.into_iter().map(Into::into).collect(),
            },
            allows_missing: false,
        }
    }

    pub fn with_missing(mut self) -> Self {
        self.allows_missing = true;
        self
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttributeKind::Numeric)
    }

    /// Number of declared values for a categorical attribute, 0 for numerics.
    pub fn cardinality(&self) -> usize {
        match &self.kind {
            AttributeKind::Numeric => 0,
            AttributeKind::Categorical { values } => values.len(),
        }
    }

    pub fn value_code(&self, value: &str) -> Option<u32> {
        match &self.kind {
            AttributeKind::Numeric => None,
            AttributeKind::Categorical { values } => values.iter().position(|v| v == value).map(|p| p as u32),
        }
    }

    pub fn value_name(&self, code: u32) -> Option<&str> {
        match &self.kind {
            AttributeKind::Numeric => None,
            AttributeKind::Categorical { values } => values.get(code as usize).map(String::as_str),
        }
    }
}

/// One attribute value. Categorical values are codes into the attribute's value list.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Numeric(f64),
    Categorical(u32),
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassAttribute {
    pub name: String,
    pub rejected: String,
    pub granted: String,
}

impl ClassAttribute {
    pub fn new(name: impl Into<String>, rejected: impl Into<String>, granted: impl Into<String>) -> Self {
        ClassAttribute {
            name: name.into(),
            rejected: rejected.into(),
            granted: granted.into(),
        }
    }

    pub fn label_name(&self, label: Label) -> &str {
        match label {
            Label::Rejected => &self.rejected,
            Label::Granted => &self.granted,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    attributes: Vec<Attribute>,
    sensitive_index: usize,
    deprived_code: u32,
    class: ClassAttribute,
}

impl Schema {
    /// The sensitive attribute must be categorical with exactly two values and
    /// may not allow missing entries. The class attribute lives outside the
    /// feature vector, so its position never collides with the sensitive one.
    pub fn new(
        attributes: Vec<Attribute>,
        sensitive_index: usize,
        deprived_value: &str,
        class: ClassAttribute,
    ) -> Result<Self> {
        let sa = attributes.get(sensitive_index).ok_or_else(|| {
            Error::Schema(format!(
                "sensitive index {sensitive_index} out of range for {} attributes",
                attributes.len()
            ))
        })?;
        if sa.cardinality() != 2 {
            return Err(Error::Schema(format!(
                "sensitive attribute '{}' must be categorical with exactly 2 values",
                sa.name
            )));
        }
        if sa.allows_missing {
            return Err(Error::Schema(format!(
                "sensitive attribute '{}' may not allow missing values",
                sa.name
            )));
        }
        let deprived_code = sa.value_code(deprived_value).ok_or_else(|| {
            Error::Schema(format!(
                "deprived value '{deprived_value}' not declared for '{}'",
                sa.name
            ))
        })?;
        if class.rejected == class.granted {
            return Err(Error::Schema(format!(
                "class attribute '{}' needs two distinct labels",
                class.name
            )));
        }
        if attributes.iter().any(|a| a.name == class.name) {
            return Err(Error::Schema(format!(
                "class attribute '{}' also declared as a feature",
                class.name
            )));
        }
        Ok(Schema {
            attributes,
            sensitive_index,
            deprived_code,
            class,
        })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn sensitive_index(&self) -> usize {
        self.sensitive_index
    }

    pub fn sensitive_attribute(&self) -> &Attribute {
        &self.attributes[self.sensitive_index]
    }

    pub fn deprived_code(&self) -> u32 {
        self.deprived_code
    }

    pub fn favored_code(&self) -> u32 {
        1 - self.deprived_code
    }

    pub fn deprived_value(&self) -> &str {
        self.sensitive_attribute()
            .value_name(self.deprived_code)
            .expect("validated at construction")
    }

    pub fn class(&self) -> &ClassAttribute {
        &self.class
    }

    pub fn label_from_str(&self, raw: &str) -> Option<Label> {
        if raw == self.class.granted {
            Some(Label::Granted)
        } else if raw == self.class.rejected {
            Some(Label::Rejected)
        } else {
            None
        }
    }

    /// Same attributes with the deprived and favored roles exchanged.
    pub fn with_roles_swapped(&self) -> Schema {
        Schema {
            deprived_code: self.favored_code(),
            ..self.clone()
        }
    }

    pub fn group_of(&self, features: &[Value]) -> Group {
        match features[self.sensitive_index] {
            Value::Categorical(c) if c == self.deprived_code => Group::Deprived,
            Value::Categorical(_) => Group::Favored,
            other => panic!("sensitive attribute holds {other:?}; instances must be validated"),
        }
    }

    /// Attribute list a learner sees when the sensitive attribute is hidden.
    pub fn masked_attributes(&self) -> Vec<Attribute> {
        self.attributes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.sensitive_index)
            .map(|(_, a)| a.clone())
            .collect()
    }

    pub fn check_features(&self, features: &[Value]) -> Result<()> {
        if features.len() != self.attributes.len() {
            return Err(Error::Contract(format!(
                "instance has {} features, schema declares {}",
                features.len(),
                self.attributes.len()
            )));
        }
        for (attr, value) in self.attributes.iter().zip(features) {
            match (&attr.kind, value) {
                (_, Value::Missing) if attr.allows_missing => {}
                (_, Value::Missing) => {
                    return Err(Error::Contract(format!(
                        "missing value for attribute '{}' which does not allow it",
                        attr.name
                    )))
                }
                (AttributeKind::Numeric, Value::Numeric(x)) if x.is_finite() => {}
                (AttributeKind::Categorical { values }, Value::Categorical(c)) if (*c as usize) < values.len() => {}
                _ => {
                    return Err(Error::Contract(format!(
                        "value {value:?} does not fit attribute '{}'",
                        attr.name
                    )))
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attrs() -> Vec<Attribute> {
        vec![
            Attribute::numeric("x"),
            Attribute::categorical("sex", ["Female", "Male"]),
        ]
    }

    #[test]
    fn sensitive_attribute_must_be_binary() {
        let mut a = attrs();
        a[1] = Attribute::categorical("sex", ["F", "M", "X"]);
        let err = Schema::new(a, 1, "F", ClassAttribute::new("c", "no", "yes"));
        assert!(matches!(err, Err(Error::Schema(_))));
        let err = Schema::new(attrs(), 0, "F", ClassAttribute::new("c", "no", "yes"));
        assert!(matches!(err, Err(Error::Schema(_))));
    }

    #[test]
    fn class_must_be_distinct_and_binary() {
        let err = Schema::new(attrs(), 1, "Female", ClassAttribute::new("c", "yes", "yes"));
        assert!(err.is_err());
        let err = Schema::new(attrs(), 1, "Female", ClassAttribute::new("x", "no", "yes"));
        assert!(err.is_err());
    }

    #[test]
    fn groups_and_role_swap() {
        let s = Schema::new(attrs(), 1, "Female", ClassAttribute::new("c", "no", "yes")).unwrap();
        let f = [Value::Numeric(1.0), Value::Categorical(0)];
        let m = [Value::Numeric(1.0), Value::Categorical(1)];
        assert_eq!(s.group_of(&f), Group::Deprived);
        assert_eq!(s.group_of(&m), Group::Favored);
        let swapped = s.with_roles_swapped();
        assert_eq!(swapped.group_of(&f), Group::Favored);
        assert_eq!(swapped.deprived_value(), "Male");
    }

    #[test]
    fn feature_validation() {
        let s = Schema::new(attrs(), 1, "Female", ClassAttribute::new("c", "no", "yes")).unwrap();
        assert!(s.check_features(&[Value::Numeric(1.0), Value::Categorical(1)]).is_ok());
        assert!(s.check_features(&[Value::Numeric(1.0)]).is_err());
        assert!(s.check_features(&[Value::Numeric(1.0), Value::Categorical(2)]).is_err());
        assert!(s.check_features(&[Value::Missing, Value::Categorical(0)]).is_err());
        assert!(s
            .check_features(&[Value::Categorical(0), Value::Categorical(0)])
            .is_err());
        assert_eq!(s.masked_attributes().len(), 1);
    }
}
