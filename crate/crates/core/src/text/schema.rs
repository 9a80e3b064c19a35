use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{0}` requires a direction")]
    MissingDirection(String),
    #[error("neutral class `{0}` cannot carry a direction")]
    DirectedNeutral(String),
    #[error("duplicate relation `{0}` in schema")]
    Duplicate(String),
    #[error("malformed label `{0}`")]
    MalformedLabel(String),
    #[error("class index {index} out of range for {classes} classes")]
    IndexOutOfRange { index: usize, classes: usize },
}

/// Argument order of a directed relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// `(e1,e2)`: the first marked nominal fills the first argument.
    E1E2,
    /// `(e2,e1)`
    E2E1,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::E1E2 => Direction::E2E1,
            Direction::E2E1 => Direction::E1E2,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Direction::E1E2 => "(e1,e2)",
            Direction::E2E1 => "(e2,e1)",
        }
    }
}

/// A relation name plus optional direction, e.g. `Entity-Destination(e1,e2)` or `Other`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub relation: String,
    pub direction: Option<Direction>,
}

impl Label {
    pub fn directed(relation: impl Into<String>, direction: Direction) -> Self {
        Label {
            relation: relation.into(),
            direction: Some(direction),
        }
    }

    pub fn undirected(relation: impl Into<String>) -> Self {
        Label {
            relation: relation.into(),
            direction: None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.relation)?;
        if let Some(d) = self.direction {
            f.write_str(d.suffix())?;
        }
        Ok(())
    }
}

impl FromStr for Label {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s.chars().any(char::is_whitespace) {
            return Err(SchemaError::MalformedLabel(s.to_string()));
        }
        for d in [Direction::E1E2, Direction::E2E1] {
            if let Some(name) = s.strip_suffix(d.suffix()) {
                if name.is_empty() {
                    return Err(SchemaError::MalformedLabel(s.to_string()));
                }
                return Ok(Label::directed(name, d));
            }
        }
        if s.contains('(') || s.contains(')') {
            return Err(SchemaError::MalformedLabel(s.to_string()));
        }
        Ok(Label::undirected(s))
    }
}

/// Ordered set of directional relations plus one neutral class.
///
/// Class indices: `0` is the neutral class; relation `r` owns
/// `1 + 2r` for `(e1,e2)` and `2 + 2r` for `(e2,e1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSchema {
    relations: Vec<String>,
    neutral: String,
    index: HashMap<String, usize>,
}

pub const SEMEVAL_RELATIONS: [&str; 9] = [
    "Cause-Effect",
    "Instrument-Agency",
    "Product-Producer",
    "Content-Container",
    "Entity-Origin",
    "Entity-Destination",
    "Component-Whole",
    "Member-Collection",
    "Message-Topic",
];

pub const KBP37_RELATIONS: [&str; 18] = [
    "per:alternate_names",
    "per:origin",
    "per:spouse",
    "per:title",
    "per:employee_of",
    "per:countries_of_residence",
    "per:stateorprovinces_of_residence",
    "per:cities_of_residence",
    "per:country_of_birth",
    "org:alternate_names",
    "org:subsidiaries",
    "org:top_members/employees",
    "org:founded",
    "org:founded_by",
    "org:country_of_headquarters",
    "org:stateorprovince_of_headquarters",
    "org:city_of_headquarters",
    "org:members",
];

impl RelationSchema {
    pub fn new<S: Into<String>>(
        relations: impl IntoIterator<Item = S>,
        neutral: impl Into<String>,
    ) -> Result<Self, SchemaError> {
        let neutral = neutral.into();
        let relations: Vec<String> = relations.into_iter().map(Into::into).collect();
        let mut index = HashMap::new();
        for (i, r) in relations.iter().enumerate() {
            if r.is_empty() || r.parse::<Label>().map(|l| l.direction.is_some()).unwrap_or(true) {
                return Err(SchemaError::MalformedLabel(r.clone()));
            }
            if *r == neutral || index.insert(r.clone(), i).is_some() {
                return Err(SchemaError::Duplicate(r.clone()));
            }
        }
        Ok(RelationSchema {
            relations,
            neutral,
            index,
        })
    }

    /// 9 directional relations plus `Other`: 19 classes.
    pub fn semeval() -> Self {
        RelationSchema::new(SEMEVAL_RELATIONS, "Other").expect("static schema")
    }

    /// 18 directional relations plus `no_relation`: 37 classes.
    pub fn kbp37() -> Self {
        RelationSchema::new(KBP37_RELATIONS, "no_relation").expect("static schema")
    }

    /// Builds a schema from the labels present in a dataset.
    ///
    /// The single undirected label becomes the neutral class (`Other` when
    /// none occurs); directed relation names are sorted.
    pub fn infer<'a>(labels: impl IntoIterator<Item = &'a Label>) -> Result<Self, SchemaError> {
        let mut directed = BTreeSet::new();
        let mut neutral = BTreeSet::new();
        for l in labels {
            match l.direction {
                Some(_) => directed.insert(l.relation.clone()),
                None => neutral.insert(l.relation.clone()),
            };
        }
        if neutral.len() > 1 {
            let names: Vec<_> = neutral.into_iter().collect();
            return Err(SchemaError::MissingDirection(names.join(", ")));
        }
        let neutral = neutral.into_iter().next().unwrap_or_else(|| "Other".to_string());
        RelationSchema::new(directed, neutral)
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn neutral(&self) -> &str {
        &self.neutral
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn num_classes(&self) -> usize {
        1 + 2 * self.relations.len()
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn class_index(&self, label: &Label) -> Result<usize, SchemaError> {
        if label.relation == self.neutral {
            return match label.direction {
                None => Ok(0),
                Some(_) => Err(SchemaError::DirectedNeutral(label.relation.clone())),
            };
        }
        let r = self
            .relation_index(&label.relation)
            .ok_or_else(|| SchemaError::UnknownRelation(label.to_string()))?;
        match label.direction {
            Some(Direction::E1E2) => Ok(1 + 2 * r),
            Some(Direction::E2E1) => Ok(2 + 2 * r),
            None => Err(SchemaError::MissingDirection(label.relation.clone())),
        }
    }

    pub fn label(&self, class: usize) -> Result<Label, SchemaError> {
        if class >= self.num_classes() {
            return Err(SchemaError::IndexOutOfRange {
                index: class,
                classes: self.num_classes(),
            });
        }
        if class == 0 {
            return Ok(Label::undirected(self.neutral.clone()));
        }
        let r = (class - 1) / 2;
        let d = if (class - 1).is_multiple_of(2) {
            Direction::E1E2
        } else {
            Direction::E2E1
        };
        Ok(Label::directed(self.relations[r].clone(), d))
    }

    /// Relation family of a class index; `None` for the neutral class.
    pub fn family(&self, class: usize) -> Option<usize> {
        if class == 0 || class >= self.num_classes() {
            None
        } else {
            Some((class - 1) / 2)
        }
    }

    /// Every class label in index order.
    pub fn class_labels(&self) -> Vec<Label> {
        (0..self.num_classes())
            .map(|c| self.label(c).expect("in range"))
            .collect()
    }

    /// Class names present in `self` but not `other`, and vice versa.
    pub fn diff(&self, other: &RelationSchema) -> (Vec<String>, Vec<String>) {
        let mine: BTreeSet<String> = self.class_labels().iter().map(|l| l.to_string()).collect();
        let theirs: BTreeSet<String> = other.class_labels().iter().map(|l| l.to_string()).collect();
        (
            mine.difference(&theirs).cloned().collect(),
            theirs.difference(&mine).cloned().collect(),
        )
    }
}
