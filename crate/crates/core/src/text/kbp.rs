//! Turns the MIML-RE style annotated KBP corpus into the directional KBP37 dataset.
//!
//! Raw input uses the ordinary record grammar with an undirected slot name on
//! the label line; `<e1>` marks the slot subject and `<e2>` the filler, in
//! whichever textual order they occur. The pipeline:
//!
//! 1. renames slots (`org:parents` and `org:member_of` become their reverse
//!    relations) and attaches a direction from the textual order of subject
//!    and object, so that `e1` is always the first nominal in the sentence;
//! 2. keeps a relation only if both directions occur more than
//!    `min_per_direction` times, and drops a fraction of `no_relation` records;
//! 3. shuffles, splits every class 70/10/20 and removes dev/test records whose
//!    `(e1, e2, relation)` triple also appears in train.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::corpus::{parse_records, Example, Span, TokenizeOptions};
use super::schema::{Direction, Label, RelationSchema, KBP37_RELATIONS};
use super::DataError;

pub const NO_RELATION: &str = "no_relation";

/// Slot names beyond the final 18 that may appear in the raw annotation.
const OTHER_KBP_SLOTS: [&str; 28] = [
    "per:date_of_birth",
    "per:age",
    "per:stateorprovince_of_birth",
    "per:city_of_birth",
    "per:date_of_death",
    "per:country_of_death",
    "per:stateorprovince_of_death",
    "per:city_of_death",
    "per:cause_of_death",
    "per:schools_attended",
    "per:employee_or_member_of",
    "per:member_of",
    "per:religion",
    "per:children",
    "per:parents",
    "per:siblings",
    "per:other_family",
    "per:charges",
    "org:political/religious_affiliation",
    "org:political_religious_affiliation",
    "org:top_members_employees",
    "org:number_of_employees/members",
    "org:number_of_employees_members",
    "org:date_founded",
    "org:dissolved",
    "org:date_dissolved",
    "org:shareholders",
    "org:website",
];

/// Slots replaced by their inverse relation, swapping subject and object.
const REVERSED_SLOTS: [(&str, &str); 2] = [("org:parents", "org:subsidiaries"), ("org:member_of", "org:members")];

/// Maps a raw slot name to `(canonical name, reversed?)`.
pub fn canonical_slot(name: &str) -> Option<(&'static str, bool)> {
    if let Some((_, to)) = REVERSED_SLOTS.iter().find(|(from, _)| *from == name) {
        return Some((to, true));
    }
    KBP37_RELATIONS
        .iter()
        .chain(OTHER_KBP_SLOTS.iter())
        .find(|s| **s == name)
        .map(|s| (*s, false))
}

/// A raw annotated sentence: subject and object spans plus an undirected slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRelationRecord {
    pub id: u64,
    pub tokens: Vec<String>,
    pub subject: Span,
    pub object: Span,
    pub relation: String,
}

pub fn parse_raw_kbp(text: &str, opts: TokenizeOptions) -> Result<Vec<RawRelationRecord>, DataError> {
    parse_records(text, opts)?
        .into_iter()
        .map(|r| {
            if r.relation.contains('(') {
                return Err(DataError::Malformed {
                    line: r.line + 1,
                    fragment: r.relation.clone(),
                    reason: "raw KBP relations are undirected".into(),
                });
            }
            Ok(RawRelationRecord {
                id: r.id,
                tokens: r.tokens,
                subject: r.e1,
                object: r.e2,
                relation: r.relation,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineConfig {
    /// A relation survives only if each direction occurs strictly more often than this.
    pub min_per_direction: usize,
    /// Fraction of `no_relation` records discarded at random.
    pub neutral_drop_fraction: f64,
    pub train_fraction: f64,
    pub dev_fraction: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            min_per_direction: 100,
            neutral_drop_fraction: 0.8,
            train_fraction: 0.7,
            dev_fraction: 0.1,
        }
    }
}

/// Counts gathered while refining.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RefineStats {
    pub raw_records: usize,
    /// Directed label → count after renaming, before filtering.
    pub directed_counts: BTreeMap<String, usize>,
    pub discarded_relations: Vec<String>,
    pub neutral_before: usize,
    pub neutral_kept: usize,
    pub removed_overlap_dev: usize,
    pub removed_overlap_test: usize,
    /// Class label → (train, dev, test) sizes.
    pub split_counts: BTreeMap<String, (usize, usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct RefinedKbp {
    pub schema: RelationSchema,
    pub train: Vec<Example>,
    pub dev: Vec<Example>,
    pub test: Vec<Example>,
    pub stats: RefineStats,
}

/// Gives a raw record its directed label with `e1` as the first nominal in the text.
pub fn direct_record(raw: &RawRelationRecord) -> Result<Example, DataError> {
    let unknown = || DataError::UnknownRelations(vec![raw.relation.clone()]);
    let (first, second, subject_first) = if raw.subject.start <= raw.object.start {
        (raw.subject, raw.object, true)
    } else {
        (raw.object, raw.subject, false)
    };
    let label = if raw.relation == NO_RELATION {
        Label::undirected(NO_RELATION)
    } else {
        let (name, reversed) = canonical_slot(&raw.relation).ok_or_else(unknown)?;
        let dir = if subject_first {
            Direction::E1E2
        } else {
            Direction::E2E1
        };
        Label::directed(name, if reversed { dir.reversed() } else { dir })
    };
    Example::new(raw.id, raw.tokens.clone(), first, second, label)
}

fn overlap_key(ex: &Example) -> (String, String, String) {
    (
        ex.e1_text().to_lowercase(),
        ex.e2_text().to_lowercase(),
        ex.label.to_string(),
    )
}

pub fn refine_kbp(raw: &[RawRelationRecord], seed: u64, config: &RefineConfig) -> Result<RefinedKbp, DataError> {
    let mut unknown: Vec<String> = raw
        .iter()
        .filter(|r| r.relation != NO_RELATION && canonical_slot(&r.relation).is_none())
        .map(|r| r.relation.clone())
        .collect();
    unknown.sort();
    unknown.dedup();
    if !unknown.is_empty() {
        return Err(DataError::UnknownRelations(unknown));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = RefineStats {
        raw_records: raw.len(),
        ..Default::default()
    };

    let directed: Vec<Example> = raw.iter().map(direct_record).collect::<Result<_, _>>()?;

    let mut per_direction: BTreeMap<(String, Direction), usize> = BTreeMap::new();
    for ex in &directed {
        *stats.directed_counts.entry(ex.label.to_string()).or_default() += 1;
        if let Some(d) = ex.label.direction {
            *per_direction.entry((ex.label.relation.clone(), d)).or_default() += 1;
        }
    }
    let count = |r: &str, d| per_direction.get(&(r.to_string(), d)).copied().unwrap_or(0);
    let mut names: Vec<&str> = per_direction.keys().map(|(r, _)| r.as_str()).collect();
    names.dedup();
    let mut kept: Vec<String> = Vec::new();
    for name in names {
        if count(name, Direction::E1E2) > config.min_per_direction
            && count(name, Direction::E2E1) > config.min_per_direction
        {
            kept.push(name.to_string());
        } else {
            stats.discarded_relations.push(name.to_string());
        }
    }
    // Table order for the known relations, then anything else alphabetically.
    let order = |n: &String| {
        KBP37_RELATIONS
            .iter()
            .position(|k| k == n)
            .unwrap_or(KBP37_RELATIONS.len())
    };
    kept.sort_by(|a, b| order(a).cmp(&order(b)).then(a.cmp(b)));
    let schema =
        RelationSchema::new(kept.iter().cloned(), NO_RELATION).map_err(|e| DataError::Schema { line: 0, source: e })?;

    let (mut neutral, relational): (Vec<Example>, Vec<Example>) = directed
        .into_iter()
        .filter(|ex| ex.label.direction.is_none() || schema.relation_index(&ex.label.relation).is_some())
        .partition(|ex| ex.label.direction.is_none());
    stats.neutral_before = neutral.len();
    neutral.shuffle(&mut rng);
    let drop = (neutral.len() as f64 * config.neutral_drop_fraction).round() as usize;
    neutral.truncate(neutral.len() - drop.min(neutral.len()));
    stats.neutral_kept = neutral.len();

    let mut pool = relational;
    pool.extend(neutral);
    pool.shuffle(&mut rng);

    let mut by_class: Vec<Vec<Example>> = vec![Vec::new(); schema.num_classes()];
    for ex in pool {
        let c = schema
            .class_index(&ex.label)
            .map_err(|e| DataError::Schema { line: 0, source: e })?;
        by_class[c].push(ex);
    }
    let (mut train, mut dev, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for group in by_class {
        let n = group.len();
        let n_train = (n as f64 * config.train_fraction).round() as usize;
        let n_dev = ((n as f64 * config.dev_fraction).round() as usize).min(n - n_train);
        let mut it = group.into_iter();
        train.extend(it.by_ref().take(n_train));
        dev.extend(it.by_ref().take(n_dev));
        test.extend(it);
    }

    let seen: HashSet<_> = train.iter().map(overlap_key).collect();
    let before = (dev.len(), test.len());
    dev.retain(|ex| !seen.contains(&overlap_key(ex)));
    test.retain(|ex| !seen.contains(&overlap_key(ex)));
    stats.removed_overlap_dev = before.0 - dev.len();
    stats.removed_overlap_test = before.1 - test.len();

    train.shuffle(&mut rng);
    dev.shuffle(&mut rng);
    test.shuffle(&mut rng);

    for (split, set) in [(0, &train), (1, &dev), (2, &test)] {
        for ex in set.iter() {
            let e = stats.split_counts.entry(ex.label.to_string()).or_default();
            match split {
                0 => e.0 += 1,
                1 => e.1 += 1,
                _ => e.2 += 1,
            }
        }
    }

    Ok(RefinedKbp {
        schema,
        train,
        dev,
        test,
        stats,
    })
}

impl RefineStats {
    /// Plain-text summary: split sizes, class count and per-class counts.
    pub fn render(&self, schema: &RelationSchema, sizes: (usize, usize, usize)) -> String {
        let mut out = String::new();
        out.push_str(&format!("raw records: {}\n", self.raw_records));
        out.push_str(&format!("training data: {}\n", sizes.0));
        out.push_str(&format!("development data: {}\n", sizes.1));
        out.push_str(&format!("test data: {}\n", sizes.2));
        out.push_str(&format!("relation types: {}\n", schema.num_classes()));
        out.push_str(&format!(
            "no_relation kept: {} of {}\n",
            self.neutral_kept, self.neutral_before
        ));
        out.push_str(&format!(
            "removed for train overlap: dev {}, test {}\n",
            self.removed_overlap_dev, self.removed_overlap_test
        ));
        if !self.discarded_relations.is_empty() {
            out.push_str(&format!("discarded: {}\n", self.discarded_relations.join(", ")));
        }
        out.push_str("class\ttrain\tdev\ttest\n");
        for label in schema.class_labels() {
            let key = label.to_string();
            let (a, b, c) = self.split_counts.get(&key).copied().unwrap_or_default();
            out.push_str(&format!("{key}\t{a}\t{b}\t{c}\n"));
        }
        out
    }
}
