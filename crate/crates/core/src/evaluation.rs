//! Scoring and analysis.
//!
//! [`macro_f1`] follows the official SemEval-2010 Task 8 semantics: a
//! prediction is correct only when both relation and direction match, scores
//! are computed per relation family, and the neutral class is left out of the
//! average. [`f1_by_bucket`] repeats the computation per context-length
//! bucket, and [`semantic_profile`] measures how many pooled dimensions each
//! time step supplies.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::encoders::SentenceEncoding;
use crate::text::{context_length, BucketRange, ContextBuckets, Example, RelationSchema, SchemaError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{gold} gold labels but {pred} predictions")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("class index {index} outside schema of {classes} classes")]
    ClassOutOfRange { index: usize, classes: usize },
    #[error("confusion matrix is {rows}x{cols}, schema has {classes} classes")]
    ConfusionShape { rows: usize, cols: usize, classes: usize },
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScoreOptions {
    /// Adds the neutral class to the macro average. Useful for diagnostics;
    /// off for official numbers.
    pub include_neutral: bool,
}

/// Counts and scores for one relation family (both directions together).
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyScore {
    pub name: String,
    /// Exact matches, direction included.
    pub correct: usize,
    /// Predictions of this family in either direction.
    pub predicted: usize,
    /// Gold examples of this family in either direction.
    pub gold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl FamilyScore {
    fn new(name: String, correct: usize, predicted: usize, gold: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(correct, predicted);
        let recall = ratio(correct, gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        FamilyScore {
            name,
            correct,
            predicted,
            gold,
            precision,
            recall,
            f1,
        }
    }

    /// A family that neither occurs in gold nor is ever predicted.
    pub fn is_vacuous(&self) -> bool {
        self.gold == 0 && self.predicted == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub schema: RelationSchema,
    /// `confusion[gold][pred]` over the full directional class set.
    pub confusion: Vec<Vec<usize>>,
    /// One entry per relation family in schema order, plus the neutral class
    /// last when it was included.
    pub families: Vec<FamilyScore>,
    /// Percent, in `[0, 100]`.
    pub macro_f1: f64,
    pub options: ScoreOptions,
    pub buckets: Vec<(BucketRange, Option<f64>)>,
}

/// Scores class-index predictions against gold class indices.
pub fn macro_f1(gold: &[usize], pred: &[usize], schema: &RelationSchema) -> Result<EvalReport, EvalError> {
    macro_f1_with(gold, pred, schema, ScoreOptions::default())
}

pub fn macro_f1_with(
    gold: &[usize],
    pred: &[usize],
    schema: &RelationSchema,
    options: ScoreOptions,
) -> Result<EvalReport, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let c = schema.num_classes();
    let mut confusion = vec![vec![0; c]; c];
    for (&g, &p) in gold.iter().zip(pred) {
        for index in [g, p] {
            if index >= c {
                return Err(EvalError::ClassOutOfRange { index, classes: c });
            }
        }
        confusion[g][p] += 1;
    }
    EvalReport::from_confusion(confusion, schema, options)
}

impl EvalReport {
    /// Scores a precomputed confusion matrix; matrices of disjoint example
    /// sets can be added before calling this.
    pub fn from_confusion(
        confusion: Vec<Vec<usize>>,
        schema: &RelationSchema,
        options: ScoreOptions,
    ) -> Result<Self, EvalError> {
        let c = schema.num_classes();
        if confusion.len() != c || confusion.iter().any(|r| r.len() != c) {
            return Err(EvalError::ConfusionShape {
                rows: confusion.len(),
                cols: confusion.first().map_or(0, Vec::len),
                classes: c,
            });
        }
        let mut families = Vec::with_capacity(schema.num_relations() + 1);
        for (r, name) in schema.relations().iter().enumerate() {
            let members = [1 + 2 * r, 2 + 2 * r];
            let correct = members.iter().map(|&k| confusion[k][k]).sum();
            let predicted = (0..c).flat_map(|g| members.map(|k| confusion[g][k])).sum();
            let gold = members.iter().map(|&k| confusion[k].iter().sum::<usize>()).sum();
            families.push(FamilyScore::new(name.clone(), correct, predicted, gold));
        }
        if options.include_neutral {
            let predicted = (0..c).map(|g| confusion[g][0]).sum();
            let gold = confusion[0].iter().sum();
            families.push(FamilyScore::new(
                schema.neutral().to_string(),
                confusion[0][0],
                predicted,
                gold,
            ));
        }
        let scored: Vec<f64> = families.iter().filter(|f| !f.is_vacuous()).map(|f| f.f1).collect();
        let macro_f1 = if scored.is_empty() {
            100.0
        } else {
            100.0 * scored.iter().sum::<f64>() / scored.len() as f64
        };
        Ok(EvalReport {
            schema: schema.clone(),
            confusion,
            families,
            macro_f1,
            options,
            buckets: Vec::new(),
        })
    }

    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    /// Exact-match accuracy in percent.
    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let diag: usize = (0..self.confusion.len()).map(|k| self.confusion[k][k]).sum();
        100.0 * diag as f64 / total as f64
    }

    /// Confusion matrix block, per-family table, optional bucket lines and
    /// the summary line.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let labels: Vec<String> = self.schema.class_labels().iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "confusion (rows gold, columns predicted)");
        let width = self.confusion.iter().flatten().max().map_or(1, |m| m.to_string().len());
        for (k, row) in self.confusion.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>width$}")).collect();
            let _ = writeln!(s, "{:>3} {}\t{}", k, cells.join(" "), labels[k]);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "family\tcorrect\tpredicted\tgold\tP\tR\tF1");
        for f in &self.families {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{:.1}\t{:.1}\t{:.1}",
                f.name,
                f.correct,
                f.predicted,
                f.gold,
                100.0 * f.precision,
                100.0 * f.recall,
                100.0 * f.f1
            );
        }
        let _ = writeln!(s);
        for line in render_buckets(&self.buckets).lines() {
            let _ = writeln!(s, "{line}");
        }
        let _ = writeln!(s, "accuracy: {:.1}", self.accuracy());
        let _ = writeln!(s, "macro-F1: {:.1}", self.macro_f1);
        s
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Macro-F1 restricted to each context-length bucket, in bucket order.
/// Buckets with no examples map to `None`.
pub fn f1_by_bucket(
    examples: &[Example],
    preds: &[usize],
    buckets: &ContextBuckets,
    schema: &RelationSchema,
) -> Result<Vec<(BucketRange, Option<f64>)>, EvalError> {
    if examples.len() != preds.len() {
        return Err(EvalError::LengthMismatch {
            gold: examples.len(),
            pred: preds.len(),
        });
    }
    let ranges = buckets.ranges();
    let mut golds = vec![Vec::new(); ranges.len()];
    let mut predicted = vec![Vec::new(); ranges.len()];
    for (ex, &p) in examples.iter().zip(preds) {
        let b = buckets.assign(context_length(ex));
        golds[b].push(schema.class_index(&ex.label)?);
        predicted[b].push(p);
    }
    ranges
        .into_iter()
        .zip(golds.iter().zip(&predicted))
        .map(|(range, (g, p))| {
            let score = if g.is_empty() {
                None
            } else {
                Some(macro_f1(g, p, schema)?.macro_f1)
            };
            Ok((range, score))
        })
        .collect()
}

/// `bucket <lo>-<hi>: NN.N` lines; undefined buckets print `n/a`.
pub fn render_buckets(buckets: &[(BucketRange, Option<f64>)]) -> String {
    let mut s = String::new();
    for (range, score) in buckets {
        match score {
            Some(v) => {
                let _ = writeln!(s, "bucket {range}: {v:.1}");
            }
            None => {
                let _ = writeln!(s, "bucket {range}: n/a");
            }
        }
    }
    s
}

/// How much of the pooled sentence vector each time step supplies.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticProfile {
    /// Pooled dimensions won by each step.
    pub counts: Vec<usize>,
    /// `counts[t] / M`.
    pub contributions: Vec<f64>,
    /// Mean squared difference of adjacent contributions; 0 for one step.
    pub neighbor_variance: f64,
}

impl SemanticProfile {
    /// Pairs each contribution with its token, for plotting.
    pub fn with_tokens<'a>(&self, tokens: &'a [String]) -> Vec<(&'a str, f64)> {
        tokens
            .iter()
            .map(String::as_str)
            .zip(self.contributions.iter().copied())
            .collect()
    }

    /// Tab-separated `token contribution` lines.
    pub fn render(&self, tokens: &[String]) -> String {
        let mut s = String::new();
        for (tok, c) in self.with_tokens(tokens) {
            let _ = writeln!(s, "{tok}\t{c:.4}");
        }
        s
    }
}

pub fn semantic_profile(encoding: &SentenceEncoding) -> SemanticProfile {
    let t_len = encoding.len();
    let m = encoding.pool_argmax.len();
    let mut counts = vec![0usize; t_len];
    for &t in &encoding.pool_argmax {
        counts[t] += 1;
    }
    let contributions: Vec<f64> = counts
        .iter()
        .map(|&k| if m == 0 { 0.0 } else { k as f64 / m as f64 })
        .collect();
    let neighbor_variance = if t_len < 2 {
        0.0
    } else {
        contributions.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / (t_len - 1) as f64
    };
    SemanticProfile {
        counts,
        contributions,
        neighbor_variance,
    }
}

/// Corpus average of per-sentence neighbor variances.
pub fn mean_neighbor_variance(profiles: &[SemanticProfile]) -> f64 {
    if profiles.is_empty() {
        return 0.0;
    }
    profiles.iter().map(|p| p.neighbor_variance).sum::<f64>() / profiles.len() as f64
}
