use std::fmt;

use super::corpus::Example;
use super::{DataError, E1_CLOSE, E1_OPEN, E2_CLOSE, E2_OPEN, INDICATORS};

/// Default clipping bound for position-feature distances.
pub const DEFAULT_MAX_DISTANCE: i32 = 30;

/// Words counted on each side of the nominal pair by [`context_length`].
pub const CONTEXT_MARGIN: usize = 3;

/// How the nominal pair is made visible to the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnnotationMode {
    /// Four indicator tokens wrap the nominals.
    Indicators,
    /// Each token carries its clipped distances to both nominals.
    PositionFeatures,
    /// No nominal information at all; only used for ablations.
    Plain,
}

impl AnnotationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AnnotationMode::Indicators => "pi",
            AnnotationMode::PositionFeatures => "pf",
            AnnotationMode::Plain => "plain",
        }
    }

    pub fn annotate(self, ex: &Example, max_distance: i32) -> AnnotatedSequence {
        match self {
            AnnotationMode::Indicators => insert_position_indicators(ex),
            AnnotationMode::PositionFeatures => compute_position_features(ex, max_distance),
            AnnotationMode::Plain => AnnotatedSequence {
                tokens: ex.tokens.clone(),
                position_features: None,
            },
        }
    }
}

impl fmt::Display for AnnotationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AnnotationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pi" => Ok(AnnotationMode::Indicators),
            "pf" => Ok(AnnotationMode::PositionFeatures),
            "plain" => Ok(AnnotationMode::Plain),
            _ => Err(format!("unknown annotation mode `{s}` (expected pi, pf or plain)")),
        }
    }
}

/// Token sequence as fed to the embedding layer.
///
/// Either carries indicator tokens or per-token position features, never both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSequence {
    pub tokens: Vec<String>,
    /// `(d1, d2)` signed, clipped distances to the heads of e1 and e2.
    pub position_features: Option<Vec<(i32, i32)>>,
}

impl AnnotatedSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn has_indicators(&self) -> bool {
        self.tokens.iter().any(|t| INDICATORS.contains(&t.as_str()))
    }

    /// Checks the one-of-each-in-order rule for indicators and the PI/PF exclusivity.
    pub fn validate(&self) -> Result<(), DataError> {
        let positions: Vec<(usize, &str)> = self
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| INDICATORS.contains(&t.as_str()))
            .map(|(i, t)| (i, t.as_str()))
            .collect();
        if positions.is_empty() {
            if let Some(pf) = &self.position_features {
                if pf.len() != self.tokens.len() {
                    return Err(DataError::Annotation(format!(
                        "{} position features for {} tokens",
                        pf.len(),
                        self.tokens.len()
                    )));
                }
            }
            return Ok(());
        }
        if self.position_features.is_some() {
            return Err(DataError::Annotation(
                "position features and indicators are mutually exclusive".into(),
            ));
        }
        let tags: Vec<&str> = positions.iter().map(|p| p.1).collect();
        let e1_first = [E1_OPEN, E1_CLOSE, E2_OPEN, E2_CLOSE];
        let e2_first = [E2_OPEN, E2_CLOSE, E1_OPEN, E1_CLOSE];
        if tags != e1_first && tags != e2_first {
            return Err(DataError::Annotation(format!("bad indicator sequence {tags:?}")));
        }
        Ok(())
    }
}

/// Wraps each nominal in its indicator tokens; every other token is untouched.
pub fn insert_position_indicators(ex: &Example) -> AnnotatedSequence {
    let mut tokens = Vec::with_capacity(ex.tokens.len() + 4);
    for (i, tok) in ex.tokens.iter().enumerate() {
        if i == ex.e1.start {
            tokens.push(E1_OPEN.to_string());
        }
        if i == ex.e2.start {
            tokens.push(E2_OPEN.to_string());
        }
        tokens.push(tok.clone());
        if i == ex.e1.end {
            tokens.push(E1_CLOSE.to_string());
        }
        if i == ex.e2.end {
            tokens.push(E2_CLOSE.to_string());
        }
    }
    AnnotatedSequence {
        tokens,
        position_features: None,
    }
}

/// Drops the four indicator tokens.
pub fn strip_position_indicators(tokens: &[String]) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !INDICATORS.contains(&t.as_str()))
        .cloned()
        .collect()
}

/// Signed distances `t - head`, head being the first token of each nominal,
/// clipped to `[-max_distance, max_distance]`.
pub fn compute_position_features(ex: &Example, max_distance: i32) -> AnnotatedSequence {
    let clip = |d: i64| d.clamp(-(max_distance as i64), max_distance as i64) as i32;
    let h1 = ex.e1.start as i64;
    let h2 = ex.e2.start as i64;
    let features = (0..ex.tokens.len() as i64)
        .map(|t| (clip(t - h1), clip(t - h2)))
        .collect();
    AnnotatedSequence {
        tokens: ex.tokens.clone(),
        position_features: Some(features),
    }
}

/// Tokens from three words before the first nominal through three words after
/// the second, clamped to the sentence. Nominal tokens count; indicators never do.
pub fn context_length(ex: &Example) -> usize {
    let (first, second) = if ex.e1.start <= ex.e2.start {
        (ex.e1, ex.e2)
    } else {
        (ex.e2, ex.e1)
    };
    let lo = first.start.saturating_sub(CONTEXT_MARGIN);
    let hi = (second.end + CONTEXT_MARGIN).min(ex.tokens.len() - 1);
    hi - lo + 1
}

/// Cut points `≤10 | 11–15 | ≥16` used for the context-length distribution table.
pub const TABLE_THRESHOLDS: [usize; 2] = [10, 15];

/// Cut points for the five-way F1-by-context-length breakdown.
pub const FIVE_WAY_THRESHOLDS: [usize; 4] = [8, 10, 12, 15];

/// Inclusive range of context lengths; `hi == None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BucketRange {
    pub lo: usize,
    pub hi: Option<usize>,
}

impl BucketRange {
    pub fn contains(&self, len: usize) -> bool {
        len >= self.lo && self.hi.is_none_or(|h| len <= h)
    }
}

impl fmt::Display for BucketRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(h) => write!(f, "{}-{}", self.lo, h),
            None => write!(f, "{}-inf", self.lo),
        }
    }
}

/// Partition of context lengths by ascending cut points; threshold `c`
/// closes a bucket at `≤ c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextBuckets {
    thresholds: Vec<usize>,
}

impl ContextBuckets {
    pub fn new(thresholds: &[usize]) -> Result<Self, DataError> {
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DataError::Annotation(format!(
                "bucket thresholds must be strictly increasing, got {thresholds:?}"
            )));
        }
        Ok(ContextBuckets {
            thresholds: thresholds.to_vec(),
        })
    }

    pub fn table() -> Self {
        ContextBuckets::new(&TABLE_THRESHOLDS).expect("static")
    }

    pub fn five_way() -> Self {
        ContextBuckets::new(&FIVE_WAY_THRESHOLDS).expect("static")
    }

    pub fn len(&self) -> usize {
        self.thresholds.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn assign(&self, len: usize) -> usize {
        self.thresholds.partition_point(|&t| t < len)
    }

    pub fn ranges(&self) -> Vec<BucketRange> {
        let mut lo = 0;
        let mut out = Vec::with_capacity(self.len());
        for &t in &self.thresholds {
            out.push(BucketRange { lo, hi: Some(t) });
            lo = t + 1;
        }
        out.push(BucketRange { lo, hi: None });
        out
    }
}

/// Splits examples by context length; every bucket is present, possibly empty.
pub fn bucket_by_context<'a>(
    examples: &'a [Example],
    buckets: &ContextBuckets,
) -> Vec<(BucketRange, Vec<&'a Example>)> {
    let mut out: Vec<(BucketRange, Vec<&Example>)> = buckets.ranges().into_iter().map(|r| (r, Vec::new())).collect();
    for ex in examples {
        out[buckets.assign(context_length(ex))].1.push(ex);
    }
    out
}
