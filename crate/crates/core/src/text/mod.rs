//! Relation records, nominal annotation and dataset refinement.

mod annotate;
mod corpus;
pub mod kbp;
mod schema;

use thiserror::Error;

pub use annotate::{
    bucket_by_context, compute_position_features, context_length, insert_position_indicators,
    strip_position_indicators, AnnotatedSequence, AnnotationMode, BucketRange, ContextBuckets, CONTEXT_MARGIN,
    DEFAULT_MAX_DISTANCE, FIVE_WAY_THRESHOLDS, TABLE_THRESHOLDS,
};
pub use corpus::{
    parse_dataset, parse_dataset_inferring_schema, parse_records, tokenize_marked, write_dataset, Example, Record,
    Span, TokenizeOptions,
};
pub use kbp::{parse_raw_kbp, refine_kbp, RawRelationRecord, RefineConfig, RefineStats, RefinedKbp};
pub use schema::{Direction, Label, RelationSchema, SchemaError, KBP37_RELATIONS, SEMEVAL_RELATIONS};

pub const E1_OPEN: &str = "<e1>";
pub const E1_CLOSE: &str = "</e1>";
pub const E2_OPEN: &str = "<e2>";
pub const E2_CLOSE: &str = "</e2>";
pub const INDICATORS: [&str; 4] = [E1_OPEN, E1_CLOSE, E2_OPEN, E2_CLOSE];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("line {line}: {reason}: `{fragment}`")]
    Malformed {
        line: usize,
        fragment: String,
        reason: String,
    },
    #[error("line {line}: {source}")]
    Schema {
        line: usize,
        #[source]
        source: SchemaError,
    },
    #[error("example {id}: {reason}")]
    InvalidExample { id: u64, reason: String },
    #[error("{0}")]
    Annotation(String),
    #[error("relations missing from the rename table: {}", .0.join(", "))]
    UnknownRelations(Vec<String>),
}
