//! Vocabulary, pretrained word vectors, the embedding lookup and fan-in initialization.

use std::collections::HashMap;

use rand::Rng;
use thiserror::Error;

use crate::numeric::Matrix;
use crate::text::{AnnotatedSequence, INDICATORS};

/// Out-of-vocabulary token, always index 0.
pub const UNK: &str = "<unk>";

/// Default size of each position-feature embedding.
pub const DEFAULT_POSITION_DIM: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("vector file line {line}: expected {expected} values, found {found}")]
    InconsistentDimension { line: usize, expected: usize, found: usize },
    #[error("vector file line {line}: bad number `{value}`")]
    BadNumber { line: usize, value: String },
    #[error("vector file line {line}: non-finite value")]
    NonFinite { line: usize },
    #[error("vocabulary line {line}: {reason}")]
    BadVocabulary { line: usize, reason: String },
    #[error("no embedding dimension: vector file is empty and no fallback was given")]
    NoDimension,
}

/// Entries i.i.d. uniform on `[-1/√cols, 1/√cols]`; `cols` is the fan-in.
pub fn fan_in_init<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let bound = 1.0 / (cols.max(1) as f64).sqrt();
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-bound..=bound))
}

/// Dense token ↔ index map. `<unk>` and the four indicators are reserved at 0..5.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocabulary {
    pub fn new() -> Self {
        let mut v = Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        v.insert(UNK);
        for tok in INDICATORS {
            v.insert(tok);
        }
        v
    }

    /// Tokens seen at least `min_count` times, in order of first occurrence.
    pub fn build(corpus: &[AnnotatedSequence], min_count: usize) -> Self {
        let min_count = min_count.max(1);
        let mut counts: HashMap<&str, usize> = HashMap::new();
        let mut order: Vec<&str> = Vec::new();
        for seq in corpus {
            for tok in &seq.tokens {
                let c = counts.entry(tok.as_str()).or_insert_with(|| {
                    order.push(tok.as_str());
                    0
                });
                *c += 1;
            }
        }
        let mut vocab = Vocabulary::new();
        for tok in order {
            if counts[tok] >= min_count {
                vocab.insert(tok);
            }
        }
        vocab
    }

    /// Adds `token` if absent and returns its index.
    pub fn insert(&mut self, token: &str) -> usize {
        if let Some(&i) = self.index.get(token) {
            return i;
        }
        let i = self.tokens.len();
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), i);
        i
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Index of `token`, falling back to `<unk>`.
    pub fn lookup(&self, token: &str) -> usize {
        self.get(token).unwrap_or(0)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// One token per line, in index order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.tokens {
            s.push_str(t);
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, EmbeddingError> {
        let fresh = Vocabulary::new();
        let mut vocab = Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() || line.chars().any(char::is_whitespace) {
                return Err(EmbeddingError::BadVocabulary {
                    line: i + 1,
                    reason: format!("invalid token `{line}`"),
                });
            }
            if vocab.index.contains_key(line) {
                return Err(EmbeddingError::BadVocabulary {
                    line: i + 1,
                    reason: format!("duplicate token `{line}`"),
                });
            }
            vocab.insert(line);
        }
        if vocab.tokens.len() < fresh.len() || vocab.tokens[..fresh.len()] != fresh.tokens[..] {
            return Err(EmbeddingError::BadVocabulary {
                line: 1,
                reason: "reserved tokens missing".into(),
            });
        }
        Ok(vocab)
    }
}

/// Word vectors read from a whitespace-delimited text file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PretrainedVectors {
    pub dim: Option<usize>,
    pub vectors: HashMap<String, Vec<f64>>,
}

impl PretrainedVectors {
    /// Parses `token v1 … vD` lines. A leading `count dim` header is detected and skipped.
    pub fn parse(text: &str) -> Result<Self, EmbeddingError> {
        let mut dim: Option<usize> = None;
        let mut vectors = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            if i == 0 && rest.len() == 1 && token.parse::<usize>().is_ok() {
                if let Ok(d) = rest[0].parse::<usize>() {
                    dim = Some(d);
                    continue;
                }
            }
            let values = rest
                .iter()
                .map(|v| {
                    v.parse::<f64>().map_err(|_| EmbeddingError::BadNumber {
                        line: i + 1,
                        value: v.to_string(),
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(EmbeddingError::NonFinite { line: i + 1 });
            }
            let expected = *dim.get_or_insert(values.len());
            if values.len() != expected || expected == 0 {
                return Err(EmbeddingError::InconsistentDimension {
                    line: i + 1,
                    expected,
                    found: values.len(),
                });
            }
            vectors.insert(token.to_string(), values);
        }
        Ok(PretrainedVectors { dim, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// The word embedding matrix, stored one row per vocabulary entry so that
/// `column(i)` (column `i` of the D×|V| projection) is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    vectors: Matrix,
}

impl EmbeddingTable {
    pub fn random<R: Rng + ?Sized>(vocab_size: usize, dim: usize, rng: &mut R) -> Self {
        EmbeddingTable {
            vectors: fan_in_init(vocab_size, dim, rng),
        }
    }

    /// Wraps a |V|×D matrix.
    pub fn from_matrix(vectors: Matrix) -> Self {
        EmbeddingTable { vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.rows() == 0
    }

    pub fn column(&self, index: usize) -> &[f64] {
        self.vectors.row(index)
    }

    pub fn column_mut(&mut self, index: usize) -> &mut [f64] {
        self.vectors.row_mut(index)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.vectors
    }

    pub fn matrix_mut(&mut self) -> &mut Matrix {
        &mut self.vectors
    }
}

/// Builds the embedding table for `vocab`: tokens found in `vectors` get the
/// file vector, everything else (indicators, `<unk>`, unseen words) a fan-in
/// random column. `fallback_dim` is used only when the file is empty.
pub fn load_pretrained<R: Rng + ?Sized>(
    vectors: &PretrainedVectors,
    vocab: &Vocabulary,
    fallback_dim: Option<usize>,
    rng: &mut R,
) -> Result<EmbeddingTable, EmbeddingError> {
    let dim = vectors.dim.or(fallback_dim).ok_or(EmbeddingError::NoDimension)?;
    let mut table = EmbeddingTable::random(vocab.len(), dim, rng);
    for (i, tok) in vocab.tokens().iter().enumerate() {
        if let Some(v) = vectors.vectors.get(tok) {
            table.column_mut(i).copy_from_slice(v);
        }
    }
    Ok(table)
}

/// Learned embeddings of clipped distances to e1 and e2.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionEmbeddings {
    pub max_distance: i32,
    pub to_e1: Matrix,
    pub to_e2: Matrix,
}

impl PositionEmbeddings {
    pub fn random<R: Rng + ?Sized>(max_distance: i32, dim: usize, rng: &mut R) -> Self {
        let rows = 2 * max_distance as usize + 1;
        PositionEmbeddings {
            max_distance,
            to_e1: fan_in_init(rows, dim, rng),
            to_e2: fan_in_init(rows, dim, rng),
        }
    }

    pub fn dim(&self) -> usize {
        self.to_e1.cols()
    }

    /// Row of a (clipped) signed distance.
    pub fn row_of(&self, distance: i32) -> usize {
        (distance.clamp(-self.max_distance, self.max_distance) + self.max_distance) as usize
    }
}

/// Embeds a sequence: one vector per token, extended by the two
/// position-feature embeddings when the sequence carries them.
pub fn embed(
    seq: &AnnotatedSequence,
    table: &EmbeddingTable,
    vocab: &Vocabulary,
    positions: Option<&PositionEmbeddings>,
) -> Vec<Vec<f64>> {
    seq.tokens
        .iter()
        .enumerate()
        .map(|(t, tok)| {
            let mut v = table.column(vocab.lookup(tok)).to_vec();
            if let (Some(pe), Some(pf)) = (positions, &seq.position_features) {
                let (d1, d2) = pf[t];
                v.extend_from_slice(pe.to_e1.row(pe.row_of(d1)));
                v.extend_from_slice(pe.to_e2.row(pe.row_of(d2)));
            }
            v
        })
        .collect()
}
