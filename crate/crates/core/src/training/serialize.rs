//! Plain-text model files.
//!
//! A file starts with a version line, then `key value` header lines, the
//! schema, the vocabulary, and one `block <name> <rows> <cols>` section per
//! parameter block with one matrix row per line. Floats are written in
//! shortest round-trip form, so saving a loaded model reproduces the file
//! byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::model::ModelBundle;
use crate::embedding::{EmbeddingTable, PositionEmbeddings, Vocabulary};
use crate::encoders::{ClassifierParams, CnnParams, Encoder, EncoderKind, Pooling, RnnDirection, RnnParams};
use crate::numeric::Matrix;
use crate::text::{AnnotationMode, RelationSchema};

pub const FORMAT_VERSION: &str = "relclass-model v1";

#[derive(Debug, Error)]
pub enum ModelFormatError {
    #[error("unsupported model format `{found}` (expected `{FORMAT_VERSION}`)")]
    Version { found: String },
    #[error("model file ends early: expected {expected}")]
    Truncated { expected: String },
    #[error("line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("model file I/O: {0}")]
    Io(#[from] std::io::Error),
}

fn pooling_str(p: Pooling) -> &'static str {
    match p {
        Pooling::Max => "max",
        Pooling::Last => "last",
    }
}

fn block_cols(bundle: &ModelBundle, name: &str, len: usize) -> usize {
    let cols = match name {
        "words" => bundle.words.dim(),
        "pos.e1" | "pos.e2" => bundle.positions.as_ref().map_or(1, |p| p.dim()),
        "fw.w" | "bw.w" => bundle.input_dim(),
        "fw.u" | "bw.u" | "out.w" => bundle.hidden(),
        "conv.w" => match &bundle.encoder {
            Encoder::Cnn(p) => p.filter.cols(),
            _ => len,
        },
        _ => len,
    };
    cols.max(1)
}

/// Renders a model in the text format.
pub fn save_model(bundle: &ModelBundle) -> String {
    let mut s = String::new();
    let (window, bidirectional, pooling) = match &bundle.encoder {
        Encoder::Rnn { params, pooling } => (0, params.backward.is_some(), *pooling),
        Encoder::Cnn(p) => (p.window, false, Pooling::Max),
    };
    let _ = writeln!(s, "{FORMAT_VERSION}");
    let _ = writeln!(s, "encoder {}", bundle.encoder.kind());
    let _ = writeln!(s, "mode {}", bundle.mode);
    let _ = writeln!(s, "hidden {}", bundle.hidden());
    let _ = writeln!(s, "word_dim {}", bundle.words.dim());
    let _ = writeln!(s, "window {window}");
    let _ = writeln!(s, "bidirectional {bidirectional}");
    let _ = writeln!(s, "pooling {}", pooling_str(pooling));
    let _ = writeln!(s, "position_dim {}", bundle.positions.as_ref().map_or(0, |p| p.dim()));
    let _ = writeln!(s, "max_distance {}", bundle.max_distance());
    let _ = writeln!(s, "lowercase {}", bundle.lowercase);
    let _ = writeln!(s, "neutral {}", bundle.schema.neutral());
    let _ = writeln!(s, "relations {}", bundle.schema.num_relations());
    for r in bundle.schema.relations() {
        let _ = writeln!(s, "{r}");
    }
    let _ = writeln!(s, "vocab {}", bundle.vocab.len());
    s.push_str(&bundle.vocab.to_text());
    for (name, data) in bundle.blocks() {
        let cols = block_cols(bundle, name, data.len());
        let rows = data.len() / cols;
        let _ = writeln!(s, "block {name} {rows} {cols}");
        for row in data.chunks(cols) {
            let mut first = true;
            for v in row {
                if !first {
                    s.push(' ');
                }
                first = false;
                let _ = write!(s, "{v:?}");
            }
            s.push('\n');
        }
    }
    s.push_str("end\n");
    s
}

pub fn write_model_file(bundle: &ModelBundle, path: &Path) -> Result<(), ModelFormatError> {
    std::fs::write(path, save_model(bundle))?;
    Ok(())
}

pub fn read_model_file(path: &Path) -> Result<ModelBundle, ModelFormatError> {
    load_model(&std::fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, expected: &str) -> Result<&'a str, ModelFormatError> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(ModelFormatError::Truncated {
                expected: expected.to_string(),
            }),
        }
    }

    fn corrupt(&self, reason: impl Into<String>) -> ModelFormatError {
        ModelFormatError::Corrupt {
            line: self.line,
            reason: reason.into(),
        }
    }

    fn field(&mut self, key: &str) -> Result<&'a str, ModelFormatError> {
        let l = self.next(&format!("`{key}` header"))?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ => Err(self.corrupt(format!("expected `{key} <value>`, found `{l}`"))),
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ModelFormatError> {
        let v = self.field(key)?;
        v.parse()
            .map_err(|_| self.corrupt(format!("bad value `{v}` for `{key}`")))
    }
}

/// Parses a model written by [`save_model`].
pub fn load_model(text: &str) -> Result<ModelBundle, ModelFormatError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let version = lines.next("version line")?;
    if version != FORMAT_VERSION {
        return Err(ModelFormatError::Version {
            found: version.to_string(),
        });
    }
    let encoder: EncoderKind = lines.parsed("encoder")?;
    let mode: AnnotationMode = lines.parsed("mode")?;
    let hidden: usize = lines.parsed("hidden")?;
    let word_dim: usize = lines.parsed("word_dim")?;
    let window: usize = lines.parsed("window")?;
    let bidirectional: bool = lines.parsed("bidirectional")?;
    let pooling = match lines.field("pooling")? {
        "max" => Pooling::Max,
        "last" => Pooling::Last,
        other => return Err(lines.corrupt(format!("unknown pooling `{other}`"))),
    };
    let position_dim: usize = lines.parsed("position_dim")?;
    let max_distance: i32 = lines.parsed("max_distance")?;
    let lowercase: bool = lines.parsed("lowercase")?;
    let neutral = lines.field("neutral")?.to_string();
    let n_rel: usize = lines.parsed("relations")?;
    let mut relations = Vec::with_capacity(n_rel);
    for _ in 0..n_rel {
        relations.push(lines.next("relation name")?.to_string());
    }
    let schema = RelationSchema::new(relations, neutral).map_err(|e| lines.corrupt(e.to_string()))?;
    let n_vocab: usize = lines.parsed("vocab")?;
    let vocab_start = lines.line + 1;
    let mut vocab_text = String::new();
    for _ in 0..n_vocab {
        vocab_text.push_str(lines.next("vocabulary entry")?);
        vocab_text.push('\n');
    }
    let vocab = Vocabulary::from_text(&vocab_text).map_err(|e| ModelFormatError::Corrupt {
        line: vocab_start,
        reason: e.to_string(),
    })?;

    if hidden == 0 || word_dim == 0 {
        return Err(lines.corrupt("hidden and word_dim must be positive"));
    }
    let positions = match mode {
        AnnotationMode::PositionFeatures => {
            if position_dim == 0 || max_distance < 0 {
                return Err(lines.corrupt("position features need a positive dimension"));
            }
            let rows = 2 * max_distance as usize + 1;
            Some(PositionEmbeddings {
                max_distance,
                to_e1: Matrix::zeros(rows, position_dim),
                to_e2: Matrix::zeros(rows, position_dim),
            })
        }
        _ => None,
    };
    let input_dim = word_dim + 2 * positions.as_ref().map_or(0, |p| p.dim());
    let encoder = match encoder {
        EncoderKind::Rnn => Encoder::Rnn {
            params: RnnParams {
                forward: RnnDirection::zeros(hidden, input_dim),
                backward: bidirectional.then(|| RnnDirection::zeros(hidden, input_dim)),
            },
            pooling,
        },
        EncoderKind::Cnn => {
            if window.is_multiple_of(2) {
                return Err(lines.corrupt(format!("window must be odd, got {window}")));
            }
            Encoder::Cnn(CnnParams::zeros(hidden, input_dim, window))
        }
    };
    let mut bundle = ModelBundle {
        classifier: ClassifierParams::zeros(schema.num_classes(), hidden),
        schema,
        mode,
        lowercase,
        words: EmbeddingTable::from_matrix(Matrix::zeros(vocab.len(), word_dim)),
        vocab,
        positions,
        encoder,
    };

    let expected: Vec<(&'static str, usize)> = bundle
        .blocks()
        .iter()
        .map(|(name, b)| (*name, block_cols(&bundle, name, b.len())))
        .collect();
    for ((name, block), (_, cols)) in bundle.blocks_mut().into_iter().zip(expected) {
        let header = lines.next(&format!("block `{name}`"))?;
        let rows = block.len() / cols;
        if header != format!("block {name} {rows} {cols}") {
            return Err(lines.corrupt(format!("expected `block {name} {rows} {cols}`, found `{header}`")));
        }
        for r in 0..rows {
            let line = lines.next(&format!("row {r} of block `{name}`"))?;
            let mut n = 0;
            for tok in line.split(' ') {
                if n == cols {
                    return Err(lines.corrupt(format!("more than {cols} values")));
                }
                block[r * cols + n] = tok.parse().map_err(|_| lines.corrupt(format!("bad number `{tok}`")))?;
                n += 1;
            }
            if n != cols {
                return Err(lines.corrupt(format!("expected {cols} values, found {n}")));
            }
        }
    }
    let end = lines.next("`end` marker")?;
    if end != "end" {
        return Err(lines.corrupt(format!("expected `end`, found `{end}`")));
    }
    Ok(bundle)
}
