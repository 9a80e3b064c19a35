use std::collections::BTreeMap;

use rand::Rng;

use super::TrainError;
use crate::embedding::{load_pretrained, EmbeddingTable, PositionEmbeddings, PretrainedVectors, Vocabulary};
use crate::encoders::{classify, ClassifierParams, CnnParams, Encoder, EncoderKind, EncoderTrace, Pooling, RnnParams};
use crate::numeric::NumericError;
use crate::text::{AnnotatedSequence, AnnotationMode, Example, RelationSchema, DEFAULT_MAX_DISTANCE};

/// Architecture choices for a fresh model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub encoder: EncoderKind,
    pub mode: AnnotationMode,
    pub hidden: usize,
    /// Convolution window; ignored by the RNN.
    pub window: usize,
    /// Size of each position-feature embedding (PF mode only).
    pub position_dim: usize,
    pub max_distance: i32,
    /// RNN only.
    pub bidirectional: bool,
    /// RNN only; the CNN always max-pools.
    pub pooling: Pooling,
    pub lowercase: bool,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            encoder: EncoderKind::Rnn,
            mode: AnnotationMode::Indicators,
            hidden: 800,
            window: 3,
            position_dim: crate::embedding::DEFAULT_POSITION_DIM,
            max_distance: DEFAULT_MAX_DISTANCE,
            bidirectional: true,
            pooling: Pooling::Max,
            lowercase: false,
        }
    }
}

/// Everything needed to classify a sentence: vocabulary, embeddings,
/// encoder and output layer, with the schema and annotation mode they were
/// trained for.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub schema: RelationSchema,
    pub mode: AnnotationMode,
    pub lowercase: bool,
    pub vocab: Vocabulary,
    pub words: EmbeddingTable,
    pub positions: Option<PositionEmbeddings>,
    pub encoder: Encoder,
    pub classifier: ClassifierParams,
}

/// An example resolved to vocabulary and position-table indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub words: Vec<usize>,
    pub positions: Option<Vec<(usize, usize)>>,
    pub gold: usize,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Forward pass output kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub inputs: Vec<Vec<f64>>,
    pub trace: EncoderTrace,
    pub probs: Vec<f64>,
}

impl ModelBundle {
    pub fn new<R: Rng + ?Sized>(
        spec: &ModelSpec,
        schema: RelationSchema,
        vocab: Vocabulary,
        words: EmbeddingTable,
        rng: &mut R,
    ) -> Result<Self, TrainError> {
        if words.len() != vocab.len() {
            return Err(TrainError::Config(format!(
                "embedding table has {} columns for {} vocabulary entries",
                words.len(),
                vocab.len()
            )));
        }
        if spec.hidden == 0 {
            return Err(TrainError::Config("hidden size must be positive".into()));
        }
        let positions = match spec.mode {
            AnnotationMode::PositionFeatures => {
                if spec.position_dim == 0 || spec.max_distance < 0 {
                    return Err(TrainError::Config(
                        "position features need dim ≥ 1 and max distance ≥ 0".into(),
                    ));
                }
                Some(PositionEmbeddings::random(spec.max_distance, spec.position_dim, rng))
            }
            _ => None,
        };
        let input_dim = words.dim() + positions.as_ref().map_or(0, |p| 2 * p.dim());
        let encoder = match spec.encoder {
            EncoderKind::Rnn => Encoder::Rnn {
                params: RnnParams::random(spec.hidden, input_dim, spec.bidirectional, rng),
                pooling: spec.pooling,
            },
            EncoderKind::Cnn => {
                if spec.window.is_multiple_of(2) {
                    return Err(TrainError::Config(format!("window must be odd, got {}", spec.window)));
                }
                Encoder::Cnn(CnnParams::random(spec.hidden, input_dim, spec.window, rng))
            }
        };
        let classifier = ClassifierParams::random(schema.num_classes(), spec.hidden, rng);
        Ok(ModelBundle {
            schema,
            mode: spec.mode,
            lowercase: spec.lowercase,
            vocab,
            words,
            positions,
            encoder,
            classifier,
        })
    }

    /// Fresh model whose vocabulary covers every token of `corpus` after
    /// annotation. Word vectors come from `vectors` where available and are
    /// random otherwise; `word_dim` is required without a vector file.
    pub fn from_corpus<R: Rng + ?Sized>(
        spec: &ModelSpec,
        schema: RelationSchema,
        corpus: &[Example],
        word_dim: Option<usize>,
        vectors: Option<&PretrainedVectors>,
        rng: &mut R,
    ) -> Result<Self, TrainError> {
        let sequences: Vec<AnnotatedSequence> = corpus
            .iter()
            .map(|ex| {
                let mut seq = spec.mode.annotate(ex, spec.max_distance);
                if spec.lowercase {
                    seq.tokens.iter_mut().for_each(|t| *t = t.to_lowercase());
                }
                seq
            })
            .collect();
        let vocab = Vocabulary::build(&sequences, 1);
        let words = match vectors {
            Some(v) => load_pretrained(v, &vocab, word_dim, rng)?,
            None => {
                let dim =
                    word_dim.ok_or_else(|| TrainError::Config("word dimension required without vectors".into()))?;
                EmbeddingTable::random(vocab.len(), dim, rng)
            }
        };
        ModelBundle::new(spec, schema, vocab, words, rng)
    }

    pub fn hidden(&self) -> usize {
        self.encoder.hidden()
    }

    pub fn input_dim(&self) -> usize {
        self.words.dim() + self.positions.as_ref().map_or(0, |p| 2 * p.dim())
    }

    pub fn max_distance(&self) -> i32 {
        self.positions.as_ref().map_or(DEFAULT_MAX_DISTANCE, |p| p.max_distance)
    }

    /// Checks that every component agrees on shapes.
    pub fn validate(&self) -> Result<(), TrainError> {
        let shape_err = |what: &str| TrainError::Config(format!("inconsistent model: {what}"));
        if self.words.len() != self.vocab.len() {
            return Err(shape_err("embedding/vocabulary size"));
        }
        if self.encoder.input_dim() != self.input_dim() {
            return Err(shape_err("encoder input dimension"));
        }
        if self.classifier.weights.shape() != (self.schema.num_classes(), self.hidden())
            || self.classifier.bias.len() != self.schema.num_classes()
        {
            return Err(shape_err("classifier shape"));
        }
        if (self.mode == AnnotationMode::PositionFeatures) != self.positions.is_some() {
            return Err(shape_err("position embeddings vs annotation mode"));
        }
        Ok(())
    }

    pub fn annotate(&self, ex: &Example) -> AnnotatedSequence {
        self.mode.annotate(ex, self.max_distance())
    }

    /// Resolves tokens and labels; unknown tokens map to `<unk>`.
    pub fn prepare(&self, ex: &Example) -> Result<Instance, TrainError> {
        let gold = self.schema.class_index(&ex.label)?;
        let seq = self.annotate(ex);
        let words = seq
            .tokens
            .iter()
            .map(|t| {
                if self.lowercase {
                    self.vocab.lookup(&t.to_lowercase())
                } else {
                    self.vocab.lookup(t)
                }
            })
            .collect();
        let positions = match (&self.positions, &seq.position_features) {
            (Some(pe), Some(pf)) => Some(pf.iter().map(|&(a, b)| (pe.row_of(a), pe.row_of(b))).collect()),
            _ => None,
        };
        Ok(Instance { words, positions, gold })
    }

    pub fn prepare_all(&self, examples: &[Example]) -> Result<Vec<Instance>, TrainError> {
        examples.iter().map(|e| self.prepare(e)).collect()
    }

    pub fn inputs(&self, inst: &Instance) -> Vec<Vec<f64>> {
        inst.words
            .iter()
            .enumerate()
            .map(|(t, &w)| {
                let mut v = Vec::with_capacity(self.input_dim());
                v.extend_from_slice(self.words.column(w));
                if let (Some(pe), Some(pos)) = (&self.positions, &inst.positions) {
                    v.extend_from_slice(pe.to_e1.row(pos[t].0));
                    v.extend_from_slice(pe.to_e2.row(pos[t].1));
                }
                v
            })
            .collect()
    }

    pub fn forward(&self, inst: &Instance) -> Result<ForwardPass, TrainError> {
        let inputs = self.inputs(inst);
        let trace = self.encoder.trace(&inputs)?;
        for (t, h) in trace.encoding.states.iter().enumerate() {
            if h.iter().any(|v| !v.is_finite()) {
                return Err(TrainError::NonFinite { step: t });
            }
        }
        let probs = classify(&trace.encoding.pooled, &self.classifier)?;
        Ok(ForwardPass { inputs, trace, probs })
    }

    pub fn predict_instance(&self, inst: &Instance) -> Result<usize, TrainError> {
        Ok(argmax(&self.forward(inst)?.probs))
    }

    pub fn predict(&self, ex: &Example) -> Result<usize, TrainError> {
        let mut inst = self.prepare_unlabeled(ex);
        inst.gold = 0;
        self.predict_instance(&inst)
    }

    /// Like [`prepare`](Self::prepare) but ignores the label.
    pub fn prepare_unlabeled(&self, ex: &Example) -> Instance {
        let mut probe = ex.clone();
        probe.label = crate::text::Label::undirected(self.schema.neutral());
        self.prepare(&probe).expect("neutral label is always in schema")
    }

    /// Predicted class indices, computed on all available cores.
    pub fn predict_all(&self, examples: &[Example]) -> Result<Vec<usize>, TrainError> {
        let instances: Vec<Instance> = examples.iter().map(|e| self.prepare_unlabeled(e)).collect();
        self.predict_instances(&instances)
    }

    pub fn predict_instances(&self, instances: &[Instance]) -> Result<Vec<usize>, TrainError> {
        let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(16);
        if threads <= 1 || instances.len() < 64 {
            return instances.iter().map(|i| self.predict_instance(i)).collect();
        }
        let chunk = instances.len().div_ceil(threads);
        std::thread::scope(|s| {
            let handles: Vec<_> = instances
                .chunks(chunk)
                .map(|part| {
                    s.spawn(move || {
                        part.iter()
                            .map(|i| self.predict_instance(i))
                            .collect::<Result<Vec<_>, _>>()
                    })
                })
                .collect();
            let mut out = Vec::with_capacity(instances.len());
            for h in handles {
                out.extend(h.join().expect("prediction thread panicked")?);
            }
            Ok(out)
        })
    }

    /// Named dense parameter blocks in a fixed order.
    pub fn blocks(&self) -> Vec<(&'static str, &[f64])> {
        let mut out: Vec<(&'static str, &[f64])> = vec![("words", self.words.matrix().as_slice())];
        if let Some(pe) = &self.positions {
            out.push(("pos.e1", pe.to_e1.as_slice()));
            out.push(("pos.e2", pe.to_e2.as_slice()));
        }
        match &self.encoder {
            Encoder::Rnn { params, .. } => {
                out.push(("fw.w", params.forward.w.as_slice()));
                out.push(("fw.u", params.forward.u.as_slice()));
                out.push(("fw.b", &params.forward.b));
                if let Some(bw) = &params.backward {
                    out.push(("bw.w", bw.w.as_slice()));
                    out.push(("bw.u", bw.u.as_slice()));
                    out.push(("bw.b", &bw.b));
                }
            }
            Encoder::Cnn(p) => {
                out.push(("conv.w", p.filter.as_slice()));
                out.push(("conv.b", &p.bias));
            }
        }
        out.push(("out.w", self.classifier.weights.as_slice()));
        out.push(("out.b", &self.classifier.bias));
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        let mut out: Vec<(&'static str, &mut [f64])> = vec![("words", self.words.matrix_mut().as_mut_slice())];
        if let Some(pe) = &mut self.positions {
            out.push(("pos.e1", pe.to_e1.as_mut_slice()));
            out.push(("pos.e2", pe.to_e2.as_mut_slice()));
        }
        match &mut self.encoder {
            Encoder::Rnn { params, .. } => {
                out.push(("fw.w", params.forward.w.as_mut_slice()));
                out.push(("fw.u", params.forward.u.as_mut_slice()));
                out.push(("fw.b", &mut params.forward.b));
                if let Some(bw) = &mut params.backward {
                    out.push(("bw.w", bw.w.as_mut_slice()));
                    out.push(("bw.u", bw.u.as_mut_slice()));
                    out.push(("bw.b", &mut bw.b));
                }
            }
            Encoder::Cnn(p) => {
                out.push(("conv.w", p.filter.as_mut_slice()));
                out.push(("conv.b", &mut p.bias));
            }
        }
        out.push(("out.w", self.classifier.weights.as_mut_slice()));
        out.push(("out.b", &mut self.classifier.bias));
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.blocks().iter().map(|(_, b)| b.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.blocks().into_iter().flat_map(|(_, b)| b.iter().copied()).collect()
    }

    pub fn set_flat(&mut self, theta: &[f64]) {
        let mut offset = 0;
        for (_, block) in self.blocks_mut() {
            block.copy_from_slice(&theta[offset..offset + block.len()]);
            offset += block.len();
        }
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Encoder-shaped gradient container.
#[derive(Debug, Clone, PartialEq)]
pub enum EncoderGrads {
    Rnn(RnnParams),
    Cnn(CnnParams),
}

/// Gradients of the loss for one example. Embedding gradients are sparse:
/// only rows touched by the sentence are present.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub words: BTreeMap<usize, Vec<f64>>,
    pub pos_e1: BTreeMap<usize, Vec<f64>>,
    pub pos_e2: BTreeMap<usize, Vec<f64>>,
    pub encoder: EncoderGrads,
    pub classifier: ClassifierParams,
}

impl Gradients {
    pub fn zeros_for(bundle: &ModelBundle) -> Self {
        let encoder = match &bundle.encoder {
            Encoder::Rnn { params, .. } => EncoderGrads::Rnn(params.zeros_like()),
            Encoder::Cnn(p) => EncoderGrads::Cnn(p.zeros_like()),
        };
        Gradients {
            words: BTreeMap::new(),
            pos_e1: BTreeMap::new(),
            pos_e2: BTreeMap::new(),
            encoder,
            classifier: bundle.classifier.zeros_like(),
        }
    }

    fn dense_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for v in self
            .words
            .values_mut()
            .chain(self.pos_e1.values_mut())
            .chain(self.pos_e2.values_mut())
        {
            out.push(v);
        }
        match &mut self.encoder {
            EncoderGrads::Rnn(p) => {
                out.push(p.forward.w.as_mut_slice());
                out.push(p.forward.u.as_mut_slice());
                out.push(&mut p.forward.b);
                if let Some(bw) = &mut p.backward {
                    out.push(bw.w.as_mut_slice());
                    out.push(bw.u.as_mut_slice());
                    out.push(&mut bw.b);
                }
            }
            EncoderGrads::Cnn(p) => {
                out.push(p.filter.as_mut_slice());
                out.push(&mut p.bias);
            }
        }
        out.push(self.classifier.weights.as_mut_slice());
        out.push(&mut self.classifier.bias);
        out
    }

    /// Clamps every entry to `[-limit, limit]`.
    pub fn clip(&mut self, limit: f64) {
        for s in self.dense_slices_mut() {
            for v in s.iter_mut() {
                *v = v.clamp(-limit, limit);
            }
        }
    }

    pub fn is_finite(&mut self) -> bool {
        self.dense_slices_mut().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }

    /// Dense blocks in the same order as [`ModelBundle::blocks`].
    pub fn dense_blocks(&self, bundle: &ModelBundle) -> Vec<(&'static str, Vec<f64>)> {
        let sparse = |rows: usize, cols: usize, map: &BTreeMap<usize, Vec<f64>>| {
            let mut dense = vec![0.0; rows * cols];
            for (&r, v) in map {
                dense[r * cols..(r + 1) * cols].copy_from_slice(v);
            }
            dense
        };
        let mut out = vec![("words", sparse(bundle.words.len(), bundle.words.dim(), &self.words))];
        if let Some(pe) = &bundle.positions {
            out.push(("pos.e1", sparse(pe.to_e1.rows(), pe.dim(), &self.pos_e1)));
            out.push(("pos.e2", sparse(pe.to_e2.rows(), pe.dim(), &self.pos_e2)));
        }
        match &self.encoder {
            EncoderGrads::Rnn(p) => {
                out.push(("fw.w", p.forward.w.as_slice().to_vec()));
                out.push(("fw.u", p.forward.u.as_slice().to_vec()));
                out.push(("fw.b", p.forward.b.clone()));
                if let Some(bw) = &p.backward {
                    out.push(("bw.w", bw.w.as_slice().to_vec()));
                    out.push(("bw.u", bw.u.as_slice().to_vec()));
                    out.push(("bw.b", bw.b.clone()));
                }
            }
            EncoderGrads::Cnn(p) => {
                out.push(("conv.w", p.filter.as_slice().to_vec()));
                out.push(("conv.b", p.bias.clone()));
            }
        }
        out.push(("out.w", self.classifier.weights.as_slice().to_vec()));
        out.push(("out.b", self.classifier.bias.clone()));
        out
    }
}

impl From<NumericError> for TrainError {
    fn from(e: NumericError) -> Self {
        TrainError::Numeric(e)
    }
}
