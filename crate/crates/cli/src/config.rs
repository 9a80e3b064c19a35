use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use relclass::encoders::EncoderKind;
use relclass::text::AnnotationMode;
use relclass::training::default_hidden;
use serde::{Deserialize, Serialize};

/// Training settings as they may appear in a TOML file or on the command line.
/// Every field is optional so the two sources can be layered.
#[derive(Debug, Clone, Default, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    /// Sentence encoder: rnn or cnn.
    #[arg(long)]
    pub encoder: Option<String>,
    /// Nominal annotation: pi (position indicators), pf (position features) or plain.
    #[arg(long)]
    pub mode: Option<String>,
    /// Hidden layer size M.
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Convolution window (CNN only, odd).
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Learning rate after the warm-up epochs.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Learning rate during the warm-up epochs.
    #[arg(long = "lr-warm")]
    pub lr_warm: Option<f64>,
    #[arg(long = "warm-epochs")]
    pub warm_epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pretrained word vectors (word2vec text format).
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Word embedding size when no vector file is given.
    #[arg(long = "word-dim")]
    pub word_dim: Option<usize>,
    /// Size of each position-feature embedding (pf mode).
    #[arg(long = "position-dim")]
    pub position_dim: Option<usize>,
    /// Lowercase tokens before vocabulary lookup.
    #[arg(long)]
    pub lowercase: Option<bool>,
    /// Share of the training file held out for model selection when no dev file is given.
    #[arg(long = "dev-fraction")]
    pub dev_fraction: Option<f64>,
    /// Elementwise gradient clipping limit.
    #[arg(long)]
    pub clip: Option<f64>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Output directory for the model and logs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

macro_rules! layer {
    ($self:ident, $other:ident; $($field:ident),*) => {
        $( if $other.$field.is_some() { $self.$field = $other.$field.clone(); } )*
    };
}

impl TrainOverrides {
    /// Fields set in `other` win.
    pub fn layer(&mut self, other: &TrainOverrides) {
        layer!(self, other; encoder, mode, hidden, window, epochs, lr, lr_warm, warm_epochs, seed, vectors,
            word_dim, position_dim, lowercase, dev_fraction, clip, train, dev, out);
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Fully resolved training settings, echoed before every run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainSettings {
    pub train: PathBuf,
    pub dev: Option<PathBuf>,
    pub out: PathBuf,
    pub encoder: String,
    pub mode: String,
    pub hidden: usize,
    pub window: usize,
    pub epochs: usize,
    pub lr: f64,
    pub lr_warm: f64,
    pub warm_epochs: usize,
    pub seed: u64,
    pub vectors: Option<PathBuf>,
    pub word_dim: usize,
    pub position_dim: usize,
    pub lowercase: bool,
    pub dev_fraction: f64,
    pub clip: Option<f64>,
}

impl TrainSettings {
    pub fn resolve(o: TrainOverrides) -> Result<Self> {
        let encoder: EncoderKind = o
            .encoder
            .as_deref()
            .unwrap_or("rnn")
            .parse()
            .map_err(anyhow::Error::msg)?;
        let mode: AnnotationMode = o.mode.as_deref().unwrap_or("pi").parse().map_err(anyhow::Error::msg)?;
        let Some(train) = o.train else {
            bail!("no training file given (use --train or `train` in the config file)");
        };
        let Some(out) = o.out else {
            bail!("no output directory given (use --out or `out` in the config file)");
        };
        let settings = TrainSettings {
            train,
            dev: o.dev,
            out,
            encoder: encoder.to_string(),
            mode: mode.to_string(),
            hidden: o.hidden.unwrap_or(default_hidden(encoder, false)),
            window: o.window.unwrap_or(3),
            epochs: o.epochs.unwrap_or(20),
            lr: o.lr.unwrap_or(0.01),
            lr_warm: o.lr_warm.unwrap_or(0.1),
            warm_epochs: o.warm_epochs.unwrap_or(5),
            seed: o.seed.unwrap_or(1),
            vectors: o.vectors,
            word_dim: o.word_dim.unwrap_or(50),
            position_dim: o.position_dim.unwrap_or(relclass::embedding::DEFAULT_POSITION_DIM),
            lowercase: o.lowercase.unwrap_or(false),
            dev_fraction: o.dev_fraction.unwrap_or(0.1),
            clip: o.clip,
        };
        settings.check()?;
        Ok(settings)
    }

    fn check(&self) -> Result<()> {
        if self.hidden == 0 {
            bail!("--hidden must be positive");
        }
        if self.window.is_multiple_of(2) {
            bail!("--window must be odd, got {}", self.window);
        }
        if !(0.0..1.0).contains(&self.dev_fraction) {
            bail!("--dev-fraction must be in [0, 1), got {}", self.dev_fraction);
        }
        for path in [Some(&self.train), self.dev.as_ref(), self.vectors.as_ref()]
            .into_iter()
            .flatten()
        {
            if !path.is_file() {
                bail!("input file not found: {}", path.display());
            }
        }
        Ok(())
    }

    pub fn encoder_kind(&self) -> EncoderKind {
        self.encoder.parse().expect("validated in resolve")
    }

    pub fn annotation_mode(&self) -> AnnotationMode {
        self.mode.parse().expect("validated in resolve")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("settings serialize")
    }
}
