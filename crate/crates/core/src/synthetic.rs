//! Generated relation tasks with known structure, for testing what each
//! architecture can and cannot learn without the real corpora.
//!
//! The *keyword-position* task places two nominals `gap` tokens apart and a
//! keyword (`kw_alpha` or `kw_beta`) somewhere in the sentence. The label is
//! `Alpha(e1,e2)` / `Beta(e1,e2)` when the keyword sits between the nominals
//! and `Other` when it sits outside them. The keyword stays
//! [`KEYWORD_CLEARANCE`] tokens away from the nominals, the decoy and the
//! sentence edges, so a window-3 convolution sees only filler around it in
//! both cases and can only guess the position half of the decision.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::text::{Direction, Example, Label, RelationSchema, Span};

/// Minimum distance between the keyword and either nominal.
pub const KEYWORD_CLEARANCE: usize = 3;

pub const KEYWORDS: [(&str, &str); 2] = [("kw_alpha", "Alpha"), ("kw_beta", "Beta")];

#[derive(Debug, Clone, PartialEq)]
pub struct KeywordTaskConfig {
    /// Inclusive range of filler tokens between the two nominals.
    pub gap: (usize, usize),
    /// Inclusive range of filler tokens before the first nominal.
    pub prefix: (usize, usize),
    /// Inclusive range of filler tokens after the second nominal.
    pub suffix: (usize, usize),
    pub filler_vocab: usize,
    pub entity_vocab: usize,
    /// Unmarked entity words scattered among the fillers.
    pub distractors: usize,
    /// Adds one unmarked entity word so that, ignoring the markers, the
    /// keyword always lies between two entity words: beyond the keyword for
    /// outside examples, anywhere outside the nominals otherwise.
    pub decoy: bool,
}

impl Default for KeywordTaskConfig {
    fn default() -> Self {
        KeywordTaskConfig {
            gap: (8, 12),
            prefix: (9, 12),
            suffix: (9, 12),
            filler_vocab: 20,
            entity_vocab: 8,
            distractors: 0,
            decoy: true,
        }
    }
}

/// `Alpha`, `Beta` and the neutral `Other`.
pub fn keyword_schema() -> RelationSchema {
    RelationSchema::new(KEYWORDS.map(|(_, r)| r), "Other").expect("static schema")
}

fn filler<R: Rng>(rng: &mut R, n: usize) -> String {
    format!("w{}", rng.gen_range(0..n))
}

fn entity<R: Rng>(rng: &mut R, n: usize) -> String {
    format!("ent{}", rng.gen_range(0..n))
}

/// Generates `n` examples with balanced labels: half between, half outside.
pub fn keyword_task(n: usize, config: &KeywordTaskConfig, seed: u64) -> Vec<Example> {
    assert!(
        config.gap.0 >= 2 * KEYWORD_CLEARANCE - 1,
        "gap too small for keyword clearance"
    );
    assert!(
        config.prefix.0 >= 3 * KEYWORD_CLEARANCE && config.suffix.0 >= 3 * KEYWORD_CLEARANCE,
        "prefix and suffix too short for keyword and decoy"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for id in 0..n {
        let between = id % 2 == 0;
        let (kw, relation) = KEYWORDS[rng.gen_range(0..KEYWORDS.len())];
        let prefix = rng.gen_range(config.prefix.0..=config.prefix.1);
        let gap = rng.gen_range(config.gap.0..=config.gap.1);
        let suffix = rng.gen_range(config.suffix.0..=config.suffix.1);

        let mut tokens: Vec<String> = Vec::with_capacity(prefix + gap + suffix + 3);
        tokens.extend((0..prefix).map(|_| filler(&mut rng, config.filler_vocab)));
        let e1 = tokens.len();
        tokens.push(entity(&mut rng, config.entity_vocab));
        tokens.extend((0..gap).map(|_| filler(&mut rng, config.filler_vocab)));
        let e2 = tokens.len();
        tokens.push(entity(&mut rng, config.entity_vocab));
        tokens.extend((0..suffix).map(|_| filler(&mut rng, config.filler_vocab)));

        // Every special token keeps KEYWORD_CLEARANCE from the nominals, from
        // other special tokens, and (less one) from the sentence edges.
        let c = KEYWORD_CLEARANCE;
        let len = tokens.len();
        let (lo, hi) = (c - 1, len - c);
        let reach = if config.decoy { c } else { 0 };
        let slots: Vec<usize> = if between {
            (e1 + c..=e2 - c).collect()
        } else {
            (lo + reach..=e1 - c).chain(e2 + c..=hi - reach).collect()
        };
        let k = *slots.choose(&mut rng).expect("non-empty slot range");
        tokens[k] = kw.to_string();

        if config.decoy {
            let spots: Vec<usize> = if between {
                (lo..=e1 - c).chain(e2 + c..=hi).collect()
            } else if k < e1 {
                (lo..=k - c).collect()
            } else {
                (k + c..=hi).collect()
            };
            let d = *spots.choose(&mut rng).expect("non-empty decoy range");
            tokens[d] = entity(&mut rng, config.entity_vocab);
        }

        let mut free: Vec<usize> = (0..tokens.len())
            .filter(|&i| i != e1 && i != e2 && i != k && !tokens[i].starts_with("ent"))
            .collect();
        free.shuffle(&mut rng);
        for &i in free.iter().take(config.distractors) {
            tokens[i] = entity(&mut rng, config.entity_vocab);
        }

        let label = if between {
            Label::directed(relation, Direction::E1E2)
        } else {
            Label::undirected("Other")
        };
        out.push(Example::new(id as u64, tokens, Span::single(e1), Span::single(e2), label).expect("valid spans"));
    }
    out
}

/// A small task separable by a single cue word, used for overfitting checks.
///
/// Each sentence carries one of `cue_a` / `cue_b` / `cue_none`, which fixes
/// the label as `A(e1,e2)`, `B(e2,e1)` or `Other`.
pub fn separable_task(n: usize, seed: u64) -> Vec<Example> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cues = [
        ("cue_a", Label::directed("A", Direction::E1E2)),
        ("cue_b", Label::directed("B", Direction::E2E1)),
        ("cue_none", Label::undirected("Other")),
    ];
    (0..n)
        .map(|id| {
            let (cue, label) = &cues[id % cues.len()];
            let len = rng.gen_range(5..=8);
            let mut tokens: Vec<String> = (0..len).map(|_| filler(&mut rng, 10)).collect();
            let e1 = rng.gen_range(0..2);
            let e2 = len - 1 - rng.gen_range(0..2);
            tokens[e1] = entity(&mut rng, 4);
            tokens[e2] = entity(&mut rng, 4);
            let pos = rng.gen_range(e1 + 1..e2);
            tokens[pos] = cue.to_string();
            Example::new(id as u64, tokens, Span::single(e1), Span::single(e2), label.clone()).expect("valid spans")
        })
        .collect()
}
