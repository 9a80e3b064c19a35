//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use relclass::encoders::{EncoderKind, Pooling};
use relclass::text::{AnnotationMode, Direction, Example, Label, RelationSchema, Span};
use relclass::training::{ModelBundle, ModelSpec};

pub fn random_example(rng: &mut ChaCha8Rng, len: usize, relations: usize) -> Example {
    let tokens: Vec<String> = (0..len).map(|_| format!("t{}", rng.gen_range(0..6))).collect();
    let a = rng.gen_range(0..len);
    let mut b = rng.gen_range(0..len);
    while b == a {
        b = rng.gen_range(0..len);
    }
    let (a, b) = (a.min(b), a.max(b));
    let label = match rng.gen_range(0..2 * relations + 1) {
        0 => Label::undirected("Other"),
        k => {
            let dir = if k % 2 == 1 { Direction::E1E2 } else { Direction::E2E1 };
            Label::directed(format!("R{}", (k - 1) / 2), dir)
        }
    };
    Example::new(0, tokens, Span::single(a), Span::single(b), label).unwrap()
}

pub fn small_bundle(
    rng: &mut ChaCha8Rng,
    encoder: EncoderKind,
    mode: AnnotationMode,
    ex: &Example,
    relations: usize,
) -> ModelBundle {
    let schema = RelationSchema::new((0..relations).map(|r| format!("R{r}")), "Other").unwrap();
    let spec = ModelSpec {
        encoder,
        mode,
        hidden: rng.gen_range(2..=5),
        window: 3,
        position_dim: 2,
        max_distance: 4,
        bidirectional: true,
        pooling: Pooling::Max,
        lowercase: false,
    };
    let dim = rng.gen_range(1..=3);
    let mut b = ModelBundle::from_corpus(&spec, schema, std::slice::from_ref(ex), Some(dim), None, rng).unwrap();
    // Scale weights up so tanh units leave the linear regime and biases matter.
    let theta: Vec<f64> = b.to_flat().iter().map(|v| v * 2.0 + rng.gen_range(-0.1..0.1)).collect();
    b.set_flat(&theta);
    b
}

/// Scores label strings directly, one family at a time, without confusion
/// matrices or class indices.
pub fn brute_force_macro_f1(gold: &[&str], pred: &[&str], families: &[&str]) -> f64 {
    let family_of = |s: &str| s.split('(').next().unwrap().to_string();
    let mut f1s = Vec::new();
    for fam in families {
        let mut correct = 0usize;
        let mut predicted = 0usize;
        let mut in_gold = 0usize;
        for i in 0..gold.len() {
            if family_of(pred[i]) == *fam {
                predicted += 1;
            }
            if family_of(gold[i]) == *fam {
                in_gold += 1;
                if gold[i] == pred[i] {
                    correct += 1;
                }
            }
        }
        if predicted == 0 && in_gold == 0 {
            continue;
        }
        let p = if predicted == 0 {
            0.0
        } else {
            correct as f64 / predicted as f64
        };
        let r = if in_gold == 0 {
            0.0
        } else {
            correct as f64 / in_gold as f64
        };
        f1s.push(if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) });
    }
    if f1s.is_empty() {
        100.0
    } else {
        100.0 * f1s.iter().sum::<f64>() / f1s.len() as f64
    }
}

pub fn classes(schema: &RelationSchema, labels: &[&str]) -> Vec<usize> {
    labels
        .iter()
        .map(|l| schema.class_index(&l.parse::<Label>().unwrap()).unwrap())
        .collect()
}

pub const CE12: &str = "Cause-Effect(e1,e2)";
pub const CE21: &str = "Cause-Effect(e2,e1)";
pub const CW12: &str = "Component-Whole(e1,e2)";
pub const CW21: &str = "Component-Whole(e2,e1)";
pub const MT12: &str = "Message-Topic(e1,e2)";
pub const MT21: &str = "Message-Topic(e2,e1)";
pub const ED12: &str = "Entity-Destination(e1,e2)";
pub const IA21: &str = "Instrument-Agency(e2,e1)";
pub const O: &str = "Other";

pub fn scenarios() -> Vec<(&'static str, Vec<&'static str>, Vec<&'static str>)> {
    vec![
        ("perfect", vec![CE12, CW21, O, MT12], vec![CE12, CW21, O, MT12]),
        ("single flip", vec![CE12], vec![CE21]),
        ("flip among correct", vec![CE12, CE12, CE21], vec![CE12, CE21, CE21]),
        ("all flipped", vec![CE12, CW21, MT12], vec![CE21, CW12, MT21]),
        ("neutral predicted for relations", vec![CE12, MT21], vec![O, O]),
        ("relations predicted for neutral", vec![O, O, O], vec![CE12, CW21, O]),
        ("neutral only", vec![O, O], vec![O, O]),
        ("empty family predicted", vec![O, CE12], vec![MT12, CE12]),
        ("family never predicted", vec![CE12, MT12], vec![CE12, CE12]),
        ("cross-family swap", vec![CE12, CW12], vec![CW12, CE12]),
        (
            "direction and family errors",
            vec![CE12, CE21, CW12, CW21],
            vec![CE21, CW21, CW12, O],
        ),
        (
            "hand case of six",
            vec![CE12, CE21, CW12, O, MT12, O],
            vec![CE12, CE12, CW12, CW21, O, O],
        ),
        (
            "many families",
            vec![ED12, IA21, CE12, CW12, MT21],
            vec![ED12, IA21, CE21, O, MT21],
        ),
        (
            "one correct many wrong",
            vec![ED12, ED12, ED12, ED12],
            vec![ED12, O, O, O],
        ),
        ("over-prediction", vec![ED12, O, O, O], vec![ED12, ED12, ED12, ED12]),
        (
            "mixed neutral confusions",
            vec![O, CE12, O, CW21, O],
            vec![CE12, O, CW21, O, O],
        ),
        (
            "flip within two families",
            vec![CE12, CE21, CW12, CW21],
            vec![CE21, CE12, CW21, CW12],
        ),
        (
            "all predicted one class",
            vec![CE12, CW12, MT12, O],
            vec![CE12, CE12, CE12, CE12],
        ),
        ("single correct example", vec![IA21], vec![IA21]),
        ("single neutral miss", vec![O], vec![IA21]),
        ("half right", vec![MT12, MT21, MT12, MT21], vec![MT12, MT21, MT21, MT12]),
        ("gold neutral heavy", vec![O, O, O, O, CE12], vec![O, O, O, CE12, CE12]),
        (
            "three families partial",
            vec![CE12, CW21, MT12, CE12, CW21, MT12],
            vec![CE12, CW21, MT21, O, CW12, MT12],
        ),
        (
            "direction only errors",
            vec![ED12, ED12],
            vec!["Entity-Destination(e2,e1)", "Entity-Destination(e2,e1)"],
        ),
    ]
}
