//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Criteria 6-8 need external data, located through environment variables:
//!
//! * `SEMEVAL_DIR`: directory holding `TRAIN_FILE.TXT` and `TEST_FILE_FULL.TXT`
//! * `TURIAN_VECTORS`: Turian 50-dimensional embeddings in word2vec text format
//! * `KBP_RAW`: raw annotated KBP corpus in the record grammar with undirected slot labels
//!
//! Pass a substring as the first argument to run matching criteria only, for
//! example `cargo test --test acceptance -- synthetic`.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relclass::embedding::PretrainedVectors;
use relclass::encoders::{max_pool, CnnParams, EncoderKind, Pooling, RnnParams};
use relclass::evaluation::{macro_f1, mean_neighbor_variance, semantic_profile};
use relclass::numeric::GRADCHECK_THRESHOLD;
use relclass::synthetic::{keyword_schema, keyword_task, separable_task, KeywordTaskConfig};
use relclass::text::{
    insert_position_indicators, parse_dataset, parse_raw_kbp, refine_kbp, strip_position_indicators, AnnotationMode,
    Example, Label, RefineConfig, RelationSchema, Span, TokenizeOptions, KBP37_RELATIONS,
};
use relclass::training::{check_gradients, default_hidden, split_holdout, train, ModelBundle, ModelSpec, TrainConfig};

use common::{brute_force_macro_f1, classes, random_example, scenarios, small_bundle};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::{Fail, Pass, Skip};

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

// ---------------------------------------------------------------------------
// 1. Gradient oracle

fn gradient_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let configs = 64;
    for case in 0..configs {
        let encoder = if case % 2 == 0 {
            EncoderKind::Rnn
        } else {
            EncoderKind::Cnn
        };
        let mode = if (case / 2) % 2 == 0 {
            AnnotationMode::Indicators
        } else {
            AnnotationMode::PositionFeatures
        };
        let relations = rng.gen_range(1..=4);
        let len = rng.gen_range(2..=6);
        let ex = random_example(&mut rng, len, relations);
        let bundle = small_bundle(&mut rng, encoder, mode, &ex, relations);
        let inst = bundle.prepare(&ex).expect("prepare");
        match check_gradients(&bundle, &inst, None) {
            Ok(report) => {
                worst = worst.max(report.max_relative_error);
                if !report.passes(GRADCHECK_THRESHOLD) {
                    failures.push(format!("case {case} ({encoder}/{mode}): {report}"));
                }
            }
            Err(e) => failures.push(format!("case {case}: {e}")),
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{configs} configs, worst relative error {worst:.2e}, limit {GRADCHECK_THRESHOLD:e} {}",
            failures.join("; ")
        ),
    )
}

// ---------------------------------------------------------------------------
// 2. Pooling and encoding invariants

const PROPERTY_CASES: u32 = 1000;

fn runner(seed: u8) -> TestRunner {
    let config = Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(
        config,
        proptest::test_runner::TestRng::from_seed(proptest::test_runner::RngAlgorithm::ChaCha, &[seed; 32]),
    )
}

fn sequence(max_len: usize, dim: usize, scale: f64) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-scale..scale, dim), 1..=max_len)
}

fn property_suite() -> Outcome {
    let mut failures = Vec::new();

    let pooling = runner(1).run(&sequence(12, 6, 5.0), |states| {
        let enc = max_pool(states.clone()).unwrap();
        for i in 0..6 {
            let m = states.iter().map(|h| h[i]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(enc.pooled[i], m);
            prop_assert_eq!(states[enc.pool_argmax[i]][i], m);
        }
        Ok(())
    });
    if let Err(e) = pooling {
        failures.push(format!("max pooling: {e}"));
    }

    let sentence = (2usize..15).prop_flat_map(|len| {
        (
            prop::collection::vec("[a-z]{1,6}", len),
            (0..len, 1..=3usize),
            (0..len, 1..=3usize),
        )
    });
    let round_trip = runner(2).run(&sentence, |(tokens, (a, la), (b, lb))| {
        let s1 = Span::new(a, (a + la - 1).min(tokens.len() - 1));
        let s2 = Span::new(b, (b + lb - 1).min(tokens.len() - 1));
        prop_assume!(!s1.overlaps(&s2));
        let (e1, e2) = if s1.start < s2.start { (s1, s2) } else { (s2, s1) };
        let ex = Example::new(0, tokens.clone(), e1, e2, Label::undirected("Other")).unwrap();
        let marked = insert_position_indicators(&ex);
        prop_assert_eq!(marked.len(), tokens.len() + 4);
        prop_assert_eq!(strip_position_indicators(&marked.tokens), tokens);
        Ok(())
    });
    if let Err(e) = round_trip {
        failures.push(format!("indicator round trip: {e}"));
    }

    let locality_case = (
        sequence(12, 3, 2.0),
        prop::sample::select(vec![1usize, 3, 5]),
        any::<u64>(),
    );
    let locality = runner(3).run(&locality_case, |(inputs, window, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = CnnParams::random(4, 3, window, &mut rng);
        let t = rng.gen_range(0..inputs.len());
        let k = window / 2;
        let outside: Vec<usize> = (0..inputs.len()).filter(|j| j.abs_diff(t) > k).collect();
        prop_assume!(!outside.is_empty());
        let j = outside[rng.gen_range(0..outside.len())];
        let mut edited = inputs.clone();
        edited[j] = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let before = params.states(&inputs).unwrap();
        let after = params.states(&edited).unwrap();
        prop_assert_eq!(
            before[t].iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            after[t].iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        Ok(())
    });
    if let Err(e) = locality {
        failures.push(format!("CNN locality: {e}"));
    }

    let range = runner(4).run(
        &(sequence(15, 4, 3.0), any::<u64>(), any::<bool>()),
        |(inputs, seed, bi)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rnn = RnnParams::random(5, 4, bi, &mut rng).run(&inputs).unwrap();
            let cnn = CnnParams::random(5, 4, 3, &mut rng).states(&inputs).unwrap();
            let per_direction = rnn.fw.iter().chain(rnn.bw.iter().flatten());
            for h in per_direction.chain(cnn.iter()) {
                prop_assert!(h.iter().all(|v| v.abs() < 1.0), "state out of range: {:?}", h);
            }
            Ok(())
        },
    );
    if let Err(e) = range {
        failures.push(format!("state range: {e}"));
    }

    verdict(
        failures.is_empty(),
        format!("4 properties x {PROPERTY_CASES} cases {}", failures.join("; ")),
    )
}

// ---------------------------------------------------------------------------
// 3. Scorer oracle

fn scorer_oracle() -> Outcome {
    let schema = RelationSchema::semeval();
    let families: Vec<&str> = schema.relations().iter().map(String::as_str).collect();
    let all = scenarios();
    let mut mismatches = Vec::new();
    for (name, gold, pred) in &all {
        let report = macro_f1(&classes(&schema, gold), &classes(&schema, pred), &schema).expect("score");
        let oracle = brute_force_macro_f1(gold, pred, &families);
        if report.macro_f1 != oracle {
            mismatches.push(format!("`{name}`: {} vs oracle {oracle}", report.macro_f1));
        }
    }
    verdict(
        all.len() >= 20 && mismatches.is_empty(),
        format!("{} scenarios, exact agreement {}", all.len(), mismatches.join("; ")),
    )
}

// ---------------------------------------------------------------------------
// 4. Overfit smoke test

fn overfit_smoke() -> Outcome {
    let data = separable_task(20, 77);
    let schema = RelationSchema::infer(data.iter().map(|e| &e.label)).expect("schema");
    let spec = ModelSpec {
        hidden: 50,
        ..ModelSpec::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bundle = ModelBundle::from_corpus(&spec, schema, &data, Some(10), None, &mut rng).expect("bundle");
    let config = TrainConfig {
        epochs: 200,
        track_train_accuracy: true,
        ..TrainConfig::default()
    };
    let outcome = match train(bundle, &data, &[], &config) {
        Ok(o) => o,
        Err(e) => return Fail(format!("training failed: {e}")),
    };
    let first = outcome
        .log
        .iter()
        .find(|e| e.train_accuracy == Some(100.0))
        .map(|e| e.epoch);
    let final_acc = outcome.log.last().and_then(|e| e.train_accuracy).unwrap_or(0.0);
    match first {
        Some(epoch) => Pass(format!(
            "20 examples, BiRNN+PI, default schedule: 100% first reached at epoch {epoch}, final {final_acc:.1}%"
        )),
        None => Fail(format!("never reached 100% in 200 epochs, final {final_acc:.1}%")),
    }
}

// ---------------------------------------------------------------------------
// 5 and 9. Synthetic long-distance task

const SYNTH_SEEDS: [u64; 3] = [1, 2, 3];
const SYNTH_TRAIN: usize = 1200;
const SYNTH_EVAL: usize = 300;

fn synth_task() -> KeywordTaskConfig {
    KeywordTaskConfig {
        prefix: (9, 22),
        suffix: (9, 22),
        ..KeywordTaskConfig::default()
    }
}

struct SynthRun {
    dev_f1: f64,
    test_accuracy: f64,
}

fn synth_variant(encoder: EncoderKind, mode: AnnotationMode, bidirectional: bool, pooling: Pooling) -> ModelSpec {
    ModelSpec {
        encoder,
        mode,
        hidden: 30,
        window: 3,
        bidirectional,
        pooling,
        ..ModelSpec::default()
    }
}

fn synth_run(spec: &ModelSpec, seed: u64) -> Result<SynthRun, String> {
    let cfg = synth_task();
    let train_set = keyword_task(SYNTH_TRAIN, &cfg, 1000 + seed);
    let dev = keyword_task(SYNTH_EVAL, &cfg, 2000 + seed);
    let test = keyword_task(SYNTH_EVAL, &cfg, 3000 + seed);
    let mut vocab = train_set.clone();
    vocab.extend(dev.iter().cloned());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bundle = ModelBundle::from_corpus(spec, keyword_schema(), &vocab, Some(10), None, &mut rng)
        .map_err(|e| e.to_string())?;
    let config = TrainConfig {
        epochs: 50,
        lr: 0.01,
        lr_warm: 0.01,
        seed,
        ..TrainConfig::default()
    };
    let out = train(bundle, &train_set, &dev, &config).map_err(|e| e.to_string())?;
    let dev_f1 = out.log[out.best_epoch - 1].dev_metric.ok_or("no dev metric")?;
    let preds = out.best.predict_all(&test).map_err(|e| e.to_string())?;
    let correct = test
        .iter()
        .zip(&preds)
        .filter(|(ex, &p)| out.best.schema.class_index(&ex.label).ok() == Some(p))
        .count();
    Ok(SynthRun {
        dev_f1,
        test_accuracy: 100.0 * correct as f64 / test.len() as f64,
    })
}

struct SynthResults {
    variants: Vec<(&'static str, Vec<SynthRun>)>,
}

impl SynthResults {
    fn run(names: &[&'static str]) -> Result<Self, String> {
        let mut variants = Vec::new();
        for &name in names {
            let spec = match name {
                "CNN+PI" => synth_variant(EncoderKind::Cnn, AnnotationMode::Indicators, false, Pooling::Max),
                "basic RNN" => synth_variant(EncoderKind::Rnn, AnnotationMode::Plain, false, Pooling::Last),
                "+max-pooling" => synth_variant(EncoderKind::Rnn, AnnotationMode::Plain, false, Pooling::Max),
                "+position indicators" => {
                    synth_variant(EncoderKind::Rnn, AnnotationMode::Indicators, false, Pooling::Max)
                }
                "+bidirection" => synth_variant(EncoderKind::Rnn, AnnotationMode::Indicators, true, Pooling::Max),
                other => unreachable!("{other}"),
            };
            let runs = SYNTH_SEEDS
                .iter()
                .map(|&s| synth_run(&spec, s))
                .collect::<Result<Vec<_>, _>>()?;
            variants.push((name, runs));
        }
        Ok(SynthResults { variants })
    }

    fn mean(&self, name: &str, f: impl Fn(&SynthRun) -> f64) -> f64 {
        let runs = &self.variants.iter().find(|(n, _)| *n == name).expect("variant ran").1;
        runs.iter().map(f).sum::<f64>() / runs.len() as f64
    }
}

fn long_distance(results: &Result<SynthResults, String>) -> Outcome {
    let r = match results {
        Ok(r) => r,
        Err(e) => return Fail(e.clone()),
    };
    let rnn = r.mean("+bidirection", |x| x.test_accuracy);
    let cnn = r.mean("CNN+PI", |x| x.test_accuracy);
    let gap = synth_task().gap;
    verdict(
        rnn - cnn >= 10.0,
        format!(
            "nominal gap {}-{} tokens, mean test accuracy over {} seeds: BiRNN+PI {rnn:.1} vs CNN+PI {cnn:.1} (margin {:.1}, need >= 10)",
            gap.0,
            gap.1,
            SYNTH_SEEDS.len(),
            rnn - cnn
        ),
    )
}

fn ablation_order(results: &Result<SynthResults, String>) -> Outcome {
    let r = match results {
        Ok(r) => r,
        Err(e) => return Fail(e.clone()),
    };
    let f = |n| r.mean(n, |x| x.dev_f1);
    let (basic, max, pi, bi) = (
        f("basic RNN"),
        f("+max-pooling"),
        f("+position indicators"),
        f("+bidirection"),
    );
    verdict(
        basic < max && max < pi && pi <= bi,
        format!("synthetic task, mean dev macro-F1: basic {basic:.1} < +max {max:.1} < +PI {pi:.1} <= +bi {bi:.1}"),
    )
}

// ---------------------------------------------------------------------------
// 6 and 8. SemEval-2010 Task 8

struct SemEval {
    train: Vec<Example>,
    test: Vec<Example>,
    vectors: Option<PretrainedVectors>,
}

fn load_semeval() -> Result<Option<SemEval>, String> {
    let Some(dir) = std::env::var_os("SEMEVAL_DIR").map(PathBuf::from) else {
        return Ok(None);
    };
    let schema = RelationSchema::semeval();
    let read = |name: &str| {
        let path = dir.join(name);
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        parse_dataset(&text, &schema, TokenizeOptions::default()).map_err(|e| format!("{}: {e}", path.display()))
    };
    let vectors = match std::env::var_os("TURIAN_VECTORS") {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.to_string_lossy()))?;
            Some(PretrainedVectors::parse(&text).map_err(|e| e.to_string())?)
        }
        None => None,
    };
    Ok(Some(SemEval {
        train: read("TRAIN_FILE.TXT")?,
        test: read("TEST_FILE_FULL.TXT")?,
        vectors,
    }))
}

/// Trains on the SemEval training file with a 10% dev holdout and returns the
/// selected model with its test macro-F1.
fn semeval_model(data: &SemEval, encoder: EncoderKind) -> Result<(ModelBundle, f64), String> {
    let spec = ModelSpec {
        encoder,
        hidden: default_hidden(encoder, false),
        ..ModelSpec::default()
    };
    let (train_set, dev) = split_holdout(data.train.clone(), 0.1, 1).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bundle = ModelBundle::from_corpus(
        &spec,
        RelationSchema::semeval(),
        &data.train,
        Some(50),
        data.vectors.as_ref(),
        &mut rng,
    )
    .map_err(|e| e.to_string())?;
    let out = train(bundle, &train_set, &dev, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let preds = out.best.predict_all(&data.test).map_err(|e| e.to_string())?;
    let gold = data
        .test
        .iter()
        .map(|e| out.best.schema.class_index(&e.label))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let f1 = macro_f1(&gold, &preds, &out.best.schema)
        .map_err(|e| e.to_string())?
        .macro_f1;
    Ok((out.best, f1))
}

struct SemEvalModels {
    rnn: (ModelBundle, f64),
    cnn: (ModelBundle, f64),
    with_vectors: bool,
}

fn semeval_reproduction(models: &Result<Option<SemEvalModels>, String>) -> Outcome {
    let m = match models {
        Err(e) => return Fail(e.clone()),
        Ok(None) => return Skip("SEMEVAL_DIR not set".into()),
        Ok(Some(m)) if !m.with_vectors => return Skip("TURIAN_VECTORS not set".into()),
        Ok(Some(m)) => m,
    };
    let (rnn, cnn) = (m.rnn.1, m.cnn.1);
    verdict(
        (77.0..=81.0).contains(&rnn) && (75.0..=79.0).contains(&cnn),
        format!("test macro-F1: RNN+PI {rnn:.1} (need 77.0-81.0), CNN+PI {cnn:.1} (need 75.0-79.0)"),
    )
}

fn corpus_variance(model: &ModelBundle, test: &[Example]) -> Result<f64, String> {
    let mut profiles = Vec::with_capacity(test.len());
    for ex in test {
        let inst = model.prepare(ex).map_err(|e| e.to_string())?;
        let enc = model.forward(&inst).map_err(|e| e.to_string())?.trace.encoding;
        profiles.push(semantic_profile(&enc));
    }
    Ok(mean_neighbor_variance(&profiles))
}

fn smoothness(models: &Result<Option<SemEvalModels>, String>, data: Option<&SemEval>) -> Outcome {
    let (m, data) = match (models, data) {
        (Err(e), _) => return Fail(e.clone()),
        (Ok(Some(m)), Some(d)) => (m, d),
        _ => return Skip("SEMEVAL_DIR not set".into()),
    };
    let rnn = corpus_variance(&m.rnn.0, &data.test);
    let cnn = corpus_variance(&m.cnn.0, &data.test);
    match (rnn, cnn) {
        (Ok(rnn), Ok(cnn)) => verdict(
            rnn < cnn,
            format!(
                "mean neighbour variance on {} test sentences: RNN {rnn:.5} < CNN {cnn:.5}",
                data.test.len()
            ),
        ),
        (Err(e), _) | (_, Err(e)) => Fail(e),
    }
}

// ---------------------------------------------------------------------------
// 7. KBP37 pipeline

fn kbp_pipeline() -> Outcome {
    let Some(path) = std::env::var_os("KBP_RAW") else {
        return Skip("KBP_RAW not set".into());
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => return Fail(format!("{}: {e}", path.to_string_lossy())),
    };
    let refined = match parse_raw_kbp(&text, TokenizeOptions::default())
        .map_err(|e| e.to_string())
        .and_then(|raw| refine_kbp(&raw, 1, &RefineConfig::default()).map_err(|e| e.to_string()))
    {
        Ok(r) => r,
        Err(e) => return Fail(e),
    };
    let mut got: Vec<&str> = refined.schema.relations().iter().map(String::as_str).collect();
    let mut want: Vec<&str> = KBP37_RELATIONS.to_vec();
    got.sort_unstable();
    want.sort_unstable();
    let schema_ok = got == want && refined.schema.num_classes() == 37;
    let sizes = [refined.train.len(), refined.dev.len(), refined.test.len()];
    let targets = [15917usize, 1724, 3405];
    let sizes_ok = sizes
        .iter()
        .zip(targets)
        .all(|(&n, t)| (n as f64 - t as f64).abs() <= 0.1 * t as f64);
    verdict(
        schema_ok && sizes_ok,
        format!(
            "{} classes (schema {}), splits {}/{}/{} vs 15917/1724/3405 +-10%",
            refined.schema.num_classes(),
            if got == want { "matches" } else { "differs" },
            sizes[0],
            sizes[1],
            sizes[2]
        ),
    )
}

// ---------------------------------------------------------------------------

const CRITERIA: [&str; 9] = [
    "1 gradient oracle",
    "2 pooling/encoding invariants",
    "3 scorer oracle",
    "4 overfit smoke",
    "5 long-distance synthetic",
    "6 SemEval reproduction",
    "7 KBP37 pipeline",
    "8 smoothness direction",
    "9 ablation ordering",
];

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for name in CRITERIA {
            println!("criterion {name}: test");
        }
        return ExitCode::SUCCESS;
    }
    let filter = args.iter().find(|a| !a.starts_with('-')).cloned();
    let selected = |name: &str| filter.as_deref().is_none_or(|f| name.contains(f));

    let synth_names: Vec<&'static str> = {
        let mut v = Vec::new();
        if selected(CRITERIA[4]) {
            v.extend(["CNN+PI", "+bidirection"]);
        }
        if selected(CRITERIA[8]) {
            v.extend(["basic RNN", "+max-pooling", "+position indicators"]);
            if !v.contains(&"+bidirection") {
                v.push("+bidirection");
            }
        }
        v
    };
    let mut synth: Option<Result<SynthResults, String>> = None;
    let mut semeval_data: Option<Result<Option<SemEval>, String>> = None;
    let mut semeval_models: Option<Result<Option<SemEvalModels>, String>> = None;

    let mut failed = 0;
    for (i, name) in CRITERIA.iter().enumerate() {
        if !selected(name) {
            continue;
        }
        let started = Instant::now();
        if matches!(i, 5 | 7) && semeval_models.is_none() {
            let data = semeval_data.get_or_insert_with(load_semeval);
            semeval_models = Some(match data {
                Err(e) => Err(e.clone()),
                Ok(None) => Ok(None),
                Ok(Some(d)) => semeval_model(d, EncoderKind::Rnn).and_then(|rnn| {
                    Ok(Some(SemEvalModels {
                        rnn,
                        cnn: semeval_model(d, EncoderKind::Cnn)?,
                        with_vectors: d.vectors.is_some(),
                    }))
                }),
            });
        }
        let outcome = match i {
            0 => gradient_oracle(),
            1 => property_suite(),
            2 => scorer_oracle(),
            3 => overfit_smoke(),
            4 => long_distance(synth.get_or_insert_with(|| SynthResults::run(&synth_names))),
            5 => semeval_reproduction(semeval_models.as_ref().expect("computed above")),
            6 => kbp_pipeline(),
            7 => {
                let data = semeval_data
                    .as_ref()
                    .and_then(|d| d.as_ref().ok())
                    .and_then(Option::as_ref);
                smoothness(semeval_models.as_ref().expect("computed above"), data)
            }
            _ => ablation_order(synth.get_or_insert_with(|| SynthResults::run(&synth_names))),
        };
        let secs = started.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("criterion {name}: {tag} ({}) [{secs:.1}s]", detail.trim_end());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
