use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relclass::embedding::PretrainedVectors;
use relclass::encoders::{EncoderKind, Pooling};
use relclass::evaluation::{f1_by_bucket, macro_f1_with, mean_neighbor_variance, semantic_profile, ScoreOptions};
use relclass::text::{
    parse_dataset_inferring_schema, parse_raw_kbp, refine_kbp, write_dataset, AnnotationMode, ContextBuckets,
    Direction, Example, Label, RefineConfig, RelationSchema, Span, TokenizeOptions,
};
use relclass::training::{
    check_gradients, default_hidden, read_model_file, split_holdout, train_with, write_model_file, ModelBundle,
    ModelSpec, TrainConfig,
};
use relclass::GradCheckReport;

use crate::config::{TrainOverrides, TrainSettings};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_examples(path: &Path) -> Result<(Vec<Example>, RelationSchema)> {
    parse_dataset_inferring_schema(&read(path)?, TokenizeOptions::default())
        .with_context(|| format!("parsing {}", path.display()))
}

/// The standard SemEval or KBP37 schema when every label fits it, so that
/// class indices are stable across files; otherwise the inferred one.
fn pick_schema(inferred: &RelationSchema) -> RelationSchema {
    for known in [RelationSchema::semeval(), RelationSchema::kbp37()] {
        let (extra, _) = inferred.diff(&known);
        if extra.is_empty() && inferred.neutral() == known.neutral() {
            return known;
        }
    }
    inferred.clone()
}

fn merge_schemas(a: &RelationSchema, b: &RelationSchema) -> Result<RelationSchema> {
    if a.neutral() != b.neutral() {
        bail!(
            "neutral class differs between files: `{}` vs `{}`",
            a.neutral(),
            b.neutral()
        );
    }
    let mut relations: Vec<String> = a.relations().to_vec();
    for r in b.relations() {
        if !relations.contains(r) {
            relations.push(r.clone());
        }
    }
    relations.sort();
    Ok(RelationSchema::new(relations, a.neutral())?)
}

pub fn run_train(config_path: Option<&Path>, flags: TrainOverrides) -> Result<ExitCode> {
    let mut layered = match config_path {
        Some(p) => TrainOverrides::from_file(p)?,
        None => TrainOverrides::default(),
    };
    layered.layer(&flags);
    let hidden_given = layered.hidden.is_some();
    let mut settings = TrainSettings::resolve(layered)?;

    let (train_all, train_schema) = load_examples(&settings.train)?;
    ensure!(
        !train_all.is_empty(),
        "training file {} has no examples",
        settings.train.display()
    );
    let (train_set, dev_set, schema) = match &settings.dev {
        Some(path) => {
            let (dev, dev_schema) = load_examples(path)?;
            let schema = pick_schema(&merge_schemas(&train_schema, &dev_schema)?);
            (train_all, dev, schema)
        }
        None => {
            let schema = pick_schema(&train_schema);
            let (t, d) = split_holdout(train_all, settings.dev_fraction, settings.seed)?;
            (t, d, schema)
        }
    };
    ensure!(!train_set.is_empty(), "no training examples left after the dev holdout");
    if !hidden_given && schema == RelationSchema::kbp37() {
        settings.hidden = default_hidden(settings.encoder_kind(), true);
    }
    println!("# resolved configuration\n{}", settings.to_toml());
    println!(
        "# {} training / {} dev examples, {} classes",
        train_set.len(),
        dev_set.len(),
        schema.num_classes()
    );

    let vectors = match &settings.vectors {
        Some(p) => Some(PretrainedVectors::parse(&read(p)?).with_context(|| format!("parsing {}", p.display()))?),
        None => None,
    };
    let spec = ModelSpec {
        encoder: settings.encoder_kind(),
        mode: settings.annotation_mode(),
        hidden: settings.hidden,
        window: settings.window,
        position_dim: settings.position_dim,
        lowercase: settings.lowercase,
        ..ModelSpec::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut vocab_corpus = train_set.clone();
    vocab_corpus.extend(dev_set.iter().cloned());
    let bundle = ModelBundle::from_corpus(
        &spec,
        schema,
        &vocab_corpus,
        Some(settings.word_dim),
        vectors.as_ref(),
        &mut rng,
    )?;

    let config = TrainConfig {
        epochs: settings.epochs,
        lr: settings.lr,
        lr_warm: settings.lr_warm,
        warm_epochs: settings.warm_epochs,
        seed: settings.seed,
        clip: settings.clip,
        ..TrainConfig::default()
    };
    fs::create_dir_all(&settings.out).with_context(|| format!("creating {}", settings.out.display()))?;
    let mut log = String::new();
    let outcome = train_with(bundle, &train_set, &dev_set, &config, |e| {
        let dev = e.dev_metric.map_or("n/a".to_string(), |d| format!("{d:.2}"));
        let line = format!("epoch {}\tlr {}\tloss {:.6}\tdev {}", e.epoch, e.lr, e.mean_loss, dev);
        println!("{line}");
        log.push_str(&line);
        log.push('\n');
    })?;

    let mut curve = String::from("epoch\tdev_macro_f1\n");
    for e in &outcome.log {
        let _ = writeln!(
            curve,
            "{}\t{}",
            e.epoch,
            e.dev_metric.map_or("nan".into(), |d| d.to_string())
        );
    }
    let _ = writeln!(log, "best epoch {}", outcome.best_epoch);
    write(&settings.out.join("config.toml"), &settings.to_toml())?;
    write(&settings.out.join("train.log"), &log)?;
    write(&settings.out.join("dev_curve.tsv"), &curve)?;
    write_model_file(&outcome.best, &settings.out.join("model.txt"))?;
    println!(
        "best epoch {}; model written to {}",
        outcome.best_epoch,
        settings.out.join("model.txt").display()
    );
    Ok(ExitCode::SUCCESS)
}

/// Parses a labelled file against a model's schema, reporting any class the
/// model does not know.
fn load_for_model(path: &Path, bundle: &ModelBundle) -> Result<Vec<Example>> {
    let (examples, schema) = load_examples(path)?;
    ensure!(!examples.is_empty(), "{} has no examples", path.display());
    let unknown: Vec<String> = examples
        .iter()
        .filter(|e| bundle.schema.class_index(&e.label).is_err())
        .map(|e| e.label.to_string())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if !unknown.is_empty() {
        let (only_model, _) = bundle.schema.diff(&schema);
        bail!(
            "schema mismatch: classes in {} but not in the model: [{}]; model classes absent from the file: [{}]",
            path.display(),
            unknown.join(", "),
            only_model.join(", ")
        );
    }
    Ok(examples)
}

pub fn run_evaluate(
    model: &Path,
    test: &Path,
    buckets: Option<Vec<usize>>,
    include_neutral: bool,
    out: Option<&Path>,
) -> Result<ExitCode> {
    for p in [model, test] {
        ensure!(p.is_file(), "input file not found: {}", p.display());
    }
    let bundle = read_model_file(model).with_context(|| format!("loading {}", model.display()))?;
    let examples = load_for_model(test, &bundle)?;
    let preds = bundle.predict_all(&examples)?;
    let gold = examples
        .iter()
        .map(|e| bundle.schema.class_index(&e.label))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = macro_f1_with(&gold, &preds, &bundle.schema, ScoreOptions { include_neutral })?;
    if let Some(cuts) = buckets {
        let buckets = if cuts.is_empty() {
            ContextBuckets::table()
        } else {
            ContextBuckets::new(&cuts)?
        };
        report.buckets = f1_by_bucket(&examples, &preds, &buckets, &bundle.schema)?;
    }
    let text = report.render();
    print!("{text}");
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write(&dir.join("report.txt"), &text)?;
        let mut lines = String::new();
        for (ex, p) in examples.iter().zip(&preds) {
            let _ = writeln!(lines, "{}\t{}", ex.id, bundle.schema.label(*p)?);
        }
        write(&dir.join("predictions.txt"), &lines)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn run_refine_kbp(raw: &Path, seed: u64, out: &Path, min_per_direction: usize) -> Result<ExitCode> {
    ensure!(raw.is_file(), "input file not found: {}", raw.display());
    let records =
        parse_raw_kbp(&read(raw)?, TokenizeOptions::default()).with_context(|| format!("parsing {}", raw.display()))?;
    let config = RefineConfig {
        min_per_direction,
        ..RefineConfig::default()
    };
    let refined = refine_kbp(&records, seed, &config)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write(&out.join("train.txt"), &write_dataset(&refined.train))?;
    write(&out.join("dev.txt"), &write_dataset(&refined.dev))?;
    write(&out.join("test.txt"), &write_dataset(&refined.test))?;
    let sizes = (refined.train.len(), refined.dev.len(), refined.test.len());
    let stats = refined.stats.render(&refined.schema, sizes);
    write(&out.join("stats.txt"), &stats)?;
    print!("{stats}");
    Ok(ExitCode::SUCCESS)
}

pub fn run_analyze(models: &[std::path::PathBuf], test: &Path, out: &Path) -> Result<ExitCode> {
    for p in models.iter().map(|p| p.as_path()).chain([test]) {
        ensure!(p.is_file(), "input file not found: {}", p.display());
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut summary = String::from("model\tencoder\tsentences\tmean_neighbor_variance\n");
    for (k, path) in models.iter().enumerate() {
        let bundle = read_model_file(path).with_context(|| format!("loading {}", path.display()))?;
        let examples = load_for_model(test, &bundle)?;
        let mut profiles = Vec::with_capacity(examples.len());
        let mut series = String::new();
        for ex in &examples {
            let inst = bundle.prepare(ex)?;
            let encoding = bundle.forward(&inst)?.trace.encoding;
            let profile = semantic_profile(&encoding);
            let _ = writeln!(series, "# {}", ex.id);
            series.push_str(&profile.render(&bundle.annotate(ex).tokens));
            profiles.push(profile);
        }
        let kind = bundle.encoder.kind();
        write(&out.join(format!("profiles-{k}-{kind}.tsv")), &series)?;
        let variance = mean_neighbor_variance(&profiles);
        let _ = writeln!(summary, "{}\t{kind}\t{}\t{variance:.6}", path.display(), profiles.len());
        println!("{} ({kind}): mean neighbor variance {variance:.6}", path.display());
    }
    write(&out.join("summary.tsv"), &summary)?;
    Ok(ExitCode::SUCCESS)
}

pub struct GradcheckArgs {
    pub encoder: String,
    pub mode: String,
    pub hidden: usize,
    pub word_dim: usize,
    pub length: usize,
    pub relations: usize,
    pub cases: usize,
    pub seed: u64,
}

fn random_example(rng: &mut ChaCha8Rng, len: usize, relations: usize) -> Result<Example> {
    let tokens: Vec<String> = (0..len).map(|_| format!("t{}", rng.gen_range(0..len))).collect();
    let a = rng.gen_range(0..len - 1);
    let b = rng.gen_range(a + 1..len);
    let class = rng.gen_range(0..2 * relations + 1);
    let label = if class == 0 {
        Label::undirected("Other")
    } else {
        let dir = if class % 2 == 1 {
            Direction::E1E2
        } else {
            Direction::E2E1
        };
        Label::directed(format!("R{}", (class - 1) / 2), dir)
    };
    Ok(Example::new(0, tokens, Span::single(a), Span::single(b), label)?)
}

pub fn run_gradcheck(args: &GradcheckArgs) -> Result<ExitCode> {
    let encoder: EncoderKind = args.encoder.parse().map_err(anyhow::Error::msg)?;
    let mode: AnnotationMode = args.mode.parse().map_err(anyhow::Error::msg)?;
    ensure!(args.length >= 2, "--length must be at least 2");
    ensure!(
        args.relations >= 1 && args.hidden >= 1 && args.word_dim >= 1,
        "sizes must be positive"
    );
    let schema = RelationSchema::new((0..args.relations).map(|r| format!("R{r}")), "Other")?;
    let spec = ModelSpec {
        encoder,
        mode,
        hidden: args.hidden,
        position_dim: 2,
        max_distance: args.length as i32,
        pooling: Pooling::Max,
        ..ModelSpec::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut worst: Option<GradCheckReport> = None;
    for _ in 0..args.cases.max(1) {
        let ex = random_example(&mut rng, args.length, args.relations)?;
        let bundle = ModelBundle::from_corpus(
            &spec,
            schema.clone(),
            std::slice::from_ref(&ex),
            Some(args.word_dim),
            None,
            &mut rng,
        )?;
        let report = check_gradients(&bundle, &bundle.prepare(&ex)?, None)?;
        if worst
            .as_ref()
            .is_none_or(|w| report.max_relative_error > w.max_relative_error)
        {
            worst = Some(report);
        }
    }
    let worst = worst.expect("at least one case");
    println!("{worst}");
    println!("max relative error: {:e}", worst.max_relative_error);
    if worst.passes(relclass::numeric::GRADCHECK_THRESHOLD) {
        println!("gradient check passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("gradient check FAILED");
        Ok(ExitCode::FAILURE)
    }
}
