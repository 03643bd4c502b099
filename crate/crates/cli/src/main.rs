//! `openattr`: command-line front end for the attribution pipeline.
//!
//! Every command resolves its corpus and settings from `--config` (a
//! versioned TOML file) or from `--manifest` plus defaults, then applies
//! flag overrides. Failures print `{"error": {"kind", "message"}}` to stderr
//! and exit nonzero.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use openattr_core::corpus::Split;
use openattr_core::experiments::{
    run_experiment, train_from_config, CorpusSource, ExperimentConfig, PreparedCorpus, EXPERIMENTS,
};
use openattr_core::features::{write_feature_dump, ChunkSize, FeatureRecord, Normalization};
use openattr_core::metrics::evaluate;
use openattr_core::openset::{format_prediction_record, FeatureTransform, Label, OpenSetModel};
use openattr_core::vocab::NameFilterPolicy;
use openattr_core::Vocabulary;
use serde_json::json;

#[derive(Parser)]
#[command(name = "openattr", version, about = "Closed- and open-set authorship attribution")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Versioned experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Corpus manifest (`author,title,path,role`); used when no config is given.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Seed for splits and training; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for outputs.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Use raw counts instead of row max plus column max-abs scaling.
    #[arg(long, global = true)]
    raw_counts: bool,
    /// Append the full score vector to prediction records.
    #[arg(long, global = true)]
    scores: bool,
}

#[derive(Args)]
struct FeatureFlags {
    /// Document length in sentences, or `whole`.
    #[arg(long)]
    length: Option<ChunkSize>,
    /// Vocabulary size.
    #[arg(long)]
    size: Option<usize>,
    /// Keep capitalized tokens that look like names.
    #[arg(long)]
    no_name_filter: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Load and tokenize the corpus, split it, and write `splits.csv`.
    Ingest,
    /// Build the training vocabulary and write `vocabulary.json`.
    Vocab {
        #[command(flatten)]
        features: FeatureFlags,
    },
    /// Write one split's known-author documents as a sparse feature dump.
    Featurize {
        #[command(flatten)]
        features: FeatureFlags,
        /// Split to dump: train, validation or test.
        #[arg(long, default_value = "train")]
        split: String,
        /// Vocabulary file; built from the training split when absent.
        #[arg(long)]
        vocab: Option<PathBuf>,
    },
    /// Train the one-vs-all ensemble and write `model.json`.
    Train {
        #[command(flatten)]
        features: FeatureFlags,
        /// Use OOD validation books as negatives while tuning.
        #[arg(long)]
        open: bool,
    },
    /// Evaluate a model on a split, including its OOD books.
    Evaluate {
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        /// Closed-set rule: never predict UNKNOWN.
        #[arg(long)]
        closed: bool,
    },
    /// Attribute plain-text files, one prediction record per file.
    Attribute {
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
        /// Emit the full attribution report as JSON lines.
        #[arg(long)]
        json: bool,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// List each author's largest-magnitude coefficients.
    TopWords {
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Run a named experiment from the config.
    Experiment {
        /// One of closed-grid, mismatched-grid, open-controlled, top-words, synthetic.
        name: String,
    },
}

struct Failure {
    kind: String,
    message: String,
}

impl From<openattr_core::Error> for Failure {
    fn from(e: openattr_core::Error) -> Self {
        Failure {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            kind: "usage".into(),
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            kind: "io".into(),
            message: format!("{}: {e}", path.display()),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn resolve_config(common: &Common, features: Option<&FeatureFlags>) -> CliResult<ExperimentConfig> {
    let mut cfg = match (&common.config, &common.manifest) {
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, Some(m)) => ExperimentConfig::new(CorpusSource::Manifest(m.clone())),
        (Some(_), Some(_)) => return Err(Failure::usage("give either --config or --manifest, not both")),
        (None, None) => return Err(Failure::usage("a corpus is required: pass --config or --manifest")),
    };
    if let Some(seed) = common.seed {
        cfg = cfg.with_seed(seed);
    }
    if common.raw_counts {
        cfg.features.normalization = Normalization::RawCounts;
    }
    if let Some(f) = features {
        if let Some(length) = f.length {
            cfg.features.chunk_sentences = length;
        }
        if let Some(size) = f.size {
            cfg.features.vocab_size = size;
        }
        if f.no_name_filter {
            cfg.features.name_filter = NameFilterPolicy::disabled();
        }
    }
    Ok(cfg)
}

fn parse_split(s: &str) -> CliResult<Split> {
    Split::ALL
        .into_iter()
        .find(|x| x.as_str() == s)
        .ok_or_else(|| Failure::usage(format!("unknown split {s:?}; expected train, validation or test")))
}

fn create_out_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))
}

fn write_out(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn read_model(path: &Path) -> CliResult<OpenSetModel> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    Ok(OpenSetModel::from_json(&text)?)
}

fn prepare(common: &Common, cfg: &ExperimentConfig) -> CliResult<PreparedCorpus> {
    create_out_dir(&common.out_dir)?;
    Ok(PreparedCorpus::from_config(cfg, &common.out_dir)?)
}

fn ingest(common: &Common) -> CliResult {
    let cfg = resolve_config(common, None)?;
    let prep = prepare(common, &cfg)?;
    let mut out = String::from("book_id,author,title,role,split,sentences,tokens\n");
    let mut tally = serde_json::Map::new();
    for b in &prep.books {
        let split = prep.split_of(b.book.id).map_or("none", Split::as_str);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            b.book.id,
            csv_field(&prep.corpus.author(b.book.author).name),
            csv_field(&b.book.title),
            b.book.role.as_str(),
            split,
            b.text.sentence_count(),
            b.text.token_count()
        ));
        let n = tally.entry(split.to_string()).or_insert(json!(0));
        *n = json!(n.as_u64().unwrap_or(0) + 1);
    }
    write_out(&common.out_dir.join("splits.csv"), &out)?;
    println!(
        "{}",
        json!({
            "authors": prep.corpus.authors.len(),
            "known_authors": prep.known_authors().len(),
            "books": prep.books.len(),
            "books_per_split": tally,
            "sentences": prep.books.iter().map(|b| b.text.sentence_count()).sum::<usize>(),
            "seed": cfg.seed,
        })
    );
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn vocab(common: &Common, flags: &FeatureFlags) -> CliResult {
    let cfg = resolve_config(common, Some(flags))?;
    let prep = prepare(common, &cfg)?;
    let v = prep.vocabulary(cfg.features.vocab_size, &cfg.features.name_filter)?;
    write_out(&common.out_dir.join("vocabulary.json"), &v.to_json()?)?;
    println!("{}", json!({ "k": v.len(), "head": v.words().iter().take(10).collect::<Vec<_>>() }));
    Ok(())
}

fn featurize(common: &Common, flags: &FeatureFlags, split: &str, vocab_path: Option<&Path>) -> CliResult {
    let split = parse_split(split)?;
    let cfg = resolve_config(common, Some(flags))?;
    let prep = prepare(common, &cfg)?;
    let vocab = match vocab_path {
        Some(p) => Vocabulary::from_json(&fs::read_to_string(p).map_err(|e| Failure::io(p, e))?)?,
        None => prep.vocabulary(cfg.features.vocab_size, &cfg.features.name_filter)?,
    };
    let size = cfg.features.chunk_sentences;
    let train = prep.documents(Split::Train, size, &vocab, false);
    let counts: Vec<_> = train.iter().map(|d| &d.counts).collect();
    let transform = FeatureTransform::fit(cfg.features.normalization, &counts, vocab.len())?;
    let docs = if split == Split::Train {
        train
    } else {
        prep.documents(split, size, &vocab, false)
    };
    let records = docs
        .iter()
        .map(|d| {
            Ok(FeatureRecord {
                book_id: d.book_id,
                chunk_index: d.chunk_index,
                author: d.label.author().expect("known-author documents only"),
                features: transform.apply(&d.counts)?,
            })
        })
        .collect::<Result<Vec<_>, openattr_core::Error>>()?;
    let path = common.out_dir.join(format!("features-{}.txt", split.as_str()));
    let file = fs::File::create(&path).map_err(|e| Failure::io(&path, e))?;
    let mut w = BufWriter::new(file);
    write_feature_dump(&mut w, &records).map_err(|e| Failure::io(&path, e))?;
    w.flush().map_err(|e| Failure::io(&path, e))?;
    println!(
        "{}",
        json!({ "split": split.as_str(), "documents": records.len(), "dim": vocab.len(), "path": path })
    );
    Ok(())
}

fn train(common: &Common, flags: &FeatureFlags, open: bool) -> CliResult {
    let cfg = resolve_config(common, Some(flags))?;
    let prep = prepare(common, &cfg)?;
    let model = train_from_config(&cfg, &prep, open)?;
    let path = common.out_dir.join("model.json");
    write_out(&path, &model.to_json()?)?;
    let tuning: Vec<_> = model
        .tuning
        .iter()
        .map(|t| json!({ "author": model.label_name(Label::Author(t.author)), "alpha": t.alpha, "validation_f1": t.validation_f1 }))
        .collect();
    println!("{}", json!({ "model": path, "authors": model.authors.len(), "dim": model.dim(), "tuning": tuning }));
    Ok(())
}

fn evaluate_cmd(common: &Common, model_path: &Path, split: &str, closed: bool) -> CliResult {
    let split = parse_split(split)?;
    let model = read_model(model_path)?;
    let cfg = resolve_config(common, None)?;
    let prep = prepare(common, &cfg)?;
    let size = model.config.chunk_size.unwrap_or(cfg.features.chunk_sentences);
    let docs = prep.documents(split, size, &model.vocabulary, true);
    if docs.is_empty() {
        return Err(Failure::usage(format!("no {} documents at length {size}", split.as_str())));
    }
    let ids = model.author_ids();
    let mut pairs = Vec::with_capacity(docs.len());
    let mut records = String::from("doc_id,predicted_label,max_score,second_label,second_score");
    if common.scores {
        for id in &ids {
            records.push_str(&format!(",score_{id}"));
        }
    }
    records.push_str(",truth\n");
    for d in &docs {
        let mut p = model.predict_counts(&d.counts)?;
        if closed {
            p.label = Label::Author(model.predict_closed(&model.transform(&d.counts)?)?);
        }
        let id = format!("{}:{}", d.book_id, d.chunk_index);
        records.push_str(&format_prediction_record(&id, &p, &ids, common.scores));
        records.push_str(&format!(",{}\n", d.label));
        pairs.push((d.label, p));
    }
    let report = evaluate(&pairs)?;
    write_out(&common.out_dir.join("predictions.csv"), &records)?;
    write_out(&common.out_dir.join("evaluation.json"), &serde_json::to_string_pretty(&report).map_err(openattr_core::Error::from)?)?;
    print!("{}", report.to_table(&|a| model.label_name(Label::Author(a))));
    Ok(())
}

fn attribute(common: &Common, model_path: &Path, json_out: bool, files: &[PathBuf]) -> CliResult {
    let model = read_model(model_path)?;
    let ids = model.author_ids();
    for f in files {
        let text = fs::read_to_string(f).map_err(|e| Failure::io(f, e))?;
        let a = model.attribute_document(&text)?;
        if json_out {
            println!("{}", json!({ "doc_id": f, "attribution": a }));
        } else {
            println!(
                "{}",
                format_prediction_record(&f.display().to_string(), &a.prediction, &ids, common.scores)
            );
        }
    }
    Ok(())
}

fn top_words(model_path: &Path, n: usize) -> CliResult {
    if n == 0 {
        return Err(Failure::usage("--n must be at least 1"));
    }
    let model = read_model(model_path)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let write_all = |out: &mut std::io::StdoutLock| -> std::io::Result<()> {
        writeln!(out, "author,rank,word,coefficient")?;
        for (a, m) in model.authors.iter().zip(&model.models) {
            for (rank, (word, c)) in m.top_coefficients(n, &model.vocabulary).into_iter().enumerate() {
                writeln!(out, "{},{},{word},{c}", csv_field(&a.name), rank + 1)?;
            }
        }
        out.flush()
    };
    match write_all(&mut out) {
        // A closed pipe (`| head`) is not a failure.
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::io(Path::new("<stdout>"), e)),
        _ => Ok(()),
    }
}

fn experiment(common: &Common, name: &str) -> CliResult {
    if !EXPERIMENTS.contains(&name) {
        return Err(Failure::usage(format!(
            "unknown experiment {name:?}; expected one of {}",
            EXPERIMENTS.join(", ")
        )));
    }
    let cfg = resolve_config(common, None)?;
    let summary = run_experiment(name, &cfg, &common.out_dir)?;
    print!("{summary}");
    Ok(())
}

fn run(cli: &Cli) -> CliResult {
    let c = &cli.common;
    match &cli.command {
        Command::Ingest => ingest(c),
        Command::Vocab { features } => vocab(c, features),
        Command::Featurize { features, split, vocab } => featurize(c, features, split, vocab.as_deref()),
        Command::Train { features, open } => train(c, features, *open),
        Command::Evaluate { model, split, closed } => evaluate_cmd(c, model, split, *closed),
        Command::Attribute { model, json, files } => attribute(c, model, *json, files),
        Command::TopWords { model, n } => top_words(model, *n),
        Command::Experiment { name } => experiment(c, name),
    }
}

fn report(f: &Failure, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": f.kind, "message": f.message } }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            return report(&Failure::usage(first), 2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(&f, 1),
    }
}
