//! Experiment harness: closed-set grids over document length and vocabulary
//! size, mismatched train/test lengths, the open-set controlled run, and
//! per-author top words.
//!
//! Every runner is a pure function of `(ExperimentConfig, PreparedCorpus)`.
//! [`run_experiment`] additionally writes its tables plus a `run.json` with
//! the resolved configuration into the output directory.

mod config;
mod prepare;
pub mod synthetic;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorId, Split};
use crate::error::{Error, Result};
use crate::features::ChunkSize;
use crate::metrics::{
    book_level_vote, evaluate_labels, false_negative_histogram, EvalReport, FALSE_NEGATIVE_BUCKETS,
};
use crate::openset::{decide_closed, train_open_set, Document, Label, ModelConfig, OpenSetModel, Prediction, TrainingSet};
use crate::svm::Regularization;
use crate::vocab::Vocabulary;

pub use config::{
    CorpusSource, ExperimentConfig, FeatureConfig, GridConfig, MismatchedConfig, OpenConfig, TopWordsConfig,
    CONFIG_VERSION,
};
pub use prepare::PreparedCorpus;
pub use synthetic::{make_synthetic_corpus, SyntheticSpec};

/// A table of scores indexed by document length (rows) and vocabulary
/// size (columns). Cells that could not be computed hold `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridTable {
    pub title: String,
    pub row_header: String,
    pub rows: Vec<ChunkSize>,
    pub columns: Vec<usize>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl GridTable {
    pub fn get(&self, row: ChunkSize, column: usize) -> Option<f64> {
        let r = self.rows.iter().position(|&x| x == row)?;
        let c = self.columns.iter().position(|&x| x == column)?;
        self.values[r][c]
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.row_header.clone();
        for c in &self.columns {
            let _ = write!(s, ",{c}");
        }
        s.push('\n');
        for (row, values) in self.rows.iter().zip(&self.values) {
            let _ = write!(s, "{row}");
            for v in values {
                match v {
                    Some(v) => {
                        let _ = write!(s, ",{v:.4}");
                    }
                    None => s.push_str(",NA"),
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n{:>10}", self.title, format!("{} \\ |V|", self.row_header));
        for c in &self.columns {
            let _ = write!(s, " {c:>7}");
        }
        s.push('\n');
        for (row, values) in self.rows.iter().zip(&self.values) {
            let _ = write!(s, "{:>10}", row.to_string());
            for v in values {
                match v {
                    Some(v) => {
                        let _ = write!(s, " {v:>7.3}");
                    }
                    None => {
                        let _ = write!(s, " {:>7}", "NA");
                    }
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Outcome of one train/evaluate cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub train_length: ChunkSize,
    pub test_length: ChunkSize,
    pub vocab_size: usize,
    pub macro_f1: f64,
    /// Share of test books whose majority-vote label is correct.
    pub book_accuracy: f64,
    pub test_documents: usize,
}

fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))
}

fn model_config(cfg: &ExperimentConfig, chunk: ChunkSize) -> ModelConfig {
    ModelConfig {
        train: cfg.train.clone(),
        chunk_size: Some(chunk),
    }
}

fn train_model(
    cfg: &ExperimentConfig,
    prep: &PreparedCorpus,
    vocab: &Vocabulary,
    train_length: ChunkSize,
    include_ood: bool,
    model_cfg: &ModelConfig,
) -> Result<OpenSetModel> {
    let authors = prep.known_authors();
    let train = prep.documents(Split::Train, train_length, vocab, false);
    let validation = prep.documents(Split::Validation, train_length, vocab, include_ood);
    train_open_set(
        &TrainingSet {
            authors: &authors,
            train: &train,
            validation: &validation,
        },
        vocab,
        cfg.features.normalization,
        model_cfg,
    )
}

/// Trains on the full pipeline and returns the model for `cfg.features`.
pub fn train_from_config(cfg: &ExperimentConfig, prep: &PreparedCorpus, include_ood: bool) -> Result<OpenSetModel> {
    let vocab = prep.vocabulary(cfg.features.vocab_size, &cfg.features.name_filter)?;
    let chunk = cfg.features.chunk_sentences;
    train_model(cfg, prep, &vocab, chunk, include_ood, &model_config(cfg, chunk))
}

/// Open-set predictions for `docs`, paired with their true labels.
pub fn predict_documents(model: &OpenSetModel, docs: &[Document]) -> Result<Vec<(Label, Prediction)>> {
    docs.par_iter()
        .map(|d| Ok((d.label, model.predict_counts(&d.counts)?)))
        .collect()
}

fn closed_predictions(model: &OpenSetModel, docs: &[Document]) -> Result<Vec<(Label, Prediction)>> {
    let ids = model.author_ids();
    docs.par_iter()
        .map(|d| {
            let scores = model.scores(&model.transform(&d.counts)?)?;
            let label = Label::Author(decide_closed(&scores, &ids));
            Ok((d.label, Prediction { label, scores }))
        })
        .collect()
}

/// Majority-vote label per test book, paired with the book's true label.
pub fn book_votes(docs: &[Document], predictions: &[(Label, Prediction)]) -> Vec<(usize, Label, Label)> {
    let mut by_book: BTreeMap<usize, (Label, Vec<Prediction>)> = BTreeMap::new();
    for (d, (truth, p)) in docs.iter().zip(predictions) {
        by_book.entry(d.book_id).or_insert_with(|| (*truth, Vec::new())).1.push(p.clone());
    }
    by_book
        .into_iter()
        .filter_map(|(book, (truth, preds))| book_level_vote(&preds).map(|l| (book, truth, l)))
        .collect()
}

fn accuracy(votes: &[(usize, Label, Label)]) -> f64 {
    if votes.is_empty() {
        return 0.0;
    }
    votes.iter().filter(|(_, t, p)| t == p).count() as f64 / votes.len() as f64
}

fn closed_cell(
    cfg: &ExperimentConfig,
    prep: &PreparedCorpus,
    vocab: &Vocabulary,
    train_length: ChunkSize,
    test_lengths: &[ChunkSize],
) -> Result<Vec<CellResult>> {
    let model = train_model(cfg, prep, vocab, train_length, false, &model_config(cfg, train_length))?;
    test_lengths
        .iter()
        .map(|&test_length| {
            let test = prep.documents(Split::Test, test_length, vocab, false);
            if test.is_empty() {
                return Err(Error::InvalidArgument(format!("no test documents at length {test_length}")));
            }
            let preds = closed_predictions(&model, &test)?;
            let labels: Vec<(Label, Label)> = preds.iter().map(|(t, p)| (*t, p.label)).collect();
            let report = evaluate_labels(&labels)?;
            Ok(CellResult {
                train_length,
                test_length,
                vocab_size: vocab.len(),
                macro_f1: report.macro_f1,
                book_accuracy: accuracy(&book_votes(&test, &preds)),
                test_documents: test.len(),
            })
        })
        .collect()
}

fn vocab_ladder(prep: &PreparedCorpus, cfg: &ExperimentConfig, sizes: &[usize]) -> BTreeMap<usize, Result<Vocabulary>> {
    // Smaller vocabularies are prefixes of larger ones, so rank once.
    let max = sizes.iter().copied().max().unwrap_or(0);
    let full = prep.vocabulary(max, &cfg.features.name_filter);
    let fallback = match &full {
        Ok(_) => None,
        Err(Error::VocabularyTooSmall { available, .. }) if *available > 0 => {
            prep.vocabulary(*available, &cfg.features.name_filter).ok()
        }
        Err(_) => None,
    };
    sizes
        .iter()
        .map(|&k| {
            let v = match (&full, &fallback) {
                (Ok(v), _) | (Err(_), Some(v)) => v.truncate(k),
                (Err(e), None) => Err(Error::InvalidArgument(e.to_string())),
            };
            (k, v)
        })
        .collect()
}

fn fill_table(
    title: &str,
    row_header: &str,
    rows: &[ChunkSize],
    columns: &[usize],
    cells: &[CellResult],
    metric: fn(&CellResult) -> f64,
    row_of: fn(&CellResult) -> ChunkSize,
) -> GridTable {
    let values = rows
        .iter()
        .map(|&r| {
            columns
                .iter()
                .map(|&c| cells.iter().find(|x| row_of(x) == r && x.vocab_size == c).map(metric))
                .collect()
        })
        .collect();
    GridTable {
        title: title.to_string(),
        row_header: row_header.to_string(),
        rows: rows.to_vec(),
        columns: columns.to_vec(),
        values,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub macro_f1: GridTable,
    pub book_accuracy: GridTable,
    pub cells: Vec<CellResult>,
    pub failures: Vec<String>,
}

/// Closed-set macro F1 for every (document length, vocabulary size) pair,
/// training and testing at the same length.
pub fn run_grid_closed(cfg: &ExperimentConfig, prep: &PreparedCorpus) -> Result<GridResult> {
    let grid = &cfg.grid;
    prepare::largest(&grid.vocab_sizes)?;
    if prep.known_authors().len() < 2 {
        return Err(Error::TooFewAuthors(prep.known_authors().len()));
    }
    let vocabs = vocab_ladder(prep, cfg, &grid.vocab_sizes);
    let jobs: Vec<(ChunkSize, usize)> = grid
        .doc_lengths
        .iter()
        .flat_map(|&d| grid.vocab_sizes.iter().map(move |&k| (d, k)))
        .collect();
    let outcomes: Vec<Result<Vec<CellResult>>> = worker_pool(cfg.workers)?.install(|| {
        jobs.par_iter()
            .map(|&(d, k)| match &vocabs[&k] {
                Ok(v) => closed_cell(cfg, prep, v, d, &[d]),
                Err(e) => Err(Error::InvalidArgument(e.to_string())),
            })
            .collect()
    });
    collect_grid(
        "closed-set macro F1",
        "doc_length",
        &grid.doc_lengths,
        &grid.vocab_sizes,
        &jobs,
        outcomes,
        |c| c.train_length,
    )
}

/// Trains at one fixed length and evaluates at several test lengths.
pub fn run_grid_mismatched(cfg: &ExperimentConfig, prep: &PreparedCorpus) -> Result<GridResult> {
    let m = &cfg.mismatched;
    prepare::largest(&m.vocab_sizes)?;
    if prep.known_authors().len() < 2 {
        return Err(Error::TooFewAuthors(prep.known_authors().len()));
    }
    let vocabs = vocab_ladder(prep, cfg, &m.vocab_sizes);
    let jobs: Vec<(ChunkSize, usize)> = m.vocab_sizes.iter().map(|&k| (m.train_length, k)).collect();
    let outcomes: Vec<Result<Vec<CellResult>>> = worker_pool(cfg.workers)?.install(|| {
        jobs.par_iter()
            .map(|&(d, k)| match &vocabs[&k] {
                Ok(v) => closed_cell(cfg, prep, v, d, &m.test_lengths),
                Err(e) => Err(Error::InvalidArgument(e.to_string())),
            })
            .collect()
    });
    collect_grid(
        &format!("macro F1, training length {}", m.train_length),
        "test_length",
        &m.test_lengths,
        &m.vocab_sizes,
        &jobs,
        outcomes,
        |c| c.test_length,
    )
}

fn collect_grid(
    title: &str,
    row_header: &str,
    rows: &[ChunkSize],
    columns: &[usize],
    jobs: &[(ChunkSize, usize)],
    outcomes: Vec<Result<Vec<CellResult>>>,
    row_of: fn(&CellResult) -> ChunkSize,
) -> Result<GridResult> {
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for (&(d, k), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(c) => cells.extend(c),
            Err(e) => {
                log::warn!("cell (length {d}, |V| {k}) failed: {e}");
                failures.push(format!("length {d}, |V| {k}: {e}"));
            }
        }
    }
    Ok(GridResult {
        macro_f1: fill_table(title, row_header, rows, columns, &cells, |c| c.macro_f1, row_of),
        book_accuracy: fill_table(
            &format!("{title}: book-level accuracy"),
            row_header,
            rows,
            columns,
            &cells,
            |c| c.book_accuracy,
            row_of,
        ),
        cells,
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenRun {
    pub vocab_size: usize,
    pub report: EvalReport,
    /// Known authors bucketed by how many OOD documents they absorbed:
    /// `0, 1, 2-5, 6-9, >=10`.
    pub false_negative_histogram: [usize; 5],
    pub ood_share: f64,
    pub test_documents: usize,
    /// Majority-vote accuracy over known test books and over OOD test books.
    pub known_book_accuracy: f64,
    pub ood_book_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenControlledResult {
    pub doc_length: ChunkSize,
    pub runs: Vec<OpenRun>,
}

impl OpenControlledResult {
    pub fn to_text(&self, names: &dyn Fn(AuthorId) -> String) -> String {
        let mut s = format!("open-set controlled run, document length {}\n\n", self.doc_length);
        let _ = writeln!(s, "{:>6} {:>9} {:>9} {:>9}   known authors", "|V|", "precision", "recall", "macro F1");
        for r in &self.runs {
            let _ = writeln!(
                s,
                "{:>6} {:>9.3} {:>9.3} {:>9.3}",
                r.vocab_size, r.report.macro_precision, r.report.macro_recall, r.report.macro_f1
            );
        }
        let _ = writeln!(s, "\n{:>6} {:>9} {:>9} {:>9}   OOD detection", "|V|", "precision", "recall", "F1");
        for r in &self.runs {
            match &r.report.detection {
                Some(d) => {
                    let _ = writeln!(s, "{:>6} {:>9.3} {:>9.3} {:>9.3}", r.vocab_size, d.precision, d.recall, d.f1);
                }
                None => {
                    let _ = writeln!(s, "{:>6} {:>9}", r.vocab_size, "N/A");
                }
            }
        }
        let _ = write!(s, "\n{:>6}", "FN");
        for b in FALSE_NEGATIVE_BUCKETS {
            let _ = write!(s, " {b:>5}");
        }
        s.push('\n');
        for r in &self.runs {
            let _ = write!(s, "{:>6}", r.vocab_size);
            for n in r.false_negative_histogram {
                let _ = write!(s, " {n:>5}");
            }
            s.push('\n');
        }
        for r in &self.runs {
            let _ = writeln!(
                s,
                "\n|V| = {}: OOD share of test set {:.3}; book-level accuracy known {:.3}, OOD {}",
                r.vocab_size,
                r.ood_share,
                r.known_book_accuracy,
                r.ood_book_accuracy.map_or("N/A".to_string(), |a| format!("{a:.3}"))
            );
            s.push_str(&r.report.to_table(names));
        }
        s
    }
}

/// Open-set run: OOD validation books join tuning as negatives, OOD test
/// books must come back UNKNOWN.
pub fn run_open_controlled(cfg: &ExperimentConfig, prep: &PreparedCorpus) -> Result<OpenControlledResult> {
    let open = &cfg.open;
    prepare::largest(&open.vocab_sizes)?;
    let vocabs = vocab_ladder(prep, cfg, &open.vocab_sizes);
    let runs = worker_pool(cfg.workers)?.install(|| {
        open.vocab_sizes
            .par_iter()
            .map(|&k| {
                let vocab = vocabs[&k].as_ref().map_err(|e| Error::InvalidArgument(e.to_string()))?;
                let model = train_model(cfg, prep, vocab, open.doc_length, true, &model_config(cfg, open.doc_length))?;
                let test = prep.documents(Split::Test, open.doc_length, vocab, true);
                if test.is_empty() {
                    return Err(Error::InvalidArgument("no test documents".into()));
                }
                let preds = predict_documents(&model, &test)?;
                let labels: Vec<(Label, Label)> = preds.iter().map(|(t, p)| (*t, p.label)).collect();
                let report = evaluate_labels(&labels)?;
                let mut misattributed = report.ood_misattributions();
                for a in model.author_ids() {
                    misattributed.entry(a).or_default();
                }
                let votes = book_votes(&test, &preds);
                let (ood_votes, known_votes): (Vec<_>, Vec<_>) =
                    votes.into_iter().partition(|(_, t, _)| *t == Label::Unknown);
                let ood = test.iter().filter(|d| d.label == Label::Unknown).count();
                Ok(OpenRun {
                    vocab_size: k,
                    false_negative_histogram: false_negative_histogram(&misattributed),
                    ood_share: ood as f64 / test.len() as f64,
                    test_documents: test.len(),
                    known_book_accuracy: accuracy(&known_votes),
                    ood_book_accuracy: (!ood_votes.is_empty()).then(|| accuracy(&ood_votes)),
                    report,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(OpenControlledResult {
        doc_length: open.doc_length,
        runs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordWeight {
    pub word: String,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthorTopWords {
    pub author: AuthorId,
    pub name: String,
    pub alpha: f64,
    pub validation_f1: f64,
    pub l1_nonzero: usize,
    pub l2_nonzero: usize,
    pub words: Vec<WordWeight>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopWordsResult {
    pub doc_length: ChunkSize,
    pub vocab_size: usize,
    pub authors: Vec<AuthorTopWords>,
}

impl TopWordsResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("author_id,author,rank,word,coefficient\n");
        for a in &self.authors {
            for (rank, w) in a.words.iter().enumerate() {
                let _ = writeln!(s, "{},{},{},{},{}", a.author, a.name, rank + 1, w.word, w.coefficient);
            }
        }
        s
    }
}

/// L1-penalized one-vs-all models; each author's largest-magnitude
/// non-zero coefficients. L2 non-zero counts on the same data are reported
/// alongside for comparison.
pub fn run_top_words(cfg: &ExperimentConfig, prep: &PreparedCorpus) -> Result<TopWordsResult> {
    let tw = &cfg.top_words;
    if tw.n == 0 {
        return Err(Error::InvalidArgument("top-words n must be at least 1".into()));
    }
    let vocab = prep.vocabulary(tw.vocab_size, &cfg.features.name_filter)?;
    let mut l1_cfg = model_config(cfg, tw.doc_length);
    l1_cfg.train.regularization = Regularization::L1;
    let mut l2_cfg = l1_cfg.clone();
    l2_cfg.train.regularization = Regularization::L2;

    let (l1, l2) = worker_pool(cfg.workers)?.install(|| {
        rayon::join(
            || train_model(cfg, prep, &vocab, tw.doc_length, false, &l1_cfg),
            || train_model(cfg, prep, &vocab, tw.doc_length, false, &l2_cfg),
        )
    });
    let (l1, l2) = (l1?, l2?);
    let authors = l1
        .authors
        .iter()
        .enumerate()
        .map(|(i, a)| AuthorTopWords {
            author: a.id,
            name: a.name.clone(),
            alpha: l1.models[i].alpha,
            validation_f1: l1.tuning[i].validation_f1,
            l1_nonzero: l1.models[i].nonzero_count(),
            l2_nonzero: l2.models[i].nonzero_count(),
            words: l1.models[i]
                .top_coefficients(tw.n, &vocab)
                .into_iter()
                .map(|(word, coefficient)| WordWeight { word, coefficient })
                .collect(),
        })
        .collect();
    Ok(TopWordsResult {
        doc_length: tw.doc_length,
        vocab_size: tw.vocab_size,
        authors,
    })
}

/// Names accepted by [`run_experiment`].
pub const EXPERIMENTS: &[&str] = &["closed-grid", "mismatched-grid", "open-controlled", "top-words", "synthetic"];

#[derive(Serialize)]
struct RunManifest<'a> {
    experiment: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    corpus: CorpusSummary,
    outputs: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub authors: usize,
    pub known_authors: usize,
    pub books: usize,
    pub train_books: usize,
    pub validation_books: usize,
    pub test_books: usize,
}

impl CorpusSummary {
    pub fn of(prep: &PreparedCorpus) -> Self {
        CorpusSummary {
            authors: prep.corpus.authors.len(),
            known_authors: prep.known_authors().len(),
            books: prep.books.len(),
            train_books: prep.splits.train.len(),
            validation_books: prep.splits.validation.len(),
            test_books: prep.splits.test.len(),
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str, outputs: &mut Vec<String>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    outputs.push(name.to_string());
    Ok(())
}

/// Runs the named experiment, writes its outputs under `out_dir` and
/// returns a human-readable summary.
pub fn run_experiment(name: &str, cfg: &ExperimentConfig, out_dir: &Path) -> Result<String> {
    if !EXPERIMENTS.contains(&name) {
        return Err(Error::InvalidArgument(format!(
            "unknown experiment {name:?}; expected one of {}",
            EXPERIMENTS.join(", ")
        )));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let prep = PreparedCorpus::from_config(cfg, out_dir)?;
    let names = |id: AuthorId| prep.corpus.author(id).name.clone();
    let mut outputs = Vec::new();

    let summary = match name {
        "closed-grid" | "mismatched-grid" => {
            let result = if name == "closed-grid" {
                run_grid_closed(cfg, &prep)?
            } else {
                run_grid_mismatched(cfg, &prep)?
            };
            write_file(out_dir, &format!("{name}.csv"), &result.macro_f1.to_csv(), &mut outputs)?;
            write_file(out_dir, &format!("{name}-books.csv"), &result.book_accuracy.to_csv(), &mut outputs)?;
            write_file(out_dir, &format!("{name}.json"), &serde_json::to_string_pretty(&result)?, &mut outputs)?;
            let mut text = result.macro_f1.to_text();
            text.push('\n');
            text.push_str(&result.book_accuracy.to_text());
            for f in &result.failures {
                let _ = writeln!(text, "failed cell: {f}");
            }
            text
        }
        "open-controlled" => {
            let result = run_open_controlled(cfg, &prep)?;
            write_file(out_dir, "open-controlled.json", &serde_json::to_string_pretty(&result)?, &mut outputs)?;
            let text = result.to_text(&names);
            write_file(out_dir, "open-controlled.txt", &text, &mut outputs)?;
            text
        }
        "top-words" => {
            let result = run_top_words(cfg, &prep)?;
            write_file(out_dir, "top-words.csv", &result.to_csv(), &mut outputs)?;
            write_file(out_dir, "top-words.json", &serde_json::to_string_pretty(&result)?, &mut outputs)?;
            let mut text = String::new();
            for a in &result.authors {
                let words: Vec<String> = a.words.iter().take(10).map(|w| format!("{}({:+.3})", w.word, w.coefficient)).collect();
                let _ = writeln!(
                    text,
                    "{}: {} non-zero (L2: {}), top: {}",
                    a.name,
                    a.l1_nonzero,
                    a.l2_nonzero,
                    words.join(" ")
                );
            }
            text
        }
        "synthetic" => format!(
            "synthetic corpus written to {}\n{}",
            out_dir.join("corpus").display(),
            serde_json::to_string_pretty(&CorpusSummary::of(&prep))?
        ),
        _ => unreachable!(),
    };

    let manifest = RunManifest {
        experiment: name,
        seed: cfg.seed,
        config: cfg,
        corpus: CorpusSummary::of(&prep),
        outputs: outputs.clone(),
    };
    fs::write(out_dir.join("run.json"), serde_json::to_string_pretty(&manifest)?)
        .map_err(|e| Error::io(out_dir.join("run.json"), e))?;
    Ok(summary)
}
