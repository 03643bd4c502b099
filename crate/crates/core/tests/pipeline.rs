use std::fs;

use openattr_core::corpus::{tokenize, Author, AuthorId};
use openattr_core::experiments::{
    run_experiment, run_grid_mismatched, run_top_words, train_from_config, CorpusSource, ExperimentConfig,
    PreparedCorpus, SyntheticSpec,
};
use openattr_core::features::{vectorize_tokens, ChunkSize, FeatureVector, Normalization};
use openattr_core::openset::{train_open_set, Document, Label, ModelConfig, OpenSetModel, TrainingSet};
use openattr_core::{Error, Vocabulary};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn author(i: u32) -> Author {
    Author {
        id: AuthorId(i),
        name: format!("writer {i}"),
    }
}

/// Documents whose words come only from `pool`.
fn documents(pool: &[&str], label: Label, book: usize, n: usize, vocab: &Vocabulary, rng: &mut ChaCha8Rng) -> Vec<Document> {
    (0..n)
        .map(|k| {
            let words: Vec<&str> = (0..80).map(|_| *pool.choose(rng).unwrap()).collect();
            Document {
                book_id: book,
                chunk_index: k,
                label,
                counts: vectorize_tokens(words.iter().copied(), vocab),
            }
        })
        .collect()
}

fn disjoint_setup() -> (Vec<Author>, Vocabulary, Vec<Document>, Vec<Document>) {
    let a = ["alpha", "beta", "gamma", "delta"];
    let b = ["one", "two", "three", "four"];
    let vocab = Vocabulary::from_words(a.iter().chain(&b).map(|w| w.to_string()).collect()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut train = documents(&a, Label::Author(AuthorId(0)), 0, 20, &vocab, &mut rng);
    train.extend(documents(&b, Label::Author(AuthorId(1)), 1, 20, &vocab, &mut rng));
    let mut val = documents(&a, Label::Author(AuthorId(0)), 2, 6, &vocab, &mut rng);
    val.extend(documents(&b, Label::Author(AuthorId(1)), 3, 6, &vocab, &mut rng));
    (vec![author(0), author(1)], vocab, train, val)
}

fn default_model_config() -> ModelConfig {
    ModelConfig {
        train: Default::default(),
        chunk_size: None,
    }
}

#[test]
fn disjoint_vocabularies_separate_perfectly() {
    let (authors, vocab, train, val) = disjoint_setup();
    let set = TrainingSet {
        authors: &authors,
        train: &train,
        validation: &val,
    };
    let model = train_open_set(&set, &vocab, Normalization::default(), &default_model_config()).unwrap();
    for t in &model.tuning {
        assert_eq!(t.validation_f1, 1.0, "author {}", t.author);
    }
    for d in &val {
        assert_eq!(model.predict_counts(&d.counts).unwrap().label, d.label);
    }
}

#[test]
fn retraining_is_byte_identical() {
    let (authors, vocab, train, val) = disjoint_setup();
    let set = TrainingSet {
        authors: &authors,
        train: &train,
        validation: &val,
    };
    let a = train_open_set(&set, &vocab, Normalization::default(), &default_model_config()).unwrap();
    let b = train_open_set(&set, &vocab, Normalization::default(), &default_model_config()).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn single_author_is_rejected() {
    let (authors, vocab, train, val) = disjoint_setup();
    let only: Vec<Document> = train.into_iter().filter(|d| d.label == Label::Author(AuthorId(0))).collect();
    let set = TrainingSet {
        authors: &authors[..1],
        train: &only,
        validation: &val,
    };
    let err = train_open_set(&set, &vocab, Normalization::default(), &default_model_config()).unwrap_err();
    assert!(matches!(err, Error::TooFewAuthors(1)));
}

#[test]
fn author_without_training_documents_is_rejected() {
    let (mut authors, vocab, train, val) = disjoint_setup();
    authors.push(author(7));
    let set = TrainingSet {
        authors: &authors,
        train: &train,
        validation: &val,
    };
    let err = train_open_set(&set, &vocab, Normalization::default(), &default_model_config()).unwrap_err();
    assert!(matches!(err, Error::NoTrainingDocuments(_)));
}

fn small_config() -> ExperimentConfig {
    let spec = SyntheticSpec {
        n_authors: 4,
        books_per_author: 5,
        sentences_per_book: 300,
        vocab_pool: 600,
        separation: 0.8,
        ood_authors: 2,
        ..SyntheticSpec::default()
    };
    let mut cfg = ExperimentConfig::new(CorpusSource::Synthetic(spec));
    cfg.features.vocab_size = 300;
    cfg.features.chunk_sentences = ChunkSize::Sentences(25);
    cfg
}

#[test]
fn attribution_of_free_text() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let prep = PreparedCorpus::from_config(&cfg, dir.path()).unwrap();
    let model = train_from_config(&cfg, &prep, false).unwrap();

    // A held-out test book of a known author comes back as that author.
    let book = prep
        .splits
        .test
        .iter()
        .find(|b| !b.role.is_ood())
        .expect("a known test book");
    let text = fs::read_to_string(&book.path).unwrap();
    let a = model.attribute_document(&text).unwrap();
    assert_eq!(a.prediction.label, Label::Author(book.author));
    assert_eq!(a.top.len(), 4);
    assert!(a.top.windows(2).all(|w| w[0].score >= w[1].score));

    // No vocabulary hits: every score is the model's bias.
    let g = model.attribute_document("Xqzv wkrrp, zzt.").unwrap();
    assert_eq!(g.vocabulary_hits, 0);
    for (s, m) in g.prediction.scores.iter().zip(&model.models) {
        assert_eq!(*s, m.bias);
    }
    if model.models.iter().all(|m| m.bias <= 0.0) {
        assert_eq!(g.prediction.label, Label::Unknown);
    }

    assert!(matches!(model.attribute_document("   \n\t "), Err(Error::EmptyDocument)));
}

#[test]
fn model_json_round_trip_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let prep = PreparedCorpus::from_config(&cfg, dir.path()).unwrap();
    let model = train_from_config(&cfg, &prep, true).unwrap();
    let json = model.to_json().unwrap();
    let back = OpenSetModel::from_json(&json).unwrap();
    assert_eq!(back, model);

    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    v["version"] = serde_json::json!(99);
    assert!(OpenSetModel::from_json(&v.to_string()).is_err());

    let wrong = FeatureVector::empty(model.dim() + 1);
    assert!(matches!(model.predict(&wrong), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn raising_biases_never_creates_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let prep = PreparedCorpus::from_config(&cfg, dir.path()).unwrap();
    let model = train_from_config(&cfg, &prep, true).unwrap();
    let mut raised = model.clone();
    for m in &mut raised.models {
        m.bias += 0.25;
    }
    let t = tokenize("Beba bebe, bebi bebo. Bebu beca!");
    let counts = vectorize_tokens(t.tokens(), &model.vocabulary);
    let before = model.predict_counts(&counts).unwrap();
    let after = raised.predict_counts(&counts).unwrap();
    if before.label != Label::Unknown {
        assert_ne!(after.label, Label::Unknown);
    }
}

#[test]
fn mismatched_grid_and_top_words() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.mismatched.train_length = ChunkSize::Sentences(25);
    cfg.mismatched.test_lengths = vec![ChunkSize::Sentences(10), ChunkSize::Sentences(25), ChunkSize::WholeBook];
    cfg.mismatched.vocab_sizes = vec![100, 300];
    cfg.top_words.doc_length = ChunkSize::Sentences(25);
    cfg.top_words.vocab_size = 300;
    cfg.top_words.n = 20;
    let prep = PreparedCorpus::from_config(&cfg, dir.path()).unwrap();

    let grid = run_grid_mismatched(&cfg, &prep).unwrap();
    assert!(grid.failures.is_empty(), "{:?}", grid.failures);
    assert_eq!(grid.cells.len(), 6);
    let whole = grid.book_accuracy.get(ChunkSize::WholeBook, 300).unwrap();
    assert!((0.0..=1.0).contains(&whole));

    let top = run_top_words(&cfg, &prep).unwrap();
    assert_eq!(top.authors.len(), 4);
    for a in &top.authors {
        assert!(a.words.len() <= 20);
        assert!(a.words.iter().all(|w| w.coefficient != 0.0));
        assert!(a.words.windows(2).all(|w| w[0].coefficient.abs() >= w[1].coefficient.abs()));
        assert!(a.l1_nonzero <= a.l2_nonzero, "{}: L1 {} vs L2 {}", a.name, a.l1_nonzero, a.l2_nonzero);
    }
}

#[test]
fn experiment_outputs_are_reproducible() {
    let mut cfg = small_config();
    cfg.grid.doc_lengths = vec![ChunkSize::Sentences(25)];
    cfg.grid.vocab_sizes = vec![100, 300, 100_000];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment("closed-grid", &cfg, a.path()).unwrap();
    run_experiment("closed-grid", &cfg, b.path()).unwrap();
    for name in ["closed-grid.csv", "closed-grid.json", "run.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let csv = fs::read_to_string(a.path().join("closed-grid.csv")).unwrap();
    assert!(csv.starts_with("doc_length,100,300,100000\n"));
    assert!(csv.trim_end().ends_with(",NA"), "{csv}");

    assert!(matches!(
        run_experiment("nonsense", &cfg, a.path()),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn one_author_experiment_fails() {
    let mut cfg = small_config();
    if let CorpusSource::Synthetic(spec) = &mut cfg.corpus {
        spec.n_authors = 1;
        spec.ood_authors = 0;
    }
    cfg.grid.doc_lengths = vec![ChunkSize::Sentences(25)];
    cfg.grid.vocab_sizes = vec![100];
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        run_experiment("closed-grid", &cfg, dir.path()),
        Err(Error::TooFewAuthors(1))
    ));
}
