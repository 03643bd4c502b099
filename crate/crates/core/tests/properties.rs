use std::collections::HashSet;
use std::path::PathBuf;

use openattr_core::corpus::tokenize::{is_valid_token, tokenize};
use openattr_core::corpus::{make_splits, AuthorId, BookRef, BookRole, Split};
use openattr_core::features::{row_normalize, ColumnScaler, FeatureVector};
use openattr_core::metrics::{evaluate_labels, f1_score};
use openattr_core::openset::{decide_closed, decide_open, Label};
use openattr_core::vocab::{build_vocabulary_from_texts, NameFilterPolicy};
use openattr_core::LinearModel;
use proptest::prelude::*;

fn text_strategy() -> impl Strategy<Value = String> {
    let word = prop_oneof![
        "[a-z]{1,8}",
        "[A-Z][a-z]{0,6}",
        Just("don't".to_string()),
        Just("well-known".to_string()),
        Just("Mr.".to_string()),
        Just("I".to_string()),
    ];
    let sep = prop_oneof![
        Just(" "),
        Just(", "),
        Just(". "),
        Just("! "),
        Just("? "),
        Just(".\" "),
        Just(" -- "),
        Just("\n"),
        Just("'"),
    ];
    proptest::collection::vec((word, sep), 0..60).prop_map(|parts| parts.into_iter().map(|(w, s)| w + s).collect())
}

fn sparse(dim: usize) -> impl Strategy<Value = FeatureVector> {
    proptest::collection::btree_map(0..dim as u32, 1u32..100, 0..=dim.min(20)).prop_map(move |m| {
        let (i, v): (Vec<u32>, Vec<f64>) = m.into_iter().map(|(i, c)| (i, c as f64)).unzip();
        FeatureVector::new(i, v, dim).unwrap()
    })
}

fn label(n: u32) -> impl Strategy<Value = Label> {
    prop_oneof![4 => (0..n).prop_map(|i| Label::Author(AuthorId(i))), 1 => Just(Label::Unknown)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn tokens_follow_the_grammar(text in text_strategy()) {
        let t = tokenize(&text);
        for tok in t.tokens() {
            prop_assert!(is_valid_token(tok), "{tok:?}");
            prop_assert_eq!(tok.to_lowercase(), tok);
        }
        prop_assert!(t.sentences.iter().all(|s| !s.is_empty()));
        prop_assert_eq!(t.sentences.len(), t.capitalized.len());
    }

    #[test]
    fn retokenizing_tokens_is_stable(text in text_strategy()) {
        let t = tokenize(&text);
        let joined = t.tokens().collect::<Vec<_>>().join(" ");
        let again = tokenize(&joined);
        prop_assert_eq!(again.tokens().collect::<Vec<_>>(), t.tokens().collect::<Vec<_>>());
    }

    #[test]
    fn vocabulary_prefix_property(text in text_strategy(), k1 in 1usize..20, k2 in 1usize..20) {
        let t = tokenize(&text);
        let policy = NameFilterPolicy::default();
        let (small, large) = (k1.min(k2), k1.max(k2));
        if let Ok(big) = build_vocabulary_from_texts([&t], large, &policy) {
            let little = build_vocabulary_from_texts([&t], small, &policy).unwrap();
            prop_assert_eq!(little.words(), &big.words()[..small]);
        }
    }

    #[test]
    fn row_normalization(fv in (1usize..50).prop_flat_map(sparse)) {
        let n = row_normalize(&fv);
        prop_assert_eq!(n.indices(), fv.indices());
        if !fv.is_empty() {
            prop_assert_eq!(n.max_value(), Some(1.0));
        }
        prop_assert_eq!(row_normalize(&n), n);
    }

    #[test]
    fn scaled_training_rows_stay_in_unit_range(rows in (1usize..30).prop_flat_map(|d| proptest::collection::vec(sparse(d), 1..8))) {
        let dim = rows[0].dim();
        let scaler = ColumnScaler::fit(&rows, dim).unwrap();
        for r in &rows {
            let s = scaler.apply(r).unwrap();
            prop_assert_eq!(s.indices(), r.indices());
            prop_assert!(s.values().iter().all(|&v| v > 0.0 && v <= 1.0));
        }
    }

    #[test]
    fn decision_is_linear(w in proptest::collection::vec(-5.0f64..5.0, 6), b in -3.0f64..3.0,
                          x1 in sparse(6), x2 in sparse(6)) {
        let m = LinearModel { weights: w, bias: b, regularization: Default::default(), alpha: 1.0, seed: 0 };
        let sum: Vec<f64> = x1.to_dense().iter().zip(x2.to_dense()).map(|(a, c)| a + c).collect();
        let xs = FeatureVector::from_dense(&sum).unwrap();
        let lhs = m.decision(&xs).unwrap() + b;
        let rhs = m.decision(&x1).unwrap() + m.decision(&x2).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn open_rule_agrees_with_closed_rule(scores in proptest::collection::vec(-2.0f64..2.0, 1..10)) {
        let ids: Vec<AuthorId> = (0..scores.len() as u32).map(AuthorId).collect();
        let closed = decide_closed(&scores, &ids);
        match decide_open(&scores, &ids) {
            Label::Unknown => prop_assert!(scores.iter().all(|&s| s <= 0.0)),
            Label::Author(a) => prop_assert_eq!(a, closed),
        }
    }

    #[test]
    fn f1_bounds(p in 0.0f64..=1.0, r in 0.0f64..=1.0) {
        let f = f1_score(p, r);
        prop_assert!((f - f1_score(r, p)).abs() < 1e-15);
        prop_assert!(f <= p.max(r) + 1e-15);
        prop_assert!(f >= 0.0);
    }

    #[test]
    fn report_is_permutation_invariant(pairs in proptest::collection::vec((label(5), label(5)), 1..80),
                                       seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = pairs.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = evaluate_labels(&pairs).unwrap();
        prop_assert_eq!(&a, &evaluate_labels(&shuffled).unwrap());

        let tp: usize = a.per_author.iter().map(|s| s.scores.tp).sum();
        let fp: usize = a.per_author.iter().map(|s| s.scores.fp).sum();
        prop_assert_eq!(tp + fp + a.rejections, a.total);
    }

    #[test]
    fn perfect_predictor(truth in proptest::collection::vec(label(5), 1..60)) {
        let pairs: Vec<(Label, Label)> = truth.iter().map(|&t| (t, t)).collect();
        let r = evaluate_labels(&pairs).unwrap();
        if truth.iter().any(|t| t.author().is_some()) {
            prop_assert_eq!(r.macro_f1, 1.0);
        }
        if let Some(d) = r.detection {
            prop_assert_eq!(d.f1, 1.0);
        }
    }

    #[test]
    fn splits_are_disjoint_and_complete(sizes in proptest::collection::vec(1usize..500, 3..30), seed in any::<u64>()) {
        let books: Vec<BookRef> = sizes
            .iter()
            .enumerate()
            .map(|(i, _)| BookRef {
                id: i,
                author: AuthorId(0),
                title: format!("b{i}"),
                path: PathBuf::from(format!("b{i}.txt")),
                role: BookRole::Known,
            })
            .collect();
        let s = make_splits(&books, &sizes, seed).unwrap();
        let mut seen = HashSet::new();
        for split in Split::ALL {
            prop_assert!(!s.get(split).is_empty());
            for b in s.get(split) {
                prop_assert!(seen.insert(b.id));
            }
        }
        prop_assert_eq!(seen.len(), books.len());
        prop_assert_eq!(s, make_splits(&books, &sizes, seed).unwrap());
    }
}
