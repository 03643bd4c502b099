//! Precision, recall and F1 per author, macro F1 over known authors, and
//! detection scores for the UNKNOWN label.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::AuthorId;
use crate::error::{Error, Result};
use crate::openset::{Label, Prediction};

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ClassScores {
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        ClassScores {
            precision,
            recall,
            f1: f1_score(precision, recall),
            support: tp + fn_,
            tp,
            fp,
            fn_,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthorScores {
    pub author: AuthorId,
    #[serde(flatten)]
    pub scores: ClassScores,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCell {
    pub truth: Label,
    pub predicted: Label,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_author: Vec<AuthorScores>,
    /// Unweighted mean F1 over known authors with non-zero support.
    pub macro_f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    /// Present only when the truth contains UNKNOWN documents.
    pub detection: Option<ClassScores>,
    pub total: usize,
    pub rejections: usize,
    pub confusion: Vec<ConfusionCell>,
}

impl EvalReport {
    pub fn author(&self, id: AuthorId) -> Option<&ClassScores> {
        self.per_author.iter().find(|a| a.author == id).map(|a| &a.scores)
    }

    /// Count of UNKNOWN documents attributed to each author; the detection
    /// false negatives charged to that author's classifier.
    pub fn ood_misattributions(&self) -> BTreeMap<AuthorId, usize> {
        let mut out: BTreeMap<AuthorId, usize> = self.per_author.iter().map(|a| (a.author, 0)).collect();
        for cell in &self.confusion {
            if let (Label::Unknown, Label::Author(a)) = (cell.truth, cell.predicted) {
                *out.entry(a).or_default() += cell.count;
            }
        }
        out
    }

    /// Human-readable table.
    pub fn to_table(&self, names: &dyn Fn(AuthorId) -> String) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<28} {:>9} {:>9} {:>9} {:>8}", "author", "precision", "recall", "f1", "support");
        for a in &self.per_author {
            let c = &a.scores;
            let _ = writeln!(
                s,
                "{:<28} {:>9.3} {:>9.3} {:>9.3} {:>8}",
                names(a.author),
                c.precision,
                c.recall,
                c.f1,
                c.support
            );
        }
        let _ = writeln!(
            s,
            "{:<28} {:>9.3} {:>9.3} {:>9.3} {:>8}",
            "macro (known)", self.macro_precision, self.macro_recall, self.macro_f1, self.total
        );
        match &self.detection {
            Some(d) => {
                let _ = writeln!(
                    s,
                    "{:<28} {:>9.3} {:>9.3} {:>9.3} {:>8}",
                    "detection (unknown)", d.precision, d.recall, d.f1, d.support
                );
            }
            None => {
                let _ = writeln!(s, "{:<28} {:>9}", "detection (unknown)", "N/A");
            }
        }
        s
    }
}

/// Scores `(truth, prediction)` pairs. UNKNOWN is the detection positive
/// class; every other label is a known author.
pub fn evaluate(pairs: &[(Label, Prediction)]) -> Result<EvalReport> {
    let labels: Vec<(Label, Label)> = pairs.iter().map(|(t, p)| (*t, p.label)).collect();
    evaluate_labels(&labels)
}

pub fn evaluate_labels(pairs: &[(Label, Label)]) -> Result<EvalReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate zero predictions".into()));
    }
    let mut confusion: BTreeMap<(Label, Label), usize> = BTreeMap::new();
    for &(t, p) in pairs {
        *confusion.entry((t, p)).or_default() += 1;
    }

    let authors: BTreeSet<AuthorId> = pairs
        .iter()
        .flat_map(|&(t, p)| [t, p])
        .filter_map(Label::author)
        .collect();

    let counts_for = |label: Label| {
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for (&(t, p), &n) in &confusion {
            match (t == label, p == label) {
                (true, true) => tp += n,
                (false, true) => fp += n,
                (true, false) => fn_ += n,
                (false, false) => {}
            }
        }
        ClassScores::from_counts(tp, fp, fn_)
    };

    let per_author: Vec<AuthorScores> = authors
        .iter()
        .map(|&a| AuthorScores {
            author: a,
            scores: counts_for(Label::Author(a)),
        })
        .collect();
    let supported: Vec<&ClassScores> = per_author.iter().map(|a| &a.scores).filter(|c| c.support > 0).collect();
    let mean = |f: fn(&ClassScores) -> f64| {
        if supported.is_empty() {
            0.0
        } else {
            supported.iter().map(|c| f(c)).sum::<f64>() / supported.len() as f64
        }
    };

    let detection = pairs
        .iter()
        .any(|(t, _)| *t == Label::Unknown)
        .then(|| counts_for(Label::Unknown));

    Ok(EvalReport {
        macro_f1: mean(|c| c.f1),
        macro_precision: mean(|c| c.precision),
        macro_recall: mean(|c| c.recall),
        per_author,
        detection,
        total: pairs.len(),
        rejections: pairs.iter().filter(|(_, p)| *p == Label::Unknown).count(),
        confusion: confusion
            .into_iter()
            .map(|((truth, predicted), count)| ConfusionCell { truth, predicted, count })
            .collect(),
    })
}

/// Majority label over a book's chunk predictions. A tie goes to the tied
/// label whose chunks have the larger summed winning score, then to the
/// lowest author id, with UNKNOWN last.
pub fn book_level_vote(chunks: &[Prediction]) -> Option<Label> {
    let mut tally: BTreeMap<Label, (usize, f64)> = BTreeMap::new();
    for p in chunks {
        let e = tally.entry(p.label).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += p.max_score();
    }
    tally
        .into_iter()
        .reduce(|best, next| {
            let (bn, bs) = best.1;
            let (nn, ns) = next.1;
            if nn > bn || (nn == bn && ns > bs) {
                next
            } else {
                best
            }
        })
        .map(|(label, _)| label)
}

/// Buckets per-author counts into `0, 1, 2-5, 6-9, >=10`.
pub fn false_negative_histogram(counts: &BTreeMap<AuthorId, usize>) -> [usize; 5] {
    let mut hist = [0; 5];
    for &n in counts.values() {
        let bucket = match n {
            0 => 0,
            1 => 1,
            2..=5 => 2,
            6..=9 => 3,
            _ => 4,
        };
        hist[bucket] += 1;
    }
    hist
}

pub const FALSE_NEGATIVE_BUCKETS: [&str; 5] = ["0", "1", "2-5", "6-9", ">=10"];

#[cfg(test)]
mod tests {
    use super::*;

    fn a(i: u32) -> Label {
        Label::Author(AuthorId(i))
    }

    fn pred(label: Label, scores: Vec<f64>) -> Prediction {
        Prediction { label, scores }
    }

    #[test]
    fn f1_arithmetic() {
        assert_eq!(f1_score(0.0, 0.0), 0.0);
        assert_eq!(f1_score(1.0, 1.0), 1.0);
        assert!((f1_score(0.34, 0.81) - 0.48).abs() < 0.005);
    }

    #[test]
    fn macro_mean_of_two_authors() {
        // Author 0: perfect. Author 1: tp 1, fn 1 -> F1 2/3.
        let pairs = [(a(0), a(0)), (a(1), a(1)), (a(1), a(2))];
        let r = evaluate_labels(&pairs).unwrap();
        assert_eq!(r.author(AuthorId(0)).unwrap().f1, 1.0);
        assert!((r.author(AuthorId(1)).unwrap().f1 - 2.0 / 3.0).abs() < 1e-12);
        // Author 2 has no support and is left out of the mean.
        assert_eq!(r.author(AuthorId(2)).unwrap().support, 0);
        assert!((r.macro_f1 - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);

        let r = evaluate_labels(&[(a(0), a(0)), (a(1), a(1)), (a(1), a(0)), (a(0), a(0))]).unwrap();
        // Author 0: p 2/3 r 1 f1 0.8; author 1: p 1 r 0.5 f1 2/3.
        assert!((r.macro_f1 - (0.8 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
        assert!(r.detection.is_none());
    }

    #[test]
    fn detection_counts() {
        let mut pairs = Vec::new();
        pairs.extend(std::iter::repeat_n((Label::Unknown, Label::Unknown), 294));
        pairs.extend(std::iter::repeat_n((Label::Unknown, a(0)), 71));
        pairs.extend(std::iter::repeat_n((a(0), Label::Unknown), 569));
        pairs.extend(std::iter::repeat_n((a(0), a(0)), 1000));
        let r = evaluate_labels(&pairs).unwrap();
        let d = r.detection.unwrap();
        assert!((d.recall - 0.805).abs() < 0.0005);
        assert!((d.precision - 0.34).abs() < 0.005);
        assert!((d.f1 - 0.48).abs() < 0.005);
        assert_eq!(r.rejections, 294 + 569);
        assert_eq!(r.ood_misattributions()[&AuthorId(0)], 71);
    }

    #[test]
    fn empty_input() {
        assert!(evaluate_labels(&[]).is_err());
    }

    #[test]
    fn voting() {
        let p = |l, s| pred(l, vec![s]);
        assert_eq!(book_level_vote(&[p(a(0), 1.0), p(a(0), 1.0), p(a(1), 5.0)]), Some(a(0)));
        assert_eq!(book_level_vote(&[p(a(0), 1.2), p(a(1), 0.8)]), Some(a(0)));
        assert_eq!(book_level_vote(&[p(a(0), 0.8), p(a(1), 1.2)]), Some(a(1)));
        assert_eq!(
            book_level_vote(&[p(Label::Unknown, -0.1), p(Label::Unknown, -0.2), p(a(0), 0.3)]),
            Some(Label::Unknown)
        );
        assert_eq!(book_level_vote(&[p(a(3), 0.5), p(a(1), 0.5)]), Some(a(1)));
        assert_eq!(book_level_vote(&[]), None);
    }

    #[test]
    fn histogram_buckets() {
        let counts: BTreeMap<AuthorId, usize> = [0, 0, 1, 2, 5, 6, 9, 10, 16]
            .iter()
            .enumerate()
            .map(|(i, &n)| (AuthorId(i as u32), n))
            .collect();
        assert_eq!(false_negative_histogram(&counts), [2, 1, 2, 2, 2]);
    }

    #[test]
    fn table_renders() {
        let r = evaluate_labels(&[(a(0), a(0)), (Label::Unknown, a(0))]).unwrap();
        let t = r.to_table(&|id| format!("author{id}"));
        assert!(t.contains("author0"));
        assert!(t.contains("detection"));
        let r = evaluate_labels(&[(a(0), a(0))]).unwrap();
        assert!(r.to_table(&|id| id.to_string()).contains("N/A"));
    }
}
