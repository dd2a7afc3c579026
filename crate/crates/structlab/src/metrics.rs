//! BIO span decoding, overlap-based precision/recall/F1, and paired
//! significance testing.
//!
//! Binary overlap counts a predicted span as correct when it overlaps any
//! gold span of the same category; proportional overlap grants each span
//! partial credit for its best-matching counterpart, proportional to the
//! overlapping token fraction. Corpus-level scores pool counts and credits
//! over all sentences before dividing (micro-average).
//!
//! All functions are pure and safe for concurrent use.

use std::fmt::Write as _;

use crate::corpus::{LabelScheme, Sentence};
use crate::error::{Error, Result};

/// A decoded labeled span over half-open token indices `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Span {
    pub category: usize,
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(category: usize, start: usize, end: usize) -> Self {
        assert!(start < end, "span must cover at least one token");
        Span {
            category,
            start,
            end,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false // start < end holds by construction
    }

    /// Number of tokens shared with another span.
    pub fn overlap(&self, other: &Span) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }
}

/// Precision, recall, and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }
}

/// Decodes a BIO label sequence into maximal spans. B always opens a span;
/// I continues a span of the same category and otherwise opens one
/// (lenient decoding); O closes any open span.
pub fn decode_bio(labels: &[usize], scheme: &LabelScheme) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut open: Option<Span> = None;
    for (t, &label) in labels.iter().enumerate() {
        match scheme.class_of(label) {
            None => {
                if let Some(span) = open.take() {
                    spans.push(span);
                }
            }
            Some(category) => {
                let continues = !scheme.is_begin(label)
                    && open.map(|s| s.category == category).unwrap_or(false);
                if continues {
                    let span = open.as_mut().expect("open span checked above");
                    span.end = t + 1;
                } else {
                    if let Some(span) = open.take() {
                        spans.push(span);
                    }
                    open = Some(Span::new(category, t, t + 1));
                }
            }
        }
    }
    if let Some(span) = open {
        spans.push(span);
    }
    spans
}

/// Raw match counts/credits, poolable across sentences and categories.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OverlapCounts {
    pub pred_credit: f64,
    pub pred_total: f64,
    pub gold_credit: f64,
    pub gold_total: f64,
}

impl OverlapCounts {
    pub fn add(&mut self, other: &OverlapCounts) {
        self.pred_credit += other.pred_credit;
        self.pred_total += other.pred_total;
        self.gold_credit += other.gold_credit;
        self.gold_total += other.gold_total;
    }

    /// Precision and recall with 0/0 resolved to 0.
    pub fn prf(&self) -> Prf {
        let precision = if self.pred_total > 0.0 {
            self.pred_credit / self.pred_total
        } else {
            0.0
        };
        let recall = if self.gold_total > 0.0 {
            self.gold_credit / self.gold_total
        } else {
            0.0
        };
        Prf::from_pr(precision, recall)
    }
}

// Credits are summed over a sorted copy so results are bitwise independent
// of span ordering within a set.
fn sorted(spans: &[Span]) -> Vec<Span> {
    let mut out = spans.to_vec();
    out.sort_unstable();
    out
}

/// Binary-overlap counts for spans of one category within one sentence:
/// a span earns full credit if it overlaps any counterpart at all.
pub fn binary_overlap_counts(pred: &[Span], gold: &[Span]) -> OverlapCounts {
    let (pred, gold) = (sorted(pred), sorted(gold));
    let hit = |s: &Span, others: &[Span]| -> f64 {
        if others.iter().any(|o| s.overlap(o) > 0) {
            1.0
        } else {
            0.0
        }
    };
    OverlapCounts {
        pred_credit: pred.iter().map(|p| hit(p, &gold)).sum(),
        pred_total: pred.len() as f64,
        gold_credit: gold.iter().map(|g| hit(g, &pred)).sum(),
        gold_total: gold.len() as f64,
    }
}

/// Proportional-overlap counts for spans of one category within one
/// sentence: a span earns its best counterpart's overlapping token
/// fraction.
pub fn proportional_overlap_counts(pred: &[Span], gold: &[Span]) -> OverlapCounts {
    let (pred, gold) = (sorted(pred), sorted(gold));
    let credit = |s: &Span, others: &[Span]| -> f64 {
        others
            .iter()
            .map(|o| s.overlap(o) as f64 / s.len() as f64)
            .fold(0.0, f64::max)
    };
    OverlapCounts {
        pred_credit: pred.iter().map(|p| credit(p, &gold)).sum(),
        pred_total: pred.len() as f64,
        gold_credit: gold.iter().map(|g| credit(g, &pred)).sum(),
        gold_total: gold.len() as f64,
    }
}

/// Binary overlap P/R/F over one pooled span set pair.
pub fn binary_overlap(pred: &[Span], gold: &[Span]) -> Prf {
    binary_overlap_counts(pred, gold).prf()
}

/// Proportional overlap P/R/F over one pooled span set pair.
pub fn proportional_overlap(pred: &[Span], gold: &[Span]) -> Prf {
    proportional_overlap_counts(pred, gold).prf()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapMetric {
    Binary,
    Proportional,
}

impl OverlapMetric {
    pub fn name(&self) -> &'static str {
        match self {
            OverlapMetric::Binary => "binary",
            OverlapMetric::Proportional => "proportional",
        }
    }

    pub fn counts(&self, pred: &[Span], gold: &[Span]) -> OverlapCounts {
        match self {
            OverlapMetric::Binary => binary_overlap_counts(pred, gold),
            OverlapMetric::Proportional => proportional_overlap_counts(pred, gold),
        }
    }
}

/// Corpus-level evaluation: decodes both label sequences per sentence and
/// pools counts per (category, metric) over all sentences. The final entry
/// per metric, category index `usize::MAX`, pools over all categories.
pub struct CorpusEvaluation {
    /// (category index or usize::MAX for "all", metric, pooled scores)
    pub rows: Vec<(usize, OverlapMetric, Prf)>,
}

pub const ALL_CATEGORIES: usize = usize::MAX;

pub fn evaluate_corpus(
    pred: &[Vec<usize>],
    gold: &[Vec<usize>],
    scheme: &LabelScheme,
) -> CorpusEvaluation {
    assert_eq!(pred.len(), gold.len(), "sentence counts must match");
    let n_cat = scheme.classes().len();
    let metrics = [OverlapMetric::Binary, OverlapMetric::Proportional];
    let mut pooled = vec![OverlapCounts::default(); n_cat * metrics.len()];
    for (p_labels, g_labels) in pred.iter().zip(gold) {
        let p_spans = decode_bio(p_labels, scheme);
        let g_spans = decode_bio(g_labels, scheme);
        for cat in 0..n_cat {
            let p_cat: Vec<Span> = p_spans
                .iter()
                .filter(|s| s.category == cat)
                .copied()
                .collect();
            let g_cat: Vec<Span> = g_spans
                .iter()
                .filter(|s| s.category == cat)
                .copied()
                .collect();
            for (m, metric) in metrics.iter().enumerate() {
                pooled[cat * metrics.len() + m].add(&metric.counts(&p_cat, &g_cat));
            }
        }
    }
    let mut rows = Vec::new();
    for (m, metric) in metrics.iter().enumerate() {
        let mut all = OverlapCounts::default();
        for cat in 0..n_cat {
            let counts = pooled[cat * metrics.len() + m];
            rows.push((cat, *metric, counts.prf()));
            all.add(&counts);
        }
        rows.push((ALL_CATEGORIES, *metric, all.prf()));
    }
    CorpusEvaluation { rows }
}

impl CorpusEvaluation {
    /// Pooled score across all categories for one metric.
    pub fn overall(&self, metric: OverlapMetric) -> Prf {
        self.rows
            .iter()
            .find(|(cat, m, _)| *cat == ALL_CATEGORIES && *m == metric)
            .map(|(_, _, prf)| *prf)
            .expect("overall row always present")
    }

    /// CSV report: `category,metric,precision,recall,f1`.
    pub fn to_csv(&self, scheme: &LabelScheme) -> String {
        let mut out = String::from("category,metric,precision,recall,f1\n");
        for (cat, metric, prf) in &self.rows {
            let name = if *cat == ALL_CATEGORIES {
                "ALL"
            } else {
                &scheme.classes()[*cat]
            };
            let _ = writeln!(
                out,
                "{name},{},{:.6},{:.6},{:.6}",
                metric.name(),
                prf.precision,
                prf.recall,
                prf.f1
            );
        }
        out
    }
}

/// Fraction of positions where the two label sequences agree.
pub fn token_accuracy(pred: &[Vec<usize>], gold: &[Vec<usize>]) -> f64 {
    let mut total = 0usize;
    let mut correct = 0usize;
    for (p, g) in pred.iter().zip(gold) {
        assert_eq!(p.len(), g.len(), "sentence lengths must match");
        for (a, b) in p.iter().zip(g) {
            total += 1;
            if a == b {
                correct += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

/// Minimum token gap between gold spans of two distinct categories, or
/// `None` when the sentence does not contain two categories. Overlapping
/// spans have gap 0.
pub fn min_category_separation(sentence: &Sentence, scheme: &LabelScheme) -> Option<usize> {
    let spans = decode_bio(&sentence.labels, scheme);
    let mut best: Option<usize> = None;
    for (i, a) in spans.iter().enumerate() {
        for b in spans.iter().skip(i + 1) {
            if a.category == b.category {
                continue;
            }
            let gap = if a.overlap(b) > 0 {
                0
            } else if a.end <= b.start {
                b.start - a.end
            } else {
                a.start - b.end
            };
            best = Some(best.map_or(gap, |cur| cur.min(gap)));
        }
    }
    best
}

// Two-sided 95% critical values of Student's t, df = 1..=200.
const T_CRITICAL_975: [f64; 200] = [
    12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004, 2.262157,
    2.228139, 2.200985, 2.178813, 2.160369, 2.144787, 2.131450, 2.119905, 2.109816, 2.100922,
    2.093024, 2.085963, 2.079614, 2.073873, 2.068658, 2.063899, 2.059539, 2.055529, 2.051831,
    2.048407, 2.045230, 2.042272, 2.039513, 2.036933, 2.034515, 2.032245, 2.030108, 2.028094,
    2.026192, 2.024394, 2.022691, 2.021075, 2.019541, 2.018082, 2.016692, 2.015368, 2.014103,
    2.012896, 2.011741, 2.010635, 2.009575, 2.008559, 2.007584, 2.006647, 2.005746, 2.004879,
    2.004045, 2.003241, 2.002465, 2.001717, 2.000995, 2.000298, 1.999624, 1.998972, 1.998341,
    1.997730, 1.997138, 1.996564, 1.996008, 1.995469, 1.994945, 1.994437, 1.993943, 1.993464,
    1.992997, 1.992543, 1.992102, 1.991673, 1.991254, 1.990847, 1.990450, 1.990063, 1.989686,
    1.989319, 1.988960, 1.988610, 1.988268, 1.987934, 1.987608, 1.987290, 1.986979, 1.986675,
    1.986377, 1.986086, 1.985802, 1.985523, 1.985251, 1.984984, 1.984723, 1.984467, 1.984217,
    1.983972, 1.983731, 1.983495, 1.983264, 1.983038, 1.982815, 1.982597, 1.982383, 1.982173,
    1.981967, 1.981765, 1.981567, 1.981372, 1.981180, 1.980992, 1.980808, 1.980626, 1.980448,
    1.980272, 1.980100, 1.979930, 1.979764, 1.979600, 1.979439, 1.979280, 1.979124, 1.978971,
    1.978820, 1.978671, 1.978524, 1.978380, 1.978239, 1.978099, 1.977961, 1.977826, 1.977692,
    1.977561, 1.977431, 1.977304, 1.977178, 1.977054, 1.976931, 1.976811, 1.976692, 1.976575,
    1.976460, 1.976346, 1.976233, 1.976122, 1.976013, 1.975905, 1.975799, 1.975694, 1.975590,
    1.975488, 1.975387, 1.975288, 1.975189, 1.975092, 1.974996, 1.974902, 1.974808, 1.974716,
    1.974625, 1.974535, 1.974446, 1.974358, 1.974271, 1.974185, 1.974100, 1.974017, 1.973934,
    1.973852, 1.973771, 1.973691, 1.973612, 1.973534, 1.973457, 1.973381, 1.973305, 1.973231,
    1.973157, 1.973084, 1.973012, 1.972941, 1.972870, 1.972800, 1.972731, 1.972663, 1.972595,
    1.972528, 1.972462, 1.972396, 1.972332, 1.972268, 1.972204, 1.972141, 1.972079, 1.972017,
    1.971957, 1.971896,
];

/// Two-sided 95% critical value for the given degrees of freedom; degrees
/// beyond the table clamp to the df=200 entry (slightly conservative).
pub fn t_critical_975(df: usize) -> f64 {
    assert!(df >= 1, "degrees of freedom must be positive");
    T_CRITICAL_975[df.min(T_CRITICAL_975.len()) - 1]
}

/// Two-sided paired t-test at alpha = 0.05.
///
/// Degenerate zero-variance differences resolve by convention: all-zero
/// differences are not significant (t = 0), while identical nonzero
/// differences are (t = ±inf).
pub fn paired_t_test(scores_a: &[f64], scores_b: &[f64]) -> Result<(f64, bool)> {
    if scores_a.len() != scores_b.len() {
        return Err(Error::Usage(format!(
            "paired t-test needs equal lengths, got {} and {}",
            scores_a.len(),
            scores_b.len()
        )));
    }
    let n = scores_a.len();
    if n < 2 {
        return Err(Error::Usage(
            "paired t-test needs at least two pairs".into(),
        ));
    }
    let diffs: Vec<f64> = scores_a.iter().zip(scores_b).map(|(a, b)| a - b).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        return Ok(if mean == 0.0 {
            (0.0, false)
        } else {
            (mean.signum() * f64::INFINITY, true)
        });
    }
    let t = mean / (sd / (n as f64).sqrt());
    Ok((t, t.abs() > t_critical_975(n - 1)))
}
