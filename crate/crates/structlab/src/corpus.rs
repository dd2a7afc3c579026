//! Corpora, label schemes, word embeddings, and the synthetic
//! structure-sensitive corpus generator.
//!
//! File formats:
//!
//! - Corpus: UTF-8, one token per line as `token<TAB>label`, sentences
//!   separated by exactly one blank line.
//! - Embeddings: UTF-8, one `token v1 ... vd` per line, single-space
//!   separated, `.`-decimal floats.
//!
//! Loaded corpora and embedding tables are immutable and safe to share
//! across threads. Embedding vectors stay fixed during training.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::Vector;
use crate::tree::{NodeKind, ParseTree};

/// Embedding id of a token that is not in the table.
pub const UNK_ID: usize = usize::MAX;

/// Label id of the outside class. Ties in output argmax therefore resolve
/// toward O.
pub const OUTSIDE: usize = 0;

/// One tokenized sentence with gold labels and (optionally bound)
/// embedding-table row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub labels: Vec<usize>,
    pub embedding_ids: Vec<usize>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>, labels: Vec<usize>) -> Self {
        let n = tokens.len();
        Sentence {
            tokens,
            labels,
            embedding_ids: vec![UNK_ID; n],
        }
    }

    /// Sentence with all-O labels; useful for prediction inputs and tests.
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let n = tokens.len();
        Sentence::new(tokens, vec![OUTSIDE; n])
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// BIO tag inventory over an ordered list of expression categories.
///
/// Label ids: O is 0; category i contributes B at 2i+1 and I at 2i+2, so a
/// scheme with c categories has 2c+1 labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelScheme {
    classes: Vec<String>,
}

impl LabelScheme {
    pub fn new(classes: Vec<String>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::config("label scheme needs at least one category"));
        }
        let mut seen = BTreeSet::new();
        for c in &classes {
            if c.is_empty() || c.chars().any(|ch| ch.is_whitespace()) {
                return Err(Error::config(format!("invalid category name {c:?}")));
            }
            if !seen.insert(c.clone()) {
                return Err(Error::config(format!("duplicate category {c:?}")));
            }
        }
        Ok(LabelScheme { classes })
    }

    /// Parses a comma-separated category list such as `DSE,HOLDER,TARGET`.
    pub fn from_class_list(list: &str) -> Result<Self> {
        LabelScheme::new(
            list.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
        )
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_labels(&self) -> usize {
        2 * self.classes.len() + 1
    }

    pub fn label_id(&self, name: &str) -> Option<usize> {
        if name == "O" {
            return Some(OUTSIDE);
        }
        let (prefix, class) = name.split_once('_')?;
        let idx = self.classes.iter().position(|c| c == class)?;
        match prefix {
            "B" => Some(2 * idx + 1),
            "I" => Some(2 * idx + 2),
            _ => None,
        }
    }

    pub fn label_name(&self, id: usize) -> String {
        if id == OUTSIDE {
            return "O".into();
        }
        let class = &self.classes[(id - 1) / 2];
        if id % 2 == 1 {
            format!("B_{class}")
        } else {
            format!("I_{class}")
        }
    }

    /// Category index of a B/I label; `None` for O.
    pub fn class_of(&self, id: usize) -> Option<usize> {
        if id == OUTSIDE {
            None
        } else {
            Some((id - 1) / 2)
        }
    }

    pub fn is_begin(&self, id: usize) -> bool {
        id != OUTSIDE && id % 2 == 1
    }

    pub fn begin_label(&self, class: usize) -> usize {
        2 * class + 1
    }

    pub fn inside_label(&self, class: usize) -> usize {
        2 * class + 2
    }
}

/// Loads a CoNLL-style corpus and validates every label against the scheme.
pub fn load_corpus(path: impl AsRef<Path>, scheme: &LabelScheme) -> Result<Vec<Sentence>> {
    let text = std::fs::read_to_string(path)?;
    parse_corpus(&text, scheme)
}

pub fn parse_corpus(text: &str, scheme: &LabelScheme) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.is_empty() {
            if tokens.is_empty() {
                return Err(Error::data(lineno, "empty sentence block"));
            }
            sentences.push(Sentence::new(
                std::mem::take(&mut tokens),
                std::mem::take(&mut labels),
            ));
            continue;
        }
        let (token, label) = line.split_once('\t').ok_or_else(|| {
            Error::data(lineno, format!("expected token<TAB>label, got {line:?}"))
        })?;
        let label_id = scheme
            .label_id(label)
            .ok_or_else(|| Error::data(lineno, format!("unknown label {label:?}")))?;
        tokens.push(token.to_string());
        labels.push(label_id);
    }
    if !tokens.is_empty() {
        sentences.push(Sentence::new(tokens, labels));
    }
    if sentences.is_empty() {
        return Err(Error::data(1, "corpus file contains no sentences"));
    }
    Ok(sentences)
}

pub fn write_corpus(
    path: impl AsRef<Path>,
    sentences: &[Sentence],
    scheme: &LabelScheme,
) -> Result<()> {
    std::fs::write(path, corpus_to_string(sentences, scheme))?;
    Ok(())
}

pub fn corpus_to_string(sentences: &[Sentence], scheme: &LabelScheme) -> String {
    let mut out = String::new();
    for (i, sentence) in sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (token, &label) in sentence.tokens.iter().zip(&sentence.labels) {
            let _ = writeln!(out, "{token}\t{}", scheme.label_name(label));
        }
    }
    out
}

/// Fixed word-vector table. Rows never change during training.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vocab: HashMap<String, usize>,
    /// Token strings in row order, for serialization.
    row_tokens: Vec<String>,
    rows: Vec<Vector>,
    unk: Vector,
}

impl EmbeddingTable {
    fn from_rows(row_tokens: Vec<String>, rows: Vec<Vector>) -> Self {
        let dim = rows[0].dim();
        let mut unk = vec![0.0; dim];
        for row in &rows {
            for (u, &x) in unk.iter_mut().zip(row.data()) {
                *u += x;
            }
        }
        let n = rows.len() as f64;
        for u in unk.iter_mut() {
            *u /= n;
        }
        let vocab = row_tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        EmbeddingTable {
            dim,
            vocab,
            row_tokens,
            rows,
            unk: Vector::new(unk),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn unk_vector(&self) -> &Vector {
        &self.unk
    }

    /// Row index under the lookup policy: exact match first, then lowercased
    /// match, else [`UNK_ID`].
    pub fn id_for(&self, token: &str) -> usize {
        if let Some(&i) = self.vocab.get(token) {
            return i;
        }
        if let Some(&i) = self.vocab.get(token.to_lowercase().as_str()) {
            return i;
        }
        UNK_ID
    }

    pub fn vector_by_id(&self, id: usize) -> &Vector {
        if id == UNK_ID {
            &self.unk
        } else {
            &self.rows[id]
        }
    }

    pub fn lookup(&self, token: &str) -> &Vector {
        self.vector_by_id(self.id_for(token))
    }

    /// Fills in `embedding_ids` for every sentence.
    pub fn bind(&self, sentences: &mut [Sentence]) {
        for sentence in sentences {
            sentence.embedding_ids = sentence.tokens.iter().map(|t| self.id_for(t)).collect();
        }
    }

    /// Resolves a sentence to its input vectors, one per token.
    pub fn inputs(&self, sentence: &Sentence) -> Vec<Vector> {
        sentence
            .tokens
            .iter()
            .map(|t| self.lookup(t).clone())
            .collect()
    }
}

/// Loads a text-format embedding table; the unknown-word vector is the
/// arithmetic mean of all loaded vectors.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let text = std::fs::read_to_string(path)?;
    parse_embeddings(&text)
}

pub fn parse_embeddings(text: &str) -> Result<EmbeddingTable> {
    let mut row_tokens: Vec<String> = Vec::new();
    let mut rows: Vec<Vector> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut dim: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let token = parts
            .next()
            .filter(|t| !t.is_empty())
            .ok_or_else(|| Error::data(lineno, "missing token"))?;
        let values: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::data(lineno, format!("bad float {p:?}")))
            })
            .collect::<Result<_>>()?;
        if values.is_empty() {
            return Err(Error::data(lineno, "embedding row has no values"));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::data(
                    lineno,
                    format!(
                        "inconsistent dimensionality: expected {d}, got {}",
                        values.len()
                    ),
                ))
            }
            _ => {}
        }
        if !seen.insert(token.to_string()) {
            return Err(Error::data(lineno, format!("duplicate token {token:?}")));
        }
        row_tokens.push(token.to_string());
        rows.push(Vector::new(values));
    }
    if rows.is_empty() {
        return Err(Error::data(1, "embedding file contains no vectors"));
    }
    Ok(EmbeddingTable::from_rows(row_tokens, rows))
}

pub fn write_embeddings(path: impl AsRef<Path>, table: &EmbeddingTable) -> Result<()> {
    let mut out = String::new();
    for (token, row) in table.row_tokens.iter().zip(&table.rows) {
        out.push_str(token);
        for v in row.data() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Deterministic random table over the given vocabulary: entries i.i.d.
/// uniform in [-0.1, 0.1], rows in sorted token order.
pub fn random_embeddings(vocab: &[String], dim: usize, seed: u64) -> EmbeddingTable {
    assert!(dim >= 1, "embedding dimension must be at least 1");
    let tokens: BTreeSet<&String> = vocab.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut row_tokens = Vec::with_capacity(tokens.len());
    let mut rows = Vec::with_capacity(tokens.len());
    for token in tokens {
        row_tokens.push(token.clone());
        rows.push(Vector::new(
            (0..dim).map(|_| rng.gen_range(-0.1..=0.1)).collect(),
        ));
    }
    EmbeddingTable::from_rows(row_tokens, rows)
}

/// Distinct token strings of a corpus, sorted.
pub fn corpus_vocab(sentences: &[Sentence]) -> Vec<String> {
    let set: BTreeSet<&String> = sentences.iter().flat_map(|s| s.tokens.iter()).collect();
    set.into_iter().cloned().collect()
}

/// The designated trigger token of the synthetic structural task.
pub const TRIGGER_TOKEN: &str = "trg";

/// Category name used by the synthetic structural task.
pub const STRUCTURAL_CLASS: &str = "EXPR";

const N_FILLERS: usize = 19; // plus the trigger: a 20-token vocabulary

fn filler_token(i: usize) -> String {
    format!("w{:02}", i + 1)
}

/// A generated corpus with aligned trees and its label scheme.
#[derive(Debug, Clone)]
pub struct StructuralCorpus {
    pub sentences: Vec<Sentence>,
    pub trees: Vec<ParseTree>,
    pub scheme: LabelScheme,
}

/// Generates sentences whose labels depend on tree structure, not token
/// identity: each sentence holds one trigger token at a random leaf, and the
/// leaves of the trigger's sibling subtree form the single labeled span
/// (B then I). All other tokens, the trigger included, are O.
///
/// Because fillers are drawn independently of the tree, the same token
/// string routinely occurs both inside and outside labeled spans; the
/// generator resamples until at least 10% of token occurrences are ambiguous
/// in that sense. Same seed, same corpus, bitwise.
pub fn generate_structural_corpus(n_sentences: usize, seed: u64) -> StructuralCorpus {
    assert!(n_sentences >= 1, "need at least one sentence");
    let scheme = LabelScheme::new(vec![STRUCTURAL_CLASS.to_string()]).expect("static scheme");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut sentences = Vec::with_capacity(n_sentences);
        let mut trees = Vec::with_capacity(n_sentences);
        for _ in 0..n_sentences {
            let (sentence, tree) = generate_sentence(&scheme, &mut rng);
            sentences.push(sentence);
            trees.push(tree);
        }
        if ambiguity_rate(&sentences) >= 0.10 {
            return StructuralCorpus {
                sentences,
                trees,
                scheme,
            };
        }
    }
}

fn generate_sentence(scheme: &LabelScheme, rng: &mut ChaCha8Rng) -> (Sentence, ParseTree) {
    let n_leaves = rng.gen_range(6..=12);
    let trigger_pos = rng.gen_range(0..n_leaves);
    let tokens: Vec<String> = (0..n_leaves)
        .map(|i| {
            if i == trigger_pos {
                TRIGGER_TOKEN.to_string()
            } else {
                filler_token(rng.gen_range(0..N_FILLERS))
            }
        })
        .collect();
    let tree = ParseTree::random(&tokens, rng);
    let labels = structural_oracle_labels(&tree, scheme);
    (Sentence::new(tokens, labels), tree)
}

/// Recomputes the generator's labels from tree context alone: the leaves of
/// the trigger's sibling subtree are B/I, everything else O. This is the
/// tree-aware oracle of the structural task.
pub fn structural_oracle_labels(tree: &ParseTree, scheme: &LabelScheme) -> Vec<usize> {
    let mut labels = vec![OUTSIDE; tree.leaf_count()];
    let trigger_leaf = tree
        .leaf_order()
        .iter()
        .position(|&id| tree.tokens()[leaf_token(tree, id)] == TRIGGER_TOKEN)
        .map(|pos| tree.leaf_order()[pos]);
    let Some(trigger_leaf) = trigger_leaf else {
        return labels;
    };
    let Some(parent) = tree.node(trigger_leaf).parent else {
        return labels; // the trigger is the whole tree
    };
    let sibling = match tree.node(parent).kind {
        NodeKind::Internal { left, right } => {
            if left == trigger_leaf {
                right
            } else {
                left
            }
        }
        NodeKind::Leaf { .. } => unreachable!("a parent is always internal"),
    };
    let (lo, hi) = tree.subtree_span(sibling);
    labels[lo] = scheme.begin_label(0);
    for slot in labels.iter_mut().take(hi).skip(lo + 1) {
        *slot = scheme.inside_label(0);
    }
    labels
}

fn leaf_token(tree: &ParseTree, id: usize) -> usize {
    match tree.node(id).kind {
        NodeKind::Leaf { token } => token,
        NodeKind::Internal { .. } => unreachable!("leaf_order only holds leaves"),
    }
}

/// Token strings that occur with more than one distinct gold label.
pub fn ambiguous_token_strings(sentences: &[Sentence]) -> BTreeSet<String> {
    let mut labels_seen: BTreeMap<&String, BTreeSet<usize>> = BTreeMap::new();
    for sentence in sentences {
        for (token, &label) in sentence.tokens.iter().zip(&sentence.labels) {
            labels_seen.entry(token).or_default().insert(label);
        }
    }
    labels_seen
        .into_iter()
        .filter(|(_, labels)| labels.len() > 1)
        .map(|(token, _)| token.clone())
        .collect()
}

/// Fraction of token occurrences whose token string is ambiguous.
pub fn ambiguity_rate(sentences: &[Sentence]) -> f64 {
    let ambiguous = ambiguous_token_strings(sentences);
    let mut total = 0usize;
    let mut hits = 0usize;
    for sentence in sentences {
        for token in &sentence.tokens {
            total += 1;
            if ambiguous.contains(token) {
                hits += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Most-frequent-label-per-token baseline; ties break toward the lowest
/// label id and unseen tokens predict O.
#[derive(Debug, Clone)]
pub struct MemorizationBaseline {
    by_token: HashMap<String, usize>,
}

impl MemorizationBaseline {
    pub fn fit(sentences: &[Sentence]) -> Self {
        let mut counts: HashMap<&String, BTreeMap<usize, usize>> = HashMap::new();
        for sentence in sentences {
            for (token, &label) in sentence.tokens.iter().zip(&sentence.labels) {
                *counts.entry(token).or_default().entry(label).or_insert(0) += 1;
            }
        }
        let by_token = counts
            .into_iter()
            .map(|(token, by_label)| {
                let best = by_label
                    .iter()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                    .map(|(&label, _)| label)
                    .unwrap_or(OUTSIDE);
                (token.clone(), best)
            })
            .collect();
        MemorizationBaseline { by_token }
    }

    pub fn predict(&self, token: &str) -> usize {
        self.by_token.get(token).copied().unwrap_or(OUTSIDE)
    }

    /// Token accuracy restricted to occurrences of the given token strings.
    pub fn accuracy_on(&self, sentences: &[Sentence], tokens: &BTreeSet<String>) -> f64 {
        let mut total = 0usize;
        let mut correct = 0usize;
        for sentence in sentences {
            for (token, &label) in sentence.tokens.iter().zip(&sentence.labels) {
                if tokens.contains(token) {
                    total += 1;
                    if self.predict(token) == label {
                        correct += 1;
                    }
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dse_scheme() -> LabelScheme {
        LabelScheme::new(vec!["DSE".into()]).unwrap()
    }

    #[test]
    fn scheme_label_ids_roundtrip() {
        let scheme = LabelScheme::from_class_list("DSE,HOLDER,TARGET").unwrap();
        assert_eq!(scheme.n_labels(), 7);
        for id in 0..scheme.n_labels() {
            let name = scheme.label_name(id);
            assert_eq!(scheme.label_id(&name), Some(id));
        }
        assert_eq!(scheme.label_id("B_DSE"), Some(1));
        assert_eq!(scheme.label_id("I_TARGET"), Some(6));
        assert_eq!(scheme.label_id("B_XYZ"), None);
    }

    #[test]
    fn corpus_block_parses() {
        let text = "has\tB_DSE\nrefused\tI_DSE\n";
        let sentences = parse_corpus(text, &dse_scheme()).unwrap();
        assert_eq!(sentences.len(), 1);
        assert_eq!(sentences[0].tokens, vec!["has", "refused"]);
        assert_eq!(sentences[0].labels, vec![1, 2]);
    }

    #[test]
    fn unknown_label_rejected_with_line() {
        let text = "has\tB_XYZ\n";
        let err = parse_corpus(text, &dse_scheme()).unwrap_err();
        match err {
            Error::Data { line, ref message } => {
                assert_eq!(line, 1);
                assert!(message.contains("B_XYZ"));
            }
            other => panic!("expected data error, got {other}"),
        }
    }

    #[test]
    fn blank_line_separates_sentences() {
        let text = "a\tO\n\nb\tO\nc\tO\n";
        let sentences = parse_corpus(text, &dse_scheme()).unwrap();
        assert_eq!(sentences.len(), 2);
        assert_eq!(sentences[1].tokens, vec!["b", "c"]);
    }

    #[test]
    fn empty_file_rejected() {
        assert!(parse_corpus("", &dse_scheme()).is_err());
    }

    #[test]
    fn corpus_roundtrip_is_identity() {
        let scheme = dse_scheme();
        let text = "The\tO\nCommittee\tO\n\nhas\tB_DSE\nrefused\tI_DSE\n.\tO\n";
        let sentences = parse_corpus(text, &scheme).unwrap();
        let rendered = corpus_to_string(&sentences, &scheme);
        assert_eq!(parse_corpus(&rendered, &scheme).unwrap(), sentences);
    }

    #[test]
    fn embeddings_parse_and_unk_mean() {
        let table = parse_embeddings("a 1 0\nb 0 1\nc 2 3\n").unwrap();
        assert_eq!(table.dim(), 2);
        assert_eq!(table.len(), 3);
        assert_eq!(table.unk_vector().data(), &[1.0, 4.0 / 3.0]);
    }

    #[test]
    fn embeddings_inconsistent_dim_rejected() {
        let err = parse_embeddings("a 1 0 0\nb 1 0 0\nc 1 0\n").unwrap_err();
        match err {
            Error::Data { line, .. } => assert_eq!(line, 3),
            other => panic!("expected data error, got {other}"),
        }
    }

    #[test]
    fn embeddings_duplicate_token_rejected() {
        let err = parse_embeddings("a 1 0\na 0 1\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "got: {err}");
    }

    #[test]
    fn lookup_policy() {
        let table = parse_embeddings("cat 1 2\ndog 3 4\n").unwrap();
        assert_eq!(table.lookup("cat").data(), &[1.0, 2.0]);
        assert_eq!(table.lookup("Cat").data(), &[1.0, 2.0]);
        assert_eq!(table.lookup("zzqq"), table.unk_vector());
    }

    #[test]
    fn random_embeddings_deterministic_and_in_range() {
        let vocab: Vec<String> = (0..10).map(|i| format!("t{i}")).collect();
        let a = random_embeddings(&vocab, 50, 9);
        let b = random_embeddings(&vocab, 50, 9);
        assert_eq!(a, b);
        assert_eq!(a.dim(), 50);
        assert_eq!(a.len(), 10);
        for token in &vocab {
            assert!(a
                .lookup(token)
                .data()
                .iter()
                .all(|&x| (-0.1..=0.1).contains(&x)));
        }
        let c = random_embeddings(&vocab, 50, 10);
        assert_ne!(a, c);
    }

    #[test]
    fn structural_corpus_matches_oracle_and_is_deterministic() {
        let corpus = generate_structural_corpus(50, 4);
        assert_eq!(corpus.sentences.len(), 50);
        for (sentence, tree) in corpus.sentences.iter().zip(&corpus.trees) {
            tree.align(sentence).unwrap();
            assert_eq!(
                structural_oracle_labels(tree, &corpus.scheme),
                sentence.labels,
            );
            // exactly one trigger, labeled O
            let trigger_positions: Vec<usize> = sentence
                .tokens
                .iter()
                .enumerate()
                .filter(|(_, t)| t.as_str() == TRIGGER_TOKEN)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(trigger_positions.len(), 1);
            assert_eq!(sentence.labels[trigger_positions[0]], OUTSIDE);
            // the labeled span is one contiguous B I* run
            let begins = sentence.labels.iter().filter(|&&l| l == 1).count();
            assert_eq!(begins, 1, "exactly one span per sentence");
        }
        let again = generate_structural_corpus(50, 4);
        assert_eq!(corpus.sentences, again.sentences);
        assert_eq!(corpus.trees, again.trees);
    }

    #[test]
    fn structural_corpus_is_ambiguous_enough() {
        let corpus = generate_structural_corpus(200, 1);
        assert!(ambiguity_rate(&corpus.sentences) >= 0.10);
    }

    #[test]
    fn memorization_baseline_loses_to_tree_oracle() {
        let corpus = generate_structural_corpus(200, 2);
        let ambiguous = ambiguous_token_strings(&corpus.sentences);
        assert!(!ambiguous.is_empty());
        let baseline = MemorizationBaseline::fit(&corpus.sentences);
        let baseline_acc = baseline.accuracy_on(&corpus.sentences, &ambiguous);
        assert!(
            baseline_acc < 0.95,
            "memorization baseline should stay below 95% on ambiguous tokens, got {baseline_acc}"
        );
        // the tree-aware oracle reconstructs every label
        for (sentence, tree) in corpus.sentences.iter().zip(&corpus.trees) {
            assert_eq!(
                structural_oracle_labels(tree, &corpus.scheme),
                sentence.labels
            );
        }
    }

    #[test]
    fn baseline_tie_breaks_toward_lowest_label() {
        let sentences = vec![
            Sentence::new(vec!["x".into()], vec![2]),
            Sentence::new(vec!["x".into()], vec![1]),
        ];
        let baseline = MemorizationBaseline::fit(&sentences);
        assert_eq!(baseline.predict("x"), 1);
        assert_eq!(baseline.predict("unseen"), OUTSIDE);
    }
}
