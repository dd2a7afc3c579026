//! Minibatch SGD with L2 regularization, cross-validation splitting, and
//! the finite-difference gradient-check harness.
//!
//! Training is deterministic: sentence order is shuffled with a seeded
//! generator, per-sentence gradients are reduced in ascending sentence-index
//! order within each minibatch, and parameter updates run strictly
//! sequentially, so the same configuration and seed always produce
//! bitwise-identical parameters.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{EmbeddingTable, LabelScheme, Sentence};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_corpus, OverlapMetric};
use crate::model::{init_params, Activation, Arch, Gradients, ModelParams, Topology};
use crate::network::{forward, loss_and_gradients, ActivationRecord};
use crate::numeric::Vector;
use crate::tree::ParseTree;

/// Hyperparameters of one training run.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub l2: f64,
    pub seed: u64,
    pub activation: Activation,
    pub l2_grid: Vec<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 200,
            minibatch_size: 80,
            l2: 0.0,
            seed: 1,
            activation: Activation::Rectifier,
            l2_grid: vec![0.0, 1e-5, 1e-4, 1e-3],
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::config(format!(
                "learning rate must be non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.minibatch_size == 0 {
            return Err(Error::config("minibatch size must be at least 1"));
        }
        if self.l2 < 0.0 {
            return Err(Error::config(format!(
                "l2 must be non-negative, got {}",
                self.l2
            )));
        }
        Ok(())
    }
}

/// A corpus bound to its embedding table and, when the architecture needs
/// one, its aligned trees.
pub struct TrainSet<'a> {
    pub sentences: &'a [Sentence],
    pub trees: Option<&'a [ParseTree]>,
    pub table: &'a EmbeddingTable,
}

impl<'a> TrainSet<'a> {
    pub fn new(
        sentences: &'a [Sentence],
        trees: Option<&'a [ParseTree]>,
        table: &'a EmbeddingTable,
    ) -> Self {
        TrainSet {
            sentences,
            trees,
            table,
        }
    }

    fn validate(&self, arch: Arch) -> Result<()> {
        if self.sentences.is_empty() {
            return Err(Error::config("corpus is empty"));
        }
        let needs_trees = matches!(arch, Arch::BiRecursive | Arch::Combined);
        match self.trees {
            None if needs_trees => {
                return Err(Error::config(format!(
                    "a parse tree file is required for architecture {arch}"
                )))
            }
            Some(trees) if needs_trees => {
                if trees.len() != self.sentences.len() {
                    return Err(Error::config(format!(
                        "{} trees for {} sentences",
                        trees.len(),
                        self.sentences.len()
                    )));
                }
                for (i, (tree, sentence)) in trees.iter().zip(self.sentences).enumerate() {
                    tree.align(sentence)
                        .map_err(|e| Error::Alignment(format!("sentence {}: {e}", i + 1)))?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn tree_for(&self, i: usize, arch: Arch) -> Option<&ParseTree> {
        if matches!(arch, Arch::BiRecursive | Arch::Combined) {
            self.trees.map(|t| &t[i])
        } else {
            None
        }
    }
}

/// Owned subset of a corpus, used for fold-wise training.
pub fn subset_corpus(
    sentences: &[Sentence],
    trees: Option<&[ParseTree]>,
    indices: &[usize],
) -> (Vec<Sentence>, Option<Vec<ParseTree>>) {
    let sub_sentences = indices.iter().map(|&i| sentences[i].clone()).collect();
    let sub_trees = trees.map(|t| indices.iter().map(|&i| t[i].clone()).collect());
    (sub_sentences, sub_trees)
}

/// Stochastic gradient descent over shuffled minibatches.
///
/// Per minibatch the summed per-sentence gradients receive an L2 term
/// `l2 * theta` for every weight matrix (biases are not regularized) and
/// parameters update as `theta <- theta - lr * (g + l2*theta) / |minibatch|`.
/// The final partial minibatch is processed like any other. The returned
/// trace holds the mean token cross-entropy of each epoch.
pub fn sgd_train(
    params: &ModelParams,
    set: &TrainSet<'_>,
    config: &TrainConfig,
) -> Result<(ModelParams, Vec<f64>)> {
    config.validate()?;
    let arch = params.arch();
    set.validate(arch)?;
    let inputs: Vec<Vec<Vector>> = set.sentences.iter().map(|s| set.table.inputs(s)).collect();
    let total_tokens: usize = set.sentences.iter().map(|s| s.len()).sum();

    let mut params = params.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trace = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..set.sentences.len()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for (batch_idx, chunk) in order.chunks(config.minibatch_size).enumerate() {
            let mut batch: Vec<usize> = chunk.to_vec();
            batch.sort_unstable(); // deterministic sentence-index reduction order
            let mut grad_sum = Gradients::zeros_like(&params);
            for &i in &batch {
                let (loss, grads) = loss_and_gradients(
                    &params,
                    &inputs[i],
                    &set.sentences[i].labels,
                    set.tree_for(i, arch),
                    config.activation,
                )?;
                if !loss.is_finite() {
                    return Err(Error::Divergence {
                        epoch,
                        minibatch: batch_idx + 1,
                    });
                }
                epoch_loss += loss;
                grad_sum.add_assign(&grads);
            }
            let scale = config.learning_rate / batch.len() as f64;
            let mut p_slots = params.slots_mut();
            for (p, g) in p_slots.iter_mut().zip(grad_sum.slots()) {
                let l2 = if p.regularized { config.l2 } else { 0.0 };
                for (theta, &grad) in p.data.iter_mut().zip(g.data) {
                    *theta -= scale * (grad + l2 * *theta);
                }
            }
        }
        trace.push(epoch_loss / total_tokens as f64);
    }
    Ok((params, trace))
}

/// Argmax predictions for every sentence; ties break toward the lowest
/// label id.
pub fn predict_corpus(
    params: &ModelParams,
    set: &TrainSet<'_>,
    activation: Activation,
) -> Result<Vec<Vec<usize>>> {
    let arch = params.arch();
    set.validate(arch)?;
    let mut out = Vec::with_capacity(set.sentences.len());
    for (i, sentence) in set.sentences.iter().enumerate() {
        let inputs = set.table.inputs(sentence);
        let record = forward(params, &inputs, set.tree_for(i, arch), activation)?;
        out.push(record.outputs.iter().map(|y| y.argmax()).collect());
    }
    Ok(out)
}

/// Test split plus disjoint validation folds over the remaining indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub test: Vec<usize>,
    pub folds: Vec<Vec<usize>>,
}

impl SplitPlan {
    /// Training indices for one fold: everything that is neither test nor
    /// in the fold's validation partition.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Seeded shuffle; the first `n_test` indices become the test set and the
/// remainder is dealt round-robin into folds.
pub fn make_splits(
    n_sentences: usize,
    n_test: usize,
    n_folds: usize,
    seed: u64,
) -> Result<SplitPlan> {
    if n_test >= n_sentences {
        return Err(Error::config(format!(
            "test size {n_test} must be smaller than the corpus ({n_sentences} sentences)"
        )));
    }
    if n_folds == 0 || n_folds > n_sentences - n_test {
        return Err(Error::config(format!(
            "fold count {n_folds} must be between 1 and {}",
            n_sentences - n_test
        )));
    }
    let mut indices: Vec<usize> = (0..n_sentences).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let mut test: Vec<usize> = indices[..n_test].to_vec();
    test.sort_unstable();
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); n_folds];
    for (j, &idx) in indices[n_test..].iter().enumerate() {
        folds[j % n_folds].push(idx);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(SplitPlan { test, folds })
}

/// Trains one model per grid value on fold 0's training portion and picks
/// the regularization strength with the best proportional F1 on fold 0's
/// validation portion; ties break toward the larger value.
pub fn select_l2(
    params0: &ModelParams,
    set: &TrainSet<'_>,
    scheme: &LabelScheme,
    config: &TrainConfig,
    split: &SplitPlan,
) -> Result<f64> {
    select_l2_on_fold(params0, set, scheme, config, split, 0)
}

/// Fold-parameterized variant of [`select_l2`], used by cross-validation to
/// select per fold.
pub fn select_l2_on_fold(
    params0: &ModelParams,
    set: &TrainSet<'_>,
    scheme: &LabelScheme,
    config: &TrainConfig,
    split: &SplitPlan,
    fold: usize,
) -> Result<f64> {
    if config.l2_grid.is_empty() {
        return Err(Error::config("l2 grid is empty"));
    }
    if fold >= split.folds.len() {
        return Err(Error::config(format!(
            "fold {fold} out of range for {} folds",
            split.folds.len()
        )));
    }
    let train_idx = split.train_indices(fold);
    let val_idx = &split.folds[fold];
    let (train_sentences, train_trees) = subset_corpus(set.sentences, set.trees, &train_idx);
    let (val_sentences, val_trees) = subset_corpus(set.sentences, set.trees, val_idx);
    let train_set = TrainSet::new(&train_sentences, train_trees.as_deref(), set.table);
    let val_set = TrainSet::new(&val_sentences, val_trees.as_deref(), set.table);

    let mut best: Option<(f64, f64)> = None; // (f1, lambda)
    for &lambda in &config.l2_grid {
        let mut cfg = config.clone();
        cfg.l2 = lambda;
        let (trained, _) = sgd_train(params0, &train_set, &cfg)?;
        let pred = predict_corpus(&trained, &val_set, config.activation)?;
        let gold: Vec<Vec<usize>> = val_sentences.iter().map(|s| s.labels.clone()).collect();
        let f1 = evaluate_corpus(&pred, &gold, scheme)
            .overall(OverlapMetric::Proportional)
            .f1;
        let better = match best {
            None => true,
            Some((best_f1, best_lambda)) => f1 > best_f1 || (f1 == best_f1 && lambda > best_lambda),
        };
        if better {
            best = Some((f1, lambda));
        }
    }
    Ok(best.expect("grid is nonempty").1)
}

/// Result of one gradient check.
#[derive(Debug, Clone, Copy)]
pub struct GradCheck {
    /// Max over all checked coordinates of |ga-gn| / max(|ga|, |gn|, 1e-8).
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates skipped by kink exclusion (rectifier only).
    pub excluded: usize,
    /// Checked coordinates whose analytic/numeric disagreement sits below
    /// the finite-difference rounding resolution; they contribute no error.
    pub below_resolution: usize,
}

/// Passing threshold for the given activation: 1e-6 for the smooth sigmoid,
/// 1e-4 for the rectifier after kink exclusion.
pub fn grad_check_threshold(activation: Activation) -> f64 {
    match activation {
        Activation::Sigmoid => 1e-6,
        Activation::Rectifier => 1e-4,
    }
}

fn loss_of_record(record: &ActivationRecord, labels: &[usize]) -> f64 {
    record
        .outputs
        .iter()
        .zip(labels)
        .map(|(y, &gold)| -y.get(gold).ln())
        .sum()
}

// Active/inactive pattern of every hidden unit. Two finite-difference
// evaluations are comparable only when the pattern is identical on both
// sides; a flip means some pre-activation crossed the rectifier kink within
// the perturbation, which is exactly what kink exclusion removes.
fn activation_pattern(record: &ActivationRecord) -> Vec<bool> {
    let mut mask = Vec::new();
    for group in [&record.h_fwd, &record.h_bwd, &record.x_up, &record.x_down] {
        for v in group.iter() {
            mask.extend(v.data().iter().map(|&x| x > 0.0));
        }
    }
    mask
}

fn nudge_flat(params: &mut ModelParams, index: usize, delta: f64) {
    let mut offset = 0;
    for slot in params.slots_mut() {
        if index < offset + slot.data.len() {
            slot.data[index - offset] += delta;
            return;
        }
        offset += slot.data.len();
    }
    panic!("flat index {index} out of range");
}

/// Builds random parameters and one random (sentence, tree) instance, then
/// compares analytic gradients against central finite differences,
/// coordinate by coordinate.
pub fn grad_check(
    topology: &Topology,
    seed: u64,
    activation: Activation,
    eps: f64,
) -> Result<GradCheck> {
    let mut params = init_params(topology, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    for slot in params.slots_mut() {
        if !slot.regularized {
            for x in slot.data.iter_mut() {
                *x = rng.gen_range(-0.5..=0.5);
            }
        }
    }
    let n_tokens = rng.gen_range(2..=6);
    let input_dim = topology.input_dim();
    let inputs: Vec<Vector> = (0..n_tokens)
        .map(|_| Vector::new((0..input_dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()))
        .collect();
    let labels: Vec<usize> = (0..n_tokens)
        .map(|_| rng.gen_range(0..topology.n_labels()))
        .collect();
    let tokens: Vec<String> = (0..n_tokens).map(|t| format!("t{t}")).collect();
    let tree = match topology.arch() {
        Arch::BiRecurrent => None,
        Arch::BiRecursive | Arch::Combined => Some(ParseTree::random(&tokens, &mut rng)),
    };
    let tree_ref = tree.as_ref();

    let (_, analytic) = loss_and_gradients(&params, &inputs, &labels, tree_ref, activation)?;
    let analytic_flat: Vec<f64> = analytic
        .slots()
        .iter()
        .flat_map(|s| s.data.iter().copied())
        .collect();

    let mut report = GradCheck {
        max_rel_error: 0.0,
        checked: 0,
        excluded: 0,
        below_resolution: 0,
    };
    for (j, &ga) in analytic_flat.iter().enumerate() {
        nudge_flat(&mut params, j, eps);
        let record_plus = forward(&params, &inputs, tree_ref, activation)?;
        let loss_plus = loss_of_record(&record_plus, &labels);
        nudge_flat(&mut params, j, -2.0 * eps);
        let record_minus = forward(&params, &inputs, tree_ref, activation)?;
        let loss_minus = loss_of_record(&record_minus, &labels);
        nudge_flat(&mut params, j, eps);

        if activation == Activation::Rectifier
            && activation_pattern(&record_plus) != activation_pattern(&record_minus)
        {
            report.excluded += 1;
            continue;
        }
        let numeric = (loss_plus - loss_minus) / (2.0 * eps);
        report.checked += 1;
        // Central differences cannot resolve below the rounding error of the
        // loss subtraction; a disagreement under that bound carries no
        // information about the analytic gradient.
        let resolution =
            64.0 * f64::EPSILON * loss_plus.abs().max(loss_minus.abs()).max(1.0) / (2.0 * eps);
        if (ga - numeric).abs() < resolution {
            report.below_resolution += 1;
            continue;
        }
        let rel = (ga - numeric).abs() / ga.abs().max(numeric.abs()).max(1e-8);
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
        }
    }
    Ok(report)
}

/// Loss-trace CSV: `epoch,mean_token_cross_entropy`.
pub fn write_loss_trace(path: impl AsRef<Path>, trace: &[f64]) -> Result<()> {
    let mut out = String::from("epoch,mean_token_cross_entropy\n");
    for (i, loss) in trace.iter().enumerate() {
        let _ = writeln!(out, "{},{loss}", i + 1);
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_embeddings, random_embeddings};
    use crate::metrics::token_accuracy;

    fn tiny_corpus() -> (Vec<Sentence>, EmbeddingTable) {
        // token identity determines the label, so the corpus is learnable
        let sentences = vec![Sentence::new(
            vec![
                "bb".into(),
                "ii".into(),
                "oo".into(),
                "xx".into(),
                "yy".into(),
            ],
            vec![1, 2, 0, 0, 0],
        )];
        let vocab: Vec<String> = ["bb", "ii", "oo", "xx", "yy"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let table = random_embeddings(&vocab, 4, 7);
        (sentences, table)
    }

    fn recurrent_topology() -> Topology {
        Topology::BiRecurrent {
            input: 4,
            forward: 4,
            backward: 4,
            n_labels: 3,
        }
    }

    #[test]
    fn zero_learning_rate_is_a_null_update() {
        let (sentences, table) = tiny_corpus();
        let set = TrainSet::new(&sentences, None, &table);
        let params = init_params(&recurrent_topology(), 1).unwrap();
        let config = TrainConfig {
            learning_rate: 0.0,
            epochs: 5,
            ..TrainConfig::default()
        };
        let (trained, trace) = sgd_train(&params, &set, &config).unwrap();
        assert_eq!(trained, params);
        assert_eq!(trace.len(), 5);
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let (sentences, table) = tiny_corpus();
        let set = TrainSet::new(&sentences, None, &table);
        let params = init_params(&recurrent_topology(), 2).unwrap();
        let config = TrainConfig {
            learning_rate: 0.05,
            epochs: 20,
            l2: 1e-4,
            seed: 5,
            ..TrainConfig::default()
        };
        let (a, trace_a) = sgd_train(&params, &set, &config).unwrap();
        let (b, trace_b) = sgd_train(&params, &set, &config).unwrap();
        assert_eq!(a, b);
        let bits_a: Vec<u64> = trace_a.iter().map(|x| x.to_bits()).collect();
        let bits_b: Vec<u64> = trace_b.iter().map(|x| x.to_bits()).collect();
        assert_eq!(bits_a, bits_b);
    }

    #[test]
    fn single_sentence_overfits_with_sigmoid() {
        let (sentences, table) = tiny_corpus();
        let set = TrainSet::new(&sentences, None, &table);
        let params = init_params(&recurrent_topology(), 3).unwrap();
        let config = TrainConfig {
            learning_rate: 0.1,
            epochs: 500,
            l2: 0.0,
            seed: 3,
            activation: Activation::Sigmoid,
            ..TrainConfig::default()
        };
        let (trained, trace) = sgd_train(&params, &set, &config).unwrap();
        for i in 10..trace.len() - 1 {
            assert!(
                trace[i + 1] <= trace[i] + 1e-12,
                "loss increased at epoch {}: {} -> {}",
                i + 1,
                trace[i],
                trace[i + 1]
            );
        }
        let pred = predict_corpus(&trained, &set, Activation::Sigmoid).unwrap();
        let gold: Vec<Vec<usize>> = sentences.iter().map(|s| s.labels.clone()).collect();
        assert_eq!(token_accuracy(&pred, &gold), 1.0);
    }

    #[test]
    fn pure_decay_shrinks_weight_norms() {
        // zero embeddings and rectifier-dead hidden units leave every weight
        // matrix with zero data gradient, so the L2 term acts alone
        let table = parse_embeddings("aa 0 0 0 0\nbb 0 0 0 0\n").unwrap();
        let sentences = vec![Sentence::new(vec!["aa".into(), "bb".into()], vec![1, 0])];
        let set = TrainSet::new(&sentences, None, &table);
        let params = init_params(&recurrent_topology(), 4).unwrap();
        let config = TrainConfig {
            learning_rate: 0.1,
            epochs: 1,
            l2: 0.1,
            ..TrainConfig::default()
        };
        let (trained, _) = sgd_train(&params, &set, &config).unwrap();
        for (before, after) in params.slots().iter().zip(trained.slots()) {
            if before.regularized {
                let norm_before: f64 = before.data.iter().map(|x| x * x).sum::<f64>().sqrt();
                let norm_after: f64 = after.data.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!(
                    norm_after < norm_before,
                    "{} did not shrink: {} -> {}",
                    before.name,
                    norm_before,
                    norm_after
                );
            }
        }
    }

    #[test]
    fn one_full_batch_step_equals_full_batch_gradient_descent() {
        let sentences = vec![
            Sentence::new(vec!["bb".into(), "ii".into()], vec![1, 2]),
            Sentence::new(vec!["oo".into(), "bb".into()], vec![0, 1]),
            Sentence::new(vec!["xx".into()], vec![0]),
            Sentence::new(vec!["ii".into(), "oo".into()], vec![2, 0]),
        ];
        let vocab: Vec<String> = ["bb", "ii", "oo", "xx"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let table = random_embeddings(&vocab, 4, 8);
        let set = TrainSet::new(&sentences, None, &table);
        let params = init_params(&recurrent_topology(), 5).unwrap();
        let (lr, l2) = (0.05, 1e-3);
        let config = TrainConfig {
            learning_rate: lr,
            epochs: 1,
            minibatch_size: sentences.len(),
            l2,
            seed: 11,
            ..TrainConfig::default()
        };
        let (trained, _) = sgd_train(&params, &set, &config).unwrap();

        // full-batch oracle: sum gradients over the corpus in index order
        let mut grad_sum = Gradients::zeros_like(&params);
        for s in &sentences {
            let inputs = table.inputs(s);
            let (_, g) =
                loss_and_gradients(&params, &inputs, &s.labels, None, config.activation).unwrap();
            grad_sum.add_assign(&g);
        }
        let mut expected = params.clone();
        let m = sentences.len() as f64;
        let mut slots = expected.slots_mut();
        for (p, g) in slots.iter_mut().zip(grad_sum.slots()) {
            let lambda = if p.regularized { l2 } else { 0.0 };
            for (theta, &grad) in p.data.iter_mut().zip(g.data) {
                *theta -= lr * (grad + lambda * *theta) / m;
            }
        }
        drop(slots);
        assert_eq!(trained, expected);
    }

    #[test]
    fn small_learning_rate_does_not_increase_loss() {
        let (sentences, table) = tiny_corpus();
        let set = TrainSet::new(&sentences, None, &table);
        let params = init_params(&recurrent_topology(), 6).unwrap();
        let config = TrainConfig {
            learning_rate: 1e-4,
            epochs: 20,
            seed: 6,
            activation: Activation::Sigmoid,
            ..TrainConfig::default()
        };
        let (_, trace) = sgd_train(&params, &set, &config).unwrap();
        for i in 0..trace.len() - 1 {
            assert!(trace[i + 1] <= trace[i] + 1e-12);
        }
    }

    #[test]
    fn divergence_is_reported_with_location() {
        let (sentences, table) = tiny_corpus();
        let set = TrainSet::new(&sentences, None, &table);
        let params = init_params(&recurrent_topology(), 7).unwrap();
        let config = TrainConfig {
            learning_rate: 1e12,
            epochs: 50,
            seed: 7,
            ..TrainConfig::default()
        };
        match sgd_train(&params, &set, &config) {
            Err(Error::Divergence { epoch, minibatch }) => {
                assert!(epoch >= 1 && minibatch >= 1);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn splits_partition_the_corpus() {
        let plan = make_splits(10, 2, 4, 1).unwrap();
        assert_eq!(plan.test.len(), 2);
        assert_eq!(plan.folds.len(), 4);
        for fold in &plan.folds {
            assert_eq!(fold.len(), 2);
        }
        let mut all: Vec<usize> = plan.test.clone();
        for fold in &plan.folds {
            all.extend(fold);
        }
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());

        assert_eq!(plan, make_splits(10, 2, 4, 1).unwrap());
        assert_ne!(plan, make_splits(10, 2, 4, 2).unwrap());

        assert!(make_splits(10, 10, 2, 1).is_err());
        assert!(make_splits(10, 2, 9, 1).is_err());
        assert!(make_splits(10, 2, 0, 1).is_err());
    }

    #[test]
    fn grad_check_sigmoid_all_architectures() {
        let topologies = [
            Topology::BiRecurrent {
                input: 3,
                forward: 4,
                backward: 3,
                n_labels: 3,
            },
            Topology::BiRecursive {
                input: 3,
                downward: 4,
                n_labels: 3,
            },
            Topology::Combined {
                input: 3,
                downward: 3,
                forward: 4,
                backward: 3,
                n_labels: 3,
            },
        ];
        for topology in &topologies {
            let report = grad_check(topology, 17, Activation::Sigmoid, 1e-5).unwrap();
            assert!(
                report.max_rel_error < 1e-6,
                "{:?}: error {} on {} coords",
                topology.arch(),
                report.max_rel_error,
                report.checked
            );
            assert_eq!(report.excluded, 0, "sigmoid never excludes");
        }
    }

    #[test]
    fn grad_check_rectifier_with_kink_exclusion() {
        let topology = Topology::Combined {
            input: 3,
            downward: 3,
            forward: 3,
            backward: 3,
            n_labels: 3,
        };
        let report = grad_check(&topology, 23, Activation::Rectifier, 1e-5).unwrap();
        assert!(
            report.max_rel_error < 1e-4,
            "error {}",
            report.max_rel_error
        );
        assert!(report.checked > 0);
    }

    #[test]
    fn grad_check_zero_weights_degenerate_point() {
        let topology = Topology::BiRecurrent {
            input: 2,
            forward: 2,
            backward: 2,
            n_labels: 2,
        };
        let params = init_params(&topology, 0).unwrap();
        let mut zeroed = params.clone();
        for slot in zeroed.slots_mut() {
            for x in slot.data.iter_mut() {
                *x = 0.0;
            }
        }
        let inputs = vec![Vector::new(vec![0.3, -0.2]), Vector::new(vec![0.1, 0.9])];
        let labels = vec![0, 1];
        let (_, analytic) =
            loss_and_gradients(&zeroed, &inputs, &labels, None, Activation::Sigmoid).unwrap();
        let analytic_flat: Vec<f64> = analytic
            .slots()
            .iter()
            .flat_map(|s| s.data.iter().copied())
            .collect();
        let eps = 1e-5;
        let mut max_rel = 0.0_f64;
        for (j, &ga) in analytic_flat.iter().enumerate() {
            let mut plus = zeroed.clone();
            nudge_flat(&mut plus, j, eps);
            let rec_p = forward(&plus, &inputs, None, Activation::Sigmoid).unwrap();
            let mut minus = zeroed.clone();
            nudge_flat(&mut minus, j, -eps);
            let rec_m = forward(&minus, &inputs, None, Activation::Sigmoid).unwrap();
            let numeric =
                (loss_of_record(&rec_p, &labels) - loss_of_record(&rec_m, &labels)) / (2.0 * eps);
            let rel = (ga - numeric).abs() / ga.abs().max(numeric.abs()).max(1e-8);
            max_rel = max_rel.max(rel);
        }
        assert!(max_rel < 1e-6, "error {max_rel}");
    }

    fn selection_corpus() -> (Vec<Sentence>, EmbeddingTable, LabelScheme) {
        let scheme = LabelScheme::new(vec!["DSE".into()]).unwrap();
        let mut sentences = Vec::new();
        for i in 0..100 {
            if i % 2 == 0 {
                sentences.push(Sentence::new(
                    vec!["bb".into(), "ii".into(), "ii".into()],
                    vec![1, 2, 2],
                ));
            } else {
                sentences.push(Sentence::new(
                    vec!["oo".into(), "oo".into(), "oo".into()],
                    vec![0, 0, 0],
                ));
            }
        }
        // widely separated embeddings keep the task learnable at the tiny
        // learning rate the enormous-lambda stability bound forces
        let table = parse_embeddings("bb 8 0 0 0\nii 0 8 0 0\noo 0 0 8 0\n").unwrap();
        (sentences, table, scheme)
    }

    #[test]
    fn select_l2_single_grid_returns_it() {
        let (sentences, table, scheme) = selection_corpus();
        let set = TrainSet::new(&sentences, None, &table);
        let params = init_params(&recurrent_topology(), 9).unwrap();
        let split = make_splits(sentences.len(), 20, 10, 3).unwrap();
        let config = TrainConfig {
            epochs: 1,
            l2_grid: vec![5e-4],
            ..TrainConfig::default()
        };
        let chosen = select_l2(&params, &set, &scheme, &config, &split).unwrap();
        assert_eq!(chosen, 5e-4);
    }

    #[test]
    fn select_l2_ties_break_toward_larger() {
        let (sentences, table, scheme) = selection_corpus();
        let set = TrainSet::new(&sentences, None, &table);
        let params = init_params(&recurrent_topology(), 9).unwrap();
        let split = make_splits(sentences.len(), 20, 10, 3).unwrap();
        // zero epochs: every grid value yields the identical untrained model
        let config = TrainConfig {
            epochs: 0,
            l2_grid: vec![1e-5, 1e-3, 1e-4],
            ..TrainConfig::default()
        };
        let chosen = select_l2(&params, &set, &scheme, &config, &split).unwrap();
        assert_eq!(chosen, 1e-3);
    }

    #[test]
    fn select_l2_prefers_small_lambda_on_learnable_corpus() {
        let (sentences, table, scheme) = selection_corpus();
        let set = TrainSet::new(&sentences, None, &table);
        let params = init_params(&recurrent_topology(), 9).unwrap();
        let split = make_splits(sentences.len(), 20, 10, 3).unwrap();
        // the learning rate keeps the enormous-lambda run stable, so its
        // weights decay toward zero and its outputs collapse to the majority
        // label instead of diverging
        let config = TrainConfig {
            learning_rate: 1e-4,
            epochs: 200,
            minibatch_size: 80,
            seed: 13,
            activation: Activation::Sigmoid,
            l2_grid: vec![0.0, 1e6],
            ..TrainConfig::default()
        };
        let chosen = select_l2(&params, &set, &scheme, &config, &split).unwrap();
        assert_eq!(chosen, 0.0);
    }
}
