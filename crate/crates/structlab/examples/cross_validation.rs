//! Small cross-validation run comparing two architectures, with per-fold
//! L2 selection and a paired significance test on the per-fold scores.
//!
//! Run with: cargo run --release --example cross_validation

use structlab::corpus::{corpus_vocab, generate_structural_corpus, random_embeddings};
use structlab::metrics::{evaluate_corpus, paired_t_test, OverlapMetric};
use structlab::model::{init_params, Activation, Arch, Topology};
use structlab::train::{
    make_splits, predict_corpus, select_l2_on_fold, sgd_train, subset_corpus, TrainConfig, TrainSet,
};

fn main() -> structlab::Result<()> {
    let corpus = generate_structural_corpus(240, 21);
    let vocab = corpus_vocab(&corpus.sentences);
    let table = random_embeddings(&vocab, 10, 22);
    let scheme = &corpus.scheme;

    let split = make_splits(corpus.sentences.len(), 60, 3, 23)?;
    println!(
        "{} sentences: {} held out for test, {} folds over the rest",
        corpus.sentences.len(),
        split.test.len(),
        split.folds.len()
    );

    let config = TrainConfig {
        learning_rate: 0.05,
        epochs: 300,
        minibatch_size: 8,
        seed: 24,
        activation: Activation::Sigmoid,
        l2_grid: vec![0.0, 1e-4],
        ..TrainConfig::default()
    };

    let archs = [
        (
            Arch::BiRecurrent,
            Topology::BiRecurrent {
                input: 10,
                forward: 12,
                backward: 12,
                n_labels: scheme.n_labels(),
            },
        ),
        (
            Arch::BiRecursive,
            Topology::BiRecursive {
                input: 10,
                downward: 16,
                n_labels: scheme.n_labels(),
            },
        ),
    ];

    let full_set = TrainSet::new(&corpus.sentences, Some(&corpus.trees), &table);
    let (test_sentences, test_trees) =
        subset_corpus(&corpus.sentences, Some(&corpus.trees), &split.test);
    let test_set = TrainSet::new(&test_sentences, test_trees.as_deref(), &table);
    let test_gold: Vec<Vec<usize>> = test_sentences.iter().map(|s| s.labels.clone()).collect();

    let mut fold_f1: Vec<Vec<f64>> = Vec::new();
    for (arch, topology) in &archs {
        let params0 = init_params(topology, 25)?;
        let mut scores = Vec::new();
        for fold in 0..split.folds.len() {
            let lambda = select_l2_on_fold(&params0, &full_set, scheme, &config, &split, fold)?;
            let train_idx = split.train_indices(fold);
            let (train_s, train_t) =
                subset_corpus(&corpus.sentences, Some(&corpus.trees), &train_idx);
            let train_set = TrainSet::new(&train_s, train_t.as_deref(), &table);
            let mut cfg = config.clone();
            cfg.l2 = lambda;
            let (trained, _) = sgd_train(&params0, &train_set, &cfg)?;
            let pred = predict_corpus(&trained, &test_set, config.activation)?;
            let f1 = evaluate_corpus(&pred, &test_gold, scheme)
                .overall(OverlapMetric::Proportional)
                .f1;
            println!("[{arch}] fold {fold}: lambda {lambda:e}, test proportional F1 {f1:.4}");
            scores.push(f1);
        }
        fold_f1.push(scores);
    }

    let (t, significant) = paired_t_test(&fold_f1[1], &fold_f1[0])?;
    println!(
        "\nbi-recursive vs bi-recurrent on per-fold proportional F1: t = {t:.3}, {}",
        if significant {
            "significant at alpha = 0.05"
        } else {
            "not significant at alpha = 0.05"
        }
    );
    Ok(())
}
