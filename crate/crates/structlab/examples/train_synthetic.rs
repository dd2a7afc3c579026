//! Generates a structure-sensitive corpus, trains the combined architecture
//! on it, and reports token accuracy plus overlap metrics on held-out
//! sentences.
//!
//! Run with: cargo run --release --example train_synthetic

use structlab::corpus::{corpus_vocab, generate_structural_corpus, random_embeddings};
use structlab::metrics::{evaluate_corpus, token_accuracy, OverlapMetric};
use structlab::model::{init_params, Activation, Topology};
use structlab::train::{predict_corpus, sgd_train, TrainConfig, TrainSet};

fn main() -> structlab::Result<()> {
    let train = generate_structural_corpus(400, 1);
    let test = generate_structural_corpus(100, 2);
    let mut vocab = corpus_vocab(&train.sentences);
    vocab.extend(corpus_vocab(&test.sentences));
    vocab.sort();
    vocab.dedup();
    let table = random_embeddings(&vocab, 10, 3);
    println!(
        "train {} / test {} sentences over {} token types",
        train.sentences.len(),
        test.sentences.len(),
        vocab.len()
    );

    let topology = Topology::Combined {
        input: 10,
        downward: 10,
        forward: 10,
        backward: 10,
        n_labels: train.scheme.n_labels(),
    };
    let params = init_params(&topology, 4)?;
    let config = TrainConfig {
        learning_rate: 0.05,
        epochs: 150,
        minibatch_size: 4,
        l2: 0.0,
        seed: 5,
        activation: Activation::Sigmoid,
        ..TrainConfig::default()
    };
    let train_set = TrainSet::new(&train.sentences, Some(&train.trees), &table);
    let (trained, trace) = sgd_train(&params, &train_set, &config)?;
    println!(
        "trained combined ({}) for {} epochs: loss {:.4} -> {:.4}",
        topology.dims_string(),
        config.epochs,
        trace[0],
        trace[trace.len() - 1]
    );

    for (name, corpus) in [("train", &train), ("test", &test)] {
        let set = TrainSet::new(&corpus.sentences, Some(&corpus.trees), &table);
        let pred = predict_corpus(&trained, &set, config.activation)?;
        let gold: Vec<Vec<usize>> = corpus.sentences.iter().map(|s| s.labels.clone()).collect();
        let evaluation = evaluate_corpus(&pred, &gold, &corpus.scheme);
        let prop = evaluation.overall(OverlapMetric::Proportional);
        let bin = evaluation.overall(OverlapMetric::Binary);
        println!(
            "{name:>5}: token accuracy {:.4} | proportional P/R/F1 {:.3}/{:.3}/{:.3} | binary P/R/F1 {:.3}/{:.3}/{:.3}",
            token_accuracy(&pred, &gold),
            prop.precision,
            prop.recall,
            prop.f1,
            bin.precision,
            bin.recall,
            bin.f1,
        );
    }
    Ok(())
}
