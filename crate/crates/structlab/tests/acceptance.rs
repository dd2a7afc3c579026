//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers (visible under `--nocapture`).
//!
//! Run with: cargo test -p structlab --test acceptance -- --nocapture

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use structlab::corpus::{
    ambiguous_token_strings, corpus_vocab, generate_structural_corpus, random_embeddings,
    MemorizationBaseline,
};
use structlab::metrics::{binary_overlap, paired_t_test, proportional_overlap, Prf, Span};
use structlab::model::{
    init_params, load_model, save_model, Activation, Arch, ModelParams, Topology,
};
use structlab::network::forward_sequence;
use structlab::numeric::{softmax, Vector};
use structlab::train::{grad_check, predict_corpus, sgd_train, TrainConfig, TrainSet};

/// Criterion 1: analytic gradients match central finite differences
/// (eps = 1e-5) on 100 seeded random instances per architecture, with
/// dims <= 5, sentences <= 6 tokens, and trees <= 6 leaves. Sigmoid must
/// stay under 1e-6; rectifier under 1e-4 after kink exclusion.
#[test]
fn acceptance_1_gradient_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7_001);
    for arch in [Arch::BiRecurrent, Arch::BiRecursive, Arch::Combined] {
        let mut worst_sigmoid = 0.0_f64;
        let mut worst_rectifier = 0.0_f64;
        for instance in 0..100 {
            let mut dim = |lo: usize| rng.gen_range(lo..=5);
            let topology = match arch {
                Arch::BiRecurrent => Topology::BiRecurrent {
                    input: dim(1),
                    forward: dim(1),
                    backward: dim(1),
                    n_labels: dim(2),
                },
                Arch::BiRecursive => Topology::BiRecursive {
                    input: dim(1),
                    downward: dim(1),
                    n_labels: dim(2),
                },
                Arch::Combined => Topology::Combined {
                    input: dim(1),
                    downward: dim(1),
                    forward: dim(1),
                    backward: dim(1),
                    n_labels: dim(2),
                },
            };
            let seed = 10_000 + instance;
            let sig = grad_check(&topology, seed, Activation::Sigmoid, 1e-5).unwrap();
            let rect = grad_check(&topology, seed, Activation::Rectifier, 1e-5).unwrap();
            worst_sigmoid = worst_sigmoid.max(sig.max_rel_error);
            worst_rectifier = worst_rectifier.max(rect.max_rel_error);
        }
        assert!(
            worst_sigmoid < 1e-6,
            "{arch}: sigmoid max relative error {worst_sigmoid}"
        );
        assert!(
            worst_rectifier < 1e-4,
            "{arch}: rectifier max relative error {worst_rectifier}"
        );
        println!(
            "  {arch}: sigmoid {worst_sigmoid:.3e}, rectifier {worst_rectifier:.3e} over 100 instances"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 120,
        "took {elapsed:?}, budget 2 minutes"
    );
    println!("acceptance 1 (gradient oracle): PASS in {elapsed:?}");
}

// Exhaustive token-level reference for the overlap metrics: every credit is
// recomputed by iterating token positions.
fn oracle_overlap(pred: &[Span], gold: &[Span], proportional: bool) -> Prf {
    let mut sorted_pred = pred.to_vec();
    sorted_pred.sort_unstable();
    let mut sorted_gold = gold.to_vec();
    sorted_gold.sort_unstable();
    let shared_tokens = |a: &Span, b: &Span| -> usize {
        (a.start..a.end)
            .filter(|t| (b.start..b.end).contains(t))
            .count()
    };
    let credit = |s: &Span, others: &[Span]| -> f64 {
        let mut best = 0.0_f64;
        for o in others {
            let shared = shared_tokens(s, o);
            let c = if proportional {
                shared as f64 / s.len() as f64
            } else if shared > 0 {
                1.0
            } else {
                0.0
            };
            best = best.max(c);
        }
        best
    };
    let pred_credit: f64 = sorted_pred.iter().map(|p| credit(p, &sorted_gold)).sum();
    let gold_credit: f64 = sorted_gold.iter().map(|g| credit(g, &sorted_pred)).sum();
    let precision = if sorted_pred.is_empty() {
        0.0
    } else {
        pred_credit / sorted_pred.len() as f64
    };
    let recall = if sorted_gold.is_empty() {
        0.0
    } else {
        gold_credit / sorted_gold.len() as f64
    };
    Prf::from_pr(precision, recall)
}

/// Criterion 2: binary and proportional overlap agree exactly with the
/// exhaustive token-level oracle on 1000 random span-set pairs.
#[test]
fn acceptance_2_metric_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7_002);
    let random_set = |rng: &mut ChaCha8Rng| -> Vec<Span> {
        let n = rng.gen_range(0..=20);
        (0..n)
            .map(|_| {
                let start = rng.gen_range(0..49);
                let len = rng.gen_range(1..=(50 - start).min(12));
                Span::new(0, start, start + len)
            })
            .collect()
    };
    for _ in 0..1000 {
        let pred = random_set(&mut rng);
        let gold = random_set(&mut rng);
        let got_bin = binary_overlap(&pred, &gold);
        let want_bin = oracle_overlap(&pred, &gold, false);
        assert_eq!(
            got_bin, want_bin,
            "binary disagrees on {pred:?} vs {gold:?}"
        );
        let got_prop = proportional_overlap(&pred, &gold);
        let want_prop = oracle_overlap(&pred, &gold, true);
        assert_eq!(
            got_prop, want_prop,
            "proportional disagrees on {pred:?} vs {gold:?}"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 10,
        "took {elapsed:?}, budget 10 seconds"
    );
    println!("acceptance 2 (metric oracle): PASS in {elapsed:?}");
}

/// Criterion 3: the combined architecture with topology (10,10,10,10)
/// overfits a 200-sentence synthetic structural corpus to at least 99%
/// training token accuracy at lr = 0.05, no regularization, within 200
/// epochs.
#[test]
fn acceptance_3_overfit_check() {
    let start = Instant::now();
    let corpus = generate_structural_corpus(200, 11);
    let vocab = corpus_vocab(&corpus.sentences);
    let table = random_embeddings(&vocab, 10, 12);
    let topology = Topology::Combined {
        input: 10,
        downward: 10,
        forward: 10,
        backward: 10,
        n_labels: corpus.scheme.n_labels(),
    };
    let params = init_params(&topology, 13).unwrap();
    let config = TrainConfig {
        learning_rate: 0.05,
        epochs: 200,
        minibatch_size: 4,
        l2: 0.0,
        seed: 14,
        activation: Activation::Sigmoid,
        ..TrainConfig::default()
    };
    let set = TrainSet::new(&corpus.sentences, Some(&corpus.trees), &table);
    let (trained, _) = sgd_train(&params, &set, &config).unwrap();
    let pred = predict_corpus(&trained, &set, config.activation).unwrap();
    let mut total = 0usize;
    let mut correct = 0usize;
    for (p, s) in pred.iter().zip(&corpus.sentences) {
        for (a, b) in p.iter().zip(&s.labels) {
            total += 1;
            if a == b {
                correct += 1;
            }
        }
    }
    let accuracy = correct as f64 / total as f64;
    assert!(
        accuracy >= 0.99,
        "training token accuracy {accuracy:.4} below 99%"
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 300,
        "took {elapsed:?}, budget 5 minutes"
    );
    println!("acceptance 3 (overfit check): PASS in {elapsed:?} (train accuracy {accuracy:.4})");
}

/// Criterion 4: on a fresh structural corpus (2000 train / 500 test), the
/// bi-recursive model reaches at least 95% test accuracy on ambiguous
/// tokens while the token-memorization baseline stays below 95% on the
/// same tokens, so the labels demonstrably require structural context.
#[test]
fn acceptance_4_structure_necessity() {
    let start = Instant::now();
    let train = generate_structural_corpus(2000, 31);
    let test = generate_structural_corpus(500, 32);
    let mut vocab = corpus_vocab(&train.sentences);
    vocab.extend(corpus_vocab(&test.sentences));
    vocab.sort();
    vocab.dedup();
    let table = random_embeddings(&vocab, 10, 33);

    let ambiguous = ambiguous_token_strings(&train.sentences);
    assert!(!ambiguous.is_empty());
    let baseline = MemorizationBaseline::fit(&train.sentences);
    let baseline_acc = baseline.accuracy_on(&test.sentences, &ambiguous);
    assert!(
        baseline_acc < 0.95,
        "memorization baseline reaches {baseline_acc:.4} on ambiguous tokens"
    );

    let topology = Topology::BiRecursive {
        input: 10,
        downward: 16,
        n_labels: train.scheme.n_labels(),
    };
    let params = init_params(&topology, 34).unwrap();
    let config = TrainConfig {
        learning_rate: 0.05,
        epochs: 60,
        minibatch_size: 8,
        l2: 0.0,
        seed: 35,
        activation: Activation::Sigmoid,
        ..TrainConfig::default()
    };
    let train_set = TrainSet::new(&train.sentences, Some(&train.trees), &table);
    let (trained, _) = sgd_train(&params, &train_set, &config).unwrap();
    let test_set = TrainSet::new(&test.sentences, Some(&test.trees), &table);
    let pred = predict_corpus(&trained, &test_set, config.activation).unwrap();

    let mut total = 0usize;
    let mut correct = 0usize;
    for (si, sentence) in test.sentences.iter().enumerate() {
        for (ti, token) in sentence.tokens.iter().enumerate() {
            if ambiguous.contains(token) {
                total += 1;
                if pred[si][ti] == sentence.labels[ti] {
                    correct += 1;
                }
            }
        }
    }
    let model_acc = correct as f64 / total as f64;
    assert!(
        model_acc >= 0.95,
        "bi-recursive reaches only {model_acc:.4} on ambiguous test tokens"
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 600,
        "took {elapsed:?}, budget 10 minutes"
    );
    println!(
        "acceptance 4 (structure necessity): PASS in {elapsed:?} \
         (bi-recursive {model_acc:.4} vs baseline {baseline_acc:.4} on {total} ambiguous tokens)"
    );
}

/// Criterion 5: architectural invariants. Perturbing backward-chain
/// parameters leaves forward states bitwise unchanged; leaf upward states
/// equal the embeddings exactly; the root downward state is exactly
/// f(V x_up(root) + b); softmax outputs normalize within 1e-12; and the
/// same seed yields byte-identical model files.
#[test]
fn acceptance_5_architectural_invariants() {
    let start = Instant::now();

    // forward/backward independence
    let topology = Topology::BiRecurrent {
        input: 4,
        forward: 5,
        backward: 5,
        n_labels: 3,
    };
    let ModelParams::BiRecurrent(p) = init_params(&topology, 51).unwrap() else {
        panic!()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    let inputs: Vec<Vector> = (0..6)
        .map(|_| Vector::new((0..4).map(|_| rng.gen_range(-1.0..=1.0)).collect()))
        .collect();
    let base = forward_sequence(&p, &inputs, Activation::Rectifier).unwrap();
    let mut perturbed = p.clone();
    for m in [&mut perturbed.w_bwd, &mut perturbed.v_bwd] {
        for x in m.data_mut() {
            *x += 3.5;
        }
    }
    for x in perturbed.b_bwd.data_mut() {
        *x -= 1.25;
    }
    let moved = forward_sequence(&perturbed, &inputs, Activation::Rectifier).unwrap();
    for (a, b) in base.h_fwd.iter().zip(&moved.h_fwd) {
        let bits_a: Vec<u64> = a.data().iter().map(|x| x.to_bits()).collect();
        let bits_b: Vec<u64> = b.data().iter().map(|x| x.to_bits()).collect();
        assert_eq!(
            bits_a, bits_b,
            "forward states moved under backward perturbation"
        );
    }
    let mut perturbed = p.clone();
    for x in perturbed.w_fwd.data_mut() {
        *x -= 2.0;
    }
    let moved = forward_sequence(&perturbed, &inputs, Activation::Rectifier).unwrap();
    for (a, b) in base.h_bwd.iter().zip(&moved.h_bwd) {
        assert_eq!(a, b, "backward states moved under forward perturbation");
    }

    // leaf upward identity and root downward identity
    let tree = structlab::tree::parse_sexpr("(S (A (B a) (C b)) (D c))").unwrap();
    let rec_topology = Topology::BiRecursive {
        input: 4,
        downward: 3,
        n_labels: 3,
    };
    let ModelParams::BiRecursive(rp) = init_params(&rec_topology, 53).unwrap() else {
        panic!()
    };
    let leaf_inputs: Vec<Vector> = (0..3)
        .map(|_| Vector::new((0..4).map(|_| rng.gen_range(-1.0..=1.0)).collect()))
        .collect();
    let record =
        structlab::network::forward_tree(&rp, &leaf_inputs, &tree, Activation::Rectifier).unwrap();
    for (pos, &leaf) in tree.leaf_order().iter().enumerate() {
        assert_eq!(
            record.x_up[leaf], leaf_inputs[pos],
            "leaf upward state is not the embedding"
        );
    }
    let root = tree.root();
    let expected_root_down = Activation::Rectifier.apply(
        &structlab::numeric::affine(&rp.down_from_up, &record.x_up[root], &rp.b_down).unwrap(),
    );
    assert_eq!(
        record.x_down[root], expected_root_down,
        "root downward identity violated"
    );

    // softmax normalization
    let mut rng2 = ChaCha8Rng::seed_from_u64(54);
    for _ in 0..1000 {
        let dim = rng2.gen_range(1..=9);
        let v = Vector::new((0..dim).map(|_| rng2.gen_range(-40.0..=40.0)).collect());
        let y = softmax(&v);
        assert!(y.data().iter().all(|&x| x >= 0.0));
        assert!((y.data().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    // determinism: same seed, byte-identical model files
    let dir = tempfile::tempdir().unwrap();
    let corpus = generate_structural_corpus(30, 55);
    let vocab = corpus_vocab(&corpus.sentences);
    let table = random_embeddings(&vocab, 6, 56);
    let topology = Topology::Combined {
        input: 6,
        downward: 5,
        forward: 4,
        backward: 4,
        n_labels: corpus.scheme.n_labels(),
    };
    let config = TrainConfig {
        learning_rate: 0.05,
        epochs: 5,
        minibatch_size: 8,
        seed: 57,
        activation: Activation::Rectifier,
        ..TrainConfig::default()
    };
    let set = TrainSet::new(&corpus.sentences, Some(&corpus.trees), &table);
    let mut files = Vec::new();
    for run in 0..2 {
        let params = init_params(&topology, 58).unwrap();
        let (trained, _) = sgd_train(&params, &set, &config).unwrap();
        let path = dir.path().join(format!("model{run}.txt"));
        save_model(&path, &trained, config.activation).unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(
        files[0], files[1],
        "same seed produced different model bytes"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget 1 minute");
    println!("acceptance 5 (architectural invariants): PASS in {elapsed:?}");
}

/// Criterion 6: the paired t-test fixture. Ten differences with mean 1.0
/// and sd 1.0 give t = sqrt(10) = 3.162 > 2.262 (the two-sided 5% critical
/// value at df = 9), hence significant; identical score vectors are not.
#[test]
fn acceptance_6_t_test_fixture() {
    let a = vec![-0.5, 2.5, -0.5, 2.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    let b = vec![0.0; 10];
    let (t, significant) = paired_t_test(&a, &b).unwrap();
    assert!((t - 10.0_f64.sqrt()).abs() < 1e-12, "t = {t}");
    assert!(t > 2.262);
    assert!(significant);

    let same = vec![0.3, 0.5, 0.9, 0.1];
    let (t0, significant0) = paired_t_test(&same, &same).unwrap();
    assert_eq!(t0, 0.0);
    assert!(!significant0);
    println!("acceptance 6 (t-test fixture): PASS (t = {t:.3} > 2.262)");
}

/// Criterion 7: the reference topologies — bi-recurrent (50,75,75),
/// bi-recursive (50,150), combined (50,50,50,50) — construct, train one
/// epoch on synthetic data, serialize, and reload byte-identically.
#[test]
fn acceptance_7_topology_conformance() {
    let start = Instant::now();
    let corpus = generate_structural_corpus(50, 71);
    let vocab = corpus_vocab(&corpus.sentences);
    let table = random_embeddings(&vocab, 50, 72);
    let dir = tempfile::tempdir().unwrap();
    let n_labels = corpus.scheme.n_labels();
    let topologies = [
        Topology::BiRecurrent {
            input: 50,
            forward: 75,
            backward: 75,
            n_labels,
        },
        Topology::BiRecursive {
            input: 50,
            downward: 150,
            n_labels,
        },
        Topology::Combined {
            input: 50,
            downward: 50,
            forward: 50,
            backward: 50,
            n_labels,
        },
    ];
    for (i, topology) in topologies.iter().enumerate() {
        let params = init_params(topology, 73).unwrap();
        let config = TrainConfig {
            learning_rate: 0.01,
            epochs: 1,
            minibatch_size: 80,
            seed: 74,
            activation: Activation::Rectifier,
            ..TrainConfig::default()
        };
        let set = TrainSet::new(&corpus.sentences, Some(&corpus.trees), &table);
        let (trained, _) = sgd_train(&params, &set, &config).unwrap();
        assert_eq!(trained.topology().unwrap(), *topology);

        let path = dir.path().join(format!("model{i}.txt"));
        save_model(&path, &trained, config.activation).unwrap();
        let (reloaded, activation) = load_model(&path).unwrap();
        assert_eq!(reloaded, trained, "reload changed parameters");
        assert_eq!(activation, Activation::Rectifier);
        let path2 = dir.path().join(format!("model{i}-resaved.txt"));
        save_model(&path2, &reloaded, activation).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap(),
            "resave is not byte-identical for {}",
            topology.dims_string()
        );
        println!(
            "  {} ({}): serialize/reload byte-identical",
            topology.arch(),
            topology.dims_string()
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 120,
        "took {elapsed:?}, budget 2 minutes"
    );
    println!("acceptance 7 (topology conformance): PASS in {elapsed:?}");
}
