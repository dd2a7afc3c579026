//! BIO decoding and the two overlap metrics on small fixtures, plus a
//! paired t-test between two score vectors.
//!
//! Run with: cargo run --example span_evaluation

use structlab::corpus::LabelScheme;
use structlab::metrics::{
    binary_overlap, decode_bio, evaluate_corpus, paired_t_test, proportional_overlap,
};

fn main() -> structlab::Result<()> {
    let scheme = LabelScheme::from_class_list("DSE")?;
    let b = scheme.label_id("B_DSE").unwrap();
    let i = scheme.label_id("I_DSE").unwrap();
    let o = scheme.label_id("O").unwrap();

    // gold: one span over tokens 1..4; prediction overlaps it partially and
    // invents a second span
    let gold_labels = vec![o, b, i, i, o, o, o];
    let pred_labels = vec![o, o, b, i, i, o, b];
    let gold = decode_bio(&gold_labels, &scheme);
    let pred = decode_bio(&pred_labels, &scheme);
    println!("gold spans: {gold:?}");
    println!("pred spans: {pred:?}");

    let bin = binary_overlap(&pred, &gold);
    let prop = proportional_overlap(&pred, &gold);
    println!(
        "binary:       P {:.3}  R {:.3}  F1 {:.3}   (any overlap counts in full)",
        bin.precision, bin.recall, bin.f1
    );
    println!(
        "proportional: P {:.3}  R {:.3}  F1 {:.3}   (credit = overlapping fraction)",
        prop.precision, prop.recall, prop.f1
    );

    // corpus-level CSV report, pooled over sentences
    let evaluation = evaluate_corpus(
        &[pred_labels.clone(), vec![b, i, o]],
        &[gold_labels.clone(), vec![b, i, o]],
        &scheme,
    );
    println!("\ncorpus report:\n{}", evaluation.to_csv(&scheme));

    // per-fold F1 scores from two systems, compared with a paired t-test
    let system_a = [0.62, 0.58, 0.64, 0.61, 0.59, 0.63, 0.60, 0.62, 0.61, 0.60];
    let system_b = [0.55, 0.54, 0.58, 0.56, 0.52, 0.57, 0.55, 0.56, 0.54, 0.53];
    let (t, significant) = paired_t_test(&system_a, &system_b)?;
    println!(
        "paired t-test over 10 folds: t = {t:.3}, {}",
        if significant {
            "significant at alpha = 0.05"
        } else {
            "not significant at alpha = 0.05"
        }
    );
    Ok(())
}
