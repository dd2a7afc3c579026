//! Parses a binary parse tree, runs the bidirectional recursive forward
//! pass, and prints every node's upward/downward representation norms plus
//! the per-leaf label distributions and the root-level diagnostic
//! classifier.
//!
//! Run with: cargo run --example tree_representations

use structlab::corpus::random_embeddings;
use structlab::model::{init_params, Activation, ModelParams, Topology};
use structlab::network::{forward_root_classifier, forward_tree};
use structlab::tree::{parse_sexpr, NodeKind};

fn norm(v: &structlab::Vector) -> f64 {
    v.data().iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn main() -> structlab::Result<()> {
    let sexpr = "(S (NP (DT the) (NN committee)) (VP (VBZ has) (VBN refused)))";
    let tree = parse_sexpr(sexpr)?;
    println!("tree: {sexpr}");
    println!("tokens: {}", tree.tokens().join(" "));

    let vocab: Vec<String> = tree.tokens().to_vec();
    let table = random_embeddings(&vocab, 8, 7);
    let inputs: Vec<_> = tree
        .tokens()
        .iter()
        .map(|t| table.lookup(t).clone())
        .collect();

    let topology = Topology::BiRecursive {
        input: 8,
        downward: 6,
        n_labels: 3,
    };
    let ModelParams::BiRecursive(params) = init_params(&topology, 11)? else {
        unreachable!()
    };
    let record = forward_tree(&params, &inputs, &tree, Activation::Rectifier)?;

    println!("\nupward pass visits children first, downward pass parents first:");
    for id in tree.upward_order() {
        let node = tree.node(id);
        let what = match node.kind {
            NodeKind::Leaf { token } => format!("leaf {:?}", tree.tokens()[token]),
            NodeKind::Internal { left, right } => format!("node ({left},{right})"),
        };
        println!(
            "  #{id:<2} {what:<18} |x_up| = {:-7.4}  |x_down| = {:-7.4}",
            norm(&record.x_up[id]),
            norm(&record.x_down[id]),
        );
    }

    println!("\nper-leaf output distributions (untrained, so near uniform):");
    for (pos, y) in record.outputs.iter().enumerate() {
        let probs: Vec<String> = y.data().iter().map(|p| format!("{p:.3}")).collect();
        println!("  {:<10} [{}]", tree.tokens()[pos], probs.join(", "));
    }

    let y_root = forward_root_classifier(&params, &inputs, &tree, Activation::Rectifier)?;
    let probs: Vec<String> = y_root.data().iter().map(|p| format!("{p:.3}")).collect();
    println!(
        "\nroot-level classifier distribution: [{}]",
        probs.join(", ")
    );
    Ok(())
}
