//! Trains the bidirectional recurrent network on a small hand-written
//! corpus and prints its BIO predictions token by token.
//!
//! Run with: cargo run --example sequence_labeling

use structlab::corpus::{parse_corpus, parse_embeddings, LabelScheme};
use structlab::model::{init_params, Activation, Topology};
use structlab::train::{predict_corpus, sgd_train, TrainConfig, TrainSet};

const CORPUS: &str = "\
the\tO
committee\tO
has\tB_DSE
refused\tI_DSE
to\tI_DSE
comment\tI_DSE
.\tO

critics\tO
as\tB_ESE
usual\tI_ESE
welcomed\tB_DSE
the\tO
decision\tO
.\tO

the\tO
committee\tO
welcomed\tB_DSE
the\tO
critics\tO
.\tO
";

fn main() -> structlab::Result<()> {
    let scheme = LabelScheme::from_class_list("DSE,ESE")?;
    let mut sentences = parse_corpus(CORPUS, &scheme)?;

    // one embedding row per vocabulary item, three dimensions are plenty here
    let table = parse_embeddings(
        "the 0.1 0.0 0.0\ncommittee 0.0 0.2 0.1\nhas 0.3 -0.1 0.0\nrefused -0.2 0.3 0.1\n\
         to 0.0 0.1 -0.2\ncomment 0.2 0.2 0.2\n. -0.1 -0.1 -0.1\ncritics 0.1 -0.3 0.2\n\
         as 0.3 0.1 -0.1\nusual -0.3 -0.2 0.3\nwelcomed 0.2 -0.1 -0.3\ndecision 0.0 -0.2 -0.2\n",
    )?;
    table.bind(&mut sentences);

    let topology = Topology::BiRecurrent {
        input: 3,
        forward: 8,
        backward: 8,
        n_labels: scheme.n_labels(),
    };
    let params = init_params(&topology, 1)?;
    let config = TrainConfig {
        learning_rate: 0.1,
        epochs: 400,
        minibatch_size: 3,
        l2: 0.0,
        seed: 2,
        activation: Activation::Sigmoid,
        ..TrainConfig::default()
    };
    let set = TrainSet::new(&sentences, None, &table);
    let (trained, _) = sgd_train(&params, &set, &config)?;
    let predictions = predict_corpus(&trained, &set, config.activation)?;

    println!("token           gold       predicted");
    println!("{:-<42}", "");
    for (sentence, pred) in sentences.iter().zip(&predictions) {
        for ((token, &gold), &label) in sentence.tokens.iter().zip(&sentence.labels).zip(pred) {
            println!(
                "{:<15} {:<10} {}",
                token,
                scheme.label_name(gold),
                scheme.label_name(label)
            );
        }
        println!();
    }
    Ok(())
}
