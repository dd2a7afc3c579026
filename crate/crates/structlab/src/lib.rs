//! structlab: token-level sequence labeling with recurrent and tree-structured
//! neural architectures.
//!
//! The crate implements three architectures over fixed word embeddings:
//!
//! - a bidirectional Elman recurrent network over the token sequence,
//! - a bidirectional recursive network over a binary parse tree (an upward
//!   pass composing subtree representations, plus a downward pass carrying
//!   information about the rest of the tree to every leaf),
//! - a combined architecture feeding both views into one output layer.
//!
//! Around the networks sit a minimal dense linear-algebra kernel
//! ([`numeric`]), a Penn-Treebank-style tree reader ([`tree`]), corpus and
//! embedding loaders plus a synthetic structure-sensitive corpus generator
//! ([`corpus`]), a minibatch SGD trainer with finite-difference gradient
//! checking ([`train`]), and BIO span decoding with binary/proportional
//! overlap evaluation ([`metrics`]).
//!
//! Everything is deterministic: seeded runs produce byte-identical models,
//! predictions, and reports. See the `examples/` directory for one runnable
//! example per capability, and the `structlab` binary for the subcommand
//! interface (`train`, `predict`, `eval`, `gradcheck`, `synth`, `crossval`).

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod model;
pub mod network;
pub mod numeric;
pub mod train;
pub mod tree;

pub use error::{Error, Result};
pub use model::{Activation, Arch, Gradients, ModelParams, Topology};
pub use numeric::{Matrix, Vector};
