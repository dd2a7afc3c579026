//! Forward and backward passes for the three architectures.
//!
//! The recurrent network runs a forward and a backward hidden chain over the
//! token sequence; the two chains are independent of each other until the
//! output layer. The recursive network runs an upward pass over the parse
//! tree (leaves carry their embeddings unchanged) and then a downward pass
//! from the root, so every leaf sees a summary of its subtree context and of
//! the rest of the tree. The combined architecture feeds both views into a
//! single output layer per token.
//!
//! Embeddings are inputs, not parameters: they receive no gradient.
//!
//! All functions here are pure; per-sentence calls may run concurrently on
//! shared parameters.

use crate::error::{Error, Result};
use crate::model::{
    Activation, Arch, CombinedParams, Gradients, ModelParams, RecurrentParams, RecursiveParams,
};
use crate::numeric::{affine, matvec, matvec_transposed, softmax, Matrix, Vector};
use crate::tree::{NodeKind, ParseTree};

/// Per-sentence cache of hidden states and output distributions.
///
/// `h_fwd`/`h_bwd` are indexed by token position, `x_up`/`x_down` by tree
/// node id, and `outputs` by token position.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationRecord {
    pub h_fwd: Vec<Vector>,
    pub h_bwd: Vec<Vector>,
    pub x_up: Vec<Vector>,
    pub x_down: Vec<Vector>,
    pub outputs: Vec<Vector>,
}

impl ActivationRecord {
    fn empty() -> Self {
        ActivationRecord {
            h_fwd: Vec::new(),
            h_bwd: Vec::new(),
            x_up: Vec::new(),
            x_down: Vec::new(),
            outputs: Vec::new(),
        }
    }
}

// Borrowed views shared between the recurrent and combined architectures.
struct SeqView<'a> {
    w_fwd: &'a Matrix,
    v_fwd: &'a Matrix,
    b_fwd: &'a Vector,
    w_bwd: &'a Matrix,
    v_bwd: &'a Matrix,
    b_bwd: &'a Vector,
}

struct TreeView<'a> {
    up_left: &'a Matrix,
    up_right: &'a Matrix,
    b_up: &'a Vector,
    down_left: &'a Matrix,
    down_right: &'a Matrix,
    down_from_up: &'a Matrix,
    b_down: &'a Vector,
}

struct SeqGrads<'a> {
    w_fwd: &'a mut Matrix,
    v_fwd: &'a mut Matrix,
    b_fwd: &'a mut Vector,
    w_bwd: &'a mut Matrix,
    v_bwd: &'a mut Matrix,
    b_bwd: &'a mut Vector,
}

struct TreeGrads<'a> {
    up_left: &'a mut Matrix,
    up_right: &'a mut Matrix,
    b_up: &'a mut Vector,
    down_left: &'a mut Matrix,
    down_right: &'a mut Matrix,
    down_from_up: &'a mut Matrix,
    b_down: &'a mut Vector,
}

impl RecurrentParams {
    fn seq(&self) -> SeqView<'_> {
        SeqView {
            w_fwd: &self.w_fwd,
            v_fwd: &self.v_fwd,
            b_fwd: &self.b_fwd,
            w_bwd: &self.w_bwd,
            v_bwd: &self.v_bwd,
            b_bwd: &self.b_bwd,
        }
    }
}

impl RecursiveParams {
    fn tree(&self) -> TreeView<'_> {
        TreeView {
            up_left: &self.up_left,
            up_right: &self.up_right,
            b_up: &self.b_up,
            down_left: &self.down_left,
            down_right: &self.down_right,
            down_from_up: &self.down_from_up,
            b_down: &self.b_down,
        }
    }
}

impl CombinedParams {
    fn seq(&self) -> SeqView<'_> {
        SeqView {
            w_fwd: &self.w_fwd,
            v_fwd: &self.v_fwd,
            b_fwd: &self.b_fwd,
            w_bwd: &self.w_bwd,
            v_bwd: &self.v_bwd,
            b_bwd: &self.b_bwd,
        }
    }

    fn tree(&self) -> TreeView<'_> {
        TreeView {
            up_left: &self.up_left,
            up_right: &self.up_right,
            b_up: &self.b_up,
            down_left: &self.down_left,
            down_right: &self.down_right,
            down_from_up: &self.down_from_up,
            b_down: &self.b_down,
        }
    }
}

fn require_nonempty(inputs: &[Vector]) -> Result<()> {
    if inputs.is_empty() {
        Err(Error::config("cannot run a network over an empty sentence"))
    } else {
        Ok(())
    }
}

fn check_tree_alignment(tree: &ParseTree, inputs: &[Vector]) -> Result<()> {
    if tree.leaf_count() != inputs.len() {
        return Err(Error::Alignment(format!(
            "tree has {} leaves but sentence has {} tokens",
            tree.leaf_count(),
            inputs.len()
        )));
    }
    Ok(())
}

/// Forward and backward hidden chains: the forward state at t sees tokens
/// up to t, the backward state sees tokens from t on. Both chains start
/// from zero vectors outside the sentence.
fn sequence_states(
    v: &SeqView<'_>,
    inputs: &[Vector],
    f: Activation,
) -> Result<(Vec<Vector>, Vec<Vector>)> {
    let t_max = inputs.len();
    let mut h_fwd: Vec<Vector> = Vec::with_capacity(t_max);
    for (t, x) in inputs.iter().enumerate() {
        let mut z = affine(v.w_fwd, x, v.b_fwd)?;
        if t > 0 {
            z.add_assign(&matvec(v.v_fwd, &h_fwd[t - 1])?);
        }
        h_fwd.push(f.apply(&z));
    }
    let mut h_bwd: Vec<Vector> = vec![Vector::zeros(0); t_max];
    for t in (0..t_max).rev() {
        let mut z = affine(v.w_bwd, &inputs[t], v.b_bwd)?;
        if t + 1 < t_max {
            z.add_assign(&matvec(v.v_bwd, &h_bwd[t + 1])?);
        }
        h_bwd[t] = f.apply(&z);
    }
    Ok((h_fwd, h_bwd))
}

/// Upward then downward tree states. Leaves take their embedding as the
/// upward representation; the root's downward state is built from its own
/// upward state alone.
fn tree_states(
    v: &TreeView<'_>,
    inputs: &[Vector],
    tree: &ParseTree,
    f: Activation,
) -> Result<(Vec<Vector>, Vec<Vector>)> {
    let n = tree.nodes().len();
    let mut x_up: Vec<Vector> = vec![Vector::zeros(0); n];
    for id in tree.upward_order() {
        x_up[id] = match tree.node(id).kind {
            NodeKind::Leaf { token } => inputs[token].clone(),
            NodeKind::Internal { left, right } => {
                let mut z = affine(v.up_left, &x_up[left], v.b_up)?;
                z.add_assign(&matvec(v.up_right, &x_up[right])?);
                f.apply(&z)
            }
        };
    }
    let mut x_down: Vec<Vector> = vec![Vector::zeros(0); n];
    for id in tree.downward_order() {
        let node = tree.node(id);
        let mut z = affine(v.down_from_up, &x_up[id], v.b_down)?;
        if let Some(parent) = node.parent {
            let w = if node.is_left_child == Some(true) {
                v.down_left
            } else {
                v.down_right
            };
            z.add_assign(&matvec(w, &x_down[parent])?);
        }
        x_down[id] = f.apply(&z);
    }
    Ok((x_up, x_down))
}

/// Bidirectional recurrent forward pass over one sentence.
pub fn forward_sequence(
    p: &RecurrentParams,
    inputs: &[Vector],
    f: Activation,
) -> Result<ActivationRecord> {
    require_nonempty(inputs)?;
    let (h_fwd, h_bwd) = sequence_states(&p.seq(), inputs, f)?;
    let mut outputs = Vec::with_capacity(inputs.len());
    for t in 0..inputs.len() {
        let mut z = affine(&p.out_fwd, &h_fwd[t], &p.b_out)?;
        z.add_assign(&matvec(&p.out_bwd, &h_bwd[t])?);
        z.add_assign(&matvec(&p.out_input, &inputs[t])?);
        outputs.push(softmax(&z));
    }
    let mut record = ActivationRecord::empty();
    record.h_fwd = h_fwd;
    record.h_bwd = h_bwd;
    record.outputs = outputs;
    Ok(record)
}

/// Bidirectional recursive forward pass over one sentence and its tree.
/// Only leaves receive output distributions.
pub fn forward_tree(
    p: &RecursiveParams,
    inputs: &[Vector],
    tree: &ParseTree,
    f: Activation,
) -> Result<ActivationRecord> {
    require_nonempty(inputs)?;
    check_tree_alignment(tree, inputs)?;
    let (x_up, x_down) = tree_states(&p.tree(), inputs, tree, f)?;
    let mut outputs = Vec::with_capacity(inputs.len());
    for &leaf in tree.leaf_order() {
        let mut z = affine(&p.out_down, &x_down[leaf], &p.b_out)?;
        z.add_assign(&matvec(&p.out_up, &x_up[leaf])?);
        outputs.push(softmax(&z));
    }
    let mut record = ActivationRecord::empty();
    record.x_up = x_up;
    record.x_down = x_down;
    record.outputs = outputs;
    Ok(record)
}

/// Combined forward pass: recurrent and recursive states feed one shared
/// output layer. The two halves share only the input embeddings.
pub fn forward_combined(
    p: &CombinedParams,
    inputs: &[Vector],
    tree: &ParseTree,
    f: Activation,
) -> Result<ActivationRecord> {
    require_nonempty(inputs)?;
    check_tree_alignment(tree, inputs)?;
    let (h_fwd, h_bwd) = sequence_states(&p.seq(), inputs, f)?;
    let (x_up, x_down) = tree_states(&p.tree(), inputs, tree, f)?;
    let mut outputs = Vec::with_capacity(inputs.len());
    for (t, &leaf) in tree.leaf_order().iter().enumerate() {
        let mut z = affine(&p.out_fwd, &h_fwd[t], &p.b_out)?;
        z.add_assign(&matvec(&p.out_bwd, &h_bwd[t])?);
        z.add_assign(&matvec(&p.out_down, &x_down[leaf])?);
        z.add_assign(&matvec(&p.out_up, &x_up[leaf])?);
        outputs.push(softmax(&z));
    }
    let mut record = ActivationRecord::empty();
    record.h_fwd = h_fwd;
    record.h_bwd = h_bwd;
    record.x_up = x_up;
    record.x_down = x_down;
    record.outputs = outputs;
    Ok(record)
}

/// Diagnostic mode reproducing the classic sentence-level recursive
/// network: one distribution from the root's upward representation.
pub fn forward_root_classifier(
    p: &RecursiveParams,
    inputs: &[Vector],
    tree: &ParseTree,
    f: Activation,
) -> Result<Vector> {
    require_nonempty(inputs)?;
    check_tree_alignment(tree, inputs)?;
    let (x_up, _) = tree_states(&p.tree(), inputs, tree, f)?;
    let z = affine(&p.out_up, &x_up[tree.root()], &p.b_out)?;
    Ok(softmax(&z))
}

/// Dispatches to the architecture's forward pass, requiring a tree exactly
/// when the architecture uses one.
pub fn forward(
    params: &ModelParams,
    inputs: &[Vector],
    tree: Option<&ParseTree>,
    f: Activation,
) -> Result<ActivationRecord> {
    match params {
        ModelParams::BiRecurrent(p) => forward_sequence(p, inputs, f),
        ModelParams::BiRecursive(p) => {
            forward_tree(p, inputs, require_tree(tree, Arch::BiRecursive)?, f)
        }
        ModelParams::Combined(p) => {
            forward_combined(p, inputs, require_tree(tree, Arch::Combined)?, f)
        }
    }
}

fn require_tree(tree: Option<&ParseTree>, arch: Arch) -> Result<&ParseTree> {
    tree.ok_or_else(|| Error::config(format!("a parse tree is required for architecture {arch}")))
}

fn elementwise_dpre(dh: &Vector, h: &Vector, f: Activation) -> Vector {
    let mut out = dh.clone();
    for (d, &hv) in out.data_mut().iter_mut().zip(h.data()) {
        *d *= f.derivative_from_output(hv);
    }
    out
}

/// Backpropagation through time over both hidden chains. `dh_fwd`/`dh_bwd`
/// carry the output layer's contribution per token on entry.
#[allow(clippy::too_many_arguments)]
fn backprop_sequence(
    v: &SeqView<'_>,
    g: &mut SeqGrads<'_>,
    inputs: &[Vector],
    h_fwd: &[Vector],
    h_bwd: &[Vector],
    mut dh_fwd: Vec<Vector>,
    mut dh_bwd: Vec<Vector>,
    f: Activation,
) {
    let t_max = inputs.len();
    // forward chain: reverse accumulation runs from the last token back
    let mut dpre_next: Option<Vector> = None;
    for t in (0..t_max).rev() {
        if let Some(dp) = &dpre_next {
            dh_fwd[t].add_assign(&matvec_transposed(v.v_fwd, dp));
        }
        let dpre = elementwise_dpre(&dh_fwd[t], &h_fwd[t], f);
        g.w_fwd.add_outer(&dpre, &inputs[t]);
        if t > 0 {
            g.v_fwd.add_outer(&dpre, &h_fwd[t - 1]);
        }
        g.b_fwd.add_assign(&dpre);
        dpre_next = Some(dpre);
    }
    // backward chain: computed right-to-left, so reverse accumulation runs
    // left-to-right
    let mut dpre_prev: Option<Vector> = None;
    for t in 0..t_max {
        if let Some(dp) = &dpre_prev {
            dh_bwd[t].add_assign(&matvec_transposed(v.v_bwd, dp));
        }
        let dpre = elementwise_dpre(&dh_bwd[t], &h_bwd[t], f);
        g.w_bwd.add_outer(&dpre, &inputs[t]);
        if t + 1 < t_max {
            g.v_bwd.add_outer(&dpre, &h_bwd[t + 1]);
        }
        g.b_bwd.add_assign(&dpre);
        dpre_prev = Some(dpre);
    }
}

/// Backpropagation through structure: first back through the downward layer
/// (children before parents), then through the upward layer (parents before
/// children). `dx_up`/`dx_down` carry the output layer's contribution per
/// node on entry. Leaf upward states are embeddings and receive no gradient.
#[allow(clippy::too_many_arguments)]
fn backprop_tree(
    v: &TreeView<'_>,
    g: &mut TreeGrads<'_>,
    tree: &ParseTree,
    x_up: &[Vector],
    x_down: &[Vector],
    mut dx_up: Vec<Vector>,
    mut dx_down: Vec<Vector>,
    f: Activation,
) {
    // downward layer: each node's downward state feeds its children's
    // downward states, so children must be processed first
    for id in tree.upward_order() {
        let dpre = elementwise_dpre(&dx_down[id], &x_down[id], f);
        let node = tree.node(id);
        if let Some(parent) = node.parent {
            let w = if node.is_left_child == Some(true) {
                (&mut *g.down_left, v.down_left)
            } else {
                (&mut *g.down_right, v.down_right)
            };
            w.0.add_outer(&dpre, &x_down[parent]);
            dx_down[parent].add_assign(&matvec_transposed(w.1, &dpre));
        }
        g.down_from_up.add_outer(&dpre, &x_up[id]);
        dx_up[id].add_assign(&matvec_transposed(v.down_from_up, &dpre));
        g.b_down.add_assign(&dpre);
    }
    // upward layer: each node's upward state feeds its parent's upward
    // state, so parents must be processed first
    for id in tree.downward_order() {
        if let NodeKind::Internal { left, right } = tree.node(id).kind {
            let dpre = elementwise_dpre(&dx_up[id], &x_up[id], f);
            g.up_left.add_outer(&dpre, &x_up[left]);
            g.up_right.add_outer(&dpre, &x_up[right]);
            g.b_up.add_assign(&dpre);
            dx_up[left].add_assign(&matvec_transposed(v.up_left, &dpre));
            dx_up[right].add_assign(&matvec_transposed(v.up_right, &dpre));
        }
        // leaves: the upward state is the frozen embedding
    }
}

/// Token-summed cross-entropy and its gradient with respect to every
/// parameter, computed by reverse accumulation through the architecture's
/// declared passes.
pub fn loss_and_gradients(
    params: &ModelParams,
    inputs: &[Vector],
    labels: &[usize],
    tree: Option<&ParseTree>,
    f: Activation,
) -> Result<(f64, Gradients)> {
    if labels.len() != inputs.len() {
        return Err(Error::config(format!(
            "sentence has {} tokens but {} labels",
            inputs.len(),
            labels.len()
        )));
    }
    let record = forward(params, inputs, tree, f)?;
    let n_labels = record.outputs[0].dim();
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_labels) {
        return Err(Error::config(format!(
            "label id {bad} out of range for {n_labels} labels"
        )));
    }

    let mut loss = 0.0;
    let mut dz: Vec<Vector> = Vec::with_capacity(labels.len());
    for (y, &gold) in record.outputs.iter().zip(labels) {
        loss -= y.get(gold).ln();
        let mut d = y.clone();
        d.set(gold, d.get(gold) - 1.0);
        dz.push(d);
    }

    let mut grads = Gradients::zeros_like(params);
    match (params, &mut grads.0) {
        (ModelParams::BiRecurrent(p), ModelParams::BiRecurrent(g)) => {
            let mut dh_fwd = Vec::with_capacity(labels.len());
            let mut dh_bwd = Vec::with_capacity(labels.len());
            for (t, d) in dz.iter().enumerate() {
                g.out_fwd.add_outer(d, &record.h_fwd[t]);
                g.out_bwd.add_outer(d, &record.h_bwd[t]);
                g.out_input.add_outer(d, &inputs[t]);
                g.b_out.add_assign(d);
                dh_fwd.push(matvec_transposed(&p.out_fwd, d));
                dh_bwd.push(matvec_transposed(&p.out_bwd, d));
            }
            let mut sg = SeqGrads {
                w_fwd: &mut g.w_fwd,
                v_fwd: &mut g.v_fwd,
                b_fwd: &mut g.b_fwd,
                w_bwd: &mut g.w_bwd,
                v_bwd: &mut g.v_bwd,
                b_bwd: &mut g.b_bwd,
            };
            backprop_sequence(
                &p.seq(),
                &mut sg,
                inputs,
                &record.h_fwd,
                &record.h_bwd,
                dh_fwd,
                dh_bwd,
                f,
            );
        }
        (ModelParams::BiRecursive(p), ModelParams::BiRecursive(g)) => {
            let tree = require_tree(tree, Arch::BiRecursive)?;
            let n = tree.nodes().len();
            let dim_up = p.up_left.rows();
            let dim_down = p.down_left.rows();
            let mut dx_up = vec![Vector::zeros(dim_up); n];
            let mut dx_down = vec![Vector::zeros(dim_down); n];
            for (t, d) in dz.iter().enumerate() {
                let leaf = tree.leaf_order()[t];
                g.out_down.add_outer(d, &record.x_down[leaf]);
                g.out_up.add_outer(d, &record.x_up[leaf]);
                g.b_out.add_assign(d);
                dx_down[leaf].add_assign(&matvec_transposed(&p.out_down, d));
                dx_up[leaf].add_assign(&matvec_transposed(&p.out_up, d));
            }
            let mut tg = TreeGrads {
                up_left: &mut g.up_left,
                up_right: &mut g.up_right,
                b_up: &mut g.b_up,
                down_left: &mut g.down_left,
                down_right: &mut g.down_right,
                down_from_up: &mut g.down_from_up,
                b_down: &mut g.b_down,
            };
            backprop_tree(
                &p.tree(),
                &mut tg,
                tree,
                &record.x_up,
                &record.x_down,
                dx_up,
                dx_down,
                f,
            );
        }
        (ModelParams::Combined(p), ModelParams::Combined(g)) => {
            let tree = require_tree(tree, Arch::Combined)?;
            let n = tree.nodes().len();
            let mut dh_fwd = Vec::with_capacity(labels.len());
            let mut dh_bwd = Vec::with_capacity(labels.len());
            let mut dx_up = vec![Vector::zeros(p.up_left.rows()); n];
            let mut dx_down = vec![Vector::zeros(p.down_left.rows()); n];
            for (t, d) in dz.iter().enumerate() {
                let leaf = tree.leaf_order()[t];
                g.out_fwd.add_outer(d, &record.h_fwd[t]);
                g.out_bwd.add_outer(d, &record.h_bwd[t]);
                g.out_up.add_outer(d, &record.x_up[leaf]);
                g.out_down.add_outer(d, &record.x_down[leaf]);
                g.b_out.add_assign(d);
                dh_fwd.push(matvec_transposed(&p.out_fwd, d));
                dh_bwd.push(matvec_transposed(&p.out_bwd, d));
                dx_up[leaf].add_assign(&matvec_transposed(&p.out_up, d));
                dx_down[leaf].add_assign(&matvec_transposed(&p.out_down, d));
            }
            let mut sg = SeqGrads {
                w_fwd: &mut g.w_fwd,
                v_fwd: &mut g.v_fwd,
                b_fwd: &mut g.b_fwd,
                w_bwd: &mut g.w_bwd,
                v_bwd: &mut g.v_bwd,
                b_bwd: &mut g.b_bwd,
            };
            backprop_sequence(
                &p.seq(),
                &mut sg,
                inputs,
                &record.h_fwd,
                &record.h_bwd,
                dh_fwd,
                dh_bwd,
                f,
            );
            let mut tg = TreeGrads {
                up_left: &mut g.up_left,
                up_right: &mut g.up_right,
                b_up: &mut g.b_up,
                down_left: &mut g.down_left,
                down_right: &mut g.down_right,
                down_from_up: &mut g.down_from_up,
                b_down: &mut g.b_down,
            };
            backprop_tree(
                &p.tree(),
                &mut tg,
                tree,
                &record.x_up,
                &record.x_down,
                dx_up,
                dx_down,
                f,
            );
        }
        _ => unreachable!("Gradients::zeros_like preserves the architecture"),
    }
    Ok((loss, grads))
}
