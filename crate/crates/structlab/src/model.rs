//! Architectures, parameter containers, initialization, and the versioned
//! text serialization format.
//!
//! A model file holds one header line
//! `structlab-model v1 <arch> <dims> <n_labels> <activation>` followed by
//! one named block per parameter tensor (`#name rows cols`, then row-major
//! values). Values are written with 17 significant decimal digits, so a
//! save/load/save cycle is byte-identical.

use std::fmt;
use std::fmt::Write as _;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::{Matrix, Vector};

pub use crate::numeric::Activation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    BiRecurrent,
    BiRecursive,
    Combined,
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arch::BiRecurrent => write!(f, "bi-recurrent"),
            Arch::BiRecursive => write!(f, "bi-recursive"),
            Arch::Combined => write!(f, "combined"),
        }
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bi-recurrent" | "bi_recurrent" => Ok(Arch::BiRecurrent),
            "bi-recursive" | "bi_recursive" => Ok(Arch::BiRecursive),
            "combined" => Ok(Arch::Combined),
            other => Err(Error::config(format!(
                "unknown architecture {other:?} (expected bi-recurrent, bi-recursive, or combined)"
            ))),
        }
    }
}

/// Layer dimensionalities of one architecture.
///
/// The recurrent form is (input, forward, backward); the recursive form is
/// (input-and-upward, downward); the combined form is (input-and-upward,
/// downward, forward, backward). The upward layer always shares the input
/// dimensionality, so leaf embeddings and internal-node representations lie
/// in the same space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    BiRecurrent {
        input: usize,
        forward: usize,
        backward: usize,
        n_labels: usize,
    },
    BiRecursive {
        input: usize,
        downward: usize,
        n_labels: usize,
    },
    Combined {
        input: usize,
        downward: usize,
        forward: usize,
        backward: usize,
        n_labels: usize,
    },
}

impl Topology {
    pub fn arch(&self) -> Arch {
        match self {
            Topology::BiRecurrent { .. } => Arch::BiRecurrent,
            Topology::BiRecursive { .. } => Arch::BiRecursive,
            Topology::Combined { .. } => Arch::Combined,
        }
    }

    pub fn input_dim(&self) -> usize {
        match *self {
            Topology::BiRecurrent { input, .. }
            | Topology::BiRecursive { input, .. }
            | Topology::Combined { input, .. } => input,
        }
    }

    pub fn n_labels(&self) -> usize {
        match *self {
            Topology::BiRecurrent { n_labels, .. }
            | Topology::BiRecursive { n_labels, .. }
            | Topology::Combined { n_labels, .. } => n_labels,
        }
    }

    /// Parses a dimension list such as `50,75,75` or `(50, 75, 75)` for the
    /// given architecture.
    pub fn parse(arch: Arch, dims: &str, n_labels: usize) -> Result<Topology> {
        let cleaned = dims.replace(['(', ')'], "");
        let parsed: Vec<usize> = cleaned
            .split(',')
            .map(|p| {
                p.trim().parse::<usize>().map_err(|_| {
                    Error::config(format!("bad dimension {:?} in topology {dims:?}", p.trim()))
                })
            })
            .collect::<Result<_>>()?;
        let topology = match (arch, parsed.as_slice()) {
            (Arch::BiRecurrent, &[a, b, c]) => Topology::BiRecurrent {
                input: a,
                forward: b,
                backward: c,
                n_labels,
            },
            (Arch::BiRecursive, &[a, b]) => Topology::BiRecursive {
                input: a,
                downward: b,
                n_labels,
            },
            (Arch::Combined, &[a, b, c, d]) => Topology::Combined {
                input: a,
                downward: b,
                forward: c,
                backward: d,
                n_labels,
            },
            (arch, dims) => {
                return Err(Error::config(format!(
                    "architecture {arch} expects {} dimensions, got {}",
                    match arch {
                        Arch::BiRecurrent => 3,
                        Arch::BiRecursive => 2,
                        Arch::Combined => 4,
                    },
                    dims.len()
                )))
            }
        };
        topology.validate()?;
        Ok(topology)
    }

    /// Comma-separated dimension list, the inverse of [`Topology::parse`].
    pub fn dims_string(&self) -> String {
        match *self {
            Topology::BiRecurrent {
                input,
                forward,
                backward,
                ..
            } => format!("{input},{forward},{backward}"),
            Topology::BiRecursive {
                input, downward, ..
            } => format!("{input},{downward}"),
            Topology::Combined {
                input,
                downward,
                forward,
                backward,
                ..
            } => format!("{input},{downward},{forward},{backward}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims: Vec<usize> = match *self {
            Topology::BiRecurrent {
                input,
                forward,
                backward,
                n_labels,
            } => vec![input, forward, backward, n_labels],
            Topology::BiRecursive {
                input,
                downward,
                n_labels,
            } => vec![input, downward, n_labels],
            Topology::Combined {
                input,
                downward,
                forward,
                backward,
                n_labels,
            } => vec![input, downward, forward, backward, n_labels],
        };
        if dims.contains(&0) {
            return Err(Error::config(format!(
                "all topology dimensions must be at least 1, got {}",
                self.dims_string()
            )));
        }
        Ok(())
    }

    /// The topologies reported for each architecture in the source
    /// experiments, with a 3-class label set.
    pub fn default_for(arch: Arch, n_labels: usize) -> Topology {
        match arch {
            Arch::BiRecurrent => Topology::BiRecurrent {
                input: 50,
                forward: 75,
                backward: 75,
                n_labels,
            },
            Arch::BiRecursive => Topology::BiRecursive {
                input: 50,
                downward: 150,
                n_labels,
            },
            Arch::Combined => Topology::Combined {
                input: 50,
                downward: 50,
                forward: 50,
                backward: 50,
                n_labels,
            },
        }
    }
}

/// Weights of the bidirectional recurrent network.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentParams {
    pub w_fwd: Matrix,
    pub v_fwd: Matrix,
    pub b_fwd: Vector,
    pub w_bwd: Matrix,
    pub v_bwd: Matrix,
    pub b_bwd: Vector,
    pub out_fwd: Matrix,
    pub out_bwd: Matrix,
    pub out_input: Matrix,
    pub b_out: Vector,
}

/// Weights of the bidirectional recursive network.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursiveParams {
    pub up_left: Matrix,
    pub up_right: Matrix,
    pub b_up: Vector,
    pub down_left: Matrix,
    pub down_right: Matrix,
    /// Connects a node's upward representation into its downward one.
    pub down_from_up: Matrix,
    pub b_down: Vector,
    pub out_up: Matrix,
    pub out_down: Matrix,
    pub b_out: Vector,
}

/// Weights of the combined architecture: both halves plus one shared output
/// layer. Unlike the recurrent network's output layer, the combined output
/// has no direct input term.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedParams {
    pub w_fwd: Matrix,
    pub v_fwd: Matrix,
    pub b_fwd: Vector,
    pub w_bwd: Matrix,
    pub v_bwd: Matrix,
    pub b_bwd: Vector,
    pub up_left: Matrix,
    pub up_right: Matrix,
    pub b_up: Vector,
    pub down_left: Matrix,
    pub down_right: Matrix,
    pub down_from_up: Matrix,
    pub b_down: Vector,
    pub out_fwd: Matrix,
    pub out_bwd: Matrix,
    pub out_up: Matrix,
    pub out_down: Matrix,
    pub b_out: Vector,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)] // tensors dominate; variants are moved, not copied
pub enum ModelParams {
    BiRecurrent(RecurrentParams),
    BiRecursive(RecursiveParams),
    Combined(CombinedParams),
}

/// Borrowed view of one parameter tensor, in the model's canonical field
/// order. Weight matrices are regularized; bias vectors are not.
pub struct TensorSlot<'a> {
    pub name: &'static str,
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [f64],
    pub regularized: bool,
}

pub struct TensorSlotMut<'a> {
    pub name: &'static str,
    pub rows: usize,
    pub cols: usize,
    pub data: &'a mut [f64],
    pub regularized: bool,
}

impl<'a> TensorSlot<'a> {
    fn mat(name: &'static str, m: &'a Matrix) -> Self {
        TensorSlot {
            name,
            rows: m.rows(),
            cols: m.cols(),
            data: m.data(),
            regularized: true,
        }
    }

    fn vec(name: &'static str, v: &'a Vector) -> Self {
        TensorSlot {
            name,
            rows: 1,
            cols: v.dim(),
            data: v.data(),
            regularized: false,
        }
    }
}

impl<'a> TensorSlotMut<'a> {
    fn mat(name: &'static str, m: &'a mut Matrix) -> Self {
        TensorSlotMut {
            name,
            rows: m.rows(),
            cols: m.cols(),
            regularized: true,
            data: m.data_mut(),
        }
    }

    fn vec(name: &'static str, v: &'a mut Vector) -> Self {
        TensorSlotMut {
            name,
            rows: 1,
            cols: v.dim(),
            regularized: false,
            data: v.data_mut(),
        }
    }
}

impl RecurrentParams {
    fn slots(&self) -> Vec<TensorSlot<'_>> {
        vec![
            TensorSlot::mat("w_fwd", &self.w_fwd),
            TensorSlot::mat("v_fwd", &self.v_fwd),
            TensorSlot::vec("b_fwd", &self.b_fwd),
            TensorSlot::mat("w_bwd", &self.w_bwd),
            TensorSlot::mat("v_bwd", &self.v_bwd),
            TensorSlot::vec("b_bwd", &self.b_bwd),
            TensorSlot::mat("out_fwd", &self.out_fwd),
            TensorSlot::mat("out_bwd", &self.out_bwd),
            TensorSlot::mat("out_input", &self.out_input),
            TensorSlot::vec("b_out", &self.b_out),
        ]
    }

    fn slots_mut(&mut self) -> Vec<TensorSlotMut<'_>> {
        vec![
            TensorSlotMut::mat("w_fwd", &mut self.w_fwd),
            TensorSlotMut::mat("v_fwd", &mut self.v_fwd),
            TensorSlotMut::vec("b_fwd", &mut self.b_fwd),
            TensorSlotMut::mat("w_bwd", &mut self.w_bwd),
            TensorSlotMut::mat("v_bwd", &mut self.v_bwd),
            TensorSlotMut::vec("b_bwd", &mut self.b_bwd),
            TensorSlotMut::mat("out_fwd", &mut self.out_fwd),
            TensorSlotMut::mat("out_bwd", &mut self.out_bwd),
            TensorSlotMut::mat("out_input", &mut self.out_input),
            TensorSlotMut::vec("b_out", &mut self.b_out),
        ]
    }
}

impl RecursiveParams {
    fn slots(&self) -> Vec<TensorSlot<'_>> {
        vec![
            TensorSlot::mat("up_left", &self.up_left),
            TensorSlot::mat("up_right", &self.up_right),
            TensorSlot::vec("b_up", &self.b_up),
            TensorSlot::mat("down_left", &self.down_left),
            TensorSlot::mat("down_right", &self.down_right),
            TensorSlot::mat("down_from_up", &self.down_from_up),
            TensorSlot::vec("b_down", &self.b_down),
            TensorSlot::mat("out_up", &self.out_up),
            TensorSlot::mat("out_down", &self.out_down),
            TensorSlot::vec("b_out", &self.b_out),
        ]
    }

    fn slots_mut(&mut self) -> Vec<TensorSlotMut<'_>> {
        vec![
            TensorSlotMut::mat("up_left", &mut self.up_left),
            TensorSlotMut::mat("up_right", &mut self.up_right),
            TensorSlotMut::vec("b_up", &mut self.b_up),
            TensorSlotMut::mat("down_left", &mut self.down_left),
            TensorSlotMut::mat("down_right", &mut self.down_right),
            TensorSlotMut::mat("down_from_up", &mut self.down_from_up),
            TensorSlotMut::vec("b_down", &mut self.b_down),
            TensorSlotMut::mat("out_up", &mut self.out_up),
            TensorSlotMut::mat("out_down", &mut self.out_down),
            TensorSlotMut::vec("b_out", &mut self.b_out),
        ]
    }
}

impl CombinedParams {
    fn slots(&self) -> Vec<TensorSlot<'_>> {
        vec![
            TensorSlot::mat("w_fwd", &self.w_fwd),
            TensorSlot::mat("v_fwd", &self.v_fwd),
            TensorSlot::vec("b_fwd", &self.b_fwd),
            TensorSlot::mat("w_bwd", &self.w_bwd),
            TensorSlot::mat("v_bwd", &self.v_bwd),
            TensorSlot::vec("b_bwd", &self.b_bwd),
            TensorSlot::mat("up_left", &self.up_left),
            TensorSlot::mat("up_right", &self.up_right),
            TensorSlot::vec("b_up", &self.b_up),
            TensorSlot::mat("down_left", &self.down_left),
            TensorSlot::mat("down_right", &self.down_right),
            TensorSlot::mat("down_from_up", &self.down_from_up),
            TensorSlot::vec("b_down", &self.b_down),
            TensorSlot::mat("out_fwd", &self.out_fwd),
            TensorSlot::mat("out_bwd", &self.out_bwd),
            TensorSlot::mat("out_up", &self.out_up),
            TensorSlot::mat("out_down", &self.out_down),
            TensorSlot::vec("b_out", &self.b_out),
        ]
    }

    fn slots_mut(&mut self) -> Vec<TensorSlotMut<'_>> {
        vec![
            TensorSlotMut::mat("w_fwd", &mut self.w_fwd),
            TensorSlotMut::mat("v_fwd", &mut self.v_fwd),
            TensorSlotMut::vec("b_fwd", &mut self.b_fwd),
            TensorSlotMut::mat("w_bwd", &mut self.w_bwd),
            TensorSlotMut::mat("v_bwd", &mut self.v_bwd),
            TensorSlotMut::vec("b_bwd", &mut self.b_bwd),
            TensorSlotMut::mat("up_left", &mut self.up_left),
            TensorSlotMut::mat("up_right", &mut self.up_right),
            TensorSlotMut::vec("b_up", &mut self.b_up),
            TensorSlotMut::mat("down_left", &mut self.down_left),
            TensorSlotMut::mat("down_right", &mut self.down_right),
            TensorSlotMut::mat("down_from_up", &mut self.down_from_up),
            TensorSlotMut::vec("b_down", &mut self.b_down),
            TensorSlotMut::mat("out_fwd", &mut self.out_fwd),
            TensorSlotMut::mat("out_bwd", &mut self.out_bwd),
            TensorSlotMut::mat("out_up", &mut self.out_up),
            TensorSlotMut::mat("out_down", &mut self.out_down),
            TensorSlotMut::vec("b_out", &mut self.b_out),
        ]
    }
}

impl ModelParams {
    pub fn arch(&self) -> Arch {
        match self {
            ModelParams::BiRecurrent(_) => Arch::BiRecurrent,
            ModelParams::BiRecursive(_) => Arch::BiRecursive,
            ModelParams::Combined(_) => Arch::Combined,
        }
    }

    pub fn slots(&self) -> Vec<TensorSlot<'_>> {
        match self {
            ModelParams::BiRecurrent(p) => p.slots(),
            ModelParams::BiRecursive(p) => p.slots(),
            ModelParams::Combined(p) => p.slots(),
        }
    }

    pub fn slots_mut(&mut self) -> Vec<TensorSlotMut<'_>> {
        match self {
            ModelParams::BiRecurrent(p) => p.slots_mut(),
            ModelParams::BiRecursive(p) => p.slots_mut(),
            ModelParams::Combined(p) => p.slots_mut(),
        }
    }

    pub fn n_scalars(&self) -> usize {
        self.slots().iter().map(|s| s.data.len()).sum()
    }

    /// Derives the topology from tensor shapes, checking every shape
    /// congruence the architecture requires.
    pub fn topology(&self) -> Result<Topology> {
        let topology = match self {
            ModelParams::BiRecurrent(p) => Topology::BiRecurrent {
                input: p.w_fwd.cols(),
                forward: p.w_fwd.rows(),
                backward: p.w_bwd.rows(),
                n_labels: p.b_out.dim(),
            },
            ModelParams::BiRecursive(p) => Topology::BiRecursive {
                input: p.up_left.cols(),
                downward: p.down_left.rows(),
                n_labels: p.b_out.dim(),
            },
            ModelParams::Combined(p) => Topology::Combined {
                input: p.up_left.cols(),
                downward: p.down_left.rows(),
                forward: p.w_fwd.rows(),
                backward: p.w_bwd.rows(),
                n_labels: p.b_out.dim(),
            },
        };
        topology.validate()?;
        let expected = expected_shapes(&topology);
        for (slot, (name, rows, cols)) in self.slots().iter().zip(&expected) {
            if slot.name != *name || slot.rows != *rows || slot.cols != *cols {
                return Err(Error::config(format!(
                    "tensor {} has shape {}x{}, expected {}x{} for topology {}",
                    slot.name,
                    slot.rows,
                    slot.cols,
                    rows,
                    cols,
                    topology.dims_string()
                )));
            }
        }
        Ok(topology)
    }
}

/// Expected (name, rows, cols) for every tensor of a topology, in canonical
/// order. Shared by initialization, validation, and deserialization.
fn expected_shapes(topology: &Topology) -> Vec<(&'static str, usize, usize)> {
    match *topology {
        Topology::BiRecurrent {
            input: a,
            forward: b,
            backward: c,
            n_labels: k,
        } => vec![
            ("w_fwd", b, a),
            ("v_fwd", b, b),
            ("b_fwd", 1, b),
            ("w_bwd", c, a),
            ("v_bwd", c, c),
            ("b_bwd", 1, c),
            ("out_fwd", k, b),
            ("out_bwd", k, c),
            ("out_input", k, a),
            ("b_out", 1, k),
        ],
        Topology::BiRecursive {
            input: a,
            downward: b,
            n_labels: k,
        } => vec![
            ("up_left", a, a),
            ("up_right", a, a),
            ("b_up", 1, a),
            ("down_left", b, b),
            ("down_right", b, b),
            ("down_from_up", b, a),
            ("b_down", 1, b),
            ("out_up", k, a),
            ("out_down", k, b),
            ("b_out", 1, k),
        ],
        Topology::Combined {
            input: a,
            downward: b,
            forward: c,
            backward: d,
            n_labels: k,
        } => vec![
            ("w_fwd", c, a),
            ("v_fwd", c, c),
            ("b_fwd", 1, c),
            ("w_bwd", d, a),
            ("v_bwd", d, d),
            ("b_bwd", 1, d),
            ("up_left", a, a),
            ("up_right", a, a),
            ("b_up", 1, a),
            ("down_left", b, b),
            ("down_right", b, b),
            ("down_from_up", b, a),
            ("b_down", 1, b),
            ("out_fwd", k, c),
            ("out_bwd", k, d),
            ("out_up", k, a),
            ("out_down", k, b),
            ("b_out", 1, k),
        ],
    }
}

fn glorot(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let r = (6.0 / (rows + cols) as f64).sqrt();
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-r..=r))
}

/// Fresh parameters: each matrix entry i.i.d. uniform in [-r, r] with
/// r = sqrt(6/(fan_in+fan_out)); biases zero. Deterministic per seed.
pub fn init_params(topology: &Topology, seed: u64) -> Result<ModelParams> {
    topology.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tensors: Vec<(&'static str, Matrix)> = Vec::new();
    let mut biases: Vec<(&'static str, Vector)> = Vec::new();
    for (name, rows, cols) in expected_shapes(topology) {
        if rows == 1 && name.starts_with("b_") {
            biases.push((name, Vector::zeros(cols)));
        } else {
            tensors.push((name, glorot(&mut rng, rows, cols)));
        }
    }
    let mut mats: std::collections::HashMap<&str, Matrix> = tensors.into_iter().collect();
    let mut vecs: std::collections::HashMap<&str, Vector> = biases.into_iter().collect();
    let mut take_m = |name: &str| mats.remove(name).expect("tensor present");
    let mut take_v = |name: &str| vecs.remove(name).expect("bias present");
    let params = match topology.arch() {
        Arch::BiRecurrent => ModelParams::BiRecurrent(RecurrentParams {
            w_fwd: take_m("w_fwd"),
            v_fwd: take_m("v_fwd"),
            b_fwd: take_v("b_fwd"),
            w_bwd: take_m("w_bwd"),
            v_bwd: take_m("v_bwd"),
            b_bwd: take_v("b_bwd"),
            out_fwd: take_m("out_fwd"),
            out_bwd: take_m("out_bwd"),
            out_input: take_m("out_input"),
            b_out: take_v("b_out"),
        }),
        Arch::BiRecursive => ModelParams::BiRecursive(RecursiveParams {
            up_left: take_m("up_left"),
            up_right: take_m("up_right"),
            b_up: take_v("b_up"),
            down_left: take_m("down_left"),
            down_right: take_m("down_right"),
            down_from_up: take_m("down_from_up"),
            b_down: take_v("b_down"),
            out_up: take_m("out_up"),
            out_down: take_m("out_down"),
            b_out: take_v("b_out"),
        }),
        Arch::Combined => ModelParams::Combined(CombinedParams {
            w_fwd: take_m("w_fwd"),
            v_fwd: take_m("v_fwd"),
            b_fwd: take_v("b_fwd"),
            w_bwd: take_m("w_bwd"),
            v_bwd: take_m("v_bwd"),
            b_bwd: take_v("b_bwd"),
            up_left: take_m("up_left"),
            up_right: take_m("up_right"),
            b_up: take_v("b_up"),
            down_left: take_m("down_left"),
            down_right: take_m("down_right"),
            down_from_up: take_m("down_from_up"),
            b_down: take_v("b_down"),
            out_fwd: take_m("out_fwd"),
            out_bwd: take_m("out_bwd"),
            out_up: take_m("out_up"),
            out_down: take_m("out_down"),
            b_out: take_v("b_out"),
        }),
    };
    Ok(params)
}

/// Gradient accumulator, shape-congruent with its model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub(crate) ModelParams);

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Gradients {
        let mut zeroed = params.clone();
        for slot in zeroed.slots_mut() {
            for x in slot.data.iter_mut() {
                *x = 0.0;
            }
        }
        Gradients(zeroed)
    }

    pub fn as_params(&self) -> &ModelParams {
        &self.0
    }

    pub fn slots(&self) -> Vec<TensorSlot<'_>> {
        self.0.slots()
    }

    pub fn slots_mut(&mut self) -> Vec<TensorSlotMut<'_>> {
        self.0.slots_mut()
    }

    /// self += other, tensor by tensor. Used for ordered minibatch reduction.
    pub fn add_assign(&mut self, other: &Gradients) {
        let mut mine = self.0.slots_mut();
        let theirs = other.0.slots();
        assert_eq!(mine.len(), theirs.len(), "gradient structure mismatch");
        for (m, t) in mine.iter_mut().zip(theirs) {
            assert_eq!(m.name, t.name);
            for (a, b) in m.data.iter_mut().zip(t.data) {
                *a += b;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for slot in self.0.slots_mut() {
            for x in slot.data {
                *x *= factor;
            }
        }
    }

    /// Largest absolute entry, used by divergence checks.
    pub fn max_abs(&self) -> f64 {
        self.0
            .slots()
            .iter()
            .flat_map(|s| s.data.iter())
            .fold(0.0, |m, &x| m.max(x.abs()))
    }
}

const MODEL_MAGIC: &str = "structlab-model";
const MODEL_VERSION: &str = "v1";

/// Serializes parameters plus their hidden activation to the versioned text
/// format.
pub fn save_model(
    path: impl AsRef<Path>,
    params: &ModelParams,
    activation: Activation,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_model(&mut w, params, activation)?;
    w.flush()?;
    Ok(())
}

pub fn write_model(w: &mut impl Write, params: &ModelParams, activation: Activation) -> Result<()> {
    let topology = params.topology()?;
    writeln!(
        w,
        "{MODEL_MAGIC} {MODEL_VERSION} {} {} {} {}",
        params.arch(),
        topology.dims_string(),
        topology.n_labels(),
        activation
    )?;
    for slot in params.slots() {
        writeln!(w, "#{} {} {}", slot.name, slot.rows, slot.cols)?;
        for r in 0..slot.rows {
            let row = &slot.data[r * slot.cols..(r + 1) * slot.cols];
            let mut line = String::new();
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{v:.16e}");
            }
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(ModelParams, Activation)> {
    let text = std::fs::read_to_string(path)?;
    read_model(&text)
}

pub fn read_model(text: &str) -> Result<(ModelParams, Activation)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::data(1, "empty model file"))?;
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 6 || fields[0] != MODEL_MAGIC {
        return Err(Error::data(1, format!("bad model header {header:?}")));
    }
    if fields[1] != MODEL_VERSION {
        return Err(Error::data(
            1,
            format!(
                "unsupported model version {:?} (expected {MODEL_VERSION})",
                fields[1]
            ),
        ));
    }
    let arch: Arch = fields[2].parse()?;
    let n_labels: usize = fields[4]
        .parse()
        .map_err(|_| Error::data(1, format!("bad label count {:?}", fields[4])))?;
    let topology = Topology::parse(arch, fields[3], n_labels)?;
    let activation: Activation = fields[5].parse()?;

    let mut params = init_params(&topology, 0)?;
    for slot in params.slots_mut() {
        let (lineno, block_header) = lines
            .next()
            .ok_or_else(|| Error::data(0, format!("missing block for tensor {}", slot.name)))?;
        let expected = format!("#{} {} {}", slot.name, slot.rows, slot.cols);
        if block_header != expected {
            return Err(Error::data(
                lineno + 1,
                format!("expected block header {expected:?}, got {block_header:?}"),
            ));
        }
        for r in 0..slot.rows {
            let (lineno, line) = lines.next().ok_or_else(|| {
                Error::data(0, format!("missing row {r} of tensor {}", slot.name))
            })?;
            let values: Vec<f64> = line
                .split(' ')
                .map(|p| {
                    p.parse::<f64>()
                        .map_err(|_| Error::data(lineno + 1, format!("bad value {p:?}")))
                })
                .collect::<Result<_>>()?;
            if values.len() != slot.cols {
                return Err(Error::data(
                    lineno + 1,
                    format!(
                        "row has {} values, expected {} for tensor {}",
                        values.len(),
                        slot.cols,
                        slot.name
                    ),
                ));
            }
            slot.data[r * slot.cols..(r + 1) * slot.cols].copy_from_slice(&values);
        }
    }
    if let Some((lineno, extra)) = lines.next() {
        if !extra.is_empty() {
            return Err(Error::data(
                lineno + 1,
                "trailing content after last tensor",
            ));
        }
    }
    params.topology()?; // re-validate shapes
    Ok((params, activation))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic() {
        let topology = Topology::BiRecursive {
            input: 4,
            downward: 5,
            n_labels: 3,
        };
        let a = init_params(&topology, 42).unwrap();
        let b = init_params(&topology, 42).unwrap();
        assert_eq!(a, b);
        let c = init_params(&topology, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn recurrent_shapes_match_topology() {
        let topology = Topology::BiRecurrent {
            input: 50,
            forward: 75,
            backward: 75,
            n_labels: 3,
        };
        let params = init_params(&topology, 1).unwrap();
        let ModelParams::BiRecurrent(p) = &params else {
            panic!("wrong arch")
        };
        assert_eq!((p.w_fwd.rows(), p.w_fwd.cols()), (75, 50));
        assert_eq!((p.out_fwd.rows(), p.out_fwd.cols()), (3, 75));
        assert_eq!((p.out_input.rows(), p.out_input.cols()), (3, 50));
        assert_eq!(params.topology().unwrap(), topology);
    }

    #[test]
    fn biases_start_at_zero() {
        let topology = Topology::Combined {
            input: 3,
            downward: 4,
            forward: 5,
            backward: 6,
            n_labels: 3,
        };
        let params = init_params(&topology, 7).unwrap();
        for slot in params.slots() {
            if !slot.regularized {
                assert!(
                    slot.data.iter().all(|&x| x == 0.0),
                    "bias {} nonzero",
                    slot.name
                );
            } else {
                assert!(
                    slot.data.iter().any(|&x| x != 0.0),
                    "weight {} all zero",
                    slot.name
                );
            }
        }
    }

    #[test]
    fn init_entries_within_glorot_bound() {
        let topology = Topology::BiRecurrent {
            input: 8,
            forward: 4,
            backward: 4,
            n_labels: 3,
        };
        let params = init_params(&topology, 5).unwrap();
        let ModelParams::BiRecurrent(p) = &params else {
            panic!()
        };
        let r = (6.0_f64 / (8.0 + 4.0)).sqrt();
        assert!(p.w_fwd.data().iter().all(|&x| x.abs() <= r));
    }

    #[test]
    fn save_load_roundtrip_is_byte_identical() {
        let topology = Topology::Combined {
            input: 3,
            downward: 2,
            forward: 4,
            backward: 2,
            n_labels: 5,
        };
        let params = init_params(&topology, 99).unwrap();
        let mut buf = Vec::new();
        write_model(&mut buf, &params, Activation::Rectifier).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (loaded, activation) = read_model(&text).unwrap();
        assert_eq!(loaded, params);
        assert_eq!(activation, Activation::Rectifier);
        let mut buf2 = Vec::new();
        write_model(&mut buf2, &loaded, activation).unwrap();
        assert_eq!(String::from_utf8(buf2).unwrap(), text);
    }

    #[test]
    fn read_model_rejects_bad_header() {
        assert!(read_model("not-a-model v1 combined 1,1,1,1 3 rectifier\n").is_err());
        assert!(read_model("structlab-model v2 combined 1,1,1,1 3 rectifier\n").is_err());
        assert!(read_model("").is_err());
    }

    #[test]
    fn topology_parse_accepts_paper_notation() {
        let t = Topology::parse(Arch::BiRecurrent, "(50, 75, 75)", 3).unwrap();
        assert_eq!(t.dims_string(), "50,75,75");
        let t = Topology::parse(Arch::BiRecursive, "50,150", 3).unwrap();
        assert_eq!(t.dims_string(), "50,150");
        assert!(Topology::parse(Arch::Combined, "50,75", 3).is_err());
        assert!(Topology::parse(Arch::Combined, "50,0,50,50", 3).is_err());
    }

    #[test]
    fn gradients_zeroed_and_accumulate() {
        let topology = Topology::BiRecursive {
            input: 2,
            downward: 3,
            n_labels: 3,
        };
        let params = init_params(&topology, 3).unwrap();
        let mut g = Gradients::zeros_like(&params);
        assert_eq!(g.max_abs(), 0.0);
        let mut h = Gradients::zeros_like(&params);
        h.slots_mut()[0].data[0] = 2.0;
        g.add_assign(&h);
        g.scale(0.5);
        assert_eq!(g.slots()[0].data[0], 1.0);
    }
}
