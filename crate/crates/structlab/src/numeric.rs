//! Minimal dense linear-algebra and nonlinearity kernel.
//!
//! All values are 64-bit floats and all operations are pure functions over
//! immutable inputs: the same inputs always produce bitwise-identical
//! outputs, so results are safe to compare across runs and threads.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::config(format!(
                "matrix data length {} does not match shape {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// self += u vᵀ. Used by the backward passes to accumulate weight gradients.
    pub fn add_outer(&mut self, u: &Vector, v: &Vector) {
        assert_eq!(self.rows, u.dim(), "add_outer row mismatch");
        assert_eq!(self.cols, v.dim(), "add_outer col mismatch");
        for (r, &ur) in u.data.iter().enumerate() {
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (cell, &vc) in row.iter_mut().zip(&v.data) {
                *cell += ur * vc;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Dense vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Self {
        Vector { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Vector {
            data: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, i: usize) -> f64 {
        self.data[i]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        self.data[i] = v;
    }

    pub fn add_assign(&mut self, other: &Vector) {
        assert_eq!(self.dim(), other.dim(), "vector add dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Index of the largest entry; ties break toward the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate().skip(1) {
            if v > self.data[best] {
                best = i;
            }
        }
        best
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Vector { data }
    }
}

/// M·v + b.
pub fn affine(m: &Matrix, v: &Vector, b: &Vector) -> Result<Vector> {
    if m.cols != v.dim() {
        return Err(Error::config(format!(
            "affine: matrix shape {}x{} incompatible with vector dim {}",
            m.rows,
            m.cols,
            v.dim()
        )));
    }
    if b.dim() != m.rows {
        return Err(Error::config(format!(
            "affine: bias dim {} incompatible with matrix shape {}x{}",
            b.dim(),
            m.rows,
            m.cols
        )));
    }
    let mut out = Vec::with_capacity(m.rows);
    for r in 0..m.rows {
        let acc = m
            .row(r)
            .iter()
            .zip(&v.data)
            .fold(0.0, |s, (&w, &x)| s + w * x);
        out.push(acc + b.data[r]);
    }
    Ok(Vector::new(out))
}

/// M·v.
pub fn matvec(m: &Matrix, v: &Vector) -> Result<Vector> {
    affine(m, v, &Vector::zeros(m.rows))
}

/// Mᵀ·v. Used by reverse accumulation to push gradients through a matrix.
pub fn matvec_transposed(m: &Matrix, v: &Vector) -> Vector {
    assert_eq!(m.rows, v.dim(), "matvec_transposed dimension mismatch");
    let mut out = vec![0.0; m.cols];
    for (r, &vr) in v.data.iter().enumerate() {
        let row = m.row(r);
        for (o, &w) in out.iter_mut().zip(row) {
            *o += w * vr;
        }
    }
    Vector::new(out)
}

/// Elementwise max(0, x).
pub fn rectifier(v: &Vector) -> Vector {
    Vector::new(v.data.iter().map(|&x| x.max(0.0)).collect())
}

/// Elementwise 1/(1+e^{-x}).
pub fn sigmoid(v: &Vector) -> Vector {
    Vector::new(v.data.iter().map(|&x| 1.0 / (1.0 + (-x).exp())).collect())
}

/// Probability-normalized exponentials, computed with max-subtraction so
/// large inputs cannot overflow.
pub fn softmax(v: &Vector) -> Vector {
    let max = v.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.data.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Vector::new(exps.into_iter().map(|e| e / sum).collect())
}

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Rectifier,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, v: &Vector) -> Vector {
        match self {
            Activation::Rectifier => rectifier(v),
            Activation::Sigmoid => sigmoid(v),
        }
    }

    /// f'(z) expressed in terms of the activation output h = f(z).
    ///
    /// The rectifier subgradient at exactly 0 is taken as 0, which makes the
    /// backward pass deterministic.
    pub fn derivative_from_output(self, h: f64) -> f64 {
        match self {
            Activation::Rectifier => {
                if h > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => h * (1.0 - h),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Rectifier => write!(f, "rectifier"),
            Activation::Sigmoid => write!(f, "sigmoid"),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectifier" => Ok(Activation::Rectifier),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::config(format!(
                "unknown activation {other:?} (expected rectifier or sigmoid)"
            ))),
        }
    }
}
