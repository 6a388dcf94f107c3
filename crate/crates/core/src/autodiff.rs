//! Reverse-mode differentiation over dense row-major matrices.
//!
//! A [`Tape`] records every operation in execution order, so the backward
//! pass is a single reverse sweep. The primitive set is the one the
//! message-passing network and its discrepancy losses need; a tape is built
//! afresh for every training step.
//!
//! ```
//! use mpmc::autodiff::{Tape, Tensor};
//!
//! let mut tape = Tape::new();
//! let x = tape.leaf(Tensor::new(1, 1, vec![0.3]).unwrap());
//! let loss = tape.warnock_loss(x).unwrap();
//! tape.backward(loss).unwrap();
//! // d/dx (1/3 + x^2 - x) = 2x - 1
//! assert!((tape.grad(x).unwrap().data()[0] + 0.4).abs() < 1e-12);
//! ```

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrepancy::warnock_l2_squared;
use crate::{Error, PointSet, ProjectionIndexSet, Result};

/// Dense row-major `rows × cols` matrix of `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawTensor> for Tensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        Tensor::new(raw.rows, raw.cols, raw.data)
    }
}

impl Tensor {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{} values for a {rows}x{cols} tensor", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn scalar(v: f64) -> Self {
        Self { rows: 1, cols: 1, data: vec![v] }
    }

    /// A `1 × n` row vector.
    pub fn row(data: Vec<f64>) -> Self {
        Self { rows: 1, cols: data.len(), data }
    }

    pub fn from_points(points: &PointSet<f64>) -> Self {
        Self { rows: points.n_points(), cols: points.dim(), data: points.coords().to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row_slice(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn same_shape(&self, other: &Tensor, op: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!("{op}: {:?} vs {:?}", self.shape(), other.shape())));
        }
        Ok(())
    }

    fn add_assign(&mut self, other: &Tensor) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// `c += op(a) · op(b)` where `op` optionally transposes.
fn gemm(a: &Tensor, ta: bool, b: &Tensor, tb: bool, c: &mut Tensor) {
    let (m, k) = if ta { (a.cols, a.rows) } else { (a.rows, a.cols) };
    let n = if tb { b.rows } else { b.cols };
    debug_assert_eq!(c.shape(), (m, n));
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    let (rsa, csa) = if ta { (1, a.cols as isize) } else { (a.cols as isize, 1) };
    let (rsb, csb) = if tb { (1, b.cols as isize) } else { (b.cols as isize, 1) };
    // SAFETY: the strides describe the live buffers of `a`, `b` and `c`,
    // whose extents were checked against (m, k, n) by the callers.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            1.0,
            c.data.as_mut_ptr(),
            c.cols as isize,
            1,
        );
    }
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddBias { x: Var, bias: Var, weights: Option<Arc<[f64]>> },
    Relu(Var),
    Sigmoid(Var),
    Concat(Var, Var),
    Gather { x: Var, index: Arc<[usize]> },
    ScatterSum { x: Var, targets: Arc<[usize]> },
    Sum(Var),
    Scale(Var, f64),
    Warnock(Var),
    Hickernell { x: Var, subsets: Arc<[ProjectionIndexSet]> },
}

/// Linear record of a computation, differentiated by [`Tape::backward`].
#[derive(Debug, Default)]
pub struct Tape {
    values: Vec<Tensor>,
    ops: Vec<Op>,
    needs_grad: Vec<bool>,
    grads: Vec<Option<Tensor>>,
    consumed: bool,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, needs_grad: bool) -> Var {
        self.values.push(value);
        self.ops.push(op);
        self.needs_grad.push(needs_grad);
        Var(self.values.len() - 1)
    }

    fn needs(&self, v: &[Var]) -> bool {
        v.iter().any(|x| self.needs_grad[x.0])
    }

    /// Records a tensor that receives a gradient.
    pub fn leaf(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, true)
    }

    /// Records a tensor that is treated as a constant.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.values[v.0]
    }

    /// Gradient of the last backward pass for a leaf that the loss depends on.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    /// Clears gradients so that [`Tape::backward`] may run again.
    pub fn reset(&mut self) {
        self.grads.clear();
        self.consumed = false;
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.cols != tb.rows {
            return Err(Error::Shape(format!("matmul: {:?} x {:?}", ta.shape(), tb.shape())));
        }
        let mut out = Tensor::zeros(ta.rows, tb.cols);
        gemm(ta, false, tb, false, &mut out);
        let needs = self.needs(&[a, b]);
        Ok(self.push(out, Op::MatMul(a, b), needs))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let ta = self.value(a);
        ta.same_shape(self.value(b), "add")?;
        let mut out = ta.clone();
        out.add_assign(self.value(b));
        let needs = self.needs(&[a, b]);
        Ok(self.push(out, Op::Add(a, b), needs))
    }

    /// Adds a `1 × cols` bias to every row.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        self.bias_impl(x, bias, None)
    }

    /// Adds `weights[i] · bias` to row `i`.
    pub fn add_weighted_bias(&mut self, x: Var, bias: Var, weights: Arc<[f64]>) -> Result<Var> {
        if weights.len() != self.value(x).rows {
            return Err(Error::Shape(format!(
                "add_weighted_bias: {} weights for {} rows",
                weights.len(),
                self.value(x).rows
            )));
        }
        self.bias_impl(x, bias, Some(weights))
    }

    fn bias_impl(&mut self, x: Var, bias: Var, weights: Option<Arc<[f64]>>) -> Result<Var> {
        let (tx, tb) = (self.value(x), self.value(bias));
        if tb.rows != 1 || tb.cols != tx.cols {
            return Err(Error::Shape(format!("add_bias: {:?} onto {:?}", tb.shape(), tx.shape())));
        }
        let mut out = tx.clone();
        for r in 0..out.rows {
            let w = weights.as_ref().map_or(1.0, |w| w[r]);
            for (o, b) in out.data[r * out.cols..(r + 1) * out.cols].iter_mut().zip(&tb.data) {
                *o += w * b;
            }
        }
        let needs = self.needs(&[x, bias]);
        Ok(self.push(out, Op::AddBias { x, bias, weights }, needs))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        out.data.iter_mut().for_each(|v| *v = v.max(0.0));
        let needs = self.needs(&[x]);
        self.push(out, Op::Relu(x), needs)
    }

    /// Logistic sigmoid, saturating at the representable values nearest to
    /// 0 and 1 so that outputs stay inside the open interval.
    pub fn sigmoid(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        out.data.iter_mut().for_each(|v| *v = sigmoid(*v).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0));
        let needs = self.needs(&[x]);
        self.push(out, Op::Sigmoid(x), needs)
    }

    /// Column-wise concatenation `[a, b]`.
    pub fn concat(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.rows != tb.rows {
            return Err(Error::Shape(format!("concat: {:?} with {:?}", ta.shape(), tb.shape())));
        }
        let cols = ta.cols + tb.cols;
        let mut data = Vec::with_capacity(ta.rows * cols);
        for r in 0..ta.rows {
            data.extend_from_slice(ta.row_slice(r));
            data.extend_from_slice(tb.row_slice(r));
        }
        let out = Tensor { rows: ta.rows, cols, data };
        let needs = self.needs(&[a, b]);
        Ok(self.push(out, Op::Concat(a, b), needs))
    }

    /// Row `e` of the output is row `index[e]` of `x`.
    pub fn gather(&mut self, x: Var, index: Arc<[usize]>) -> Result<Var> {
        let tx = self.value(x);
        if let Some(&bad) = index.iter().find(|&&i| i >= tx.rows) {
            return Err(Error::Shape(format!("gather: row {bad} of {}", tx.rows)));
        }
        let mut data = Vec::with_capacity(index.len() * tx.cols);
        for &i in index.iter() {
            data.extend_from_slice(tx.row_slice(i));
        }
        let out = Tensor { rows: index.len(), cols: tx.cols, data };
        let needs = self.needs(&[x]);
        Ok(self.push(out, Op::Gather { x, index }, needs))
    }

    /// Row `i` of the output is the sum of the rows `e` of `x` with
    /// `targets[e] = i`; rows with no incoming entry are zero.
    pub fn scatter_sum(&mut self, x: Var, targets: Arc<[usize]>, n_nodes: usize) -> Result<Var> {
        let tx = self.value(x);
        if targets.len() != tx.rows {
            return Err(Error::Shape(format!("scatter_sum: {} targets for {} rows", targets.len(), tx.rows)));
        }
        if let Some(&bad) = targets.iter().find(|&&i| i >= n_nodes) {
            return Err(Error::Shape(format!("scatter_sum: target {bad} of {n_nodes}")));
        }
        let mut out = Tensor::zeros(n_nodes, tx.cols);
        for (e, &t) in targets.iter().enumerate() {
            let src = tx.row_slice(e);
            for (o, v) in out.data[t * tx.cols..(t + 1) * tx.cols].iter_mut().zip(src) {
                *o += v;
            }
        }
        let needs = self.needs(&[x]);
        Ok(self.push(out, Op::ScatterSum { x, targets }, needs))
    }

    /// Sum of all entries, as a `1 × 1` tensor.
    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.value(x).data.iter().sum();
        let needs = self.needs(&[x]);
        self.push(Tensor::scalar(s), Op::Sum(x), needs)
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        let mut out = self.value(x).clone();
        out.data.iter_mut().for_each(|v| *v *= c);
        let needs = self.needs(&[x]);
        self.push(out, Op::Scale(x, c), needs)
    }

    /// Squared L2 star discrepancy of the rows of `x`, viewed as points.
    pub fn warnock_loss(&mut self, x: Var) -> Result<Var> {
        let v = warnock_l2_squared(&self.points_of(x)?)?;
        let needs = self.needs(&[x]);
        Ok(self.push(Tensor::scalar(v), Op::Warnock(x), needs))
    }

    /// Sum of squared L2 star discrepancies over the given projections.
    pub fn hickernell_loss(&mut self, x: Var, subsets: Arc<[ProjectionIndexSet]>) -> Result<Var> {
        let points = self.points_of(x)?;
        let mut total = 0.0;
        for s in subsets.iter() {
            total += warnock_l2_squared(&points.project(s)?)?;
        }
        let needs = self.needs(&[x]);
        Ok(self.push(Tensor::scalar(total), Op::Hickernell { x, subsets }, needs))
    }

    fn points_of(&self, x: Var) -> Result<PointSet<f64>> {
        let t = self.value(x);
        PointSet::new(t.rows, t.cols, t.data.clone())
    }

    /// Accumulates `d loss / d v` into every value that depends on a leaf.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.consumed {
            return Err(Error::TapeConsumed);
        }
        let lt = self.value(loss);
        if lt.shape() != (1, 1) {
            return Err(Error::NotAScalar { rows: lt.rows, cols: lt.cols });
        }
        self.consumed = true;
        self.grads = vec![None; self.values.len()];
        self.grads[loss.0] = Some(Tensor::scalar(1.0));

        for id in (0..=loss.0).rev() {
            if !self.needs_grad[id] {
                continue;
            }
            let Some(g) = self.grads[id].take() else { continue };
            let op = self.ops[id].clone();
            match op {
                Op::Leaf => {
                    self.grads[id] = Some(g);
                }
                Op::MatMul(a, b) => {
                    if self.needs_grad[a.0] {
                        let mut ga = Tensor::zeros(self.values[a.0].rows, self.values[a.0].cols);
                        gemm(&g, false, &self.values[b.0], true, &mut ga);
                        self.accumulate(a, ga);
                    }
                    if self.needs_grad[b.0] {
                        let mut gb = Tensor::zeros(self.values[b.0].rows, self.values[b.0].cols);
                        gemm(&self.values[a.0], true, &g, false, &mut gb);
                        self.accumulate(b, gb);
                    }
                }
                Op::Add(a, b) => {
                    if self.needs_grad[a.0] && self.needs_grad[b.0] {
                        self.accumulate(b, g.clone());
                    } else if self.needs_grad[b.0] {
                        self.accumulate(b, g);
                        continue;
                    }
                    self.accumulate(a, g);
                }
                Op::AddBias { x, bias, weights } => {
                    let mut gb = vec![0.0; g.cols];
                    for r in 0..g.rows {
                        let w = weights.as_ref().map_or(1.0, |w| w[r]);
                        for (acc, v) in gb.iter_mut().zip(g.row_slice(r)) {
                            *acc += w * v;
                        }
                    }
                    self.accumulate(bias, Tensor::row(gb));
                    self.accumulate(x, g);
                }
                Op::Relu(x) => {
                    let mut gx = g;
                    for (gv, &y) in gx.data.iter_mut().zip(&self.values[id].data) {
                        if y <= 0.0 {
                            *gv = 0.0;
                        }
                    }
                    self.accumulate(x, gx);
                }
                Op::Sigmoid(x) => {
                    let mut gx = g;
                    for (gv, &y) in gx.data.iter_mut().zip(&self.values[id].data) {
                        *gv *= y * (1.0 - y);
                    }
                    self.accumulate(x, gx);
                }
                Op::Concat(a, b) => {
                    let ca = self.values[a.0].cols;
                    let cb = self.values[b.0].cols;
                    let mut ga = Vec::with_capacity(g.rows * ca);
                    let mut gb = Vec::with_capacity(g.rows * cb);
                    for r in 0..g.rows {
                        let row = g.row_slice(r);
                        ga.extend_from_slice(&row[..ca]);
                        gb.extend_from_slice(&row[ca..]);
                    }
                    self.accumulate(a, Tensor { rows: g.rows, cols: ca, data: ga });
                    self.accumulate(b, Tensor { rows: g.rows, cols: cb, data: gb });
                }
                Op::Gather { x, index } => {
                    let mut gx = Tensor::zeros(self.values[x.0].rows, g.cols);
                    for (e, &i) in index.iter().enumerate() {
                        for (o, v) in gx.data[i * g.cols..(i + 1) * g.cols].iter_mut().zip(g.row_slice(e)) {
                            *o += v;
                        }
                    }
                    self.accumulate(x, gx);
                }
                Op::ScatterSum { x, targets } => {
                    let mut data = Vec::with_capacity(targets.len() * g.cols);
                    for &t in targets.iter() {
                        data.extend_from_slice(g.row_slice(t));
                    }
                    self.accumulate(x, Tensor { rows: targets.len(), cols: g.cols, data });
                }
                Op::Sum(x) => {
                    let (r, c) = self.values[x.0].shape();
                    self.accumulate(x, Tensor { rows: r, cols: c, data: vec![g.data[0]; r * c] });
                }
                Op::Scale(x, c) => {
                    let mut gx = g;
                    gx.data.iter_mut().for_each(|v| *v *= c);
                    self.accumulate(x, gx);
                }
                Op::Warnock(x) => {
                    let t = &self.values[x.0];
                    let cols: Vec<usize> = (0..t.cols).collect();
                    let mut gx = Tensor::zeros(t.rows, t.cols);
                    warnock_grad(t, &cols, g.data[0], &mut gx);
                    self.accumulate(x, gx);
                }
                Op::Hickernell { x, subsets } => {
                    let t = &self.values[x.0];
                    let mut gx = Tensor::zeros(t.rows, t.cols);
                    for s in subsets.iter() {
                        warnock_grad(t, s.dims(), g.data[0], &mut gx);
                    }
                    self.accumulate(x, gx);
                }
            }
        }
        Ok(())
    }

    fn accumulate(&mut self, v: Var, g: Tensor) {
        if !self.needs_grad[v.0] {
            return;
        }
        match &mut self.grads[v.0] {
            Some(acc) => acc.add_assign(&g),
            slot => *slot = Some(g),
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `Π_{k' != k} f[k']` for every `k`, without dividing.
fn leave_one_out(f: &[f64], out: &mut [f64]) {
    let mut acc = 1.0;
    for k in 0..f.len() {
        out[k] = acc;
        acc *= f[k];
    }
    acc = 1.0;
    for k in (0..f.len()).rev() {
        out[k] *= acc;
        acc *= f[k];
    }
}

/// Adds `scale · ∂L2²/∂x` restricted to the columns `cols` of `x` into `out`.
///
/// The derivative of `max(a, b)` goes to the larger argument and is split in
/// half on exact ties between distinct points.
fn warnock_grad(x: &Tensor, cols: &[usize], scale: f64, out: &mut Tensor) {
    let n = x.rows;
    let d = cols.len();
    let nf = n as f64;
    let rows: Vec<Vec<f64>> = (0..x.rows).map(|i| cols.iter().map(|&c| x.get(i, c)).collect()).collect();
    let grads: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &rows[i];
            let mut g = vec![0.0; d];
            let mut f = vec![0.0; d];
            let mut loo = vec![0.0; d];

            for k in 0..d {
                f[k] = 0.5 * (1.0 - xi[k] * xi[k]);
            }
            leave_one_out(&f, &mut loo);
            for k in 0..d {
                g[k] += 2.0 / nf * xi[k] * loo[k];
            }

            let inv_n2 = 1.0 / (nf * nf);
            for (j, xj) in rows.iter().enumerate() {
                for k in 0..d {
                    f[k] = 1.0 - xi[k].max(xj[k]);
                }
                leave_one_out(&f, &mut loo);
                if j == i {
                    for k in 0..d {
                        g[k] -= inv_n2 * loo[k];
                    }
                    continue;
                }
                // (i, j) and (j, i) both appear in the double sum.
                for k in 0..d {
                    let route = if xi[k] > xj[k] {
                        1.0
                    } else if xi[k] == xj[k] {
                        0.5
                    } else {
                        continue;
                    };
                    g[k] -= 2.0 * inv_n2 * route * loo[k];
                }
            }
            g
        })
        .collect();
    for (i, g) in grads.iter().enumerate() {
        for (k, &c) in cols.iter().enumerate() {
            out.data[i * x.cols + c] += scale * g[k];
        }
    }
}
