//! Reverse-mode automatic differentiation on a recorded tape.
//!
//! Every operation appends a node holding its value and the ids of its
//! inputs; creation order is a topological order, so `backward` is a single
//! reverse sweep.

use std::cell::RefCell;
use std::rc::Rc;

use thiserror::Error;

use crate::params::ParamStore;
use crate::tensor::{Sparse, Tensor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TapeError {
    #[error("loss must be a scalar, got shape {0:?}")]
    NotScalar((usize, usize)),
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Param(usize),
    MatMul(usize, usize),
    Add(usize, usize),
    /// Adds a `1 × n` row to every row.
    AddRow(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    /// Scales row `r` of the first input by entry `r` of a column.
    MulCol(usize, usize),
    Scale(usize, f64),
    Silu(usize),
    Sigmoid(usize),
    Exp(usize),
    Log(usize),
    Square(usize),
    Sum(usize),
    Mean(usize),
    SumCols(usize),
    Transpose(usize),
    ConcatCols(Vec<usize>),
    GatherRows(usize, Rc<[usize]>),
    ScatterAddRows(usize, Rc<[usize]>),
    RowScale(usize, Rc<[f64]>),
    /// Source row of every output element.
    MaxPool(usize, Vec<usize>),
    SoftmaxMasked(usize, Rc<[usize]>),
    LogSoftmaxMasked(usize, Rc<[usize]>),
    SparseMatMul(Rc<Sparse>, usize),
    Pick(usize, usize),
    Clamp(usize, f64, f64),
    Minimum(usize, usize),
}

struct Node {
    value: Rc<Tensor>,
    op: Op,
}

/// A recording of one forward computation.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a tape node.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: usize,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn silu(x: f64) -> f64 {
    x * sigmoid(x)
}

fn silu_grad(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 + x * (1.0 - s))
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, value: Tensor, op: Op) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { value: Rc::new(value), op });
        Var { tape: self, id: nodes.len() - 1 }
    }

    fn value_of(&self, id: usize) -> Rc<Tensor> {
        Rc::clone(&self.nodes.borrow()[id].value)
    }

    /// A constant input; it receives a gradient but is not a parameter.
    pub fn leaf(&self, value: Tensor) -> Var<'_> {
        self.push(value, Op::Leaf)
    }

    pub fn param(&self, store: &ParamStore, index: usize) -> Var<'_> {
        self.push(store.value(index).clone(), Op::Param(index))
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients, TapeError> {
        let nodes = self.nodes.borrow();
        let shape = nodes[loss.id].value.shape();
        if shape != (1, 1) {
            return Err(TapeError::NotScalar(shape));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; nodes.len()];
        grads[loss.id] = Some(Tensor::scalar(1.0));
        let acc = |grads: &mut Vec<Option<Tensor>>, id: usize, g: Tensor| match &mut grads[id] {
            Some(t) => t.add_assign(&g),
            slot @ None => *slot = Some(g),
        };
        for id in (0..=loss.id).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &nodes[id];
            let val = |i: usize| &*nodes[i].value;
            match &node.op {
                Op::Leaf | Op::Param(_) => {
                    grads[id] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    acc(&mut grads, *a, Tensor::gemm(&g, false, val(*b), true));
                    acc(&mut grads, *b, Tensor::gemm(val(*a), true, &g, false));
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, g);
                }
                Op::AddRow(a, b) => {
                    let mut gb = Tensor::zeros(1, g.cols());
                    for r in 0..g.rows() {
                        for (x, y) in gb.data_mut().iter_mut().zip(g.row(r)) {
                            *x += y;
                        }
                    }
                    acc(&mut grads, *a, g);
                    acc(&mut grads, *b, gb);
                }
                Op::Sub(a, b) => {
                    acc(&mut grads, *b, g.map(|x| -x));
                    acc(&mut grads, *a, g);
                }
                Op::Mul(a, b) => {
                    acc(&mut grads, *a, g.zip(val(*b), |x, y| x * y));
                    acc(&mut grads, *b, g.zip(val(*a), |x, y| x * y));
                }
                Op::MulCol(a, c) => {
                    let (av, cv) = (val(*a), val(*c));
                    let mut ga = g.clone();
                    let mut gc = Tensor::zeros(cv.rows(), 1);
                    for r in 0..g.rows() {
                        let s = cv.get(r, 0);
                        let mut dot = 0.0;
                        for k in 0..g.cols() {
                            ga.data_mut()[r * g.cols() + k] *= s;
                            dot += g.get(r, k) * av.get(r, k);
                        }
                        gc.data_mut()[r] = dot;
                    }
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *c, gc);
                }
                Op::Scale(a, s) => acc(&mut grads, *a, g.map(|x| x * s)),
                Op::Silu(a) => acc(&mut grads, *a, g.zip(val(*a), |x, v| x * silu_grad(v))),
                Op::Sigmoid(a) => acc(&mut grads, *a, g.zip(&node.value, |x, s| x * s * (1.0 - s))),
                Op::Exp(a) => acc(&mut grads, *a, g.zip(&node.value, |x, e| x * e)),
                Op::Log(a) => acc(&mut grads, *a, g.zip(val(*a), |x, v| x / v)),
                Op::Square(a) => acc(&mut grads, *a, g.zip(val(*a), |x, v| 2.0 * x * v)),
                Op::Sum(a) => {
                    let (r, c) = val(*a).shape();
                    acc(&mut grads, *a, Tensor::new(r, c, vec![g.item(); r * c]));
                }
                Op::Mean(a) => {
                    let (r, c) = val(*a).shape();
                    let n = (r * c).max(1) as f64;
                    acc(&mut grads, *a, Tensor::new(r, c, vec![g.item() / n; r * c]));
                }
                Op::SumCols(a) => {
                    let (r, c) = val(*a).shape();
                    let data = (0..r).flat_map(|i| std::iter::repeat_n(g.get(i, 0), c)).collect();
                    acc(&mut grads, *a, Tensor::new(r, c, data));
                }
                Op::Transpose(a) => acc(&mut grads, *a, g.transpose()),
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let (r, c) = val(p).shape();
                        let data = (0..r).flat_map(|i| g.row(i)[offset..offset + c].iter().copied()).collect();
                        acc(&mut grads, p, Tensor::new(r, c, data));
                        offset += c;
                    }
                }
                Op::GatherRows(a, idx) => {
                    let (r, c) = val(*a).shape();
                    let mut ga = Tensor::zeros(r, c);
                    for (o, &src) in idx.iter().enumerate() {
                        for k in 0..c {
                            ga.data_mut()[src * c + k] += g.get(o, k);
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::ScatterAddRows(a, idx) => {
                    let c = g.cols();
                    let data = idx.iter().flat_map(|&dst| g.row(dst).to_vec()).collect();
                    acc(&mut grads, *a, Tensor::new(idx.len(), c, data));
                }
                Op::RowScale(a, w) => {
                    let c = g.cols();
                    let mut ga = g.clone();
                    for (r, &s) in w.iter().enumerate() {
                        for x in &mut ga.data_mut()[r * c..(r + 1) * c] {
                            *x *= s;
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::MaxPool(a, src) => {
                    let (r, c) = val(*a).shape();
                    let mut ga = Tensor::zeros(r, c);
                    for (o, &s) in src.iter().enumerate() {
                        let k = o % c;
                        ga.data_mut()[s * c + k] += g.data()[o];
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::SoftmaxMasked(a, mask) => {
                    let y = &node.value;
                    let dot: f64 = mask.iter().map(|&i| y.data()[i] * g.data()[i]).sum();
                    let mut ga = Tensor::zeros(1, y.cols());
                    for &i in mask.iter() {
                        ga.data_mut()[i] = y.data()[i] * (g.data()[i] - dot);
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::LogSoftmaxMasked(a, mask) => {
                    let y = &node.value;
                    let total: f64 = mask.iter().map(|&i| g.data()[i]).sum();
                    let mut ga = Tensor::zeros(1, y.cols());
                    for &i in mask.iter() {
                        ga.data_mut()[i] = g.data()[i] - y.data()[i].exp() * total;
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::SparseMatMul(s, x) => acc(&mut grads, *x, s.mul_dense(&g, true)),
                Op::Pick(a, flat) => {
                    let (r, c) = val(*a).shape();
                    let mut ga = Tensor::zeros(r, c);
                    ga.data_mut()[*flat] = g.item();
                    acc(&mut grads, *a, ga);
                }
                Op::Clamp(a, lo, hi) => {
                    let ga = g.zip(val(*a), |x, v| if v < *lo || v > *hi { 0.0 } else { x });
                    acc(&mut grads, *a, ga);
                }
                Op::Minimum(a, b) => {
                    let (av, bv) = (val(*a), val(*b));
                    // ties route to the first argument
                    let first: Vec<bool> = av.data().iter().zip(bv.data()).map(|(x, y)| x <= y).collect();
                    let mut ga = g.clone();
                    let mut gb = g;
                    for (i, &f) in first.iter().enumerate() {
                        if f {
                            gb.data_mut()[i] = 0.0;
                        } else {
                            ga.data_mut()[i] = 0.0;
                        }
                    }
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
            }
        }
        let params = nodes.iter().enumerate().filter_map(|(i, n)| match n.op {
            Op::Param(p) => Some((p, i)),
            _ => None,
        });
        let mut by_param: Vec<(usize, usize)> = params.collect();
        by_param.sort_unstable();
        Ok(Gradients { grads, by_param })
    }
}

/// Result of a reverse sweep.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    by_param: Vec<(usize, usize)>,
}

impl Gradients {
    /// Gradient with respect to a node; `None` if the loss does not depend on it.
    pub fn wrt(&self, v: Var) -> Option<&Tensor> {
        self.grads[v.id].as_ref()
    }

    /// Per-parameter gradients, summed over every use, zero where unused.
    pub fn for_params(&self, store: &ParamStore) -> Vec<Tensor> {
        let mut out: Vec<Tensor> = (0..store.len())
            .map(|i| {
                let (r, c) = store.value(i).shape();
                Tensor::zeros(r, c)
            })
            .collect();
        for &(p, node) in &self.by_param {
            if let Some(g) = &self.grads[node] {
                out[p].add_assign(g);
            }
        }
        out
    }
}

macro_rules! unary {
    ($name:ident, $op:ident, $f:expr) => {
        pub fn $name(self) -> Var<'t> {
            let v = self.value().map($f);
            self.tape.push(v, Op::$op(self.id))
        }
    };
}

impl<'t> Var<'t> {
    pub fn id(self) -> usize {
        self.id
    }

    pub fn value(self) -> Rc<Tensor> {
        self.tape.value_of(self.id)
    }

    pub fn shape(self) -> (usize, usize) {
        self.value().shape()
    }

    pub fn item(self) -> f64 {
        self.value().item()
    }

    pub fn matmul(self, other: Var<'t>) -> Var<'t> {
        let v = self.value().matmul(&other.value());
        self.tape.push(v, Op::MatMul(self.id, other.id))
    }

    pub fn add(self, other: Var<'t>) -> Var<'t> {
        let v = self.value().zip(&other.value(), |a, b| a + b);
        self.tape.push(v, Op::Add(self.id, other.id))
    }

    /// Adds the `1 × cols` row `bias` to every row.
    pub fn add_row(self, bias: Var<'t>) -> Var<'t> {
        let (a, b) = (self.value(), bias.value());
        assert_eq!((1, a.cols()), b.shape(), "bias shape mismatch");
        let mut v = (*a).clone();
        let c = a.cols();
        for r in 0..a.rows() {
            for (x, y) in v.data_mut()[r * c..(r + 1) * c].iter_mut().zip(b.data()) {
                *x += y;
            }
        }
        self.tape.push(v, Op::AddRow(self.id, bias.id))
    }

    pub fn sub(self, other: Var<'t>) -> Var<'t> {
        let v = self.value().zip(&other.value(), |a, b| a - b);
        self.tape.push(v, Op::Sub(self.id, other.id))
    }

    pub fn mul(self, other: Var<'t>) -> Var<'t> {
        let v = self.value().zip(&other.value(), |a, b| a * b);
        self.tape.push(v, Op::Mul(self.id, other.id))
    }

    /// Scales each row by the matching entry of the column `weights`.
    pub fn mul_col(self, weights: Var<'t>) -> Var<'t> {
        let (a, w) = (self.value(), weights.value());
        assert_eq!(w.shape(), (a.rows(), 1), "column shape mismatch");
        let c = a.cols();
        let data = (0..a.rows())
            .flat_map(|r| {
                let s = w.get(r, 0);
                a.row(r).iter().map(move |x| x * s).collect::<Vec<_>>()
            })
            .collect();
        self.tape.push(Tensor::new(a.rows(), c, data), Op::MulCol(self.id, weights.id))
    }

    pub fn scale(self, s: f64) -> Var<'t> {
        let v = self.value().map(|x| x * s);
        self.tape.push(v, Op::Scale(self.id, s))
    }

    unary!(silu, Silu, silu);
    unary!(sigmoid, Sigmoid, sigmoid);
    unary!(exp, Exp, f64::exp);
    unary!(log, Log, f64::ln);
    unary!(square, Square, |x| x * x);

    pub fn sum(self) -> Var<'t> {
        let s = self.value().data().iter().sum();
        self.tape.push(Tensor::scalar(s), Op::Sum(self.id))
    }

    pub fn mean(self) -> Var<'t> {
        let v = self.value();
        let s = v.data().iter().sum::<f64>() / v.len().max(1) as f64;
        self.tape.push(Tensor::scalar(s), Op::Mean(self.id))
    }

    /// Row sums as a column.
    pub fn sum_cols(self) -> Var<'t> {
        let v = self.value();
        let data = (0..v.rows()).map(|r| v.row(r).iter().sum()).collect();
        self.tape.push(Tensor::new(v.rows(), 1, data), Op::SumCols(self.id))
    }

    pub fn transpose(self) -> Var<'t> {
        let v = self.value().transpose();
        self.tape.push(v, Op::Transpose(self.id))
    }

    pub fn concat_cols(parts: &[Var<'t>]) -> Var<'t> {
        let tape = parts[0].tape;
        let vals: Vec<Rc<Tensor>> = parts.iter().map(|p| p.value()).collect();
        let rows = vals[0].rows();
        assert!(vals.iter().all(|v| v.rows() == rows), "row counts differ");
        let cols = vals.iter().map(|v| v.cols()).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for v in &vals {
                data.extend_from_slice(v.row(r));
            }
        }
        tape.push(Tensor::new(rows, cols, data), Op::ConcatCols(parts.iter().map(|p| p.id).collect()))
    }

    /// Output row `k` is input row `idx[k]`.
    pub fn gather_rows(self, idx: Rc<[usize]>) -> Var<'t> {
        let v = self.value();
        let data = idx.iter().flat_map(|&i| v.row(i).to_vec()).collect();
        let t = Tensor::new(idx.len(), v.cols(), data);
        self.tape.push(t, Op::GatherRows(self.id, idx))
    }

    /// Adds input row `k` into output row `idx[k]`; output has `rows` rows.
    pub fn scatter_add_rows(self, idx: Rc<[usize]>, rows: usize) -> Var<'t> {
        let v = self.value();
        assert_eq!(idx.len(), v.rows(), "one target per row");
        let c = v.cols();
        let mut t = Tensor::zeros(rows, c);
        for (k, &dst) in idx.iter().enumerate() {
            for (x, y) in t.data_mut()[dst * c..(dst + 1) * c].iter_mut().zip(v.row(k)) {
                *x += y;
            }
        }
        self.tape.push(t, Op::ScatterAddRows(self.id, idx))
    }

    /// Multiplies row `r` by the constant `weights[r]`.
    pub fn row_scale(self, weights: Rc<[f64]>) -> Var<'t> {
        let v = self.value();
        assert_eq!(weights.len(), v.rows(), "one weight per row");
        let c = v.cols();
        let mut t = (*v).clone();
        for (r, &s) in weights.iter().enumerate() {
            for x in &mut t.data_mut()[r * c..(r + 1) * c] {
                *x *= s;
            }
        }
        self.tape.push(t, Op::RowScale(self.id, weights))
    }

    /// One output row per group: the column-wise maximum over the group's
    /// rows. Ties go to the first row listed.
    ///
    /// Panics on an empty group.
    pub fn max_pool_rows(self, groups: &[Vec<usize>]) -> Var<'t> {
        let v = self.value();
        let c = v.cols();
        let mut data = Vec::with_capacity(groups.len() * c);
        let mut src = Vec::with_capacity(groups.len() * c);
        for g in groups {
            assert!(!g.is_empty(), "empty pooling subset");
            for k in 0..c {
                let mut best = g[0];
                for &r in &g[1..] {
                    if v.get(r, k) > v.get(best, k) {
                        best = r;
                    }
                }
                data.push(v.get(best, k));
                src.push(best);
            }
        }
        self.tape.push(Tensor::new(groups.len(), c, data), Op::MaxPool(self.id, src))
    }

    /// Softmax of a `1 × n` row over the entries in `mask`; zero elsewhere.
    pub fn softmax_masked(self, mask: Rc<[usize]>) -> Var<'t> {
        let v = self.value();
        let m = mask.iter().map(|&i| v.data()[i]).fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = mask.iter().map(|&i| (v.data()[i] - m).exp()).sum();
        let mut t = Tensor::zeros(1, v.cols());
        for &i in mask.iter() {
            t.data_mut()[i] = (v.data()[i] - m).exp() / z;
        }
        self.tape.push(t, Op::SoftmaxMasked(self.id, mask))
    }

    /// Log-softmax over `mask`; entries off the mask are zero.
    pub fn log_softmax_masked(self, mask: Rc<[usize]>) -> Var<'t> {
        let v = self.value();
        let mut t = Tensor::zeros(1, v.cols());
        for (i, l) in masked_log_softmax(&v, &mask) {
            t.data_mut()[i] = l;
        }
        self.tape.push(t, Op::LogSoftmaxMasked(self.id, mask))
    }

    /// `s · self` for a constant sparse `s`.
    pub fn sparse_matmul(self, s: Rc<Sparse>) -> Var<'t> {
        let v = s.mul_dense(&self.value(), false);
        self.tape.push(v, Op::SparseMatMul(s, self.id))
    }

    pub fn pick(self, r: usize, c: usize) -> Var<'t> {
        let v = self.value();
        let flat = r * v.cols() + c;
        self.tape.push(Tensor::scalar(v.data()[flat]), Op::Pick(self.id, flat))
    }

    pub fn clamp(self, lo: f64, hi: f64) -> Var<'t> {
        let v = self.value().map(|x| x.clamp(lo, hi));
        self.tape.push(v, Op::Clamp(self.id, lo, hi))
    }

    pub fn minimum(self, other: Var<'t>) -> Var<'t> {
        let v = self.value().zip(&other.value(), f64::min);
        self.tape.push(v, Op::Minimum(self.id, other.id))
    }
}

fn masked_log_softmax<'a>(v: &'a Tensor, mask: &'a [usize]) -> impl Iterator<Item = (usize, f64)> + 'a {
    assert_eq!(v.rows(), 1, "softmax expects a row vector");
    assert!(!mask.is_empty(), "empty softmax mask");
    let m = mask.iter().map(|&i| v.data()[i]).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = mask.iter().map(|&i| (v.data()[i] - m).exp()).sum();
    let lz = m + z.ln();
    mask.iter().map(move |&i| (i, v.data()[i] - lz))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(xs: &[f64]) -> Tensor {
        Tensor::new(1, xs.len(), xs.to_vec())
    }

    #[test]
    fn square_derivative() {
        let tape = Tape::new();
        let x = tape.leaf(Tensor::scalar(3.0));
        let y = x.square();
        let g = tape.backward(y).unwrap();
        assert_eq!(g.wrt(x).unwrap().item(), 6.0);
    }

    #[test]
    fn constant_has_zero_gradient() {
        let tape = Tape::new();
        let x = tape.leaf(Tensor::scalar(3.0));
        let c = tape.leaf(Tensor::scalar(5.0));
        let y = c.square().add(x.scale(0.0));
        let g = tape.backward(y).unwrap();
        assert_eq!(g.wrt(x).unwrap().item(), 0.0);
    }

    #[test]
    fn silu_at_zero() {
        let tape = Tape::new();
        assert_eq!(tape.leaf(Tensor::scalar(0.0)).silu().item(), 0.0);
    }

    #[test]
    fn max_pool_example_and_routing() {
        let tape = Tape::new();
        let x = tape.leaf(Tensor::from_rows(&[vec![1.0, 5.0], vec![3.0, 2.0]]));
        let p = x.max_pool_rows(&[vec![0, 1]]);
        assert_eq!(*p.value(), row(&[3.0, 5.0]));
        let g = tape.backward(p.sum()).unwrap();
        assert_eq!(*g.wrt(x).unwrap(), Tensor::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]));
    }

    #[test]
    fn max_pool_ties_go_to_first_row() {
        let tape = Tape::new();
        let x = tape.leaf(Tensor::from_rows(&[vec![2.0], vec![2.0]]));
        let g = tape.backward(x.max_pool_rows(&[vec![1, 0]]).sum()).unwrap();
        assert_eq!(g.wrt(x).unwrap().data(), &[0.0, 1.0]);
    }

    #[test]
    fn masked_softmax_uniform_and_zero_off_mask() {
        let tape = Tape::new();
        let x = tape.leaf(row(&[1.0, 1.0, 7.0, 1.0, 1.0]));
        let mask: Rc<[usize]> = vec![0, 1, 3, 4].into();
        let p = x.softmax_masked(Rc::clone(&mask));
        assert_eq!(p.value().data(), &[0.25, 0.25, 0.0, 0.25, 0.25]);
        let w = tape.leaf(row(&[1.0, 2.0, 3.0, 4.0, 5.0]));
        let g = tape.backward(p.mul(w).sum()).unwrap();
        assert_eq!(g.wrt(x).unwrap().data()[2], 0.0);
        let lp = x.log_softmax_masked(mask);
        assert!((lp.value().data()[0] - 0.25f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn saturated_softmax() {
        let tape = Tape::new();
        let p = tape.leaf(row(&[0.0, 1e9])).softmax_masked(vec![0, 1].into());
        assert_eq!(p.value().data(), &[0.0, 1.0]);
    }

    #[test]
    fn loss_must_be_scalar() {
        let tape = Tape::new();
        let x = tape.leaf(row(&[1.0, 2.0]));
        assert!(matches!(tape.backward(x), Err(TapeError::NotScalar((1, 2)))));
    }

    #[test]
    fn sparse_product_matches_dense() {
        let s = Rc::new(Sparse::new(2, 2, vec![(0, 1, 0.5), (1, 0, -2.0), (1, 1, 1.0)]));
        let tape = Tape::new();
        let x = tape.leaf(Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]));
        let y = x.sparse_matmul(Rc::clone(&s));
        let dense = tape.leaf(s.to_dense()).matmul(x);
        assert!(y.value().max_abs_diff(&dense.value()) < 1e-12);
    }
}
