//! Define-then-run reverse-mode differentiation over dense matrices.
//!
//! A [`Tape`] is built once as a graph of primitive operations whose leaves
//! are named slots (trainable parameters or data inputs). Each call to
//! [`Tape::forward`] binds concrete matrices to the slots and evaluates the
//! graph in insertion order, which is a topological order by construction.
//! [`Tape::backward`] then propagates adjoints from the root (the last node
//! added) back to every parameter slot.
//!
//! The primitive set is exactly what ReLU networks and the CycleGAN losses
//! need: affine maps, ReLU, absolute value, elementwise add/sub/mul, scaling,
//! sums, means and a temperature-smoothed maximum. The subgradient of ReLU and
//! of `|x|` at zero is taken to be zero.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::matrix::Matrix;

/// Index of a node in a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Index of a bindable leaf slot in a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotId(usize);

impl SlotId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    /// Differentiated by [`Tape::backward`] and perturbed by
    /// [`finite_diff_check`].
    Param,
    /// Data; bound but never differentiated.
    Input,
}

/// A leaf created by [`Tape::param`] or [`Tape::input`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Leaf {
    pub node: NodeId,
    pub slot: SlotId,
}

#[derive(Clone, Debug)]
struct SlotInfo {
    name: String,
    kind: SlotKind,
    node: NodeId,
}

#[derive(Clone, Debug)]
enum Op {
    Leaf(SlotId),
    Affine { x: NodeId, w: NodeId, b: NodeId },
    Relu(NodeId),
    Abs(NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    Sum(NodeId),
    Mean(NodeId),
    SmoothMax { x: NodeId, temperature: f64 },
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf(_) => "leaf",
            Op::Affine { .. } => "affine",
            Op::Relu(_) => "relu",
            Op::Abs(_) => "abs",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::Scale(..) => "scale",
            Op::Sum(_) => "sum",
            Op::Mean(_) => "mean",
            Op::SmoothMax { .. } => "smooth_max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffError {
    #[error("tape has no nodes")]
    EmptyTape,
    #[error("slot `{name}` is not bound")]
    Unbound { name: String },
    #[error("shape mismatch at node {node} ({op}): {lhs:?} vs {rhs:?}")]
    Shape {
        node: usize,
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("backward needs a scalar root, found a {rows}x{cols} value")]
    NonScalarRoot { rows: usize, cols: usize },
    #[error("forward must run before backward")]
    NotEvaluated,
    #[error("non-finite value in finite-difference check at slot `{name}`, entry {entry}")]
    NonFinite { name: String, entry: usize },
    #[error("finite-difference step must lie in (0, 1e-3], got {0}")]
    BadStep(f64),
}

/// Matrices bound to the slots of one tape.
#[derive(Clone, Debug)]
pub struct Bindings {
    values: Vec<Option<Matrix>>,
}

impl Bindings {
    pub fn new(tape: &Tape) -> Self {
        Self {
            values: vec![None; tape.slots.len()],
        }
    }

    pub fn bind(&mut self, slot: SlotId, value: Matrix) -> &mut Self {
        self.values[slot.0] = Some(value);
        self
    }

    pub fn get(&self, slot: SlotId) -> Option<&Matrix> {
        self.values.get(slot.0).and_then(Option::as_ref)
    }

    pub fn get_mut(&mut self, slot: SlotId) -> Option<&mut Matrix> {
        self.values.get_mut(slot.0).and_then(Option::as_mut)
    }
}

/// Gradients of the root with respect to each parameter slot.
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    /// `None` for input slots.
    pub fn get(&self, slot: SlotId) -> Option<&Matrix> {
        self.grads.get(slot.0).and_then(Option::as_ref)
    }

    pub fn take(&mut self, slot: SlotId) -> Option<Matrix> {
        self.grads.get_mut(slot.0).and_then(Option::take)
    }
}

/// Computation graph with cached forward values and adjoints.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    ops: Vec<Op>,
    slots: Vec<SlotInfo>,
    values: Vec<Matrix>,
    adjoints: Vec<Matrix>,
    /// Signs of every ReLU/abs input seen in the last forward pass.
    kink_pattern: Vec<i8>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, op: Op) -> NodeId {
        self.ops.push(op);
        self.values.clear();
        NodeId(self.ops.len() - 1)
    }

    fn leaf(&mut self, name: &str, kind: SlotKind) -> Leaf {
        let slot = SlotId(self.slots.len());
        let node = self.push(Op::Leaf(slot));
        self.slots.push(SlotInfo {
            name: name.into(),
            kind,
            node,
        });
        Leaf { node, slot }
    }

    pub fn param(&mut self, name: &str) -> Leaf {
        self.leaf(name, SlotKind::Param)
    }

    pub fn input(&mut self, name: &str) -> Leaf {
        self.leaf(name, SlotKind::Input)
    }

    /// `x * w + 1 b`: rows of `x` are points, `w` is `in x out`, `b` is `1 x out`.
    pub fn affine(&mut self, x: NodeId, w: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Affine { x, w, b })
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        self.push(Op::Relu(x))
    }

    pub fn abs(&mut self, x: NodeId) -> NodeId {
        self.push(Op::Abs(x))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Mul(a, b))
    }

    pub fn scale(&mut self, x: NodeId, factor: f64) -> NodeId {
        self.push(Op::Scale(x, factor))
    }

    pub fn sum(&mut self, x: NodeId) -> NodeId {
        self.push(Op::Sum(x))
    }

    pub fn mean(&mut self, x: NodeId) -> NodeId {
        self.push(Op::Mean(x))
    }

    /// `t * log(sum(exp(x / t)))` over all entries; tends to `max(x)` as `t -> 0`.
    pub fn smooth_max(&mut self, x: NodeId, temperature: f64) -> NodeId {
        assert!(temperature > 0.0, "temperature must be positive");
        self.push(Op::SmoothMax { x, temperature })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn root(&self) -> Option<NodeId> {
        (!self.ops.is_empty()).then(|| NodeId(self.ops.len() - 1))
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_name(&self, slot: SlotId) -> &str {
        &self.slots[slot.0].name
    }

    pub fn slot_kind(&self, slot: SlotId) -> SlotKind {
        self.slots[slot.0].kind
    }

    pub fn param_slots(&self) -> impl Iterator<Item = SlotId> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == SlotKind::Param)
            .map(|(i, _)| SlotId(i))
    }

    /// Value of `node` from the last forward pass.
    pub fn value(&self, node: NodeId) -> Option<&Matrix> {
        self.values.get(node.0)
    }

    /// Evaluates every node and returns the root value.
    pub fn forward(&mut self, bindings: &Bindings) -> Result<&Matrix, DiffError> {
        if self.ops.is_empty() {
            return Err(DiffError::EmptyTape);
        }
        let mut values: Vec<Matrix> = Vec::with_capacity(self.ops.len());
        self.kink_pattern.clear();
        for (idx, op) in self.ops.iter().enumerate() {
            let shape_err = |lhs: (usize, usize), rhs: (usize, usize)| DiffError::Shape {
                node: idx,
                op: op.name(),
                lhs,
                rhs,
            };
            let v = match *op {
                Op::Leaf(slot) => match bindings.get(slot) {
                    Some(m) => m.clone(),
                    None => {
                        return Err(DiffError::Unbound {
                            name: self.slots[slot.0].name.clone(),
                        })
                    }
                },
                Op::Affine { x, w, b } => {
                    let (xv, wv, bv) = (&values[x.0], &values[w.0], &values[b.0]);
                    if xv.cols() != wv.rows() {
                        return Err(shape_err(xv.shape(), wv.shape()));
                    }
                    if bv.shape() != (1, wv.cols()) {
                        return Err(shape_err(bv.shape(), (1, wv.cols())));
                    }
                    let mut out = xv.matmul(wv);
                    let bias = bv.as_slice();
                    for i in 0..out.rows() {
                        for (o, &bj) in out.row_mut(i).iter_mut().zip(bias) {
                            *o += bj;
                        }
                    }
                    out
                }
                Op::Relu(x) => {
                    let xv = &values[x.0];
                    record_signs(&mut self.kink_pattern, xv);
                    xv.map(|v| if v > 0.0 { v } else { 0.0 })
                }
                Op::Abs(x) => {
                    let xv = &values[x.0];
                    record_signs(&mut self.kink_pattern, xv);
                    xv.map(math::abs)
                }
                Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) => {
                    let (av, bv) = (&values[a.0], &values[b.0]);
                    if av.shape() != bv.shape() {
                        return Err(shape_err(av.shape(), bv.shape()));
                    }
                    match op {
                        Op::Add(..) => av.zip_map(bv, |p, q| p + q),
                        Op::Sub(..) => av.zip_map(bv, |p, q| p - q),
                        _ => av.zip_map(bv, |p, q| p * q),
                    }
                }
                Op::Scale(x, c) => values[x.0].map(|v| c * v),
                Op::Sum(x) => Matrix::scalar(values[x.0].sum()),
                Op::Mean(x) => {
                    let xv = &values[x.0];
                    if xv.is_empty() {
                        return Err(shape_err(xv.shape(), (1, 1)));
                    }
                    Matrix::scalar(xv.sum() / xv.len() as f64)
                }
                Op::SmoothMax { x, temperature } => {
                    let xv = &values[x.0];
                    if xv.is_empty() {
                        return Err(shape_err(xv.shape(), (1, 1)));
                    }
                    let m = xv.as_slice().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let s: f64 = xv.as_slice().iter().map(|&v| math::exp((v - m) / temperature)).sum();
                    Matrix::scalar(m + temperature * math::ln(s))
                }
            };
            values.push(v);
        }
        self.values = values;
        Ok(self.values.last().expect("nonempty"))
    }

    /// Propagates adjoints from the scalar root to every slot.
    pub fn backward(&mut self) -> Result<Gradients, DiffError> {
        if self.values.len() != self.ops.len() || self.ops.is_empty() {
            return Err(DiffError::NotEvaluated);
        }
        let root = self.ops.len() - 1;
        let (rows, cols) = self.values[root].shape();
        if (rows, cols) != (1, 1) {
            return Err(DiffError::NonScalarRoot { rows, cols });
        }
        let mut adj: Vec<Matrix> = self.values.iter().map(|v| Matrix::zeros(v.rows(), v.cols())).collect();
        adj[root] = Matrix::scalar(1.0);

        for idx in (0..self.ops.len()).rev() {
            let op = &self.ops[idx];
            if matches!(op, Op::Leaf(_)) {
                continue;
            }
            // Split the borrow: parents always precede idx.
            let (before, rest) = adj.split_at_mut(idx);
            let g = &rest[0];
            let vals = &self.values;
            match *op {
                Op::Leaf(_) => {}
                Op::Affine { x, w, b } => {
                    before[x.0].axpy(1.0, &g.matmul_t(&vals[w.0]));
                    before[w.0].axpy(1.0, &vals[x.0].t_matmul(g));
                    let bias_adj = before[b.0].as_mut_slice();
                    for i in 0..g.rows() {
                        for (ba, &gv) in bias_adj.iter_mut().zip(g.row(i)) {
                            *ba += gv;
                        }
                    }
                }
                Op::Relu(x) => {
                    let xv = vals[x.0].as_slice();
                    for ((a, &gv), &xi) in before[x.0].as_mut_slice().iter_mut().zip(g.as_slice()).zip(xv) {
                        if xi > 0.0 {
                            *a += gv;
                        }
                    }
                }
                Op::Abs(x) => {
                    let xv = vals[x.0].as_slice();
                    for ((a, &gv), &xi) in before[x.0].as_mut_slice().iter_mut().zip(g.as_slice()).zip(xv) {
                        if xi > 0.0 {
                            *a += gv;
                        } else if xi < 0.0 {
                            *a -= gv;
                        }
                    }
                }
                Op::Add(a, b) => {
                    before[a.0].axpy(1.0, g);
                    before[b.0].axpy(1.0, g);
                }
                Op::Sub(a, b) => {
                    before[a.0].axpy(1.0, g);
                    before[b.0].axpy(-1.0, g);
                }
                Op::Mul(a, b) => {
                    let ga = g.zip_map(&vals[b.0], |p, q| p * q);
                    let gb = g.zip_map(&vals[a.0], |p, q| p * q);
                    before[a.0].axpy(1.0, &ga);
                    before[b.0].axpy(1.0, &gb);
                }
                Op::Scale(x, c) => before[x.0].axpy(c, g),
                Op::Sum(x) => {
                    let gv = g.as_slice()[0];
                    for a in before[x.0].as_mut_slice() {
                        *a += gv;
                    }
                }
                Op::Mean(x) => {
                    let n = vals[x.0].len() as f64;
                    let gv = g.as_slice()[0] / n;
                    for a in before[x.0].as_mut_slice() {
                        *a += gv;
                    }
                }
                Op::SmoothMax { x, temperature } => {
                    let xv = vals[x.0].as_slice();
                    let gv = g.as_slice()[0];
                    let m = xv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let weights: Vec<f64> = xv.iter().map(|&v| math::exp((v - m) / temperature)).collect();
                    let total: f64 = weights.iter().sum();
                    for (a, w) in before[x.0].as_mut_slice().iter_mut().zip(weights) {
                        *a += gv * w / total;
                    }
                }
            }
        }

        let grads = self
            .slots
            .iter()
            .map(|s| (s.kind == SlotKind::Param).then(|| adj[s.node.0].clone()))
            .collect();
        self.adjoints = adj;
        Ok(Gradients { grads })
    }

    /// Adjoint of `node` from the last backward pass.
    pub fn adjoint(&self, node: NodeId) -> Option<&Matrix> {
        self.adjoints.get(node.0)
    }

    fn root_scalar(&mut self, bindings: &Bindings) -> Result<f64, DiffError> {
        let v = self.forward(bindings)?;
        v.item().ok_or(DiffError::NonScalarRoot {
            rows: v.rows(),
            cols: v.cols(),
        })
    }
}

fn record_signs(pattern: &mut Vec<i8>, m: &Matrix) {
    pattern.extend(m.as_slice().iter().map(|&v| {
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    }));
}

pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Outcome of [`finite_diff_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct FdReport {
    /// Max over checked entries of `|analytic - central| / (|analytic| + step)`.
    pub max_rel_error: f64,
    /// Parameter entries compared.
    pub checked: usize,
    /// Entries skipped because a ReLU/abs input changes sign inside
    /// `[theta - step, theta + step]` or sits exactly on zero.
    pub kink_adjacent: usize,
}

/// Compares backward-pass gradients against central differences for every
/// entry of every parameter slot.
pub fn finite_diff_check(tape: &mut Tape, bindings: &Bindings, step: f64) -> Result<FdReport, DiffError> {
    if !(step > 0.0 && step <= 1e-3) {
        return Err(DiffError::BadStep(step));
    }
    tape.root_scalar(bindings)?;
    let base_kinks_at_zero = tape.kink_pattern.contains(&0);
    let grads = tape.backward()?;
    let mut work = bindings.clone();
    let params: Vec<SlotId> = tape.param_slots().collect();
    let mut report = FdReport {
        max_rel_error: 0.0,
        checked: 0,
        kink_adjacent: 0,
    };
    for slot in params {
        let analytic = grads.get(slot).expect("param slot has gradient").clone();
        let entries = work.get(slot).map_or(0, Matrix::len);
        for e in 0..entries {
            let original = work.get(slot).unwrap().as_slice()[e];
            work.get_mut(slot).unwrap().as_mut_slice()[e] = original + step;
            let plus = tape.root_scalar(&work)?;
            let plus_pattern = tape.kink_pattern.clone();
            work.get_mut(slot).unwrap().as_mut_slice()[e] = original - step;
            let minus = tape.root_scalar(&work)?;
            let crosses = plus_pattern != tape.kink_pattern;
            work.get_mut(slot).unwrap().as_mut_slice()[e] = original;

            let a = analytic.as_slice()[e];
            let numeric = (plus - minus) / (2.0 * step);
            if !a.is_finite() || !numeric.is_finite() {
                return Err(DiffError::NonFinite {
                    name: tape.slot_name(slot).into(),
                    entry: e,
                });
            }
            if crosses || base_kinks_at_zero {
                report.kink_adjacent += 1;
                continue;
            }
            let rel = math::abs(a - numeric) / (math::abs(a) + step);
            report.checked += 1;
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
            }
        }
    }
    // Leave the tape holding values for the caller's bindings.
    tape.forward(bindings)?;
    Ok(report)
}
