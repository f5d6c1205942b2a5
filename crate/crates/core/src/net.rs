//! Norm-constrained ReLU networks and single-hidden-layer networks.
//!
//! An [`Mlp`] with depth `L` is `A_L ∘ σ ∘ A_{L-1} ∘ … ∘ σ ∘ A_0`, each
//! `A_l(x) = A_l^T x + b_l`. Its path norm is
//! `‖(A_L,b_L)‖ · ∏_{l<L} max(‖(A_l,b_l)‖, 1)` where `‖(A,b)‖` is the
//! ∞-operator norm of the augmented map, i.e. the largest
//! `‖A[:,i]‖₁ + |b_i|` over output coordinates `i`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::diff::{Bindings, Gradients, Leaf, NodeId, Tape};
use crate::math;
use crate::matrix::Matrix;
use crate::rng;

pub const MODEL_MAGIC: &[u8; 4] = b"CRNN";
pub const MODEL_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetError {
    #[error("network needs at least one layer")]
    NoLayers,
    #[error("dims need at least an input and an output entry, got {0}")]
    TooFewDims(usize),
    #[error("dimension {index} is zero")]
    ZeroDim { index: usize },
    #[error("layer {layer} expects input dim {expected}, previous layer gives {found}")]
    Chain {
        layer: usize,
        expected: usize,
        found: usize,
    },
    #[error("hidden widths must be equal, layer {layer} has {found} (expected {expected})")]
    UnequalWidth {
        layer: usize,
        expected: usize,
        found: usize,
    },
    #[error("bias of layer {layer} has shape {found:?}, expected (1, {expected})")]
    BiasShape {
        layer: usize,
        expected: usize,
        found: (usize, usize),
    },
    #[error("norm budget must be positive and finite, got {0}")]
    BadBudget(f64),
    #[error("cannot stack an empty list of networks")]
    EmptyStack,
    #[error("net {index} differs from net 0 in {what}")]
    StackMismatch { index: usize, what: &'static str },
    #[error("input has {found} columns, network expects {expected}")]
    InputDim { expected: usize, found: usize },
    #[error("model file does not start with the CRNN magic")]
    BadMagic,
    #[error("model format version {0} is not supported")]
    UnsupportedVersion(u16),
    #[error("model data is truncated")]
    Truncated,
    #[error("model data has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("parameter {0} is not finite")]
    NonFinite(String),
    #[error("shallow net: {0}")]
    Shallow(&'static str),
}

/// One affine map `x -> weight^T x + bias`; `weight` is `in x out`,
/// `bias` is `1 x out`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub weight: Matrix,
    pub bias: Matrix,
}

impl Layer {
    pub fn new(weight: Matrix, bias: Matrix) -> Self {
        Self { weight, bias }
    }

    pub fn zeros(input: usize, output: usize) -> Self {
        Self {
            weight: Matrix::zeros(input, output),
            bias: Matrix::zeros(1, output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.cols()
    }

    /// ∞-operator norm of the augmented map acting on `(x, 1)`.
    pub fn augmented_norm(&self) -> f64 {
        (0..self.output_dim())
            .map(|i| self.column_l1(i) + math::abs(self.bias.as_slice()[i]))
            .fold(0.0, f64::max)
    }

    /// ∞-operator norm of the weight alone.
    pub fn weight_norm(&self) -> f64 {
        (0..self.output_dim()).map(|i| self.column_l1(i)).fold(0.0, f64::max)
    }

    fn column_l1(&self, i: usize) -> f64 {
        (0..self.input_dim()).map(|r| math::abs(self.weight[(r, i)])).sum()
    }

    fn scale(&mut self, factor: f64) {
        self.weight.scale_in_place(factor);
        self.bias.scale_in_place(factor);
    }
}

/// A ReLU network in `NN(W, L, B)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
    norm_budget: f64,
}

impl Mlp {
    /// Checks chaining, equal hidden widths and the budget. The budget is
    /// recorded as given; use [`Mlp::project_to_budget`] to enforce it.
    pub fn from_layers(layers: Vec<Layer>, norm_budget: f64) -> Result<Self, NetError> {
        if layers.is_empty() {
            return Err(NetError::NoLayers);
        }
        if !(norm_budget >= 0.0 && norm_budget.is_finite()) {
            return Err(NetError::BadBudget(norm_budget));
        }
        for (k, layer) in layers.iter().enumerate() {
            if layer.input_dim() == 0 || layer.output_dim() == 0 {
                return Err(NetError::ZeroDim { index: k });
            }
            if layer.bias.shape() != (1, layer.output_dim()) {
                return Err(NetError::BiasShape {
                    layer: k,
                    expected: layer.output_dim(),
                    found: layer.bias.shape(),
                });
            }
            if !layer.weight.all_finite() || !layer.bias.all_finite() {
                return Err(NetError::NonFinite(alloc::format!("layer {k}")));
            }
            if k > 0 && layers[k - 1].output_dim() != layer.input_dim() {
                return Err(NetError::Chain {
                    layer: k,
                    expected: layer.input_dim(),
                    found: layers[k - 1].output_dim(),
                });
            }
        }
        if layers.len() > 1 {
            let w = layers[0].output_dim();
            for (k, layer) in layers.iter().enumerate().take(layers.len() - 1) {
                if layer.output_dim() != w {
                    return Err(NetError::UnequalWidth {
                        layer: k,
                        expected: w,
                        found: layer.output_dim(),
                    });
                }
            }
        }
        Ok(Self { layers, norm_budget })
    }

    /// Uniform `±1/sqrt(fan_in)` weights, zero biases, then projected onto
    /// the budget.
    pub fn new(dims: &[usize], budget: f64, seed: u64) -> Result<Self, NetError> {
        validate_dims(dims)?;
        if !(budget > 0.0 && budget.is_finite()) {
            return Err(NetError::BadBudget(budget));
        }
        let mut rng = rng::seeded(seed);
        let layers = dims
            .windows(2)
            .map(|w| {
                let bound = 1.0 / math::sqrt(w[0] as f64);
                let data = (0..w[0] * w[1]).map(|_| rng.gen_range(-bound..=bound)).collect();
                Layer::new(Matrix::from_vec(w[0], w[1], data), Matrix::zeros(1, w[1]))
            })
            .collect();
        Ok(Self::from_layers(layers, budget)?.project_to_budget(budget))
    }

    /// Like [`Mlp::new`] but biases are drawn from the same `±1/sqrt(fan_in)`
    /// range. On data confined to a bounded box, zero biases put every kink
    /// at the origin and leave units with negative weights permanently off.
    pub fn new_with_biases(dims: &[usize], budget: f64, seed: u64) -> Result<Self, NetError> {
        let mut net = Self::from_layers(Self::new(dims, 1e300, seed)?.layers, budget)?;
        let mut rng = rng::seeded(rng::derive_seed(seed, 1));
        for (layer, w) in net.layers.iter_mut().zip(dims.windows(2)) {
            let bound = 1.0 / math::sqrt(w[0] as f64);
            for b in layer.bias.as_mut_slice() {
                *b = rng.gen_range(-bound..=bound);
            }
        }
        Ok(net.project_to_budget(budget))
    }

    /// Exact identity on all of `R^d` via `x = σ(x) − σ(−x)`; width `2d`,
    /// path norm 2.
    pub fn identity(d: usize, depth: usize) -> Self {
        assert!(d > 0 && depth > 0);
        let mut first = Layer::zeros(d, 2 * d);
        for j in 0..d {
            first.weight[(j, j)] = 1.0;
            first.weight[(j, d + j)] = -1.0;
        }
        let mut layers = vec![first];
        for _ in 1..depth {
            layers.push(Layer::new(Matrix::identity(2 * d), Matrix::zeros(1, 2 * d)));
        }
        let mut last = Layer::zeros(2 * d, d);
        for j in 0..d {
            last.weight[(j, j)] = 1.0;
            last.weight[(d + j, j)] = -1.0;
        }
        layers.push(last);
        Self::from_layers(layers, 2.0).expect("identity layout is valid")
    }

    /// Identity on the nonnegative orthant, padded with zero units up to
    /// `width ≥ d`; path norm 1.
    pub fn positive_identity(d: usize, depth: usize, width: usize) -> Self {
        assert!(d > 0 && depth > 0 && width >= d);
        let mut first = Layer::zeros(d, width);
        let mut last = Layer::zeros(width, d);
        for j in 0..d {
            first.weight[(j, j)] = 1.0;
            last.weight[(j, j)] = 1.0;
        }
        let mut layers = vec![first];
        for _ in 1..depth {
            let mut hidden = Layer::zeros(width, width);
            for j in 0..d {
                hidden.weight[(j, j)] = 1.0;
            }
            layers.push(hidden);
        }
        layers.push(last);
        Self::from_layers(layers, 1.0).expect("identity layout is valid")
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn into_layers(self) -> Vec<Layer> {
        self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Common hidden width; 0 for a purely affine net.
    pub fn width(&self) -> usize {
        if self.layers.len() > 1 {
            self.layers[0].output_dim()
        } else {
            0
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(Layer::output_dim));
        dims
    }

    pub fn norm_budget(&self) -> f64 {
        self.norm_budget
    }

    pub fn set_norm_budget(&mut self, budget: f64) {
        self.norm_budget = budget;
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    pub fn layer_norms(&self) -> Vec<f64> {
        self.layers.iter().map(Layer::augmented_norm).collect()
    }

    pub fn path_norm(&self) -> f64 {
        let norms = self.layer_norms();
        let (last, hidden) = norms.split_last().expect("at least one layer");
        hidden.iter().fold(*last, |acc, &n| acc * n.max(1.0))
    }

    /// Product of weight-only ∞-operator norms: a bound on the
    /// `ℓ∞ -> ℓ∞` Lipschitz constant.
    pub fn lipschitz_upper_bound(&self) -> f64 {
        self.layers.iter().map(Layer::weight_norm).product()
    }

    /// Returns a net with `path_norm ≤ budget` whose layers are positive
    /// rescalings of this one. Feasible nets come back unchanged, so the
    /// operation is idempotent.
    ///
    /// Hidden layers above the unit floor shrink by the common factor
    /// `(budget/p)^{1/(L+1)}` but never below norm 1; the final layer then
    /// absorbs whatever remains.
    pub fn project_to_budget(&self, budget: f64) -> Mlp {
        assert!(budget > 0.0, "budget must be positive");
        let mut out = self.clone();
        out.norm_budget = budget;
        let p = out.path_norm();
        if p <= budget {
            return out;
        }
        let c = math::powf(budget / p, 1.0 / out.layers.len() as f64);
        let last = out.layers.len() - 1;
        for layer in &mut out.layers[..last] {
            let n = layer.augmented_norm();
            if n > 1.0 {
                let target = (n * c).max(1.0);
                layer.scale(target / n);
            }
        }
        let mut p = out.path_norm();
        let mut factor = budget / p;
        while p > budget {
            out.layers[last].scale(factor);
            p = out.path_norm();
            factor = 1.0 - 4.0 * f64::EPSILON;
        }
        out
    }

    /// Rows of `x` are points; returns one output row per point.
    pub fn forward(&self, x: &Matrix) -> Result<Matrix, NetError> {
        if x.cols() != self.input_dim() {
            return Err(NetError::InputDim {
                expected: self.input_dim(),
                found: x.cols(),
            });
        }
        let last = self.layers.len() - 1;
        let mut h = x.clone();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut next = h.matmul(&layer.weight);
            let b = layer.bias.as_slice();
            for i in 0..next.rows() {
                for (v, &bj) in next.row_mut(i).iter_mut().zip(b) {
                    *v += bj;
                    if k < last && *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            h = next;
        }
        Ok(h)
    }

    /// Single-point evaluation. Panics on dimension mismatch.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.forward(&Matrix::row_vector(x))
            .expect("input dimension mismatch")
            .into_vec()
    }

    /// Block-diagonal stacking of scalar-output nets sharing input dim and
    /// depth; output `i` of the result is net `i`.
    pub fn stack_parallel(nets: &[Mlp]) -> Result<Mlp, NetError> {
        let first = nets.first().ok_or(NetError::EmptyStack)?;
        for (i, net) in nets.iter().enumerate() {
            if net.input_dim() != first.input_dim() {
                return Err(NetError::StackMismatch {
                    index: i,
                    what: "input dimension",
                });
            }
            if net.depth() != first.depth() {
                return Err(NetError::StackMismatch {
                    index: i,
                    what: "depth",
                });
            }
            if net.output_dim() != 1 {
                return Err(NetError::StackMismatch {
                    index: i,
                    what: "scalar output",
                });
            }
        }
        let d = first.input_dim();
        let mut layers = Vec::with_capacity(first.layers.len());
        for k in 0..first.layers.len() {
            let rows = if k == 0 {
                d
            } else {
                nets.iter().map(|n| n.layers[k].input_dim()).sum()
            };
            let cols: usize = nets.iter().map(|n| n.layers[k].output_dim()).sum();
            let mut stacked = Layer::zeros(rows, cols);
            let (mut r0, mut c0) = (0, 0);
            for net in nets {
                let l = &net.layers[k];
                for r in 0..l.input_dim() {
                    for c in 0..l.output_dim() {
                        stacked.weight[(r0 + r, c0 + c)] = l.weight[(r, c)];
                    }
                }
                stacked.bias.as_mut_slice()[c0..c0 + l.output_dim()].copy_from_slice(l.bias.as_slice());
                if k > 0 {
                    r0 += l.input_dim();
                }
                c0 += l.output_dim();
            }
            layers.push(stacked);
        }
        let mut out = Self::from_layers(layers, 0.0)?;
        out.norm_budget = out
            .path_norm()
            .max(nets.iter().map(|n| n.norm_budget).fold(0.0, f64::max));
        Ok(out)
    }

    /// Versioned little-endian binary encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let dims = self.dims();
        let mut out = Vec::with_capacity(4 + 2 + 4 + 4 * dims.len() + 8 * (1 + self.parameter_count()));
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
        for d in &dims {
            out.extend_from_slice(&(*d as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.norm_budget.to_le_bytes());
        for layer in &self.layers {
            for v in layer.weight.as_slice().iter().chain(layer.bias.as_slice()) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Mlp, NetError> {
        let mut r = ByteReader { bytes, pos: 0 };
        if r.take(4)? != MODEL_MAGIC {
            return Err(NetError::BadMagic);
        }
        let version = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
        if version != MODEL_VERSION {
            return Err(NetError::UnsupportedVersion(version));
        }
        let count = r.u32()? as usize;
        // Every dim needs four bytes; reject absurd counts before allocating.
        if count > bytes.len() / 4 {
            return Err(NetError::Truncated);
        }
        let dims = (0..count)
            .map(|_| r.u32().map(|v| v as usize))
            .collect::<Result<Vec<_>, _>>()?;
        validate_dims(&dims)?;
        let budget = r.f64()?;
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let nw = w[0].checked_mul(w[1]).ok_or(NetError::Truncated)?;
            if nw > r.remaining() / 8 {
                return Err(NetError::Truncated);
            }
            let weight = (0..nw).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
            let bias = (0..w[1]).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
            layers.push(Layer::new(
                Matrix::from_vec(w[0], w[1], weight),
                Matrix::from_vec(1, w[1], bias),
            ));
        }
        if r.remaining() > 0 {
            return Err(NetError::TrailingBytes(r.remaining()));
        }
        Self::from_layers(layers, budget)
    }
}

fn validate_dims(dims: &[usize]) -> Result<(), NetError> {
    if dims.len() < 2 {
        return Err(NetError::TooFewDims(dims.len()));
    }
    if let Some(index) = dims.iter().position(|&d| d == 0) {
        return Err(NetError::ZeroDim { index });
    }
    let hidden = &dims[1..dims.len() - 1];
    if let Some(k) = hidden.iter().position(|&w| w != hidden[0]) {
        return Err(NetError::UnequalWidth {
            layer: k,
            expected: hidden[0],
            found: hidden[k],
        });
    }
    Ok(())
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NetError> {
        let end = self.pos.checked_add(n).ok_or(NetError::Truncated)?;
        let s = self.bytes.get(self.pos..end).ok_or(NetError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, NetError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, NetError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

/// Parameter leaves of one [`Mlp`] on a [`Tape`]. The same parameters can be
/// applied to several inputs, which is how `F(G(x))` shares `F` with `F(y)`.
#[derive(Clone, Debug)]
pub struct MlpParams {
    layers: Vec<(Leaf, Leaf)>,
}

impl MlpParams {
    pub fn declare(tape: &mut Tape, prefix: &str, net: &Mlp) -> Self {
        let layers = (0..net.layers.len())
            .map(|k| {
                let w = tape.param(&alloc::format!("{prefix}.w{k}"));
                let b = tape.param(&alloc::format!("{prefix}.b{k}"));
                (w, b)
            })
            .collect();
        Self { layers }
    }

    /// Appends the network's forward pass on `input` to the tape.
    pub fn apply(&self, tape: &mut Tape, input: NodeId) -> NodeId {
        let last = self.layers.len() - 1;
        let mut h = input;
        for (k, (w, b)) in self.layers.iter().enumerate() {
            h = tape.affine(h, w.node, b.node);
            if k < last {
                h = tape.relu(h);
            }
        }
        h
    }

    pub fn bind(&self, bindings: &mut Bindings, net: &Mlp) {
        for ((w, b), layer) in self.layers.iter().zip(&net.layers) {
            bindings.bind(w.slot, layer.weight.clone());
            bindings.bind(b.slot, layer.bias.clone());
        }
    }

    /// `net += step * gradient`, layer by layer.
    pub fn step(&self, grads: &Gradients, net: &mut Mlp, step: f64) {
        for ((w, b), layer) in self.layers.iter().zip(&mut net.layers) {
            layer.weight.axpy(step, grads.get(w.slot).expect("weight gradient"));
            layer.bias.axpy(step, grads.get(b.slot).expect("bias gradient"));
        }
    }

    /// Gradient matrices in layer order: `w0, b0, w1, b1, …`.
    pub fn gradients<'g>(&self, grads: &'g Gradients) -> Vec<&'g Matrix> {
        self.layers
            .iter()
            .flat_map(|(w, b)| [w.slot, b.slot])
            .map(|s| grads.get(s).expect("param gradient"))
            .collect()
    }
}

/// Adam moment estimates for the parameters of one [`Mlp`].
///
/// Update sizes are invariant to the gradient scale, which matters here:
/// norm-constrained deep nets have gradients that shrink geometrically with
/// depth, so a fixed plain-gradient step is either useless at depth or
/// unstable at depth one.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
}

impl Adam {
    pub fn new(net: &Mlp, lr: f64) -> Self {
        let zeros: Vec<Matrix> = net
            .layers
            .iter()
            .flat_map(|l| {
                [
                    Matrix::zeros(l.weight.rows(), l.weight.cols()),
                    Matrix::zeros(1, l.bias.cols()),
                ]
            })
            .collect();
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    /// Moves `net` along `sign * gradient`, rescaled per coordinate
    /// (`sign = 1` ascends, `-1` descends).
    pub fn step(&mut self, params: &MlpParams, grads: &Gradients, net: &mut Mlp, sign: f64) {
        self.t = self.t.saturating_add(1);
        let c1 = 1.0 - math::powf(self.beta1, self.t as f64);
        let c2 = 1.0 - math::powf(self.beta2, self.t as f64);
        let targets = net.layers.iter_mut().flat_map(|l| [&mut l.weight, &mut l.bias]);
        for (((theta, g), m), v) in targets.zip(params.gradients(grads)).zip(&mut self.m).zip(&mut self.v) {
            let it = theta
                .as_mut_slice()
                .iter_mut()
                .zip(g.as_slice())
                .zip(m.as_mut_slice().iter_mut().zip(v.as_mut_slice()));
            for ((p, &g), (m, v)) in it {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                *p += sign * self.lr * (*m / c1) / (math::sqrt(*v / c2) + self.eps);
            }
        }
    }
}

/// `f(x) = Σ a_i σ((x, 1) · v_i)`, an element of `F(N, M)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShallowNet {
    directions: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
}

impl ShallowNet {
    /// Each direction has `d + 1` entries, the last one being the bias.
    pub fn new(directions: Vec<Vec<f64>>, coefficients: Vec<f64>) -> Result<Self, NetError> {
        if directions.is_empty() {
            return Err(NetError::Shallow("needs at least one unit"));
        }
        if directions.len() != coefficients.len() {
            return Err(NetError::Shallow("direction and coefficient counts differ"));
        }
        let len = directions[0].len();
        if len < 2 {
            return Err(NetError::Shallow("directions need d + 1 ≥ 2 entries"));
        }
        if directions.iter().any(|v| v.len() != len) {
            return Err(NetError::Shallow("directions have unequal lengths"));
        }
        if directions.iter().flatten().chain(&coefficients).any(|v| !v.is_finite()) {
            return Err(NetError::Shallow("non-finite parameter"));
        }
        Ok(Self {
            directions,
            coefficients,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.directions[0].len() - 1
    }

    pub fn units(&self) -> usize {
        self.coefficients.len()
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `M = max_i ‖v_i‖₁ · Σ |a_i|`.
    pub fn budget(&self) -> f64 {
        let max_v = self.directions.iter().map(|v| l1(v)).fold(0.0, f64::max);
        max_v * l1(&self.coefficients)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.input_dim(), "input dimension mismatch");
        self.directions
            .iter()
            .zip(&self.coefficients)
            .map(|(v, &a)| {
                let (bias, w) = v.split_last().unwrap();
                let pre: f64 = w.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + bias;
                a * pre.max(0.0)
            })
            .sum()
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale_coefficients(&mut self, c: f64) {
        for a in &mut self.coefficients {
            *a *= c;
        }
    }
}

pub(crate) fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| math::abs(*x)).sum()
}
