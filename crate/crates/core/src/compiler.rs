//! Compiles a shallow network `f(x) = Σ a_i σ((x,1)·v_i)` into a deep,
//! narrow ReLU network computing the same function.
//!
//! Units are split into `K` consecutive groups; hidden layer `t` evaluates
//! group `t` while carrying the input forward and accumulating the groups
//! already evaluated. Each hidden layer has `2d + n + 2` channels, `n` being
//! the largest group:
//!
//! | channels        | role                                                   |
//! |-----------------|--------------------------------------------------------|
//! | `0..d`          | source `σ(x_j)`                                        |
//! | `d..2d`         | source `σ(−x_j)`                                       |
//! | `2d..2d+n`      | regular: `σ((x,1)·v_u / P̂_t)` for the units of group t |
//! | `2d+n`, `2d+n+1`| collation: positive and negative partial sums          |
//!
//! With `P̂_t` the normalising scale of group `t`, `Q_t = max_{s≤t} P̂_s` and
//! `S±_t` the running sums of positive/negative coefficient magnitudes, the
//! positive collation channel in hidden layer `t` holds
//! `Σ_{groups<t, a>0} a·unit / (Q_{t−1} S+_{t−1})` (and likewise for the
//! negative one), so every hidden column has augmented ℓ1 norm at most 1 and
//! the output layer has norm `Q_{K−2} S_{K−2} + P̂_{K−1}‖α_{K−1}‖₁ ≤ Q_{K−1} S_{K−1}`.
//!
//! Splitting the collation channel by sign keeps its two halves nonnegative,
//! so the ReLU passes them through unchanged and the output layer pays each
//! coefficient once.
//!
//! Units in the first group read `x` directly and are normalised by
//! `P̂_0 = max ‖v_u‖₁`. Later units only see `σ(x) − σ(−x)`, which costs
//! `2‖v_x‖₁ + |v_0|` in the augmented norm, so their scale is
//! `P̂_t = max (2‖v_x‖₁ + |v_0|)`. The resulting path norm is at most
//! `Q_{K−1} S_{K−1}`, which lies between `M` and `2M`; it equals `M` when
//! only the first group depends on `x`. [`CompilePlan`] records both the
//! plain group norms `P_t = max ‖v_u‖₁` and the realised scales.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng as _;

use crate::math;
use crate::matrix::Matrix;
use crate::net::{l1, Layer, Mlp, NetError, ShallowNet};
use crate::rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("group sizes sum to {found}, the network has {expected} units")]
    PartitionSum { expected: usize, found: usize },
    #[error("input dimension {found} does not match {expected}")]
    InputDim { expected: usize, found: usize },
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Scalars of the construction for one grouping.
#[derive(Clone, Debug, PartialEq)]
pub struct CompilePlan {
    pub input_dim: usize,
    /// Unit indices of each group, in order.
    pub groups: Vec<Vec<usize>>,
    /// `P_t = max_{u ∈ t} ‖v_u‖₁`.
    pub group_norms: Vec<f64>,
    /// `P̂_t`, the scale the regular channels of group `t` are divided by.
    pub scales: Vec<f64>,
    /// `Q_t = max_{s ≤ t} P̂_s`.
    pub running_max: Vec<f64>,
    /// `S_t = Σ_{s ≤ t} ‖α_s‖₁` over units that depend on their input.
    pub running_sum: Vec<f64>,
    pub running_sum_pos: Vec<f64>,
    pub running_sum_neg: Vec<f64>,
    /// Coefficients with zero-direction units set to zero.
    pub effective_coefficients: Vec<f64>,
}

impl CompilePlan {
    /// `group_sizes` defaults to one unit per group.
    pub fn new(shallow: &ShallowNet, group_sizes: Option<&[usize]>) -> Result<Self, CompileError> {
        let n_units = shallow.units();
        let singleton;
        let sizes = match group_sizes {
            Some(s) => s,
            None => {
                singleton = vec![1; n_units];
                &singleton
            }
        };
        if let Some(k) = sizes.iter().position(|&s| s == 0) {
            return Err(CompileError::EmptyGroup(k));
        }
        let total: usize = sizes.iter().sum();
        if total != n_units {
            return Err(CompileError::PartitionSum {
                expected: n_units,
                found: total,
            });
        }
        let d = shallow.input_dim();
        let mut groups = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &s in sizes {
            groups.push((start..start + s).collect::<Vec<_>>());
            start += s;
        }

        let dirs = shallow.directions();
        let coefs: Vec<f64> = dirs
            .iter()
            .zip(shallow.coefficients())
            .map(|(v, &a)| if v.iter().all(|&x| x == 0.0) { 0.0 } else { a })
            .collect();

        let mut plan = CompilePlan {
            input_dim: d,
            groups,
            group_norms: Vec::new(),
            scales: Vec::new(),
            running_max: Vec::new(),
            running_sum: Vec::new(),
            running_sum_pos: Vec::new(),
            running_sum_neg: Vec::new(),
            effective_coefficients: Vec::new(),
        };
        let (mut q, mut s, mut sp, mut sn) = (0.0f64, 0.0, 0.0, 0.0);
        for (t, group) in plan.groups.iter().enumerate() {
            let p = group.iter().map(|&u| l1(&dirs[u])).fold(0.0, f64::max);
            let scale = group
                .iter()
                .map(|&u| {
                    let (bias, w) = dirs[u].split_last().unwrap();
                    if t == 0 {
                        l1(w) + math::abs(*bias)
                    } else {
                        2.0 * l1(w) + math::abs(*bias)
                    }
                })
                .fold(0.0, f64::max);
            q = q.max(scale);
            for &u in group {
                let a = coefs[u];
                s += math::abs(a);
                if a > 0.0 {
                    sp += a;
                } else {
                    sn -= a;
                }
            }
            plan.group_norms.push(p);
            plan.scales.push(scale);
            plan.running_max.push(q);
            plan.running_sum.push(s);
            plan.running_sum_pos.push(sp);
            plan.running_sum_neg.push(sn);
        }
        plan.effective_coefficients = coefs;
        Ok(plan)
    }

    /// Number of hidden layers, `K`.
    pub fn depth(&self) -> usize {
        self.groups.len()
    }

    /// Largest group size, `n`.
    pub fn max_group(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `2d + n + 2`.
    pub fn width(&self) -> usize {
        2 * self.input_dim + self.max_group() + 2
    }

    /// `max_t P_t · S_{K−1}`, which is at most `M`.
    pub fn plain_budget(&self) -> f64 {
        self.group_norms.iter().cloned().fold(0.0, f64::max) * self.last(&self.running_sum)
    }

    /// `Q_{K−1} S_{K−1}`: the path norm guaranteed by the construction.
    pub fn certified_budget(&self) -> f64 {
        self.last(&self.running_max) * self.last(&self.running_sum)
    }

    fn last(&self, v: &[f64]) -> f64 {
        *v.last().expect("plan has at least one group")
    }

    /// Left-hand side of `Q_{t−1}S_{t−1}/(Q_t S_t) + P̂_t‖α_t‖₁/(Q_t S_t) ≤ 1`
    /// for every step `t ≥ 1` with `Q_t S_t > 0`.
    pub fn contraction_terms(&self) -> Vec<f64> {
        (1..self.depth())
            .filter_map(|t| {
                let denom = self.running_max[t] * self.running_sum[t];
                if denom == 0.0 {
                    return None;
                }
                let alpha = self.running_sum[t] - self.running_sum[t - 1];
                let prev = self.running_max[t - 1] * self.running_sum[t - 1];
                Some(prev / denom + self.scales[t] * alpha / denom)
            })
            .collect()
    }

    fn collation_coefficient(&self, sums: &[f64], t: usize) -> (f64, f64) {
        // Weight on the old channel and the scale dividing new units, for the
        // affine map into hidden layer t (t ≥ 1), accumulating group t−1.
        let denom = self.running_max[t - 1] * sums[t - 1];
        if denom == 0.0 {
            return (0.0, 0.0);
        }
        let carry = if t >= 2 {
            self.running_max[t - 2] * sums[t - 2] / denom
        } else {
            0.0
        };
        (carry, 1.0 / denom)
    }
}

/// Builds the deep network for `shallow` under the given grouping.
pub fn compile(shallow: &ShallowNet, group_sizes: Option<&[usize]>) -> Result<Mlp, CompileError> {
    compile_with_plan(shallow, group_sizes).map(|(_, net)| net)
}

pub fn compile_with_plan(
    shallow: &ShallowNet,
    group_sizes: Option<&[usize]>,
) -> Result<(CompilePlan, Mlp), CompileError> {
    let plan = CompilePlan::new(shallow, group_sizes)?;
    let d = plan.input_dim;
    let n = plan.max_group();
    let width = plan.width();
    let (reg, hp, hn) = (2 * d, 2 * d + n, 2 * d + n + 1);
    let dirs = shallow.directions();
    let coefs = &plan.effective_coefficients;
    let k = plan.depth();

    let mut layers = Vec::with_capacity(k + 1);
    for t in 0..k {
        let input = if t == 0 { d } else { width };
        let mut layer = Layer::zeros(input, width);
        for j in 0..d {
            if t == 0 {
                layer.weight[(j, j)] = 1.0;
                layer.weight[(j, d + j)] = -1.0;
            } else {
                layer.weight[(j, j)] = 1.0;
                layer.weight[(d + j, d + j)] = 1.0;
            }
        }
        let scale = plan.scales[t];
        if scale > 0.0 {
            for (i, &u) in plan.groups[t].iter().enumerate() {
                let (bias, w) = dirs[u].split_last().unwrap();
                for (j, &wj) in w.iter().enumerate() {
                    let c = wj / scale;
                    if t == 0 {
                        layer.weight[(j, reg + i)] = c;
                    } else {
                        layer.weight[(j, reg + i)] = c;
                        layer.weight[(d + j, reg + i)] = -c;
                    }
                }
                layer.bias.as_mut_slice()[reg + i] = bias / scale;
            }
        }
        if t >= 1 {
            let prev_scale = plan.scales[t - 1];
            for (sums, channel, sign) in [(&plan.running_sum_pos, hp, 1.0), (&plan.running_sum_neg, hn, -1.0)] {
                let (carry, inv) = plan.collation_coefficient(sums, t);
                layer.weight[(channel, channel)] = carry;
                for (i, &u) in plan.groups[t - 1].iter().enumerate() {
                    let a = sign * coefs[u];
                    if a > 0.0 {
                        layer.weight[(reg + i, channel)] = prev_scale * a * inv;
                    }
                }
            }
        }
        layers.push(layer);
    }

    let mut out = Layer::zeros(width, 1);
    if k >= 2 {
        let q = plan.running_max[k - 2];
        out.weight[(hp, 0)] = q * plan.running_sum_pos[k - 2];
        out.weight[(hn, 0)] = -q * plan.running_sum_neg[k - 2];
    }
    let last_scale = plan.scales[k - 1];
    for (i, &u) in plan.groups[k - 1].iter().enumerate() {
        out.weight[(reg + i, 0)] = coefs[u] * last_scale;
    }
    layers.push(out);

    let net = Mlp::from_layers(layers, plan.certified_budget())?;
    Ok((plan, net))
}

/// Max `|shallow(x) − deep(x)|` over `probes` points uniform in `[−2, 2]^d`.
pub fn verify_equivalence(shallow: &ShallowNet, deep: &Mlp, probes: usize, seed: u64) -> Result<f64, CompileError> {
    let d = shallow.input_dim();
    if deep.input_dim() != d || deep.output_dim() != 1 {
        return Err(CompileError::InputDim {
            expected: d,
            found: deep.input_dim(),
        });
    }
    let mut rng = rng::seeded(seed);
    let points = Matrix::from_vec(probes, d, (0..probes * d).map(|_| rng.gen_range(-2.0..=2.0)).collect());
    let deep_out = deep.forward(&points)?;
    Ok((0..probes)
        .map(|i| math::abs(shallow.eval(points.row(i)) - deep_out.as_slice()[i]))
        .fold(0.0, f64::max))
}

/// Path norm of a compiled network that exceeds `M (1 + 1e−12)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateViolation {
    pub achieved: f64,
    pub budget: f64,
    pub layer_norms: Vec<f64>,
}

impl fmt::Display for CertificateViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "path norm {} exceeds budget {}; layer factors:",
            self.achieved, self.budget
        )?;
        let last = self.layer_norms.len() - 1;
        for (k, n) in self.layer_norms.iter().enumerate() {
            if k < last {
                write!(f, " max({n}, 1)")?;
            } else {
                write!(f, " × {n}")?;
            }
        }
        Ok(())
    }
}

/// Checks `path_norm(deep) ≤ m (1 + 1e−12)` and returns the achieved value.
pub fn norm_certificate(deep: &Mlp, m: f64) -> Result<f64, CertificateViolation> {
    let achieved = deep.path_norm();
    if achieved <= m * (1.0 + 1e-12) {
        Ok(achieved)
    } else {
        Err(CertificateViolation {
            achieved,
            budget: m,
            layer_norms: deep.layer_norms(),
        })
    }
}

/// Human-readable layout summary.
pub fn describe(plan: &CompilePlan) -> String {
    alloc::format!(
        "groups={} width={} depth={} plain_budget={} certified_budget={}",
        plan.groups.len(),
        plan.width(),
        plan.depth(),
        plan.plain_budget(),
        plan.certified_budget()
    )
}
