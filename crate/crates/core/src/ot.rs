//! Exact optimal transport at desk scale.
//!
//! * One dimension: the monotone (quantile) coupling, which is optimal for
//!   every convex cost and gives `W1` as the `L1` distance between quantile
//!   functions, or equivalently between CDFs.
//! * Any dimension: a dense assignment problem under the `ℓ1` ground metric,
//!   solved exactly with the Hungarian method. Unequal sample counts are
//!   replicated up to their least common multiple.

use alloc::vec;
use alloc::vec::Vec;

use crate::dist::Dist1D;
use crate::math;
use crate::matrix::Matrix;
use crate::net::Mlp;

/// Largest `n * m` (and replicated `L * L`) accepted by [`w1_discrete_exact`].
pub const DISCRETE_SIZE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OtError {
    #[error("empirical measure has no points")]
    Empty,
    #[error("point {row} has a non-finite coordinate")]
    NonFinite { row: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("operation needs one-dimensional data, got d = {0}")]
    NotOneDimensional(usize),
    #[error("instance of size {size} exceeds the cap {cap}; subsample the clouds")]
    TooLarge { size: usize, cap: usize },
    #[error("map grid is invalid: {0}")]
    Grid(&'static str),
}

/// Equal-weight point cloud, one point per row.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    points: Matrix,
}

impl EmpiricalMeasure {
    pub fn new(points: Matrix) -> Result<Self, OtError> {
        if points.rows() == 0 || points.cols() == 0 {
            return Err(OtError::Empty);
        }
        if let Some(row) = (0..points.rows()).find(|&i| points.row(i).iter().any(|v| !v.is_finite())) {
            return Err(OtError::NonFinite { row });
        }
        Ok(Self { points })
    }

    pub fn from_1d(values: &[f64]) -> Result<Self, OtError> {
        Self::new(Matrix::column(values))
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn into_points(self) -> Matrix {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    /// Coordinates of a one-dimensional cloud.
    pub fn values_1d(&self) -> Result<&[f64], OtError> {
        if self.dim() != 1 {
            return Err(OtError::NotOneDimensional(self.dim()));
        }
        Ok(self.points.as_slice())
    }

    /// Sorted coordinates of a one-dimensional cloud (stable for ties).
    pub fn sorted_1d(&self) -> Result<Vec<f64>, OtError> {
        let mut v = self.values_1d()?.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(v)
    }

    /// Every point shifted by `c`.
    pub fn translated(&self, c: &[f64]) -> Self {
        assert_eq!(c.len(), self.dim());
        let mut p = self.points.clone();
        for i in 0..p.rows() {
            for (v, s) in p.row_mut(i).iter_mut().zip(c) {
                *v += s;
            }
        }
        Self { points: p }
    }

    /// Image of the cloud under `map`. Errors if the image is not finite.
    pub fn push_forward(&self, map: &dyn PointMap) -> Result<Self, OtError> {
        if map.input_dim() != self.dim() {
            return Err(OtError::DimMismatch(map.input_dim(), self.dim()));
        }
        Self::new(map.map_points(&self.points))
    }

    pub fn mean(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        (0..self.len()).map(|i| f(self.points.row(i))).sum::<f64>() / self.len() as f64
    }
}

/// Anything that maps batches of points (rows) to batches of points.
pub trait PointMap {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn map_points(&self, x: &Matrix) -> Matrix;
}

impl PointMap for Mlp {
    fn input_dim(&self) -> usize {
        Mlp::input_dim(self)
    }

    fn output_dim(&self) -> usize {
        Mlp::output_dim(self)
    }

    fn map_points(&self, x: &Matrix) -> Matrix {
        self.forward(x).expect("dimension checked by caller")
    }
}

/// Identity map on `R^d`.
#[derive(Clone, Copy, Debug)]
pub struct IdentityMap(pub usize);

impl PointMap for IdentityMap {
    fn input_dim(&self) -> usize {
        self.0
    }

    fn output_dim(&self) -> usize {
        self.0
    }

    fn map_points(&self, x: &Matrix) -> Matrix {
        x.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interp {
    /// Right-continuous step: `x` maps to the target value of the last grid
    /// point `≤ x` (the first one below the grid).
    Step,
    /// Piecewise linear through the grid, extended linearly past the ends
    /// and clamped to `clamp`.
    Linear,
}

/// Monotone transport map on the line, `T = Q_target ∘ F_source`.
#[derive(Clone, Debug, PartialEq)]
pub enum MongeMap1D {
    Grid {
        source: Vec<f64>,
        target: Vec<f64>,
        rule: Interp,
        clamp: (f64, f64),
    },
    /// Evaluates `Q_target(F_source(x))` exactly at every point.
    Analytic { source: Dist1D, target: Dist1D },
}

/// A one-dimensional marginal, sampled or analytic.
#[derive(Clone, Copy, Debug)]
pub enum Marginal<'a> {
    Empirical(&'a EmpiricalMeasure),
    Analytic(&'a Dist1D),
}

impl MongeMap1D {
    pub fn from_grid(source: Vec<f64>, target: Vec<f64>, rule: Interp) -> Result<Self, OtError> {
        if source.is_empty() || source.len() != target.len() {
            return Err(OtError::Grid("source and target grids need equal nonzero length"));
        }
        if source.windows(2).any(|w| !(w[0] <= w[1])) || target.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(OtError::Grid("grids must be nondecreasing"));
        }
        if rule == Interp::Linear && source.len() < 2 {
            return Err(OtError::Grid("linear rule needs two grid points"));
        }
        Ok(MongeMap1D::Grid {
            source,
            target,
            rule,
            clamp: (f64::NEG_INFINITY, f64::INFINITY),
        })
    }

    /// Restricts the output range of a grid map.
    pub fn with_clamp(mut self, lo: f64, hi: f64) -> Self {
        if let MongeMap1D::Grid { clamp, .. } = &mut self {
            *clamp = (lo, hi);
        }
        self
    }

    /// Linear-interpolated grid of `(Q_s(p_k), Q_t(p_k))` at `points` evenly
    /// spaced levels strictly inside `(0, 1)`.
    pub fn analytic_grid(source: &Dist1D, target: &Dist1D, points: usize) -> Result<Self, OtError> {
        if points < 2 {
            return Err(OtError::Grid("linear rule needs two grid points"));
        }
        let levels: Vec<f64> = (0..points).map(|k| (k as f64 + 0.5) / points as f64).collect();
        let src = levels.iter().map(|&p| source.quantile(p)).collect();
        let tgt = levels.iter().map(|&p| target.quantile(p)).collect();
        let (lo, hi) = target.support();
        Ok(Self::from_grid(src, tgt, Interp::Linear)?.with_clamp(lo, hi))
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self {
            MongeMap1D::Analytic { source, target } => target.quantile(source.cdf(x)),
            MongeMap1D::Grid {
                source,
                target,
                rule,
                clamp,
            } => {
                // Number of grid points <= x.
                let k = source.partition_point(|&s| s <= x);
                let y = match rule {
                    Interp::Step => target[k.saturating_sub(1)],
                    Interp::Linear => {
                        let j = k.clamp(1, source.len() - 1) - 1;
                        let (x0, x1) = (source[j], source[j + 1]);
                        let (y0, y1) = (target[j], target[j + 1]);
                        if x1 > x0 {
                            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
                        } else if x < x0 {
                            y0
                        } else {
                            y1
                        }
                    }
                };
                y.clamp(clamp.0, clamp.1)
            }
        }
    }

    /// Nondecreasing on the grid (analytic maps are monotone by construction).
    pub fn is_monotone(&self) -> bool {
        match self {
            MongeMap1D::Grid { source, target, .. } => {
                source.windows(2).all(|w| w[0] <= w[1]) && target.windows(2).all(|w| w[0] <= w[1])
            }
            MongeMap1D::Analytic { .. } => true,
        }
    }
}

impl PointMap for MongeMap1D {
    fn input_dim(&self) -> usize {
        1
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn map_points(&self, x: &Matrix) -> Matrix {
        x.map(|v| self.apply(v))
    }
}

/// Applies one monotone map per coordinate. For product measures and the
/// `ℓ1` ground metric this is an optimal transport map.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateMap(pub Vec<MongeMap1D>);

impl PointMap for CoordinateMap {
    fn input_dim(&self) -> usize {
        self.0.len()
    }

    fn output_dim(&self) -> usize {
        self.0.len()
    }

    fn map_points(&self, x: &Matrix) -> Matrix {
        assert_eq!(x.cols(), self.0.len(), "dimension mismatch");
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (v, map) in out.row_mut(i).iter_mut().zip(&self.0) {
                *v = map.apply(*v);
            }
        }
        out
    }
}

/// Monotone map pushing `source` onto `target`.
///
/// With two empirical measures of equal size the `i`-th order statistic of
/// the source goes to the `i`-th order statistic of the target.
pub fn quantile_map_1d(source: Marginal<'_>, target: Marginal<'_>) -> Result<MongeMap1D, OtError> {
    match (source, target) {
        (Marginal::Empirical(s), Marginal::Empirical(t)) => {
            let src = s.sorted_1d()?;
            let tgt = t.sorted_1d()?;
            let (n, m) = (src.len(), tgt.len());
            // F_s jumps to (i+1)/n at the i-th order statistic; the target
            // quantile at level p is t[ceil(p m) - 1].
            let mapped = (0..n).map(|i| tgt[((i + 1) * m).div_ceil(n) - 1]).collect();
            MongeMap1D::from_grid(src, mapped, Interp::Step)
        }
        (Marginal::Empirical(s), Marginal::Analytic(t)) => {
            let src = s.sorted_1d()?;
            let n = src.len();
            let mapped = (0..n).map(|i| t.quantile((i as f64 + 0.5) / n as f64)).collect();
            MongeMap1D::from_grid(src, mapped, Interp::Step)
        }
        (Marginal::Analytic(s), Marginal::Empirical(t)) => {
            let tgt = t.sorted_1d()?;
            let m = tgt.len();
            // Jump into t[k] once F_s(x) exceeds k/m.
            let src = (0..m).map(|k| s.quantile(k as f64 / m as f64)).collect();
            MongeMap1D::from_grid(src, tgt, Interp::Step)
        }
        (Marginal::Analytic(s), Marginal::Analytic(t)) => Ok(MongeMap1D::Analytic {
            source: s.clone(),
            target: t.clone(),
        }),
    }
}

/// Exact `W1` between two one-dimensional empirical measures.
pub fn w1_empirical_1d(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure) -> Result<f64, OtError> {
    let a = xs.sorted_1d()?;
    let b = ys.sorted_1d()?;
    Ok(w1_sorted(&a, &b))
}

/// `W1` between the empirical measures of two sorted samples.
pub fn w1_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    if n == m {
        return a.iter().zip(b).map(|(x, y)| math::abs(x - y)).sum::<f64>() / n as f64;
    }
    // Integrate |F_a - F_b| over the merged breakpoints; counts stay integral.
    let (mut i, mut j) = (0usize, 0usize);
    let mut total = 0.0;
    let mut prev = a[0].min(b[0]);
    while i < n || j < m {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        let gap = (i * m).abs_diff(j * n) as f64;
        total += gap * (next - prev);
        while i < n && a[i] == next {
            i += 1;
        }
        while j < m && b[j] == next {
            j += 1;
        }
        prev = next;
    }
    total / (n * m) as f64
}

/// Exact `W1` under the `ℓ1` ground metric for clouds of any dimension.
pub fn w1_discrete_exact(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure) -> Result<f64, OtError> {
    if xs.dim() != ys.dim() {
        return Err(OtError::DimMismatch(xs.dim(), ys.dim()));
    }
    let (n, m) = (xs.len(), ys.len());
    let size = n.saturating_mul(m);
    if size > DISCRETE_SIZE_CAP {
        return Err(OtError::TooLarge {
            size,
            cap: DISCRETE_SIZE_CAP,
        });
    }
    let l = n / gcd(n, m) * m;
    let replicated = l.saturating_mul(l);
    if replicated > DISCRETE_SIZE_CAP {
        return Err(OtError::TooLarge {
            size: replicated,
            cap: DISCRETE_SIZE_CAP,
        });
    }
    let (rn, rm) = (l / n, l / m);
    let cost = Matrix::from_vec(
        l,
        l,
        (0..l)
            .flat_map(|i| {
                let x = xs.points.row(i / rn);
                (0..l).map(move |j| l1_distance(x, ys.points.row(j / rm)))
            })
            .collect(),
    );
    let assignment = hungarian(&cost);
    let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
    Ok(total / l as f64)
}

/// `W1` using the 1D formula when `d = 1` and the assignment solver otherwise.
pub fn w1(xs: &EmpiricalMeasure, ys: &EmpiricalMeasure) -> Result<f64, OtError> {
    if xs.dim() != ys.dim() {
        return Err(OtError::DimMismatch(xs.dim(), ys.dim()));
    }
    if xs.dim() == 1 {
        w1_empirical_1d(xs, ys)
    } else {
        w1_discrete_exact(xs, ys)
    }
}

/// `W1(map_# source, target)`; zero iff the map pushes the empirical source
/// exactly onto the empirical target.
pub fn pushforward_check(
    map: &dyn PointMap,
    source: &EmpiricalMeasure,
    target: &EmpiricalMeasure,
) -> Result<f64, OtError> {
    w1(&source.push_forward(map)?, target)
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| math::abs(x - y)).sum()
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Minimum-cost perfect matching on a square cost matrix; returns the column
/// assigned to each row.
///
/// Shortest augmenting paths with row/column potentials, `O(n^3)`.
pub fn hungarian(cost: &Matrix) -> Vec<usize> {
    let n = cost.rows();
    assert_eq!(n, cost.cols(), "assignment needs a square cost matrix");
    if n == 0 {
        return Vec::new();
    }
    // 1-based with a virtual column 0, following the classical formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    assignment
}
