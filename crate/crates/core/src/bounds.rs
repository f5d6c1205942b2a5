//! Capacity and error bounds evaluated as numbers.
//!
//! All absolute constants hidden in big-O statements are exposed through a
//! single user constant `C` (default 1). Values are therefore meaningful up to
//! constants: compare slopes and shapes, not levels.

use alloc::vec::Vec;

use rand::Rng as _;

use crate::math;
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundError {
    #[error("{name} must be {requirement}, got {value}")]
    Invalid {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("integrand is not finite at eps = {0}")]
    NonFiniteIntegrand(f64),
}

fn require(ok: bool, name: &'static str, requirement: &'static str, value: f64) -> Result<(), BoundError> {
    if ok {
        Ok(())
    } else {
        Err(BoundError::Invalid {
            name,
            requirement,
            value,
        })
    }
}

/// Parameters shared by the estimation bound and the rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub width: f64,
    pub depth: f64,
    pub budget: f64,
    pub dim: f64,
    pub n: f64,
    pub m: f64,
    pub delta: f64,
    pub alpha: f64,
    pub c_user: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<(), BoundError> {
        let positive = "positive and finite";
        for (name, v) in [
            ("width", self.width),
            ("depth", self.depth),
            ("budget", self.budget),
            ("dim", self.dim),
            ("n", self.n),
            ("m", self.m),
            ("alpha", self.alpha),
            ("c_user", self.c_user),
        ] {
            require(v > 0.0 && v.is_finite(), name, positive, v)?;
        }
        require(
            self.delta > 0.0 && self.delta < 1.0 / 12.0,
            "delta",
            "in (0, 1/12)",
            self.delta,
        )
    }

    /// `max(n, m)`.
    pub fn sample_size(&self) -> f64 {
        self.n.max(self.m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formula {
    Covering,
    CoveringComposed,
    Dudley,
    Estimation,
    ExcessRiskRate,
}

impl Formula {
    pub fn id(self) -> &'static str {
        match self {
            Formula::Covering => "covering",
            Formula::CoveringComposed => "covering_composed",
            Formula::Dudley => "dudley",
            Formula::Estimation => "estimation",
            Formula::ExcessRiskRate => "excess_risk_rate",
        }
    }
}

/// An evaluated bound, up to constants.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    pub formula: Formula,
    pub inputs: Vec<(&'static str, f64)>,
}

/// `log N(eps)` upper bound for a ReLU class with `J` layers of width `W`
/// whose layer norms are bounded by `D`:
/// `M (ln C + J ln D − ln eps)` with `M = W² J`, or `3 W² J` for the class of
/// compositions, clamped at zero.
pub fn covering_bound(
    width: f64,
    layers: f64,
    norm: f64,
    eps: f64,
    composed: bool,
    c_user: f64,
) -> Result<BoundValue, BoundError> {
    require(eps > 0.0 && eps.is_finite(), "eps", "positive and finite", eps)?;
    require(width > 0.0, "width", "positive", width)?;
    require(layers > 0.0, "layers", "positive", layers)?;
    require(norm > 0.0, "norm", "positive", norm)?;
    require(c_user > 0.0, "c_user", "positive", c_user)?;
    let params = width * width * layers * if composed { 3.0 } else { 1.0 };
    let value = (params * (math::ln(c_user) + layers * math::ln(norm) - math::ln(eps))).max(0.0);
    Ok(BoundValue {
        value,
        formula: if composed {
            Formula::CoveringComposed
        } else {
            Formula::Covering
        },
        inputs: alloc::vec![("W", width), ("J", layers), ("D", norm), ("eps", eps), ("C", c_user)],
    })
}

/// `min_{0<δ<B/2} 2 (4δ + 12/√n ∫_δ^{B/2} √(log N(ε)) dε)`.
///
/// The integral is computed by adaptive Simpson in `ln ε`; the cutoff by
/// golden-section search over `ln δ ∈ [ln(1e−15 B), ln(B/2)]`.
pub fn dudley_bound(range: f64, n: f64, log_cover: impl Fn(f64) -> f64) -> Result<BoundValue, BoundError> {
    require(range > 0.0 && range.is_finite(), "range", "positive and finite", range)?;
    require(n > 0.0 && n.is_finite(), "n", "positive and finite", n)?;
    let upper = 0.5 * range;
    let integrand = |s: f64| -> Result<f64, BoundError> {
        let eps = math::exp(s);
        let v = log_cover(eps);
        if !v.is_finite() {
            return Err(BoundError::NonFiniteIntegrand(eps));
        }
        Ok(math::sqrt(v.max(0.0)) * eps)
    };
    let objective = |log_delta: f64| -> Result<f64, BoundError> {
        let delta = math::exp(log_delta);
        let integral = adaptive_simpson(&integrand, log_delta, math::ln(upper), 1e-13 * range, 50)?;
        Ok(2.0 * (4.0 * delta + 12.0 / math::sqrt(n) * integral))
    };

    let (mut a, mut b) = (math::ln(1e-15 * range), math::ln(upper));
    let inv_phi = 0.5 * (math::sqrt(5.0) - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    while b - a > 1e-10 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d)?;
        }
    }
    let lo_end = objective(math::ln(1e-15 * range))?;
    let hi_end = 2.0 * 4.0 * upper;
    let value = fc.min(fd).min(lo_end).min(hi_end);
    Ok(BoundValue {
        value,
        formula: Formula::Dudley,
        inputs: alloc::vec![("B", range), ("n", n)],
    })
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> Result<f64, BoundError>,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64, BoundError> {
    if b <= a {
        return Ok(0.0);
    }
    let (fa, fb) = (f(a)?, f(b)?);
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> Result<f64, BoundError>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, BoundError> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || math::abs(diff) <= 15.0 * tol {
        return Ok(left + right + diff / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// `C B (√(W²L/m) + √(W²L/n) + √(ln(1/δ)/m) + √(ln(1/δ)/n))`.
pub fn estimation_bound(inputs: &BoundInputs) -> Result<BoundValue, BoundError> {
    inputs.validate()?;
    let cap = inputs.width * inputs.width * inputs.depth;
    let conf = math::ln(1.0 / inputs.delta);
    let value = inputs.c_user
        * inputs.budget
        * (math::sqrt(cap / inputs.m)
            + math::sqrt(cap / inputs.n)
            + math::sqrt(conf / inputs.m)
            + math::sqrt(conf / inputs.n));
    Ok(BoundValue {
        value,
        formula: Formula::Estimation,
        inputs: echo(inputs),
    })
}

fn echo(i: &BoundInputs) -> Vec<(&'static str, f64)> {
    alloc::vec![
        ("W", i.width),
        ("L", i.depth),
        ("B", i.budget),
        ("d", i.dim),
        ("n", i.n),
        ("m", i.m),
        ("delta", i.delta),
        ("alpha", i.alpha),
        ("C", i.c_user),
    ]
}

/// Depth and budget balancing approximation against estimation error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    /// `N^{d/(2d+3)}`.
    pub depth_exact: f64,
    /// `N^{(d+3−2α)/(4d+6)}`.
    pub budget: f64,
    /// `depth_exact` rounded to the nearest integer, at least 2.
    pub depth: usize,
    /// Set when `d ≤ 3`, outside the regime the rates are stated for.
    pub low_dimension: bool,
}

pub fn schedule(n: f64, d: f64, alpha: f64) -> Result<Schedule, BoundError> {
    require(n >= 1.0 && n.is_finite(), "N", "at least 1", n)?;
    require(d >= 1.0 && d.is_finite(), "d", "at least 1", d)?;
    require(alpha > 1.0 && alpha < 2.0, "alpha", "in (1, 2)", alpha)?;
    let depth_exact = math::powf(n, d / (2.0 * d + 3.0));
    let budget = math::powf(n, (d + 3.0 - 2.0 * alpha) / (4.0 * d + 6.0));
    Ok(Schedule {
        depth_exact,
        budget,
        depth: (math::round(depth_exact) as usize).max(2),
        low_dimension: d <= 3.0,
    })
}

/// Approximation term `L^{−α/d}` and estimation term `B √(L/N)` at a
/// schedule, for checking that the schedule balances them.
pub fn schedule_terms(s: &Schedule, n: f64, d: f64, alpha: f64) -> (f64, f64) {
    (
        math::powf(s.depth_exact, -alpha / d),
        s.budget * math::sqrt(s.depth_exact / n),
    )
}

/// `C N^{−α/(3+2d)} √(ln(1/δ))`.
pub fn excess_risk_rate(n: f64, d: f64, alpha: f64, delta: f64, c_user: f64) -> Result<BoundValue, BoundError> {
    require(n >= 1.0 && n.is_finite(), "N", "at least 1", n)?;
    require(d >= 1.0, "d", "at least 1", d)?;
    require(alpha > 1.0 && alpha < 2.0, "alpha", "in (1, 2)", alpha)?;
    require(delta > 0.0 && delta < 1.0 / 12.0, "delta", "in (0, 1/12)", delta)?;
    require(c_user > 0.0, "c_user", "positive", c_user)?;
    let value = c_user * math::powf(n, -alpha / (3.0 + 2.0 * d)) * math::sqrt(math::ln(1.0 / delta));
    Ok(BoundValue {
        value,
        formula: Formula::ExcessRiskRate,
        inputs: alloc::vec![("N", n), ("d", d), ("alpha", alpha), ("delta", delta), ("C", c_user)],
    })
}

/// Empirical Rademacher complexity `E_ε sup_k |(1/n) Σ_i ε_i values[k][i]|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RademacherEstimate {
    pub estimate: f64,
    /// Zero for exact enumeration.
    pub std_error: f64,
    pub exact: bool,
    pub draws: usize,
}

/// Largest `n` for which [`rademacher_mc`] enumerates all sign patterns.
pub const RADEMACHER_EXACT_MAX_N: usize = 12;

fn sup_abs_mean(values: &Matrix, signs: impl Fn(usize) -> f64) -> f64 {
    let n = values.cols() as f64;
    (0..values.rows())
        .map(|k| {
            let s: f64 = values.row(k).iter().enumerate().map(|(i, v)| signs(i) * v).sum();
            math::abs(s / n)
        })
        .fold(0.0, f64::max)
}

/// Exact value by enumerating all `2^n` sign vectors. Panics if `n > 24`.
pub fn rademacher_enumerate(values: &Matrix) -> RademacherEstimate {
    let n = values.cols();
    assert!(n <= 24, "enumeration over 2^{n} patterns is too large");
    let patterns = 1usize << n;
    let total: f64 = (0..patterns)
        .map(|bits| sup_abs_mean(values, |i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 }))
        .sum();
    RademacherEstimate {
        estimate: total / patterns as f64,
        std_error: 0.0,
        exact: true,
        draws: patterns,
    }
}

/// Monte Carlo estimate over `draws` uniform sign vectors.
pub fn rademacher_sample(values: &Matrix, draws: usize, seed: u64) -> RademacherEstimate {
    assert!(draws >= 1, "need at least one draw");
    let mut rng = rng::seeded(seed);
    let n = values.cols();
    let mut signs = alloc::vec![0.0; n];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..draws {
        for s in &mut signs {
            *s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        }
        let v = sup_abs_mean(values, |i| signs[i]);
        sum += v;
        sum_sq += v * v;
    }
    let k = draws as f64;
    let mean = sum / k;
    let var = if draws > 1 {
        ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0)
    } else {
        0.0
    };
    RademacherEstimate {
        estimate: mean,
        std_error: math::sqrt(var / k),
        exact: false,
        draws,
    }
}

/// Enumerates when `n ≤ 12`, samples otherwise.
pub fn rademacher_mc(values: &Matrix, draws: usize, seed: u64) -> RademacherEstimate {
    if values.cols() <= RADEMACHER_EXACT_MAX_N {
        rademacher_enumerate(values)
    } else {
        rademacher_sample(values, draws, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> BoundInputs {
        BoundInputs {
            width: 4.0,
            depth: 4.0,
            budget: 2.0,
            dim: 4.0,
            n: 1024.0,
            m: 1024.0,
            delta: 0.01,
            alpha: 1.5,
            c_user: 1.0,
        }
    }

    #[test]
    fn covering_examples() {
        let v = covering_bound(3.0, 2.0, 2.0, 1.0, false, 1.0).unwrap().value;
        assert!((v - 18.0 * math::ln(4.0)).abs() < 1e-12);
        assert_eq!(covering_bound(3.0, 2.0, 2.0, 4.0, false, 1.0).unwrap().value, 0.0);
        let c = covering_bound(3.0, 2.0, 2.0, 0.1, true, 1.0).unwrap().value;
        assert!(c >= covering_bound(3.0, 2.0, 2.0, 0.1, false, 1.0).unwrap().value);
        assert!(covering_bound(3.0, 2.0, 2.0, 0.0, false, 1.0).is_err());
    }

    #[test]
    fn estimation_symmetric_case() {
        let i = worked();
        let v = estimation_bound(&i).unwrap().value;
        let paired = 2.0 * 2.0 * (math::sqrt(64.0 / 1024.0) + math::sqrt(math::ln(100.0) / 1024.0));
        assert!((v - paired).abs() < 1e-12);
        let big = BoundInputs { delta: 0.2, ..i };
        assert!(estimation_bound(&big).is_err());
    }

    #[test]
    fn schedule_at_one() {
        let s = schedule(1.0, 4.0, 1.5).unwrap();
        assert_eq!((s.depth_exact, s.budget, s.depth), (1.0, 1.0, 2));
        assert!(schedule(10.0, 2.0, 1.5).unwrap().low_dimension);
    }

    #[test]
    fn rate_monotone() {
        let r = |n: f64, delta: f64| excess_risk_rate(n, 4.0, 1.5, delta, 1.0).unwrap().value;
        assert!(r(2048.0, 0.01) < r(1024.0, 0.01));
        assert!(r(1024.0, 0.001) > r(1024.0, 0.01));
    }

    #[test]
    fn dudley_trivial_class() {
        let v = dudley_bound(1.0, 100.0, |_| 0.0).unwrap().value;
        assert!(v <= 1e-9);
        assert!(dudley_bound(1.0, 100.0, |_| f64::NAN).is_err());
    }

    #[test]
    fn dudley_monotone_in_n_and_range() {
        let cover = |eps: f64| covering_bound(2.0, 2.0, 1.5, eps, false, 1.0).unwrap().value;
        let a = dudley_bound(2.0, 100.0, cover).unwrap().value;
        let b = dudley_bound(2.0, 1000.0, cover).unwrap().value;
        let c = dudley_bound(4.0, 100.0, cover).unwrap().value;
        assert!(b <= a && c >= a, "{a} {b} {c}");
    }

    #[test]
    fn rademacher_two_point() {
        let v = Matrix::row_vector(&[1.0, -1.0]);
        let r = rademacher_mc(&v, 1, 0);
        assert!(r.exact);
        assert_eq!(r.estimate, 0.5);
        assert_eq!(rademacher_mc(&Matrix::zeros(3, 5), 10, 0).estimate, 0.0);
    }
}
