//! Analytic one-dimensional distributions with CDF, density, quantile and
//! inverse-CDF sampling.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::math;
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq)]
pub enum Dist1D {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    /// `base` conditioned on `[lo, hi]`.
    Truncated {
        base: Box<Dist1D>,
        lo: f64,
        hi: f64,
    },
    /// Weighted mixture; weights are normalised on construction.
    Mixture {
        components: Vec<(f64, Dist1D)>,
    },
    /// Law of `scale * Y + shift` for `Y ~ base`, `scale > 0`.
    Affine {
        base: Box<Dist1D>,
        scale: f64,
        shift: f64,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistError {
    #[error("invalid distribution parameter: {0}")]
    Param(&'static str),
}

impl Dist1D {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self, DistError> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(DistError::Param("uniform needs finite lo < hi"));
        }
        Ok(Dist1D::Uniform { lo, hi })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self, DistError> {
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(DistError::Param("normal needs finite mean and sd > 0"));
        }
        Ok(Dist1D::Normal { mean, sd })
    }

    pub fn truncated(base: Dist1D, lo: f64, hi: f64) -> Result<Self, DistError> {
        if !(lo < hi) {
            return Err(DistError::Param("truncation needs lo < hi"));
        }
        if !(base.cdf(hi) - base.cdf(lo) > 0.0) {
            return Err(DistError::Param("truncation interval has no mass"));
        }
        Ok(Dist1D::Truncated {
            base: Box::new(base),
            lo,
            hi,
        })
    }

    pub fn mixture(components: Vec<(f64, Dist1D)>) -> Result<Self, DistError> {
        let total: f64 = components.iter().map(|(w, _)| *w).sum();
        if components.is_empty() || components.iter().any(|(w, _)| !(*w >= 0.0)) || !(total > 0.0) {
            return Err(DistError::Param("mixture needs nonnegative weights with positive sum"));
        }
        Ok(Dist1D::Mixture {
            components: components.into_iter().map(|(w, d)| (w / total, d)).collect(),
        })
    }

    pub fn affine(base: Dist1D, scale: f64, shift: f64) -> Result<Self, DistError> {
        if !(scale > 0.0 && scale.is_finite() && shift.is_finite()) {
            return Err(DistError::Param("affine needs scale > 0"));
        }
        Ok(Dist1D::Affine {
            base: Box::new(base),
            scale,
            shift,
        })
    }

    /// Restricts to `[lo, hi]` and maps that interval linearly onto `[0, 1]`.
    pub fn truncated_to_unit(base: Dist1D, lo: f64, hi: f64) -> Result<Self, DistError> {
        let t = Self::truncated(base, lo, hi)?;
        Self::affine(t, 1.0 / (hi - lo), -lo / (hi - lo))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Dist1D::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Dist1D::Normal { mean, sd } => math::norm_cdf((x - mean) / sd),
            Dist1D::Truncated { base, lo, hi } => {
                if x <= *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else {
                    let a = base.cdf(*lo);
                    (base.cdf(x) - a) / (base.cdf(*hi) - a)
                }
            }
            Dist1D::Mixture { components } => components.iter().map(|(w, d)| w * d.cdf(x)).sum(),
            Dist1D::Affine { base, scale, shift } => base.cdf((x - shift) / scale),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Dist1D::Uniform { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Dist1D::Normal { mean, sd } => math::norm_pdf((x - mean) / sd) / sd,
            Dist1D::Truncated { base, lo, hi } => {
                if x < *lo || x > *hi {
                    0.0
                } else {
                    base.pdf(x) / (base.cdf(*hi) - base.cdf(*lo))
                }
            }
            Dist1D::Mixture { components } => components.iter().map(|(w, d)| w * d.pdf(x)).sum(),
            Dist1D::Affine { base, scale, shift } => base.pdf((x - shift) / scale) / scale,
        }
    }

    /// Generalised inverse of the CDF. `p` is clamped to `[0, 1]`; the
    /// endpoints return the support bounds (possibly infinite).
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self {
            Dist1D::Uniform { lo, hi } => lo + p * (hi - lo),
            Dist1D::Normal { mean, sd } => mean + sd * math::norm_quantile(p),
            Dist1D::Truncated { base, lo, hi } => {
                let a = base.cdf(*lo);
                let b = base.cdf(*hi);
                base.quantile(a + p * (b - a)).clamp(*lo, *hi)
            }
            Dist1D::Mixture { components } => {
                let (mut lo, mut hi) = components.iter().filter(|(w, _)| *w > 0.0).fold(
                    (f64::INFINITY, f64::NEG_INFINITY),
                    |(lo, hi), (_, d)| {
                        let q = d.quantile(p);
                        (lo.min(q), hi.max(q))
                    },
                );
                if !(lo.is_finite() && hi.is_finite()) || lo == hi {
                    return if p < 0.5 { lo } else { hi };
                }
                // F(lo) <= p <= F(hi) because F is the weighted mean of the
                // component CDFs.
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
            Dist1D::Affine { base, scale, shift } => shift + scale * base.quantile(p),
        }
    }

    /// Smallest closed interval carrying all the mass.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Dist1D::Uniform { lo, hi } => (*lo, *hi),
            Dist1D::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Dist1D::Truncated { lo, hi, .. } => (*lo, *hi),
            Dist1D::Mixture { components } => components
                .iter()
                .map(|(_, d)| d.support())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| {
                    (a.min(c), b.max(d))
                }),
            Dist1D::Affine { base, scale, shift } => {
                let (a, b) = base.support();
                (shift + scale * a, shift + scale * b)
            }
        }
    }

    /// Inverse-CDF sampling on the open unit interval.
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        let u: f64 = rng.gen();
        // Avoid p = 0, which maps to the support bound.
        self.quantile(u.max(f64::MIN_POSITIVE))
    }

    pub fn sample_n(&self, n: usize, rng: &mut Rng) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}
