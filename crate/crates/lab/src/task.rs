//! Source/target distribution pairs used by the experiments.
//!
//! Every family is a product of one-dimensional laws on the unit cube, so
//! the coordinatewise quantile maps form an exact optimal transport pair
//! under the `ℓ1` ground metric.

use std::fmt;
use std::str::FromStr;

use cyclerisk_core::dist::{Dist1D, DistError};
use cyclerisk_core::ot::{CoordinateMap, EmpiricalMeasure, MongeMap1D};
use cyclerisk_core::rng::Rng;
use cyclerisk_core::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TaskFamily {
    Gaussian1d,
    GaussianMixture1d,
    UniformAffine1d,
    Gaussian2d,
}

impl TaskFamily {
    pub const ALL: [TaskFamily; 4] = [
        TaskFamily::Gaussian1d,
        TaskFamily::GaussianMixture1d,
        TaskFamily::UniformAffine1d,
        TaskFamily::Gaussian2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskFamily::Gaussian1d => "gaussian-1d",
            TaskFamily::GaussianMixture1d => "gaussian-mixture-1d",
            TaskFamily::UniformAffine1d => "uniform-affine-1d",
            TaskFamily::Gaussian2d => "gaussian-2d",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            TaskFamily::Gaussian2d => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for TaskFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        TaskFamily::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<_> = TaskFamily::ALL.iter().map(|f| f.name()).collect();
            format!("unknown task family `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// Shape parameters. Gaussian laws are truncated to `[-1, 1]` and that
/// interval is rescaled onto `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskParams {
    pub mu_mean: f64,
    pub mu_sd: f64,
    /// `gaussian-1d` / `gaussian-2d`: mean of the target law.
    pub nu_mean: f64,
    pub nu_sd: f64,
    /// `gaussian-mixture-1d`: the two target components sit at `±nu_sep`
    /// with standard deviation `mix_sd`.
    pub nu_sep: f64,
    pub mix_sd: f64,
    /// `uniform-affine-1d`: target is uniform on `[shift, shift + scale]`.
    pub affine_scale: f64,
    pub affine_shift: f64,
}

impl Default for TaskParams {
    fn default() -> Self {
        Self {
            mu_mean: 0.0,
            mu_sd: 0.5,
            nu_mean: 0.3,
            nu_sd: 0.4,
            nu_sep: 0.5,
            mix_sd: 0.3,
            affine_scale: 0.5,
            affine_shift: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskSpec {
    pub family: TaskFamily,
    pub params: TaskParams,
    /// Assumed Hölder exponent of the transport maps; only used for labels
    /// and the depth/budget schedule.
    pub alpha: f64,
    pub holdout: usize,
    mu: Vec<Dist1D>,
    nu: Vec<Dist1D>,
}

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("holdout size must be at least 2")]
    Holdout,
    #[error("alpha must lie in (1, 2), got {0}")]
    Alpha(f64),
}

const TRUNC: (f64, f64) = (-1.0, 1.0);

fn unit_gaussian(mean: f64, sd: f64) -> Result<Dist1D, DistError> {
    Dist1D::truncated_to_unit(Dist1D::normal(mean, sd)?, TRUNC.0, TRUNC.1)
}

impl TaskSpec {
    pub fn new(family: TaskFamily, params: TaskParams, alpha: f64, holdout: usize) -> Result<Self, TaskError> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(TaskError::Alpha(alpha));
        }
        if holdout < 2 {
            return Err(TaskError::Holdout);
        }
        let p = &params;
        let (mu, nu) = match family {
            TaskFamily::Gaussian1d => (
                vec![unit_gaussian(p.mu_mean, p.mu_sd)?],
                vec![unit_gaussian(p.nu_mean, p.nu_sd)?],
            ),
            TaskFamily::GaussianMixture1d => {
                let mix = Dist1D::mixture(vec![
                    (1.0, Dist1D::normal(-p.nu_sep, p.mix_sd)?),
                    (1.0, Dist1D::normal(p.nu_sep, p.mix_sd)?),
                ])?;
                (
                    vec![unit_gaussian(p.mu_mean, p.mu_sd)?],
                    vec![Dist1D::truncated_to_unit(mix, TRUNC.0, TRUNC.1)?],
                )
            }
            TaskFamily::UniformAffine1d => (
                vec![Dist1D::uniform(0.0, 1.0)?],
                vec![Dist1D::uniform(p.affine_shift, p.affine_shift + p.affine_scale)?],
            ),
            TaskFamily::Gaussian2d => (
                vec![unit_gaussian(p.mu_mean, p.mu_sd)?, unit_gaussian(-p.mu_mean, p.mu_sd)?],
                vec![unit_gaussian(p.nu_mean, p.nu_sd)?, unit_gaussian(-p.nu_mean, p.nu_sd)?],
            ),
        };
        Ok(Self {
            family,
            params,
            alpha,
            holdout,
            mu,
            nu,
        })
    }

    /// The default nonlinear task: truncated Gaussian to a two-bump mixture.
    pub fn default_task() -> Self {
        Self::new(TaskFamily::GaussianMixture1d, TaskParams::default(), 1.5, 10_000)
            .expect("default parameters are valid")
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn mu(&self) -> &[Dist1D] {
        &self.mu
    }

    pub fn nu(&self) -> &[Dist1D] {
        &self.nu
    }

    fn sample(laws: &[Dist1D], n: usize, rng: &mut Rng) -> EmpiricalMeasure {
        let d = laws.len();
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            for law in laws {
                data.push(law.sample(rng));
            }
        }
        EmpiricalMeasure::new(Matrix::from_vec(n, d, data)).expect("samples are finite")
    }

    /// `n` draws from the source law `μ`.
    pub fn sample_mu(&self, n: usize, rng: &mut Rng) -> EmpiricalMeasure {
        Self::sample(&self.mu, n, rng)
    }

    /// `n` draws from the target law `ν`.
    pub fn sample_nu(&self, n: usize, rng: &mut Rng) -> EmpiricalMeasure {
        Self::sample(&self.nu, n, rng)
    }

    /// Exact `(F, G)` with `F` pushing `ν` onto `μ` and `G` pushing `μ`
    /// onto `ν`; the two are mutually inverse on the supports.
    pub fn transport_pair(&self) -> (CoordinateMap, CoordinateMap) {
        let map = |s: &[Dist1D], t: &[Dist1D]| {
            CoordinateMap(
                s.iter()
                    .zip(t)
                    .map(|(a, b)| MongeMap1D::Analytic {
                        source: a.clone(),
                        target: b.clone(),
                    })
                    .collect(),
            )
        };
        (map(&self.nu, &self.mu), map(&self.mu, &self.nu))
    }

    /// One-dimensional map `μ → ν` for the first coordinate, the target of
    /// the approximation experiment.
    pub fn forward_map_1d(&self) -> MongeMap1D {
        MongeMap1D::Analytic {
            source: self.mu[0].clone(),
            target: self.nu[0].clone(),
        }
    }
}
