//! End-to-end experiments: approximation error against depth, excess risk
//! against sample size, and log-log slope fitting.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use cyclerisk_core::compiler;
use cyclerisk_core::cyclegan::{self, CycleError};
use cyclerisk_core::diff::{Bindings, Tape};
use cyclerisk_core::net::{Adam, Mlp, MlpParams, ShallowNet};
use cyclerisk_core::ot::{self, EmpiricalMeasure};
use cyclerisk_core::rng;
use cyclerisk_core::Matrix;
use rand::Rng as _;

use crate::config::Config;
use crate::task::TaskSpec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("power-law fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("power-law fit needs positive x and y, got ({0}, {1})")]
    NonPositive(f64, f64),
    #[error("all x values are equal; the slope is undetermined")]
    DegenerateX,
    #[error("approximation experiment: {0}")]
    Approx(String),
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLaw, HarnessError> {
    if points.len() < 3 {
        return Err(HarnessError::TooFewPoints(points.len()));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(HarnessError::NonPositive(x, y));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(HarnessError::DegenerateX);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    // A constant series is fitted exactly by the zero-slope line.
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(PowerLaw { slope, intercept, r2 })
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    })
}

// ---------------------------------------------------------------------------
// Approximation error against depth.

/// Settings of [`approx_experiment`] for a target on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxSettings {
    pub depths: Vec<usize>,
    pub seeds: usize,
    pub master_seed: u64,
    /// Assumed Hölder exponent and input dimension for the budget rule.
    pub alpha: f64,
    pub budget_scale: f64,
    /// Points of the training grid (surrogate loss).
    pub grid: usize,
    /// Points of the evaluation grid (hard max).
    pub fine_grid: usize,
    pub steps: usize,
    pub lr: f64,
    pub temperature: f64,
}

impl ApproxSettings {
    pub fn from_config(c: &Config) -> Self {
        Self {
            depths: c.approx.depths.clone(),
            seeds: c.approx.seeds,
            master_seed: c.sweep.master_seed,
            alpha: c.task.alpha,
            budget_scale: c.approx.budget_scale,
            grid: c.approx.grid,
            fine_grid: c.approx.fine_grid,
            steps: c.approx.steps,
            lr: c.approx.lr,
            temperature: c.approx.temperature,
        }
    }

    /// `B = c · L^((d + 3 − 2α) / (2d))` with `d = 1`.
    pub fn budget(&self, depth: usize) -> f64 {
        approx_budget(self.budget_scale, depth, 1.0, self.alpha)
    }
}

pub fn approx_budget(scale: f64, depth: usize, d: f64, alpha: f64) -> f64 {
    scale * (depth as f64).powf((d + 3.0 - 2.0 * alpha) / (2.0 * d))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxRow {
    pub depth: usize,
    pub seed: u64,
    pub width: usize,
    pub budget: f64,
    pub path_norm: f64,
    /// Hard max error of the constructive initialisation after projection.
    pub init_error: f64,
    /// Best hard max error on the fine grid over the fitting run.
    pub sup_error: f64,
}

/// Piecewise linear interpolant of `target` through `0`, `knots` and `1`,
/// written as a shallow net with exactly `2 + knots.len()` units: a constant
/// unit, a linear unit and one hinge per interior knot.
pub fn interpolant(target: &(dyn Fn(f64) -> f64 + Sync), knots: &[f64]) -> ShallowNet {
    let mut nodes = vec![0.0];
    nodes.extend_from_slice(knots);
    nodes.push(1.0);
    let values: Vec<f64> = nodes.iter().map(|&t| target(t)).collect();
    let slopes: Vec<f64> = nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| (v[1] - v[0]) / (t[1] - t[0]))
        .collect();
    let mut directions = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let mut coefficients = vec![values[0], slopes[0]];
    for (k, &t) in knots.iter().enumerate() {
        directions.push(vec![1.0, -t]);
        coefficients.push(slopes[k + 1] - slopes[k]);
    }
    ShallowNet::new(directions, coefficients).expect("finite interpolant")
}

/// Interior knots: an even grid on `(0, 1)` with each knot jittered by up to
/// a quarter of the spacing.
fn jittered_knots(count: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::seeded(seed);
    let h = 1.0 / (count + 1) as f64;
    (1..=count)
        .map(|k| (k as f64 + r.gen_range(-0.25..=0.25)) * h)
        .collect()
}

fn grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| i as f64 / (points - 1) as f64).collect()
}

fn sup_error(net: &Mlp, xs: &Matrix, ys: &[f64]) -> f64 {
    let out = net.forward(xs).expect("1-d net");
    out.as_slice()
        .iter()
        .zip(ys)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// One fit: constructive start, then Adam on the tempered-max surrogate with
/// projection after every step. Returns the row.
fn approx_fit(target: &(dyn Fn(f64) -> f64 + Sync), depth: usize, seed: u64, s: &ApproxSettings) -> ApproxRow {
    let budget = s.budget(depth);
    let shallow = interpolant(target, &jittered_knots(depth - 2, seed));
    let compiled = compiler::compile(&shallow, None).expect("valid interpolant");
    let mut net = compiled.project_to_budget(budget);

    let train_x: Vec<f64> = grid(s.grid);
    let train_y: Vec<f64> = train_x.iter().map(|&x| target(x)).collect();
    let fine_x: Vec<f64> = grid(s.fine_grid);
    let fine_y: Vec<f64> = fine_x.iter().map(|&x| target(x)).collect();
    let fine_m = Matrix::column(&fine_x);

    let init_error = sup_error(&net, &fine_m, &fine_y);
    let mut best = init_error;

    let mut tape = Tape::new();
    let x = tape.input("x");
    let y = tape.input("y");
    let params = MlpParams::declare(&mut tape, "net", &net);
    let out = params.apply(&mut tape, x.node);
    let diff = tape.sub(out, y.node);
    let err = tape.abs(diff);
    tape.smooth_max(err, s.temperature);

    let mut adam = Adam::new(&net, s.lr);
    let xm = Matrix::column(&train_x);
    let ym = Matrix::column(&train_y);
    for step in 0..s.steps {
        let mut b = Bindings::new(&tape);
        b.bind(x.slot, xm.clone());
        b.bind(y.slot, ym.clone());
        params.bind(&mut b, &net);
        if tape.forward(&b).is_err() {
            break;
        }
        let Ok(grads) = tape.backward() else { break };
        let mut next = net.clone();
        adam.step(&params, &grads, &mut next, -1.0);
        let next = next.project_to_budget(budget);
        if !next
            .layers()
            .iter()
            .all(|l| l.weight.all_finite() && l.bias.all_finite())
        {
            break;
        }
        net = next;
        if step % 10 == 9 || step + 1 == s.steps {
            best = best.min(sup_error(&net, &fine_m, &fine_y));
        }
    }
    ApproxRow {
        depth,
        seed,
        width: net.width(),
        budget,
        path_norm: net.path_norm(),
        init_error,
        sup_error: best,
    }
}

/// Fits a width-5 depth-`L` net to `target` on `[0, 1]` for every depth and
/// seed. Rows come back ordered by depth, then seed.
pub fn approx_experiment(
    target: &(dyn Fn(f64) -> f64 + Sync),
    s: &ApproxSettings,
) -> Result<Vec<ApproxRow>, HarnessError> {
    if s.depths.iter().any(|&l| l < 2) {
        return Err(HarnessError::Approx("depths must be at least 2".into()));
    }
    if s.grid < 2 || s.fine_grid < 2 || !(s.temperature > 0.0) || !(s.budget_scale > 0.0) {
        return Err(HarnessError::Approx(
            "grids need 2 points; temperature and budget scale must be positive".into(),
        ));
    }
    let jobs: Vec<(usize, u64)> = s
        .depths
        .iter()
        .enumerate()
        .flat_map(|(i, &l)| (0..s.seeds).map(move |k| (l, rng::derive_seed(s.master_seed, (i * s.seeds + k) as u64))))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(l, seed)| approx_fit(target, l, seed, s))
        .collect())
}

/// Median sup error per depth, in the order depths first appear.
pub fn approx_medians(rows: &[ApproxRow]) -> Vec<(usize, f64)> {
    let mut depths: Vec<usize> = Vec::new();
    for r in rows {
        if !depths.contains(&r.depth) {
            depths.push(r.depth);
        }
    }
    depths
        .into_iter()
        .map(|l| {
            let v: Vec<f64> = rows.iter().filter(|r| r.depth == l).map(|r| r.sup_error).collect();
            (l, median(&v).expect("at least one seed"))
        })
        .collect()
}

pub const APPROX_HEADER: &str = "depth,seed,W,B,path_norm,init_sup_error,sup_error";

pub fn format_approx(rows: &[ApproxRow]) -> String {
    let mut o = String::from(APPROX_HEADER);
    o.push('\n');
    for r in rows {
        let _ = writeln!(
            o,
            "{},{},{},{},{},{},{}",
            r.depth, r.seed, r.width, r.budget, r.path_norm, r.init_error, r.sup_error
        );
    }
    o
}

// ---------------------------------------------------------------------------
// Excess risk against sample size.

#[derive(Clone, Debug, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub excess: f64,
    pub cyc: f64,
    pub ipm_x: f64,
    pub ipm_y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub task: String,
    /// Position in the sweep: `n_index * seeds + seed_index`.
    pub row: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub width: usize,
    pub depth: usize,
    pub budget: f64,
    pub lambda: f64,
    /// `None` for failed rows.
    pub measured: Option<Measurement>,
    pub status: RowStatus,
    pub wall_time_s: f64,
}

/// Stream index reserved for the shared holdout draw.
const HOLDOUT_STREAM: u64 = u64::MAX;

/// Holdout clouds shared by every row of a sweep.
pub fn holdout(task: &TaskSpec, master_seed: u64) -> (EmpiricalMeasure, EmpiricalMeasure) {
    let mut r = rng::seeded(rng::derive_seed(master_seed, HOLDOUT_STREAM));
    let hx = task.sample_mu(task.holdout, &mut r);
    let hy = task.sample_nu(task.holdout, &mut r);
    (hx, hy)
}

/// `W1` between the two halves of each holdout cloud, summed over both sides:
/// the sampling noise level of the holdout risk.
pub fn split_half_noise_floor(hx: &EmpiricalMeasure, hy: &EmpiricalMeasure) -> Result<f64, ot::OtError> {
    let half = |c: &EmpiricalMeasure| -> Result<f64, ot::OtError> {
        let p = c.points();
        let k = p.rows() / 2;
        let a = EmpiricalMeasure::new(Matrix::from_vec(k, p.cols(), p.as_slice()[..k * p.cols()].to_vec()))?;
        let b = EmpiricalMeasure::new(Matrix::from_vec(
            p.rows() - k,
            p.cols(),
            p.as_slice()[k * p.cols()..].to_vec(),
        ))?;
        ot::w1(&a, &b)
    };
    Ok(half(hx)? + half(hy)?)
}

/// Seeds and sample sizes of every row, in row order.
pub fn sweep_plan(c: &Config) -> Vec<(usize, usize, u64)> {
    c.sweep
        .ns
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| {
            (0..c.sweep.seeds).map(move |k| {
                let row = i * c.sweep.seeds + k;
                (row, n, rng::derive_seed(c.sweep.master_seed, row as u64))
            })
        })
        .collect()
}

fn run_row(c: &Config, row: usize, n: usize, seed: u64, hx: &EmpiricalMeasure, hy: &EmpiricalMeasure) -> SweepRow {
    let start = Instant::now();
    let cfg = c.train_config(n, rng::derive_seed(seed, 1));
    let result = (|| -> Result<Measurement, CycleError> {
        let mut r = rng::seeded(rng::derive_seed(seed, 0));
        let xs = c.task.sample_mu(n, &mut r);
        let ys = c.task.sample_nu(n, &mut r);
        let out = cyclegan::train(&cfg, &xs, &ys)?;
        let ex = cyclegan::excess_risk(&out.f, &out.g, hx, hy, cfg.lambda())?;
        Ok(Measurement {
            excess: ex.value,
            cyc: ex.report.cyc,
            ipm_x: ex.report.ipm_x,
            ipm_y: ex.report.ipm_y,
        })
    })();
    let (measured, status) = match result {
        Ok(m) => (Some(m), RowStatus::Ok),
        Err(e) => (None, RowStatus::Failed(e.to_string())),
    };
    SweepRow {
        task: c.task.family.name().to_owned(),
        row,
        seed,
        n,
        m: n,
        width: cfg.width_f,
        depth: cfg.depth,
        budget: cfg.budget_f,
        lambda: cfg.lambda(),
        measured,
        status,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

/// Trains and evaluates every `(N, seed)` row whose index is not in `skip`.
/// Rows run in parallel on the current rayon pool and come back in row
/// order; each row depends only on its own derived seed.
pub fn risk_decomposition_experiment(c: &Config, skip: &[usize]) -> Vec<SweepRow> {
    let (hx, hy) = holdout(&c.task, c.sweep.master_seed);
    let jobs: Vec<_> = sweep_plan(c)
        .into_iter()
        .filter(|(row, _, _)| !skip.contains(row))
        .collect();
    jobs.par_iter()
        .map(|&(row, n, seed)| run_row(c, row, n, seed, &hx, &hy))
        .collect()
}

pub const SWEEP_HEADER: &str = "task,row,seed,n,m,W,L,B,lambda,excess_risk,cyc,ipm_x,ipm_y,status";

pub fn format_sweep_row(r: &SweepRow) -> String {
    let (ex, cyc, ix, iy) = match &r.measured {
        Some(m) => (
            m.excess.to_string(),
            m.cyc.to_string(),
            m.ipm_x.to_string(),
            m.ipm_y.to_string(),
        ),
        None => Default::default(),
    };
    let status = match &r.status {
        RowStatus::Ok => "ok".to_owned(),
        // Commas would break the column layout.
        RowStatus::Failed(msg) => format!("failed: {}", msg.replace([',', '\n'], ";")),
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{ex},{cyc},{ix},{iy},{status}",
        r.task, r.row, r.seed, r.n, r.m, r.width, r.depth, r.budget, r.lambda
    )
}

/// Median excess risk per `N` over successful rows, in increasing `N`.
pub fn sweep_medians(rows: &[SweepRow]) -> Vec<(usize, f64)> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .filter_map(|n| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.n == n)
                .filter_map(|r| r.measured.as_ref().map(|m| m.excess))
                .collect();
            median(&v).map(|m| (n, m))
        })
        .collect()
}

pub const SUMMARY_HEADER: &str = "quantity,x,points,slope,intercept,r2,reference_slope,reference";

/// One summary line; `reference_slope` is the theoretical exponent computed
/// from the configured (assumed) `α`.
pub fn summary_line(quantity: &str, x: &str, points: &[(f64, f64)], reference_slope: f64) -> String {
    match fit_power_law(points) {
        Ok(p) => format!(
            "{quantity},{x},{},{},{},{},{reference_slope},assumed-alpha",
            points.len(),
            p.slope,
            p.intercept,
            p.r2
        ),
        Err(e) => format!(
            "{quantity},{x},{},,,,{reference_slope},assumed-alpha ({})",
            points.len(),
            e.to_string().replace(',', ";")
        ),
    }
}
