//! End-to-end acceptance checks. Each criterion prints one `[PASS]` or
//! `[FAIL]` line with the measured quantities; the test fails at the end if
//! any criterion failed. Run with `--nocapture` to see the lines live.
//!
//! Reference values (brute-force minima, enumerations, medians, slopes) are
//! recomputed here from first principles rather than read back from the
//! library.

use std::time::{Duration, Instant};

use cyclerisk::config::Config;
use cyclerisk::harness::{self, ApproxSettings};
use cyclerisk::task::TaskSpec;
use cyclerisk_core::bounds::{self, BoundInputs};
use cyclerisk_core::compiler;
use cyclerisk_core::cyclegan::{self, Optimizer, TrainConfig};
use cyclerisk_core::diff::{finite_diff_check, Bindings, Tape, DEFAULT_FD_STEP};
use cyclerisk_core::net::{Layer, Mlp, MlpParams, ShallowNet};
use cyclerisk_core::ot::{self, EmpiricalMeasure, IdentityMap};
use cyclerisk_core::rng::{self, derive_seed};
use cyclerisk_core::Matrix;
use rand::seq::SliceRandom;
use rand::Rng;

struct Outcome {
    id: u8,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn report(id: u8, name: &str, pass: bool, detail: String, t0: Instant) -> Outcome {
    let elapsed = t0.elapsed();
    let tag = if pass { "[PASS]" } else { "[FAIL]" };
    println!("{tag} {id:>2} {name}: {detail} ({:.1}s)", elapsed.as_secs_f64());
    Outcome {
        id,
        pass,
        detail,
        elapsed,
    }
}

// ---------------------------------------------------------------------------
// independent oracles

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

fn shallow_eval(dirs: &[Vec<f64>], coefs: &[f64], x: &[f64]) -> f64 {
    dirs.iter()
        .zip(coefs)
        .map(|(v, a)| {
            let (b, w) = v.split_last().unwrap();
            a * relu(w.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b)
        })
        .sum()
}

/// `‖(A, b)‖` = max over output units of `Σ_in |a| + |b|`, weights stored
/// input-major.
fn layer_norm(l: &Layer) -> f64 {
    let (rows, cols) = l.weight.shape();
    (0..cols)
        .map(|j| (0..rows).map(|i| l.weight.row(i)[j].abs()).sum::<f64>() + l.bias.as_slice()[j].abs())
        .fold(0.0, f64::max)
}

fn path_norm(net: &Mlp) -> f64 {
    let ls = net.layers();
    let (last, hidden) = ls.split_last().unwrap();
    hidden.iter().map(|l| layer_norm(l).max(1.0)).product::<f64>() * layer_norm(last)
}

fn sorted_w1(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(p, q)| (p - q).abs()).sum::<f64>() / a.len() as f64
}

/// W1 between two equal-size clouds by trying every permutation.
fn permutation_w1(xs: &Matrix, ys: &Matrix) -> f64 {
    fn rec(i: usize, used: &mut [bool], acc: f64, best: &mut f64, c: &[Vec<f64>]) {
        if acc >= *best {
            return;
        }
        if i == c.len() {
            *best = acc;
            return;
        }
        for j in 0..c.len() {
            if !used[j] {
                used[j] = true;
                rec(i + 1, used, acc + c[i][j], best, c);
                used[j] = false;
            }
        }
    }
    let n = xs.rows();
    let c: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| xs.row(i).iter().zip(ys.row(j)).map(|(p, q)| (p - q).abs()).sum())
                .collect()
        })
        .collect();
    let mut best = f64::INFINITY;
    rec(0, &mut vec![false; n], 0.0, &mut best, &c);
    best / n as f64
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

fn log_log_slope(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn cloud(v: &[f64]) -> EmpiricalMeasure {
    EmpiricalMeasure::from_1d(v).unwrap()
}

// ---------------------------------------------------------------------------
// criteria

fn c1_compiler() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng::seeded(101);
    let (mut worst_diff, mut worst_ratio) = (0.0f64, 0.0f64);
    let mut norm_failures = 0;
    for case in 0..200u64 {
        let d = r.gen_range(1..=5);
        let n = r.gen_range(1..=64);
        let dirs: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..=d).map(|_| r.gen_range(-1.0..=1.0)).collect();
                let s = r.gen_range(0.0..=2.0) / v.iter().map(|x: &f64| x.abs()).sum::<f64>();
                v.iter().map(|x| x * s).collect()
            })
            .collect();
        let coefs: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..=1.0)).collect();
        let m = dirs
            .iter()
            .map(|v| v.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            * coefs.iter().map(|a| a.abs()).sum::<f64>();
        let shallow = ShallowNet::new(dirs.clone(), coefs.clone()).unwrap();

        let mut plans: Vec<Option<Vec<usize>>> = vec![None];
        let k = r.gen_range(2..=4usize);
        if n >= k {
            let mut cuts: Vec<usize> = (1..n).collect::<Vec<_>>();
            cuts.shuffle(&mut r);
            let mut cuts: Vec<usize> = cuts[..k - 1].to_vec();
            cuts.sort_unstable();
            let mut sizes = Vec::new();
            let mut prev = 0;
            for c in cuts.into_iter().chain([n]) {
                sizes.push(c - prev);
                prev = c;
            }
            plans.push(Some(sizes));
        }
        let probes: Vec<Vec<f64>> = (0..1000)
            .map(|_| (0..d).map(|_| r.gen_range(-2.0..=2.0)).collect())
            .collect();
        let x = Matrix::from_rows(&probes);
        for plan in &plans {
            let deep = compiler::compile(&shallow, plan.as_deref()).unwrap();
            let out = deep.forward(&x).unwrap();
            for (i, p) in probes.iter().enumerate() {
                worst_diff = worst_diff.max((shallow_eval(&dirs, &coefs, p) - out.as_slice()[i]).abs());
            }
            let pn = path_norm(&deep);
            worst_ratio = worst_ratio.max(pn / m);
            if pn > m * (1.0 + 1e-12) {
                norm_failures += 1;
            }
        }
        let _ = case;
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = worst_diff <= 1e-6 && norm_failures == 0 && secs <= 60.0;
    report(
        1,
        "depth-compiler equivalence",
        pass,
        format!(
            "max diff {worst_diff:.2e} (<= 1e-6); path_norm <= M(1+1e-12) violated in {norm_failures} compilations, \
             worst path_norm/M = {worst_ratio:.3}"
        ),
        t0,
    )
}

fn c2_gradients() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng::seeded(202);
    let mut worst = 0.0f64;
    let (mut checked, mut skipped) = (0, 0);
    for k in 0..50u64 {
        let depth = r.gen_range(1..=6usize);
        let width = r.gen_range(1..=16usize);
        let d_in = r.gen_range(1..=4usize);
        let d_out = r.gen_range(1..=3usize);
        let dims: Vec<usize> = [d_in]
            .into_iter()
            .chain(std::iter::repeat_n(width, depth))
            .chain([d_out])
            .collect();
        let net = Mlp::new_with_biases(&dims, 50.0, derive_seed(202, k)).unwrap();
        let mut tape = Tape::new();
        let x = tape.input("x");
        let params = MlpParams::declare(&mut tape, "n", &net);
        let out = params.apply(&mut tape, x.node);
        let sq = tape.mul(out, out);
        tape.mean(sq);
        let mut b = Bindings::new(&tape);
        let pts: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..d_in).map(|_| r.gen_range(-1.0..1.0)).collect())
            .collect();
        b.bind(x.slot, Matrix::from_rows(&pts));
        params.bind(&mut b, &net);
        let rep = finite_diff_check(&mut tape, &b, DEFAULT_FD_STEP).unwrap();
        worst = worst.max(rep.max_rel_error);
        checked += rep.checked;
        skipped += rep.kink_adjacent;
    }
    let pass = worst <= 1e-5 && checked > 0 && t0.elapsed().as_secs_f64() <= 60.0;
    report(
        2,
        "gradient correctness",
        pass,
        format!("max relative error {worst:.2e} (<= 1e-5) over {checked} entries, {skipped} kink-adjacent skipped"),
        t0,
    )
}

fn c3_ot() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng::seeded(303);
    let mut worst_a = 0.0f64;
    for _ in 0..100 {
        let n = r.gen_range(1..=64);
        let a: Vec<f64> = (0..n).map(|_| r.gen_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| r.gen_range(-3.0..3.0)).collect();
        let exact = ot::w1_discrete_exact(&cloud(&a), &cloud(&b)).unwrap();
        let sorted = ot::w1_empirical_1d(&cloud(&a), &cloud(&b)).unwrap();
        worst_a = worst_a
            .max((exact - sorted).abs())
            .max((sorted - sorted_w1(&a, &b)).abs());
    }
    let mut worst_b = 0.0f64;
    for _ in 0..50 {
        let pts = |r: &mut rng::Rng| Matrix::from_vec(6, 2, (0..12).map(|_| r.gen_range(-1.0..1.0)).collect());
        let xs = pts(&mut r);
        let ys = pts(&mut r);
        let solver = ot::w1_discrete_exact(
            &EmpiricalMeasure::new(xs.clone()).unwrap(),
            &EmpiricalMeasure::new(ys.clone()).unwrap(),
        )
        .unwrap();
        worst_b = worst_b.max((solver - permutation_w1(&xs, &ys)).abs());
    }
    let mut g = rng::seeded(304);
    let normal = |g: &mut rng::Rng, mean: f64| -> Vec<f64> {
        (0..10_000)
            .map(|_| {
                // Box-Muller
                let u1: f64 = 1.0 - g.gen::<f64>();
                let u2: f64 = g.gen();
                mean + (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect()
    };
    let a = normal(&mut g, 0.0);
    let b = normal(&mut g, 2.0);
    let w = ot::w1(&cloud(&a), &cloud(&b)).unwrap();
    let pass = worst_a <= 1e-12 && worst_b <= 1e-12 && (w - 2.0).abs() <= 0.1;
    report(
        3,
        "OT oracle exactness",
        pass,
        format!(
            "(a) sorted vs assignment max gap {worst_a:.1e}; (b) 2D solver vs permutations max gap {worst_b:.1e}; \
             (c) W1(N(0,1), N(2,1)) = {w:.4}"
        ),
        t0,
    )
}

fn c4_ipm() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng::seeded(404);
    let (mut eligible, mut violations, mut worst_excess) = (0, 0, f64::NEG_INFINITY);
    for k in 0..100u64 {
        let n = r.gen_range(2..=32);
        let m = if r.gen::<bool>() { n } else { r.gen_range(2..=32) };
        let a: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..2.0)).collect();
        let b: Vec<f64> = (0..m).map(|_| r.gen_range(-1.0..2.0)).collect();
        let depth = r.gen_range(1..=3usize);
        let width = r.gen_range(2..=10usize);
        let dims: Vec<usize> = [1]
            .into_iter()
            .chain(std::iter::repeat_n(width, depth))
            .chain([1])
            .collect();
        let disc = Mlp::new_with_biases(&dims, 1.0, derive_seed(404, k)).unwrap();
        let (value, trained) = cyclegan::ipm_estimate(
            &disc,
            &IdentityMap(1),
            &cloud(&a),
            &cloud(&b),
            100,
            0.05,
            Optimizer::Adam,
        )
        .unwrap();
        if trained.lipschitz_upper_bound() > 1.0 {
            continue;
        }
        eligible += 1;
        let mean = |pts: &[f64]| pts.iter().map(|&x| trained.eval(&[x])[0]).sum::<f64>() / pts.len() as f64;
        let recomputed = mean(&a) - mean(&b);
        let exact = ot::w1_discrete_exact(&cloud(&a), &cloud(&b)).unwrap();
        let worst = value.max(recomputed) - exact;
        worst_excess = worst_excess.max(worst);
        if worst > 1e-6 || (value - recomputed).abs() > 1e-9 {
            violations += 1;
        }
    }

    let zero = cloud(&[0.0]);
    let one = cloud(&[1.0]);
    let delta_pair = |biased: bool| -> Vec<f64> {
        (0..5u64)
            .map(|s| {
                let dims = [1, 8, 1];
                let disc = if biased {
                    Mlp::new_with_biases(&dims, 1.0, derive_seed(405, s)).unwrap()
                } else {
                    Mlp::new(&dims, 1.0, derive_seed(405, s)).unwrap()
                };
                // ascent on E_zero D − E_one D, so the sup is attained by D(x) = −x
                cyclegan::ipm_estimate(&disc, &IdentityMap(1), &zero, &one, 500, 0.05, Optimizer::Adam)
                    .unwrap()
                    .0
            })
            .collect()
    };
    let zero_bias = delta_pair(false);
    let biased = delta_pair(true);
    let med = median(&zero_bias);
    println!(
        "       4 note: with random-bias initialisation the delta-pair median is {:.3} (values {:.3?})",
        median(&biased),
        biased
    );
    let pass = eligible > 0 && violations == 0 && med >= 0.8;
    report(
        4,
        "IPM feasibility and tightness",
        pass,
        format!(
            "{eligible}/100 instances with Lipschitz bound <= 1, {violations} exceed W1 + 1e-6 (max IPM - W1 = \
             {worst_excess:.2e}); delta pair median {med:.4} (>= 0.8) from zero-bias init, values {zero_bias:.3?}"
        ),
        t0,
    )
}

fn c5_budgets() -> Outcome {
    let t0 = Instant::now();
    let task = TaskSpec::default_task();
    let mut r = rng::seeded(505);
    let xs = task.sample_mu(128, &mut r);
    let ys = task.sample_nu(128, &mut r);
    let mut cfg = TrainConfig::new(8, 3, 1.7);
    cfg.outer_steps = 2000;
    cfg.seed = 505;
    let out = cyclegan::train(&cfg, &xs, &ys);
    let (pass, detail) = match out {
        Err(e) => (false, format!("training failed: {e}")),
        Ok(out) => {
            let eps = 1e-9;
            let bad = out
                .history
                .iter()
                .filter(|h| {
                    h.path_norm_f > cfg.budget_f + eps
                        || h.path_norm_g > cfg.budget_g + eps
                        || h.path_norm_dx > 1.0 + eps
                        || h.path_norm_dy > 1.0 + eps
                })
                .count();
            let max_f = out
                .history
                .iter()
                .map(|h| h.path_norm_f.max(h.path_norm_g))
                .fold(0.0, f64::max);
            let max_d = out
                .history
                .iter()
                .map(|h| h.path_norm_dx.max(h.path_norm_dy))
                .fold(0.0, f64::max);
            let finals = [
                path_norm(&out.f),
                path_norm(&out.g),
                path_norm(&out.disc_x),
                path_norm(&out.disc_y),
            ];
            let final_ok = finals[0] <= cfg.budget_f + eps
                && finals[1] <= cfg.budget_g + eps
                && finals[2] <= 1.0 + eps
                && finals[3] <= 1.0 + eps;
            (
                out.history.len() == 2000 && bad == 0 && final_ok,
                format!(
                    "{} recorded steps, {bad} over budget; max generator path norm {max_f:.6} (B = {}), \
                     max discriminator path norm {max_d:.6}; final nets recomputed {finals:.6?}",
                    out.history.len(),
                    cfg.budget_f
                ),
            )
        }
    };
    report(5, "norm-budget invariants during training", pass, detail, t0)
}

fn c6_oracle_pair() -> Outcome {
    let t0 = Instant::now();
    let task = TaskSpec::default_task();
    let (hx, hy) = harness::holdout(&task, 606);
    let (f, g) = task.transport_pair();
    let rep = cyclegan::population_risk(&f, &g, &hx, &hy, 1.0).unwrap();
    let half = |c: &EmpiricalMeasure| {
        let v = c.values_1d().unwrap();
        let k = v.len() / 2;
        sorted_w1(&v[..k], &v[k..2 * k])
    };
    let floor = half(&hx) + half(&hy);
    let lib_floor = harness::split_half_noise_floor(&hx, &hy).unwrap();
    let pass = rep.total <= 2.0 * floor && (floor - lib_floor).abs() <= 1e-12;
    report(
        6,
        "optimal-risk witness",
        pass,
        format!(
            "oracle pair total {:.5} (cyc {:.2e}, ipm_x {:.5}, ipm_y {:.5}) vs 2 x split-half floor {:.5}",
            rep.total,
            rep.cyc,
            rep.ipm_x,
            rep.ipm_y,
            2.0 * floor
        ),
        t0,
    )
}

const SWEEP_CONFIG: &str =
    "[task]\nfamily = gaussian-mixture-1d\nalpha = 1.5\n\n[sweep]\nn = 64, 256, 1024\nseeds = 5\nmaster_seed = 0\n";

fn c7_approx() -> Outcome {
    let t0 = Instant::now();
    let c = Config::parse(SWEEP_CONFIG, "acceptance").unwrap();
    let settings = ApproxSettings::from_config(&c);
    let t = c.task.forward_map_1d();
    let target = move |x: f64| t.apply(x);
    let rows = harness::approx_experiment(&target, &settings).unwrap();
    let mut pts = Vec::new();
    for &l in &settings.depths {
        let errs: Vec<f64> = rows.iter().filter(|r| r.depth == l).map(|r| r.sup_error).collect();
        assert_eq!(errs.len(), settings.seeds);
        pts.push((l as f64, median(&errs)));
    }
    let monotone = pts.windows(2).all(|w| w[1].1 <= w[0].1);
    let slope = log_log_slope(&pts);
    let budgets: Vec<f64> = settings.depths.iter().map(|&l| settings.budget(l)).collect();
    let rule_ok = settings
        .depths
        .iter()
        .zip(&budgets)
        .all(|(&l, &b)| b >= (l as f64).powf((1.0 + 3.0 - 3.0) / 2.0));
    let pass = monotone && slope <= -0.2 && rule_ok && t0.elapsed().as_secs_f64() <= 900.0;
    report(
        7,
        "approximation-error trend",
        pass,
        format!(
            "median sup error by L {:?}, budgets {:.3?}, log-log slope {slope:.3} (<= -0.2), nonincreasing {monotone}",
            pts.iter()
                .map(|p| (p.0 as usize, format!("{:.4}", p.1)))
                .collect::<Vec<_>>(),
            budgets
        ),
        t0,
    )
}

fn c8_risk() -> Outcome {
    let t0 = Instant::now();
    let c = Config::parse(SWEEP_CONFIG, "acceptance").unwrap();
    let rows = harness::risk_decomposition_experiment(&c, &[]);
    let failed = rows.iter().filter(|r| r.measured.is_none()).count();
    let mut pts = Vec::new();
    for &n in &c.sweep.ns {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r.n == n)
            .filter_map(|r| r.measured.as_ref().map(|m| m.excess))
            .collect();
        pts.push((n as f64, if v.is_empty() { f64::NAN } else { median(&v) }));
    }
    let shapes: Vec<(usize, String)> = c
        .sweep
        .ns
        .iter()
        .map(|&n| {
            let s = bounds::schedule(n as f64, 1.0, 1.5).unwrap();
            (s.depth, format!("{:.3}", s.budget))
        })
        .collect();
    let slope = log_log_slope(&pts);
    let pass = failed == 0 && pts[2].1 < pts[0].1 && slope < 0.0 && t0.elapsed().as_secs_f64() <= 1800.0;
    report(
        8,
        "excess-risk trend",
        pass,
        format!(
            "median excess risk {:?} at (L, B) {shapes:?}, slope {slope:.3} (< 0), {failed} failed rows",
            pts.iter()
                .map(|p| (p.0 as usize, format!("{:.4}", p.1)))
                .collect::<Vec<_>>()
        ),
        t0,
    )
}

fn c9_bounds() -> Outcome {
    let t0 = Instant::now();
    let inputs = |w: f64, l: f64, b: f64, n: f64, m: f64, delta: f64| BoundInputs {
        width: w,
        depth: l,
        budget: b,
        dim: 4.0,
        n,
        m,
        delta,
        alpha: 1.5,
        c_user: 1.0,
    };
    let worked = bounds::estimation_bound(&inputs(4.0, 4.0, 2.0, 1024.0, 1024.0, 0.01))
        .unwrap()
        .value;
    let hand = 2.0 * 2.0 * ((16.0f64 * 4.0 / 1024.0).sqrt() + (100.0f64.ln() / 1024.0).sqrt());
    let worked_ok = (worked - hand).abs() <= 1e-4 && (worked - 1.2683).abs() <= 1e-4;

    let ws = [2.0, 4.0, 8.0];
    let ls = [2.0, 4.0, 8.0];
    let bs = [0.5, 1.0, 2.0];
    let ns = [100.0, 1000.0, 10_000.0];
    let deltas = [0.001, 0.01, 0.08];
    let v = |w, l, b, n, m, d| bounds::estimation_bound(&inputs(w, l, b, n, m, d)).unwrap().value;
    let mut mono_bad = 0;
    let mut points = 0;
    for &w in &ws {
        for &l in &ls {
            for &b in &bs {
                for &n in &ns {
                    for &m in &ns {
                        for &d in &deltas {
                            points += 1;
                            let x = v(w, l, b, n, m, d);
                            let up = [
                                v(2.0 * w, l, b, n, m, d),
                                v(w, 2.0 * l, b, n, m, d),
                                v(w, l, 2.0 * b, n, m, d),
                            ];
                            let down = [
                                v(w, l, b, 2.0 * n, m, d),
                                v(w, l, b, n, 2.0 * m, d),
                                v(w, l, b, n, m, d * 1.02),
                            ];
                            if up.iter().any(|&u| u < x) || down.iter().any(|&u| u > x) {
                                mono_bad += 1;
                            }
                        }
                    }
                }
            }
        }
    }

    let mut worst_balance = 0.0f64;
    for k in 6..=20 {
        let n = 2f64.powi(k);
        for d in 4..=8 {
            let d = d as f64;
            for alpha in [1.1, 1.5, 1.9] {
                let s = bounds::schedule(n, d, alpha).unwrap();
                let l = s.depth_exact;
                let approx = l.powf(-alpha / d);
                let est = s.budget * (l / n).sqrt();
                worst_balance = worst_balance.max((approx.ln() - est.ln()).abs());
            }
        }
    }
    let pass = worked_ok && mono_bad == 0 && points == 729 && worst_balance <= 2f64.ln();
    report(
        9,
        "bound calculators",
        pass,
        format!(
            "worked example {worked:.6} vs hand {hand:.6}; monotonicity violated at {mono_bad}/{points} grid points; \
             max schedule imbalance {worst_balance:.3} (<= ln 2 = {:.3})",
            2f64.ln()
        ),
        t0,
    )
}

fn c10_rademacher() -> Outcome {
    let t0 = Instant::now();
    let enumerate = |v: &Matrix| -> f64 {
        let n = v.cols();
        let mut total = 0.0;
        for bits in 0..1u32 << n {
            let sup = (0..v.rows())
                .map(|k| {
                    (0..n)
                        .map(|i| if bits >> i & 1 == 1 { v.row(k)[i] } else { -v.row(k)[i] })
                        .sum::<f64>()
                        .abs()
                        / n as f64
                })
                .fold(0.0, f64::max);
            total += sup;
        }
        total / (1u64 << n) as f64
    };
    let mut r = rng::seeded(1010);
    let mut worst_z = 0.0f64;
    let mut lib_gap = 0.0f64;
    for k in 0..20u64 {
        let v = Matrix::from_vec(5, 10, (0..50).map(|_| r.gen_range(-1.0..1.0)).collect());
        let exact = enumerate(&v);
        lib_gap = lib_gap.max((bounds::rademacher_enumerate(&v).estimate - exact).abs());
        let mc = bounds::rademacher_sample(&v, 2000, derive_seed(1010, k));
        worst_z = worst_z.max((mc.estimate - exact).abs() / mc.std_error);
    }
    let two = Matrix::from_rows(&[vec![1.0, -1.0]]);
    let two_point = bounds::rademacher_mc(&two, 1, 0);
    let pass = worst_z <= 3.0 && lib_gap <= 1e-12 && two_point.exact && two_point.estimate == 0.5;
    report(
        10,
        "Rademacher estimator",
        pass,
        format!(
            "max |MC - exact| / SE = {worst_z:.2} (<= 3) over 20 instances; enumeration gap {lib_gap:.1e}; \
             two-point example {}",
            two_point.estimate
        ),
        t0,
    )
}

#[test]
fn acceptance() {
    let outcomes = vec![
        c1_compiler(),
        c2_gradients(),
        c3_ot(),
        c4_ipm(),
        c5_budgets(),
        c6_oracle_pair(),
        c7_approx(),
        c8_risk(),
        c9_bounds(),
        c10_rademacher(),
    ];
    let total: f64 = outcomes.iter().map(|o| o.elapsed.as_secs_f64()).sum();
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.pass)
        .map(|o| format!("{}: {}", o.id, o.detail))
        .collect();
    println!("acceptance: {}/10 passed in {total:.0}s", 10 - failed.len());
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
