//! Command-line front end. [`run`] parses arguments, dispatches, and maps
//! outcomes to exit codes: 0 success, 1 usage or configuration error, 2
//! computation error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use cyclerisk_core::bounds::{self, BoundInputs};
use cyclerisk_core::compiler;
use cyclerisk_core::cyclegan;
use cyclerisk_core::ot;
use cyclerisk_core::rng;

use crate::config::Config;
use crate::harness::{self, ApproxSettings, SweepRow};
use crate::io;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "cyclerisk",
    version,
    about = "CycleGAN risk experiments on norm-constrained ReLU networks"
)]
struct Cli {
    /// Overrides the master seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for `sweep` (default: number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Progress messages on stderr; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a generator pair on two point clouds.
    Train(TrainArgs),
    /// Evaluate a trained pair with exact W1 on held-out clouds.
    Eval(EvalArgs),
    /// Compile a shallow network into a deep one.
    CompileNet(CompileArgs),
    /// Exact W1 between two point clouds.
    Ot(OtArgs),
    /// Estimation-error bound and excess-risk rate.
    Bounds(BoundsArgs),
    /// Run the excess-risk and approximation sweeps of a config.
    Sweep(SweepArgs),
    /// Depth and budget schedule for a sample size.
    Schedule(ScheduleArgs),
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Source-side cloud (CSV); sampled from the task when omitted.
    #[arg(long, requires = "y")]
    x: Option<PathBuf>,
    /// Target-side cloud (CSV).
    #[arg(long, requires = "x")]
    y: Option<PathBuf>,
    /// Sample size when sampling from the task (default: first `sweep.n`).
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Model of F (maps the target side back to the source side).
    #[arg(long)]
    f: PathBuf,
    /// Model of G (maps the source side to the target side).
    #[arg(long)]
    g: PathBuf,
    /// Holdout clouds; sampled from the config's task when omitted.
    #[arg(long, requires = "y")]
    x: Option<PathBuf>,
    #[arg(long, requires = "x")]
    y: Option<PathBuf>,
    #[arg(long, required_unless_present = "x")]
    config: Option<PathBuf>,
    /// Cycle weight (default `1 / max(B_F, B_G)`).
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args, Debug)]
struct CompileArgs {
    /// Shallow net, one unit per line: weights, bias, coefficient.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// Group sizes, e.g. `3,2,2` (default: one unit per layer).
    #[arg(long, value_delimiter = ',')]
    groups: Option<Vec<usize>>,
    /// Number of random probes in `[-2, 2]^d` to compare outputs on.
    #[arg(long)]
    verify: Option<usize>,
}

#[derive(Args, Debug)]
struct OtArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

/// Every numeric flag takes a comma-separated list; one CSV row is printed
/// per point of the Cartesian product.
#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    width: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    depth: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    budget: Vec<f64>,
    #[arg(long = "N", alias = "n", value_delimiter = ',', required = true)]
    n: Vec<f64>,
    /// Defaults to N.
    #[arg(long = "M", alias = "m", value_delimiter = ',')]
    m: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    d: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    delta: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1.5")]
    alpha: Vec<f64>,
    #[arg(long = "c-user", value_delimiter = ',', default_value = "1")]
    c_user: Vec<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Which sweeps to run.
    #[arg(long, value_enum, default_value_t = SweepKind::All)]
    kind: SweepKind,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SweepKind {
    Risk,
    Approx,
    All,
}

#[derive(Args, Debug)]
struct ScheduleArgs {
    #[arg(long = "N", alias = "n")]
    n: f64,
    #[arg(long)]
    d: f64,
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub msg: String,
}

fn usage(msg: impl ToString) -> Failure {
    Failure {
        code: 1,
        msg: msg.to_string(),
    }
}

fn compute(msg: impl ToString) -> Failure {
    Failure {
        code: 2,
        msg: msg.to_string(),
    }
}

pub fn hash_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn header(out: &mut String, hashed: &str, seed: u64) {
    let _ = writeln!(
        out,
        "# cyclerisk {VERSION} config-hash {} seed {seed}",
        hash_hex(hashed)
    );
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<Config, Failure> {
    let mut c = Config::load(path).map_err(usage)?;
    if let Some(s) = seed {
        c.sweep.master_seed = s;
    }
    Ok(c)
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| compute(format!("{}: {e}", dir.display())))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    io::write_file(path, contents).map_err(compute)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Normal output goes to stdout, errors to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match dispatch(&cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            f.code
        }
    }
}

fn dispatch(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Train(a) => train(a, cli.seed),
        Command::Eval(a) => eval(a, cli.seed),
        Command::CompileNet(a) => compile_net(a, cli.seed),
        Command::Ot(a) => ot_cmd(a, cli.seed),
        Command::Bounds(a) => bounds_cmd(a, cli.seed),
        Command::Sweep(a) => sweep(a, cli.seed, cli.threads),
        Command::Schedule(a) => schedule(a, cli.seed),
    }
}

fn train(a: &TrainArgs, seed: Option<u64>) -> Result<String, Failure> {
    let c = load_config(&a.config, seed)?;
    let seed = c.sweep.master_seed;
    let (xs, ys) = match (&a.x, &a.y) {
        (Some(x), Some(y)) => (io::read_cloud(x).map_err(usage)?, io::read_cloud(y).map_err(usage)?),
        _ => {
            let n = a.n.unwrap_or(c.sweep.ns[0]);
            let mut r = rng::seeded(rng::derive_seed(seed, 0));
            (c.task.sample_mu(n, &mut r), c.task.sample_nu(n, &mut r))
        }
    };
    if xs.dim() != c.dim() || ys.dim() != c.dim() {
        return Err(usage(format!(
            "clouds have d = {} and {}, the task has d = {}",
            xs.dim(),
            ys.dim(),
            c.dim()
        )));
    }
    let n = xs.len().max(ys.len());
    let cfg = c.train_config(n, rng::derive_seed(seed, 1));
    log::info!("training: n = {n}, depth {}, budget {}", cfg.depth, cfg.budget_f);
    let out = cyclegan::train(&cfg, &xs, &ys).map_err(compute)?;

    create_dir(&a.out)?;
    let echo = c.echo();
    write(&a.out.join("config.txt"), &echo)?;
    io::write_model(&a.out.join("F.bin"), &out.f).map_err(compute)?;
    io::write_model(&a.out.join("G.bin"), &out.g).map_err(compute)?;
    io::write_model(&a.out.join("DX.bin"), &out.disc_x).map_err(compute)?;
    io::write_model(&a.out.join("DY.bin"), &out.disc_y).map_err(compute)?;
    write(&a.out.join("history.csv"), io::format_history(&out.history))?;

    let mut o = String::new();
    header(&mut o, &echo, seed);
    let _ = writeln!(
        o,
        "n = {n}, W = {}, L = {}, B = {}, lambda = {}",
        cfg.width_f,
        cfg.depth,
        cfg.budget_f,
        cfg.lambda()
    );
    if let Some(last) = out.history.last() {
        let r = &last.report;
        let _ = writeln!(
            o,
            "final step {}: cyc = {}, ipm_x = {}, ipm_y = {}, total = {} ({})",
            last.step,
            r.cyc,
            r.ipm_x,
            r.ipm_y,
            r.total,
            r.ipm_kind.label()
        );
    }
    if let Some(score) = out.selected_score {
        let _ = writeln!(
            o,
            "returned generators from step {} (training risk with exact W1 = {score})",
            out.selected_step
        );
    }
    let _ = writeln!(
        o,
        "path_norm(F) = {}, path_norm(G) = {}",
        out.f.path_norm(),
        out.g.path_norm()
    );
    let _ = writeln!(o, "wrote {}", a.out.display());
    Ok(o)
}

fn eval(a: &EvalArgs, seed: Option<u64>) -> Result<String, Failure> {
    let f = io::read_model(&a.f).map_err(usage)?;
    let g = io::read_model(&a.g).map_err(usage)?;
    let (hx, hy, hashed, seed) = match (&a.x, &a.y) {
        (Some(x), Some(y)) => {
            let hx = io::read_cloud(x).map_err(usage)?;
            let hy = io::read_cloud(y).map_err(usage)?;
            let hashed = format!("eval x={} y={}", x.display(), y.display());
            (hx, hy, hashed, seed.unwrap_or(0))
        }
        _ => {
            let c = load_config(a.config.as_deref().expect("clap requires it"), seed)?;
            let (hx, hy) = harness::holdout(&c.task, c.sweep.master_seed);
            (hx, hy, c.echo(), c.sweep.master_seed)
        }
    };
    let lambda = a.lambda.unwrap_or(1.0 / f.norm_budget().max(g.norm_budget()));
    let ex = cyclegan::excess_risk(&f, &g, &hx, &hy, lambda).map_err(compute)?;
    let r = &ex.report;
    let mut o = String::new();
    header(&mut o, &hashed, seed);
    let _ = writeln!(o, "holdout: {} x {} points", hx.len(), hy.len());
    let _ = writeln!(
        o,
        "cyc = {}\nipm_x = {}\nipm_y = {}\nlambda = {}",
        r.cyc, r.ipm_x, r.ipm_y, r.lambda
    );
    let _ = writeln!(o, "total = {} ({})", r.total, r.ipm_kind.label());
    let _ = writeln!(o, "excess_risk = {} (upper proxy, L* = 0)", ex.value);
    Ok(o)
}

fn compile_net(a: &CompileArgs, seed: Option<u64>) -> Result<String, Failure> {
    let shallow = io::read_shallow(&a.input).map_err(usage)?;
    let groups = a.groups.as_deref();
    let (plan, deep) = compiler::compile_with_plan(&shallow, groups).map_err(usage)?;
    io::write_model(&a.out, &deep).map_err(compute)?;

    let seed = seed.unwrap_or(0);
    let mut o = String::new();
    let text = fs::read_to_string(&a.input).unwrap_or_default();
    header(&mut o, &format!("compile-net groups={groups:?}\n{text}"), seed);
    let _ = writeln!(o, "{}", compiler::describe(&plan));
    let m = shallow.budget();
    let _ = writeln!(o, "shallow budget M = {m}");
    match compiler::norm_certificate(&deep, m) {
        Ok(p) => {
            let _ = writeln!(o, "path_norm = {p} <= M");
        }
        Err(v) => {
            let _ = writeln!(o, "path_norm = {} exceeds M: {v}", v.achieved);
        }
    }
    if let Some(probes) = a.verify {
        let diff = compiler::verify_equivalence(&shallow, &deep, probes, seed).map_err(compute)?;
        let _ = writeln!(o, "max diff over {probes} probes = {diff:e}");
        if diff.is_nan() || diff > 1e-6 {
            return Err(compute(format!("{o}compiled net disagrees with the shallow net")));
        }
    }
    let _ = writeln!(o, "wrote {}", a.out.display());
    Ok(o)
}

fn ot_cmd(a: &OtArgs, seed: Option<u64>) -> Result<String, Failure> {
    let xa = io::read_cloud(&a.a).map_err(usage)?;
    let xb = io::read_cloud(&a.b).map_err(usage)?;
    let w = ot::w1(&xa, &xb).map_err(compute)?;
    let method = if xa.dim() == 1 {
        "sorted matching"
    } else {
        "exact assignment"
    };
    let mut o = String::new();
    header(
        &mut o,
        &format!("ot a={} b={}", a.a.display(), a.b.display()),
        seed.unwrap_or(0),
    );
    let _ = writeln!(
        o,
        "n = {}, m = {}, d = {}, method = {method}",
        xa.len(),
        xb.len(),
        xa.dim()
    );
    let _ = writeln!(o, "W1 = {w}");
    Ok(o)
}

/// Cartesian product of the lists, first list varying slowest.
fn grid(lists: &[&[f64]]) -> Vec<Vec<f64>> {
    lists.iter().fold(vec![Vec::new()], |acc, list| {
        acc.iter()
            .flat_map(|prefix| {
                list.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

pub const BOUNDS_HEADER: &str = "W,L,B,d,n,m,delta,alpha,C_user,estimation_bound,excess_risk_rate";

fn bounds_cmd(a: &BoundsArgs, seed: Option<u64>) -> Result<String, Failure> {
    let ms: Option<&[f64]> = a.m.as_deref();
    let lists: Vec<&[f64]> = vec![
        &a.width,
        &a.depth,
        &a.budget,
        &a.d,
        &a.n,
        ms.unwrap_or(&[f64::NAN]),
        &a.delta,
        &a.alpha,
        &a.c_user,
    ];
    let mut o = String::new();
    header(&mut o, &format!("{a:?}"), seed.unwrap_or(0));
    let _ = writeln!(o, "# values are up to constants; C_user scales both columns");
    let _ = writeln!(o, "{BOUNDS_HEADER}");
    for p in grid(&lists) {
        let inputs = BoundInputs {
            width: p[0],
            depth: p[1],
            budget: p[2],
            dim: p[3],
            n: p[4],
            m: if ms.is_some() { p[5] } else { p[4] },
            delta: p[6],
            alpha: p[7],
            c_user: p[8],
        };
        inputs.validate().map_err(usage)?;
        let est = bounds::estimation_bound(&inputs).map_err(compute)?;
        let rate = bounds::excess_risk_rate(
            inputs.sample_size(),
            inputs.dim,
            inputs.alpha,
            inputs.delta,
            inputs.c_user,
        )
        .map_err(usage)?;
        let _ = writeln!(
            o,
            "{},{},{},{},{},{},{},{},{},{},{}",
            inputs.width,
            inputs.depth,
            inputs.budget,
            inputs.dim,
            inputs.n,
            inputs.m,
            inputs.delta,
            inputs.alpha,
            inputs.c_user,
            est.value,
            rate.value
        );
    }
    Ok(o)
}

fn schedule(a: &ScheduleArgs, seed: Option<u64>) -> Result<String, Failure> {
    let s = bounds::schedule(a.n, a.d, a.alpha).map_err(usage)?;
    let (approx, est) = bounds::schedule_terms(&s, a.n, a.d, a.alpha);
    let mut o = String::new();
    header(
        &mut o,
        &format!("schedule N={} d={} alpha={}", a.n, a.d, a.alpha),
        seed.unwrap_or(0),
    );
    let _ = writeln!(o, "L_star = {:.4}", s.depth_exact);
    let _ = writeln!(o, "B_star = {:.4}", s.budget);
    let _ = writeln!(o, "depth = {}", s.depth);
    let _ = writeln!(o, "approx_term = {approx:.6e}\nestimation_term = {est:.6e}");
    if s.low_dimension {
        let _ = writeln!(o, "note: d <= 3, outside the dimension range the rates are stated for");
    }
    Ok(o)
}

// ---------------------------------------------------------------------------
// sweep

fn sweep(a: &SweepArgs, seed: Option<u64>, threads: Option<usize>) -> Result<String, Failure> {
    let c = load_config(&a.config, seed)?;
    let echo = c.echo();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(usage("--threads must be positive"));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(compute)?;

    create_dir(&a.out)?;
    let cfg_path = a.out.join("config.txt");
    if let Ok(previous) = fs::read_to_string(&cfg_path) {
        if previous != echo {
            return Err(usage(format!(
                "{} holds a sweep with a different configuration; use a fresh output directory",
                a.out.display()
            )));
        }
    }
    write(&cfg_path, &echo)?;

    let mut o = String::new();
    header(&mut o, &echo, c.sweep.master_seed);
    let mut summary = vec![harness::SUMMARY_HEADER.to_owned()];
    let d = c.dim() as f64;
    let alpha = c.task.alpha;

    if a.kind != SweepKind::Approx {
        let rows = pool.install(|| risk_rows(&c, &a.out))?;
        let medians = harness::sweep_medians(&rows);
        for (n, m) in &medians {
            let _ = writeln!(o, "N = {n}: median excess risk = {m}");
        }
        let failed = rows.iter().filter(|r| r.measured.is_none()).count();
        if failed > 0 {
            let _ = writeln!(o, "{failed} row(s) failed; see sweep.csv");
        }
        let pts: Vec<(f64, f64)> = medians.iter().map(|&(n, m)| (n as f64, m)).collect();
        summary.push(harness::summary_line(
            "excess_risk",
            "N",
            &pts,
            -alpha / (3.0 + 2.0 * d),
        ));
        if let Some(line) = summary.last() {
            let _ = writeln!(o, "summary: {line}");
        }
    }
    if a.kind != SweepKind::Risk {
        if c.dim() != 1 {
            let _ = writeln!(o, "approximation sweep skipped: it targets one-dimensional maps");
        } else {
            let t = c.task.forward_map_1d();
            let target = move |x: f64| t.apply(x);
            let settings = ApproxSettings::from_config(&c);
            let rows = pool
                .install(|| harness::approx_experiment(&target, &settings))
                .map_err(compute)?;
            write(&a.out.join("approx.csv"), harness::format_approx(&rows))?;
            let medians = harness::approx_medians(&rows);
            for (l, e) in &medians {
                let _ = writeln!(o, "L = {l}: median sup error = {e}");
            }
            let pts: Vec<(f64, f64)> = medians.iter().map(|&(l, e)| (l as f64, e)).collect();
            summary.push(harness::summary_line("sup_error", "L", &pts, -alpha / d));
            if let Some(line) = summary.last() {
                let _ = writeln!(o, "summary: {line}");
            }
        }
    }
    summary.push(String::new());
    write(&a.out.join("summary.csv"), summary.join("\n"))?;
    let _ = writeln!(o, "wrote {}", a.out.display());
    Ok(o)
}

/// Reads the rows already present in `sweep.csv`, runs the missing ones and
/// appends them. Returns every row, old and new, in row order.
fn risk_rows(c: &Config, out: &Path) -> Result<Vec<SweepRow>, Failure> {
    let csv = out.join("sweep.csv");
    let timings = out.join("timings.csv");
    let existing = fs::read_to_string(&csv).unwrap_or_default();
    let mut lines: Vec<String> = existing.lines().map(str::to_owned).collect();
    if lines.is_empty() {
        lines.push(harness::SWEEP_HEADER.to_owned());
    } else if lines[0] != harness::SWEEP_HEADER {
        return Err(usage(format!("{}: unexpected header", csv.display())));
    }
    let mut old = Vec::new();
    for (i, l) in lines.iter().enumerate().skip(1) {
        old.push(parse_sweep_line(l).ok_or_else(|| usage(format!("{}:{}: malformed row", csv.display(), i + 1)))?);
    }
    let done: Vec<usize> = old.iter().map(|r| r.row).collect();
    let plan = harness::sweep_plan(c);
    log::info!("sweep: {} of {} rows already present", done.len(), plan.len());
    let new = harness::risk_decomposition_experiment(c, &done);

    let mut t_lines: Vec<String> = fs::read_to_string(&timings)
        .unwrap_or_default()
        .lines()
        .map(str::to_owned)
        .collect();
    if t_lines.is_empty() {
        t_lines.push("row,wall_time_s".to_owned());
    }
    for r in &new {
        log::info!("row {} (N = {}) finished in {:.1}s", r.row, r.n, r.wall_time_s);
        lines.push(harness::format_sweep_row(r));
        t_lines.push(format!("{},{}", r.row, r.wall_time_s));
    }
    lines.push(String::new());
    t_lines.push(String::new());
    write(&csv, lines.join("\n"))?;
    write(&timings, t_lines.join("\n"))?;

    let mut all = old;
    all.extend(new);
    all.sort_by_key(|r| r.row);
    Ok(all)
}

/// Recovers the fields needed for medians from a written sweep line.
fn parse_sweep_line(line: &str) -> Option<SweepRow> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 14 {
        return None;
    }
    let num = |i: usize| f[i].parse::<f64>().ok();
    let measured = if f[13] == "ok" {
        Some(harness::Measurement {
            excess: num(9)?,
            cyc: num(10)?,
            ipm_x: num(11)?,
            ipm_y: num(12)?,
        })
    } else {
        None
    };
    Some(SweepRow {
        task: f[0].to_owned(),
        row: f[1].parse().ok()?,
        seed: f[2].parse().ok()?,
        n: f[3].parse().ok()?,
        m: f[4].parse().ok()?,
        width: f[5].parse().ok()?,
        depth: f[6].parse().ok()?,
        budget: num(7)?,
        lambda: num(8)?,
        status: if measured.is_some() {
            harness::RowStatus::Ok
        } else {
            harness::RowStatus::Failed(f[13].to_owned())
        },
        measured,
        wall_time_s: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_line_round_trip() {
        let row = SweepRow {
            task: "gaussian-1d".into(),
            row: 3,
            seed: 99,
            n: 64,
            m: 64,
            width: 8,
            depth: 2,
            budget: 1.5,
            lambda: 0.5,
            measured: Some(harness::Measurement {
                excess: 0.1,
                cyc: 0.01,
                ipm_x: 0.04,
                ipm_y: 0.05,
            }),
            status: harness::RowStatus::Ok,
            wall_time_s: 1.0,
        };
        let back = parse_sweep_line(&harness::format_sweep_row(&row)).unwrap();
        assert_eq!(back.measured, row.measured);
        assert_eq!((back.row, back.seed, back.n, back.depth), (3, 99, 64, 2));
        let failed = SweepRow {
            measured: None,
            status: harness::RowStatus::Failed("diverged, badly".into()),
            ..row
        };
        let back = parse_sweep_line(&harness::format_sweep_row(&failed)).unwrap();
        assert!(back.measured.is_none());
    }

    #[test]
    fn grid_is_row_major() {
        let g = grid(&[&[1.0, 2.0], &[3.0], &[4.0, 5.0]]);
        assert_eq!(
            g,
            vec![
                vec![1.0, 3.0, 4.0],
                vec![1.0, 3.0, 5.0],
                vec![2.0, 3.0, 4.0],
                vec![2.0, 3.0, 5.0]
            ]
        );
    }

    #[test]
    fn hash_is_sha256() {
        assert_eq!(
            hash_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
