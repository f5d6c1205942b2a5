//! Experiment configuration: `key = value` lines grouped under `[section]`
//! headers. `#` starts a comment. Every key is optional except
//! `task.family` and `sweep.n`; omitted keys take the defaults below and the
//! filled-in result is echoed back by [`Config::echo`].

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use cyclerisk_core::bounds;
use cyclerisk_core::cyclegan::{GeneratorInit, Optimizer, TrainConfig, DISC_BUDGET};

use crate::task::{TaskFamily, TaskParams, TaskSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{origin}:{line}: {msg}")]
    Line { origin: String, line: usize, msg: String },
    #[error("{origin}: missing required key `{key}`")]
    Missing { origin: String, key: String },
    #[error("{origin}: {msg}")]
    Invalid { origin: String, msg: String },
    #[error("{path}: {msg}")]
    Read { path: String, msg: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSection {
    /// Sample sizes; each run draws `n = m = N` points from both sides.
    pub ns: Vec<usize>,
    pub seeds: usize,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSection {
    pub width: usize,
    pub disc_width: usize,
    /// Explicit depth; the closed-form schedule is used when `None`.
    pub depth: Option<usize>,
    /// Explicit generator budget; the schedule times `budget_scale` when `None`.
    pub budget: Option<f64>,
    pub budget_scale: f64,
    /// Defaults to `1 / B`.
    pub lambda: Option<f64>,
    pub gen_step: f64,
    pub disc_step: f64,
    pub inner_steps: usize,
    pub outer_steps: usize,
    pub optimizer: Optimizer,
    pub init: GeneratorInit,
    /// Iterate-selection interval; `None` (written `0`) keeps the last iterate.
    pub select_every: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsSection {
    pub delta: f64,
    pub c_user: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxSection {
    pub depths: Vec<usize>,
    pub seeds: usize,
    /// `B = budget_scale * L^((d + 3 - 2α) / (2d))`.
    pub budget_scale: f64,
    pub grid: usize,
    pub fine_grid: usize,
    pub steps: usize,
    pub lr: f64,
    pub temperature: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub task: TaskSpec,
    pub sweep: SweepSection,
    pub train: TrainSection,
    pub bounds: BoundsSection,
    pub approx: ApproxSection,
}

/// Depth, budget and cycle weight resolved for one sample size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunShape {
    pub depth: usize,
    pub budget: f64,
    pub lambda: f64,
}

const KEYS: &[(&str, &[&str])] = &[
    (
        "task",
        &[
            "family",
            "alpha",
            "holdout",
            "mu_mean",
            "mu_sd",
            "nu_mean",
            "nu_sd",
            "nu_sep",
            "mix_sd",
            "affine_scale",
            "affine_shift",
        ],
    ),
    ("sweep", &["n", "seeds", "master_seed"]),
    (
        "train",
        &[
            "width",
            "disc_width",
            "depth",
            "budget",
            "budget_scale",
            "lambda",
            "disc_budget",
            "gen_step",
            "disc_step",
            "inner_steps",
            "outer_steps",
            "optimizer",
            "init",
            "init_noise",
            "select_every",
        ],
    ),
    ("bounds", &["delta", "c_user"]),
    (
        "approx",
        &[
            "depths",
            "seeds",
            "budget_scale",
            "grid",
            "fine_grid",
            "steps",
            "lr",
            "temperature",
        ],
    ),
];

struct Entry {
    section: &'static str,
    key: &'static str,
    value: String,
    line: usize,
}

struct Raw {
    origin: String,
    entries: Vec<Entry>,
}

impl Raw {
    fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let line_err = |line: usize, msg: String| ConfigError::Line {
            origin: origin.to_owned(),
            line,
            msg,
        };
        let mut section: Option<&'static str> = None;
        let mut entries: Vec<Entry> = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            if let Some(name) = l.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| line_err(line, format!("malformed section header `{l}`")))?
                    .trim();
                let known = KEYS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| line_err(line, format!("unknown section `[{name}]`")))?;
                section = Some(known.0);
                continue;
            }
            let (key, value) = l
                .split_once('=')
                .ok_or_else(|| line_err(line, format!("expected `key = value`, found `{l}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section.ok_or_else(|| line_err(line, format!("key `{key}` appears before any [section]")))?;
            let allowed = KEYS.iter().find(|(s, _)| *s == sec).expect("known section").1;
            let key = allowed
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| line_err(line, format!("unknown key `{key}` in [{sec}]")))?;
            if value.is_empty() {
                return Err(line_err(line, format!("key `{sec}.{key}` has an empty value")));
            }
            if !seen.insert((sec, *key)) {
                return Err(line_err(line, format!("duplicate key `{sec}.{key}`")));
            }
            entries.push(Entry {
                section: sec,
                key,
                value: value.to_owned(),
                line,
            });
        }
        Ok(Self {
            origin: origin.to_owned(),
            entries,
        })
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.section == section && e.key == key)
    }

    fn err(&self, e: &Entry, msg: impl Into<String>) -> ConfigError {
        ConfigError::Line {
            origin: self.origin.clone(),
            line: e.line,
            msg: format!("`{}.{}`: {}", e.section, e.key, msg.into()),
        }
    }

    fn get<T>(
        &self,
        section: &str,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => parse(&e.value).map(Some).map_err(|m| self.err(e, m)),
        }
    }

    fn check(&self, section: &str, key: &str, ok: bool, msg: &str) -> Result<(), ConfigError> {
        if ok {
            return Ok(());
        }
        Err(match self.entry(section, key) {
            Some(e) => self.err(e, msg),
            None => ConfigError::Invalid {
                origin: self.origin.clone(),
                msg: format!("`{section}.{key}`: {msg}"),
            },
        })
    }
}

fn float(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{s}` is not a finite number"))
}

fn uint(s: &str) -> Result<usize, String> {
    s.parse::<usize>()
        .map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

fn seed(s: &str) -> Result<u64, String> {
    s.parse::<u64>()
        .map_err(|_| format!("`{s}` is not a 64-bit unsigned integer"))
}

fn uint_list(s: &str) -> Result<Vec<usize>, String> {
    let v = s.split(',').map(|f| uint(f.trim())).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(v)
}

fn optimizer(s: &str) -> Result<Optimizer, String> {
    match s {
        "adam" => Ok(Optimizer::Adam),
        "sgd" => Ok(Optimizer::Sgd),
        _ => Err(format!("unknown optimizer `{s}` (expected adam or sgd)")),
    }
}

/// `[sweep] n` and friends need at least this many points per side.
pub const MIN_SAMPLES: usize = 2;

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let raw = Raw::parse(text, origin)?;
        let missing = |key: &str| ConfigError::Missing {
            origin: origin.to_owned(),
            key: key.to_owned(),
        };

        let family = raw
            .get("task", "family", |s| s.parse::<TaskFamily>())?
            .ok_or_else(|| missing("task.family"))?;
        let d = family.dim();
        let mut params = TaskParams::default();
        for (key, slot) in [
            ("mu_mean", &mut params.mu_mean),
            ("mu_sd", &mut params.mu_sd),
            ("nu_mean", &mut params.nu_mean),
            ("nu_sd", &mut params.nu_sd),
            ("nu_sep", &mut params.nu_sep),
            ("mix_sd", &mut params.mix_sd),
            ("affine_scale", &mut params.affine_scale),
            ("affine_shift", &mut params.affine_shift),
        ] {
            if let Some(v) = raw.get("task", key, float)? {
                *slot = v;
            }
        }
        let alpha = raw.get("task", "alpha", float)?.unwrap_or(1.5);
        raw.check("task", "alpha", alpha > 1.0 && alpha < 2.0, "must lie in (1, 2)")?;
        let holdout = raw.get("task", "holdout", uint)?.unwrap_or(default_holdout(d));
        raw.check("task", "holdout", holdout >= MIN_SAMPLES, "must be at least 2")?;
        raw.check(
            "task",
            "holdout",
            d == 1 || holdout <= MAX_HOLDOUT_MULTI_D,
            "exact W1 in d >= 2 is an assignment problem; keep holdout <= 1000",
        )?;
        let task = TaskSpec::new(family, params, alpha, holdout).map_err(|e| ConfigError::Invalid {
            origin: origin.to_owned(),
            msg: format!("[task]: {e}"),
        })?;

        let ns = raw.get("sweep", "n", uint_list)?.ok_or_else(|| missing("sweep.n"))?;
        raw.check(
            "sweep",
            "n",
            ns.iter().all(|&n| n >= MIN_SAMPLES),
            "every N must be at least 2",
        )?;
        let sweep = SweepSection {
            ns,
            seeds: raw.get("sweep", "seeds", uint)?.unwrap_or(5),
            master_seed: raw.get("sweep", "master_seed", seed)?.unwrap_or(0),
        };
        raw.check("sweep", "seeds", sweep.seeds >= 1, "must be at least 1")?;

        let width = raw.get("train", "width", uint)?.unwrap_or(default_width(d));
        raw.check("train", "width", width >= d, "must be at least the data dimension")?;
        let disc_budget = raw.get("train", "disc_budget", float)?.unwrap_or(DISC_BUDGET);
        raw.check(
            "train",
            "disc_budget",
            disc_budget == DISC_BUDGET,
            "discriminator budget is fixed at 1",
        )?;
        // Optimiser defaults come from the core training defaults.
        let base = TrainConfig::new(width, 1, 1.0);
        let base_noise = match base.init {
            GeneratorInit::NearIdentity { noise } => noise,
            GeneratorInit::Random => 0.01,
        };
        let init = match raw.get("train", "init", |s| Ok(s.to_owned()))?.as_deref() {
            None | Some("near-identity") => GeneratorInit::NearIdentity {
                noise: raw.get("train", "init_noise", float)?.unwrap_or(base_noise),
            },
            Some("random") => GeneratorInit::Random,
            Some(other) => {
                let e = raw.entry("train", "init").expect("present");
                return Err(raw.err(e, format!("unknown init `{other}` (expected near-identity or random)")));
            }
        };
        let train = TrainSection {
            width,
            disc_width: raw.get("train", "disc_width", uint)?.unwrap_or(width),
            depth: raw.get("train", "depth", uint)?,
            budget: raw.get("train", "budget", float)?,
            budget_scale: raw.get("train", "budget_scale", float)?.unwrap_or(1.0),
            lambda: raw.get("train", "lambda", float)?,
            gen_step: raw.get("train", "gen_step", float)?.unwrap_or(base.gen_step),
            disc_step: raw.get("train", "disc_step", float)?.unwrap_or(base.disc_step),
            inner_steps: raw.get("train", "inner_steps", uint)?.unwrap_or(base.inner_steps),
            outer_steps: raw.get("train", "outer_steps", uint)?.unwrap_or(base.outer_steps),
            optimizer: raw.get("train", "optimizer", optimizer)?.unwrap_or(base.optimizer),
            init,
            select_every: match raw.get("train", "select_every", uint)? {
                None => base.select_every,
                Some(0) => None,
                Some(k) => Some(k),
            },
        };
        raw.check("train", "disc_width", train.disc_width >= 1, "must be positive")?;
        raw.check(
            "train",
            "depth",
            train.depth.is_none_or(|l| l >= 1),
            "must be at least 1",
        )?;
        raw.check(
            "train",
            "budget",
            train.budget.is_none_or(|b| b > 0.0),
            "must be positive",
        )?;
        raw.check("train", "budget_scale", train.budget_scale > 0.0, "must be positive")?;
        raw.check(
            "train",
            "lambda",
            train.lambda.is_none_or(|l| l >= 0.0),
            "must be nonnegative",
        )?;
        raw.check("train", "gen_step", train.gen_step >= 0.0, "must be nonnegative")?;
        raw.check("train", "disc_step", train.disc_step >= 0.0, "must be nonnegative")?;
        if let GeneratorInit::NearIdentity { noise } = train.init {
            raw.check("train", "init_noise", noise >= 0.0, "must be nonnegative")?;
        }

        let bounds = BoundsSection {
            delta: raw.get("bounds", "delta", float)?.unwrap_or(0.01),
            c_user: raw.get("bounds", "c_user", float)?.unwrap_or(1.0),
        };
        raw.check(
            "bounds",
            "delta",
            bounds.delta > 0.0 && bounds.delta < 1.0 / 12.0,
            "must lie in (0, 1/12)",
        )?;
        raw.check("bounds", "c_user", bounds.c_user > 0.0, "must be positive")?;

        let approx = ApproxSection {
            depths: raw
                .get("approx", "depths", uint_list)?
                .unwrap_or_else(|| vec![2, 4, 8, 16]),
            seeds: raw.get("approx", "seeds", uint)?.unwrap_or(5),
            budget_scale: raw
                .get("approx", "budget_scale", float)?
                .unwrap_or(DEFAULT_APPROX_BUDGET_SCALE),
            grid: raw.get("approx", "grid", uint)?.unwrap_or(256),
            fine_grid: raw.get("approx", "fine_grid", uint)?.unwrap_or(4096),
            steps: raw.get("approx", "steps", uint)?.unwrap_or(400),
            lr: raw.get("approx", "lr", float)?.unwrap_or(1e-3),
            temperature: raw.get("approx", "temperature", float)?.unwrap_or(1e-3),
        };
        raw.check(
            "approx",
            "depths",
            approx.depths.iter().all(|&l| l >= 2),
            "depths must be at least 2",
        )?;
        raw.check("approx", "seeds", approx.seeds >= 1, "must be at least 1")?;
        raw.check("approx", "budget_scale", approx.budget_scale > 0.0, "must be positive")?;
        raw.check("approx", "grid", approx.grid >= 2, "must be at least 2")?;
        raw.check(
            "approx",
            "fine_grid",
            approx.fine_grid >= approx.grid,
            "must be at least `grid`",
        )?;
        raw.check("approx", "lr", approx.lr >= 0.0, "must be nonnegative")?;
        raw.check("approx", "temperature", approx.temperature > 0.0, "must be positive")?;

        Ok(Self {
            task,
            sweep,
            train,
            bounds,
            approx,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn dim(&self) -> usize {
        self.task.dim()
    }

    /// Depth, budget and `λ` for `n` training points per side.
    pub fn run_shape(&self, n: usize) -> RunShape {
        let s = bounds::schedule(n as f64, self.dim() as f64, self.task.alpha).expect("validated inputs");
        let depth = self.train.depth.unwrap_or(s.depth);
        let budget = self.train.budget.unwrap_or(self.train.budget_scale * s.budget);
        RunShape {
            depth,
            budget,
            lambda: self.train.lambda.unwrap_or(1.0 / budget),
        }
    }

    /// Training settings for `n` points per side and the given seed.
    pub fn train_config(&self, n: usize, seed: u64) -> TrainConfig {
        let shape = self.run_shape(n);
        let t = &self.train;
        let mut cfg = TrainConfig::new(t.width, shape.depth, shape.budget);
        cfg.width_dx = t.disc_width;
        cfg.width_dy = t.disc_width;
        cfg.lambda = Some(shape.lambda);
        cfg.gen_step = t.gen_step;
        cfg.disc_step = t.disc_step;
        cfg.inner_steps = t.inner_steps;
        cfg.outer_steps = t.outer_steps;
        cfg.optimizer = t.optimizer;
        cfg.init = t.init;
        cfg.select_every = t.select_every;
        cfg.seed = seed;
        cfg
    }

    /// The full configuration with every default filled in. Parsing the
    /// echo gives back an equal `Config`.
    pub fn echo(&self) -> String {
        let mut o = String::new();
        let t = &self.task;
        let p = &t.params;
        let _ = writeln!(o, "[task]");
        let _ = writeln!(o, "family = {}", t.family);
        let _ = writeln!(o, "alpha = {}", t.alpha);
        let _ = writeln!(o, "holdout = {}", t.holdout);
        for (k, v) in [
            ("mu_mean", p.mu_mean),
            ("mu_sd", p.mu_sd),
            ("nu_mean", p.nu_mean),
            ("nu_sd", p.nu_sd),
            ("nu_sep", p.nu_sep),
            ("mix_sd", p.mix_sd),
            ("affine_scale", p.affine_scale),
            ("affine_shift", p.affine_shift),
        ] {
            let _ = writeln!(o, "{k} = {v}");
        }
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let s = &self.sweep;
        let _ = writeln!(o, "\n[sweep]");
        let _ = writeln!(o, "n = {}", list(&s.ns));
        let _ = writeln!(o, "seeds = {}", s.seeds);
        let _ = writeln!(o, "master_seed = {}", s.master_seed);
        let tr = &self.train;
        let _ = writeln!(o, "\n[train]");
        let _ = writeln!(o, "width = {}", tr.width);
        let _ = writeln!(o, "disc_width = {}", tr.disc_width);
        match tr.depth {
            Some(l) => {
                let _ = writeln!(o, "depth = {l}");
            }
            None => o.push_str("# depth: closed-form schedule per N\n"),
        }
        match tr.budget {
            Some(b) => {
                let _ = writeln!(o, "budget = {b}");
            }
            None => o.push_str("# budget: closed-form schedule per N, times budget_scale\n"),
        }
        let _ = writeln!(o, "budget_scale = {}", tr.budget_scale);
        match tr.lambda {
            Some(l) => {
                let _ = writeln!(o, "lambda = {l}");
            }
            None => o.push_str("# lambda: 1 / budget\n"),
        }
        let _ = writeln!(o, "disc_budget = {DISC_BUDGET}");
        let _ = writeln!(o, "gen_step = {}", tr.gen_step);
        let _ = writeln!(o, "disc_step = {}", tr.disc_step);
        let _ = writeln!(o, "inner_steps = {}", tr.inner_steps);
        let _ = writeln!(o, "outer_steps = {}", tr.outer_steps);
        let _ = writeln!(o, "optimizer = {}", tr.optimizer.label());
        match tr.init {
            GeneratorInit::Random => o.push_str("init = random\n"),
            GeneratorInit::NearIdentity { noise } => {
                let _ = writeln!(o, "init = near-identity\ninit_noise = {noise}");
            }
        }
        let _ = writeln!(o, "select_every = {}", tr.select_every.unwrap_or(0));
        let b = &self.bounds;
        let _ = writeln!(o, "\n[bounds]\ndelta = {}\nc_user = {}", b.delta, b.c_user);
        let a = &self.approx;
        let _ = writeln!(o, "\n[approx]");
        let _ = writeln!(o, "depths = {}", list(&a.depths));
        let _ = writeln!(o, "seeds = {}", a.seeds);
        let _ = writeln!(o, "budget_scale = {}", a.budget_scale);
        let _ = writeln!(o, "grid = {}", a.grid);
        let _ = writeln!(o, "fine_grid = {}", a.fine_grid);
        let _ = writeln!(o, "steps = {}", a.steps);
        let _ = writeln!(o, "lr = {}", a.lr);
        let _ = writeln!(o, "temperature = {}", a.temperature);
        o
    }
}

/// Holdout default: 10⁴ points in one dimension (sorted-matching `W1`),
/// 500 otherwise (the exact assignment solver is cubic).
pub fn default_holdout(d: usize) -> usize {
    if d == 1 {
        10_000
    } else {
        500
    }
}

pub const MAX_HOLDOUT_MULTI_D: usize = 1000;

/// Generator width default: the stacking width `2d² + 3d`, but at least 8.
pub fn default_width(d: usize) -> usize {
    (2 * d * d + 3 * d).max(8)
}

pub const DEFAULT_APPROX_BUDGET_SCALE: f64 = 8.0;

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[task]\nfamily = gaussian-mixture-1d\n[sweep]\nn = 64, 256\n";

    fn parse(text: &str) -> Result<Config, ConfigError> {
        Config::parse(text, "test.cfg")
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.sweep.ns, vec![64, 256]);
        assert_eq!(c.sweep.seeds, 5);
        assert_eq!(c.task.alpha, 1.5);
        assert_eq!(c.bounds.delta, 0.01);
        let shape = c.run_shape(1024);
        let s = bounds::schedule(1024.0, 1.0, 1.5).unwrap();
        assert_eq!(shape.depth, s.depth);
        assert_eq!(shape.budget, s.budget);
        assert_eq!(shape.lambda, 1.0 / s.budget);
        assert!(c.echo().contains("disc_budget = 1"));
    }

    #[test]
    fn echo_round_trips() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(parse(&c.echo()).unwrap(), c);
        let full = "[task]\nfamily = gaussian-2d\n[sweep]\nn = 10\n[train]\ndepth = 3\nbudget = 2.5\nlambda = 0.1\ninit = random\noptimizer = sgd\n";
        let c = parse(full).unwrap();
        assert_eq!(parse(&c.echo()).unwrap(), c);
        assert_eq!(
            c.run_shape(10_000),
            RunShape {
                depth: 3,
                budget: 2.5,
                lambda: 0.1
            }
        );
    }

    #[test]
    fn delta_must_be_below_one_twelfth() {
        let e = parse(&format!("{MINIMAL}[bounds]\ndelta = 0.2\n"))
            .unwrap_err()
            .to_string();
        assert!(
            e.contains("test.cfg:6") && e.contains("bounds.delta") && e.contains("1/12"),
            "{e}"
        );
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = parse(&format!("{MINIMAL}[train]\nwidht = 4\n"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("`widht`") && e.contains(":6:"), "{e}");
        let e = parse("[nope]\n").unwrap_err().to_string();
        assert!(e.contains("[nope]"), "{e}");
    }

    #[test]
    fn missing_required_keys() {
        let e = parse("[sweep]\nn = 4\n").unwrap_err();
        assert_eq!(
            e,
            ConfigError::Missing {
                origin: "test.cfg".into(),
                key: "task.family".into()
            }
        );
        let e = parse("[task]\nfamily = gaussian-1d\n").unwrap_err().to_string();
        assert!(e.contains("sweep.n"), "{e}");
    }

    #[test]
    fn malformed_lines() {
        for (text, needle) in [
            ("family = gaussian-1d\n", "before any [section]"),
            ("[task\n", "malformed section"),
            ("[task]\nfamily\n", "expected `key = value`"),
            ("[task]\nfamily = gaussian-1d\nfamily = gaussian-2d\n", "duplicate"),
            ("[task]\nfamily = cauchy\n", "unknown task family"),
            ("[task]\nfamily = gaussian-1d\nalpha = 2.5\n[sweep]\nn = 4\n", "(1, 2)"),
            ("[task]\nfamily = gaussian-1d\n[sweep]\nn = 4, x\n", "`x`"),
            (
                "[task]\nfamily = gaussian-1d\n[sweep]\nn = 4\n[train]\ndisc_budget = 2\n",
                "fixed at 1",
            ),
        ] {
            let e = parse(text).unwrap_err().to_string();
            assert!(e.contains(needle), "{text:?} -> {e}");
        }
    }

    #[test]
    fn comments_are_ignored() {
        let c = parse("# leading\n[task] # trailing\nfamily = gaussian-1d # note\n[sweep]\nn = 8\n").unwrap();
        assert_eq!(c.task.family, TaskFamily::Gaussian1d);
    }
}
