//! Run configuration: a TOML file with `schema_version = 1`.
//!
//! Parsing never stops at the first problem. Every missing key, wrong type,
//! unknown key and inconsistent value is collected and reported together.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;

use qda_core::adaptive::RefitFamily;
use qda_core::qmc::Generator;
use qda_core::target::Support;
use toml::{Table, Value};

pub const SCHEMA_VERSION: i64 = 1;

/// All problems found in a config, in discovery order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid config ({} problem{}):", self.0.len(), if self.0.len() == 1 { "" } else { "s" })?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    BetaMixture { components: Vec<(f64, f64, f64)> },
    Beta { a: f64, b: f64 },
    Normal2d,
    MvNormal { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    Banana,
    LinReg { n: usize, d: usize, data_seed: u64 },
    Lasso { n: usize, d: usize, data_seed: u64 },
    Gp { n: usize, p: usize, m: usize, data_seed: u64 },
    Subprocess { program: String, args: Vec<String>, support: Vec<Support> },
}

impl TargetSpec {
    pub fn model_name(&self) -> &'static str {
        match self {
            TargetSpec::BetaMixture { .. } => "beta_mixture",
            TargetSpec::Beta { .. } => "beta",
            TargetSpec::Normal2d => "normal2d",
            TargetSpec::MvNormal { .. } => "mvnormal",
            TargetSpec::Banana => "banana",
            TargetSpec::LinReg { .. } => "linreg",
            TargetSpec::Lasso { .. } => "blasso",
            TargetSpec::Gp { .. } => "gp",
            TargetSpec::Subprocess { .. } => "subprocess",
        }
    }

    /// Known without building the model.
    pub fn dim(&self) -> usize {
        match self {
            TargetSpec::BetaMixture { .. } | TargetSpec::Beta { .. } => 1,
            TargetSpec::Normal2d | TargetSpec::Banana => 2,
            TargetSpec::MvNormal { mean, .. } => mean.len(),
            TargetSpec::LinReg { d, .. } => d + 2,
            TargetSpec::Lasso { d, .. } => d + 3,
            TargetSpec::Gp { p, .. } => 1 + 1 + p + 1,
            TargetSpec::Subprocess { support, .. } => support.len(),
        }
    }

    pub fn has_cdf(&self) -> bool {
        matches!(self, TargetSpec::BetaMixture { .. } | TargetSpec::Beta { .. })
    }

    pub fn has_exact_sampler(&self) -> bool {
        matches!(
            self,
            TargetSpec::BetaMixture { .. }
                | TargetSpec::Beta { .. }
                | TargetSpec::Normal2d
                | TargetSpec::MvNormal { .. }
                | TargetSpec::LinReg { .. }
        )
    }

    pub fn has_default_proposal(&self) -> bool {
        !matches!(self, TargetSpec::Gp { .. } | TargetSpec::Subprocess { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockSpec {
    UniformBox { lower: Vec<f64>, upper: Vec<f64> },
    MvNormal { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    MvCauchy { location: Vec<f64>, scale: Vec<Vec<f64>> },
    Gamma { shape: f64, scale: f64 },
}

impl BlockSpec {
    pub fn dim(&self) -> usize {
        match self {
            BlockSpec::UniformBox { lower, .. } => lower.len(),
            BlockSpec::MvNormal { mean, .. } => mean.len(),
            BlockSpec::MvCauchy { location, .. } => location.len(),
            BlockSpec::Gamma { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub generator: Generator,
    pub m: usize,
    pub skip: u64,
    pub stages: usize,
    /// Per-stage sizes; `[m; stages]` when absent.
    pub schedule: Vec<usize>,
    pub refit: RefitFamily,
    pub warn_below: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantile {
    /// 1-based, matching the `y_k` CSV columns.
    pub coord: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub mean: bool,
    pub covariance: bool,
    pub quantiles: Vec<Quantile>,
    pub kd: bool,
    pub rp: Option<usize>,
    pub rp_jitter: bool,
    pub draws: Option<usize>,
    pub draws_seed: Option<u64>,
    pub predict: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainKind {
    Independence,
    RandomWalk { step: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Baselines {
    pub repetitions: usize,
    pub mcmc_length: Option<usize>,
    pub burn_in: Option<usize>,
    pub chain: ChainKind,
    pub exact_draws: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub target: TargetSpec,
    pub proposal: Option<Vec<BlockSpec>>,
    pub discretization: Discretization,
    pub outputs: Outputs,
    pub baselines: Option<Baselines>,
}

struct Section<'a> {
    path: String,
    table: &'a Table,
    used: RefCell<BTreeSet<String>>,
    errors: &'a RefCell<Vec<String>>,
}

impl<'a> Section<'a> {
    fn new(path: impl Into<String>, table: &'a Table, errors: &'a RefCell<Vec<String>>) -> Self {
        Self {
            path: path.into(),
            table,
            used: RefCell::new(BTreeSet::new()),
            errors,
        }
    }

    fn key(&self, k: &str) -> String {
        if self.path.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.path)
        }
    }

    fn err(&self, msg: String) {
        self.errors.borrow_mut().push(msg);
    }

    fn raw(&self, k: &str) -> Option<&'a Value> {
        self.used.borrow_mut().insert(k.to_string());
        self.table.get(k)
    }

    fn required<T>(&self, k: &str, v: Option<T>) -> Option<T> {
        if v.is_none() && !self.table.contains_key(k) {
            self.err(format!("{}: missing required key", self.key(k)));
        }
        v
    }

    fn f64(&self, k: &str) -> Option<f64> {
        let v = self.raw(k)?;
        match as_f64(v) {
            Some(x) => Some(x),
            None => {
                self.err(format!("{}: expected a number, got {}", self.key(k), v.type_str()));
                None
            }
        }
    }

    fn req_f64(&self, k: &str) -> Option<f64> {
        let v = self.f64(k);
        self.required(k, v)
    }

    fn positive(&self, k: &str, v: Option<f64>) -> Option<f64> {
        match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                self.err(format!("{}: must be a positive finite number, got {x}", self.key(k)));
                None
            }
            other => other,
        }
    }

    fn int(&self, k: &str) -> Option<i64> {
        let v = self.raw(k)?;
        match v.as_integer() {
            Some(x) => Some(x),
            None => {
                self.err(format!("{}: expected an integer, got {}", self.key(k), v.type_str()));
                None
            }
        }
    }

    fn count(&self, k: &str, min: i64) -> Option<usize> {
        let x = self.int(k)?;
        if x < min {
            self.err(format!("{}: must be at least {min}, got {x}", self.key(k)));
            return None;
        }
        Some(x as usize)
    }

    fn req_count(&self, k: &str, min: i64) -> Option<usize> {
        let v = self.count(k, min);
        self.required(k, v)
    }

    fn seed(&self, k: &str) -> Option<u64> {
        let x = self.int(k)?;
        if x < 0 {
            self.err(format!("{}: seeds are nonnegative, got {x}", self.key(k)));
            return None;
        }
        Some(x as u64)
    }

    fn bool(&self, k: &str) -> Option<bool> {
        let v = self.raw(k)?;
        match v.as_bool() {
            Some(b) => Some(b),
            None => {
                self.err(format!("{}: expected true or false, got {}", self.key(k), v.type_str()));
                None
            }
        }
    }

    fn str(&self, k: &str) -> Option<&'a str> {
        let v = self.raw(k)?;
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                self.err(format!("{}: expected a string, got {}", self.key(k), v.type_str()));
                None
            }
        }
    }

    fn array(&self, k: &str) -> Option<&'a Vec<Value>> {
        let v = self.raw(k)?;
        match v.as_array() {
            Some(a) => Some(a),
            None => {
                self.err(format!("{}: expected an array, got {}", self.key(k), v.type_str()));
                None
            }
        }
    }

    fn f64_vec(&self, k: &str) -> Option<Vec<f64>> {
        let a = self.array(k)?;
        let xs: Option<Vec<f64>> = a.iter().map(as_f64).collect();
        if xs.is_none() {
            self.err(format!("{}: expected an array of numbers", self.key(k)));
        }
        xs
    }

    fn req_f64_vec(&self, k: &str) -> Option<Vec<f64>> {
        let v = self.f64_vec(k);
        self.required(k, v)
    }

    fn matrix(&self, k: &str, n: Option<usize>) -> Option<Vec<Vec<f64>>> {
        let a = self.array(k);
        let a = self.required(k, a)?;
        let rows: Option<Vec<Vec<f64>>> = a
            .iter()
            .map(|r| r.as_array().and_then(|r| r.iter().map(as_f64).collect()))
            .collect();
        let Some(rows) = rows else {
            self.err(format!("{}: expected an array of numeric rows", self.key(k)));
            return None;
        };
        if let Some(n) = n {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                self.err(format!("{}: expected a {n}x{n} matrix", self.key(k)));
                return None;
            }
        }
        Some(rows)
    }

    fn sub_table(&self, k: &str) -> Option<&'a Table> {
        let v = self.raw(k)?;
        match v.as_table() {
            Some(t) => Some(t),
            None => {
                self.err(format!("{}: expected a table, got {}", self.key(k), v.type_str()));
                None
            }
        }
    }

    fn finish(self) {
        let used = self.used.into_inner();
        for k in self.table.keys() {
            if !used.contains(k) {
                let path = if self.path.is_empty() {
                    k.clone()
                } else {
                    format!("{}.{k}", self.path)
                };
                self.errors.borrow_mut().push(format!("{path}: unknown key"));
            }
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn parse_support(s: &str) -> Option<Support> {
    match s {
        "real" => Some(Support::Real),
        "positive" => Some(Support::Positive),
        _ => {
            let rest = s.strip_prefix("interval:")?;
            let (lo, hi) = rest.split_once(':')?;
            let (lower, upper) = (lo.trim().parse().ok()?, hi.trim().parse().ok()?);
            (lower < upper).then_some(Support::Interval { lower, upper })
        }
    }
}

fn parse_target(s: &Section<'_>) -> Option<TargetSpec> {
    let model = s.str("model");
    let model = s.required("model", model)?;
    let spec = match model {
        "beta_mixture" => {
            let components = match s.array("components") {
                None => Some(vec![(0.5, 6.0, 3.0), (0.5, 2.0, 7.0)]),
                Some(rows) => {
                    let parsed: Option<Vec<(f64, f64, f64)>> = rows
                        .iter()
                        .map(|r| {
                            let r = r.as_array()?;
                            let v: Vec<f64> = r.iter().map(as_f64).collect::<Option<_>>()?;
                            (v.len() == 3 && v.iter().all(|x| *x > 0.0)).then(|| (v[0], v[1], v[2]))
                        })
                        .collect();
                    match parsed {
                        Some(c) if !c.is_empty() => Some(c),
                        _ => {
                            s.err(format!(
                                "{}: expected a nonempty array of positive [weight, a, b] triples",
                                s.key("components")
                            ));
                            None
                        }
                    }
                }
            };
            TargetSpec::BetaMixture { components: components? }
        }
        "beta" => {
            let a = s.positive("a", s.req_f64("a"));
            let b = s.positive("b", s.req_f64("b"));
            TargetSpec::Beta { a: a?, b: b? }
        }
        "normal2d" => TargetSpec::Normal2d,
        "banana" => TargetSpec::Banana,
        "mvnormal" => {
            let mean = s.req_f64_vec("mean");
            let cov = s.matrix("cov", mean.as_ref().map(Vec::len));
            TargetSpec::MvNormal { mean: mean?, cov: cov? }
        }
        "linreg" | "blasso" => {
            let d = s.req_count("d", 1);
            let n = s.req_count("n", 1);
            let data_seed = s.seed("data_seed").unwrap_or(1);
            let (n, d) = (n?, d?);
            if n <= d + 3 {
                s.err(format!("{}: need n > d + 3 (n={n}, d={d})", s.key("n")));
                return None;
            }
            if model == "blasso" && d < 2 {
                s.err(format!("{}: the lasso prior needs d >= 2", s.key("d")));
                return None;
            }
            if model == "linreg" {
                TargetSpec::LinReg { n, d, data_seed }
            } else {
                TargetSpec::Lasso { n, d, data_seed }
            }
        }
        "gp" => {
            let n = s.req_count("n", 2);
            let p = s.req_count("p", 1);
            let m = s.req_count("m", 1);
            let data_seed = s.seed("data_seed").unwrap_or(1);
            TargetSpec::Gp {
                n: n?,
                p: p?,
                m: m?,
                data_seed,
            }
        }
        "subprocess" => {
            let program = s.str("program");
            let program = s.required("program", program).map(str::to_string);
            let args = match s.array("args") {
                None => Some(Vec::new()),
                Some(a) => {
                    let v: Option<Vec<String>> = a.iter().map(|x| x.as_str().map(str::to_string)).collect();
                    if v.is_none() {
                        s.err(format!("{}: expected an array of strings", s.key("args")));
                    }
                    v
                }
            };
            let support = s.array("support");
            let support = s.required("support", support).and_then(|a| {
                let v: Option<Vec<Support>> = a.iter().map(|x| x.as_str().and_then(parse_support)).collect();
                match v {
                    Some(v) if !v.is_empty() => Some(v),
                    _ => {
                        s.err(format!(
                            "{}: expected a nonempty array of \"real\", \"positive\" or \"interval:LO:HI\"",
                            s.key("support")
                        ));
                        None
                    }
                }
            });
            TargetSpec::Subprocess {
                program: program?,
                args: args?,
                support: support?,
            }
        }
        other => {
            s.err(format!(
                "{}: unknown model {other:?} (expected beta_mixture, beta, normal2d, mvnormal, banana, linreg, blasso, gp or subprocess)",
                s.key("model")
            ));
            return None;
        }
    };
    Some(spec)
}

fn parse_block(s: &Section<'_>) -> Option<BlockSpec> {
    let kind = s.str("kind");
    let kind = s.required("kind", kind)?;
    match kind {
        "uniform_box" => {
            let lower = s.req_f64_vec("lower");
            let upper = s.req_f64_vec("upper");
            let (lower, upper) = (lower?, upper?);
            if lower.is_empty() || lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
                s.err(format!(
                    "{}: lower and upper must have equal nonzero length with lower < upper",
                    s.path
                ));
                return None;
            }
            Some(BlockSpec::UniformBox { lower, upper })
        }
        "mvnormal" => {
            let mean = s.req_f64_vec("mean");
            let cov = s.matrix("cov", mean.as_ref().map(Vec::len));
            Some(BlockSpec::MvNormal { mean: mean?, cov: cov? })
        }
        "mvcauchy" => {
            let location = s.req_f64_vec("location");
            let scale = s.matrix("scale", location.as_ref().map(Vec::len));
            Some(BlockSpec::MvCauchy {
                location: location?,
                scale: scale?,
            })
        }
        "gamma" => {
            let shape = s.positive("shape", s.req_f64("shape"));
            let scale = s.positive("scale", s.req_f64("scale"));
            Some(BlockSpec::Gamma {
                shape: shape?,
                scale: scale?,
            })
        }
        other => {
            s.err(format!(
                "{}: unknown proposal kind {other:?} (expected uniform_box, mvnormal, mvcauchy or gamma)",
                s.key("kind")
            ));
            None
        }
    }
}

fn parse_generator(s: &Section<'_>) -> Option<Generator> {
    match s.str("generator") {
        None => Some(Generator::Sobol),
        Some("sobol") => Some(Generator::Sobol),
        Some("halton") => Some(Generator::Halton),
        Some("midpoint1d") => Some(Generator::Midpoint1d),
        Some(other) => {
            s.err(format!(
                "{}: unknown generator {other:?} (expected sobol, halton or midpoint1d)",
                s.key("generator")
            ));
            None
        }
    }
}

fn parse_discretization(s: &Section<'_>) -> Option<Discretization> {
    let generator = parse_generator(s);
    let m = s.req_count("m", 1);
    let skip = s.seed("skip").unwrap_or(1);
    let stages = s.count("stages", 1).unwrap_or(1);
    let schedule = s.array("schedule").map(|a| {
        a.iter()
            .map(|v| v.as_integer().filter(|&x| x >= 1).map(|x| x as usize))
            .collect::<Option<Vec<_>>>()
    });
    let schedule = match schedule {
        Some(None) => {
            s.err(format!("{}: expected an array of positive integers", s.key("schedule")));
            None
        }
        Some(Some(v)) => {
            if v.len() < stages {
                s.err(format!(
                    "{}: has {} entries but stages = {stages}",
                    s.key("schedule"),
                    v.len()
                ));
            }
            Some(v)
        }
        None => m.map(|m| vec![m; stages]),
    };
    let refit = match s.str("refit") {
        None | Some("mvcauchy") => Some(RefitFamily::MvCauchy),
        Some("mvnormal") => Some(RefitFamily::MvNormal),
        Some(other) => {
            s.err(format!("{}: unknown family {other:?} (expected mvcauchy or mvnormal)", s.key("refit")));
            None
        }
    };
    let warn_below = match s.f64("warn_below") {
        Some(x) if !(0.0..=1.0).contains(&x) => {
            s.err(format!("{}: must lie in [0, 1], got {x}", s.key("warn_below")));
            None
        }
        Some(x) => Some(x),
        None => Some(qda_core::adaptive::LOW_ACCEPTANCE),
    };
    Some(Discretization {
        generator: generator?,
        m: m?,
        skip,
        stages,
        schedule: schedule?,
        refit: refit?,
        warn_below: warn_below?,
    })
}

fn parse_outputs(s: &Section<'_>, errors: &RefCell<Vec<String>>) -> Outputs {
    let mut quantiles = Vec::new();
    if let Some(a) = s.array("quantiles") {
        for (i, v) in a.iter().enumerate() {
            match v.as_table() {
                Some(t) => {
                    let q = Section::new(format!("{}[{i}]", s.key("quantiles")), t, errors);
                    let coord = q.req_count("coord", 1);
                    let alpha = q.req_f64("alpha");
                    if let Some(a) = alpha {
                        if !(a > 0.0 && a < 1.0) {
                            q.err(format!("{}: must lie in (0, 1), got {a}", q.key("alpha")));
                        }
                    }
                    if let (Some(coord), Some(alpha)) = (coord, alpha) {
                        quantiles.push(Quantile { coord, alpha });
                    }
                    q.finish();
                }
                None => s.err(format!("{}[{i}]: expected a table with coord and alpha", s.key("quantiles"))),
            }
        }
    }
    let predict = match s.array("predict") {
        None => Vec::new(),
        Some(rows) => {
            let parsed: Option<Vec<Vec<f64>>> = rows
                .iter()
                .map(|r| r.as_array().and_then(|r| r.iter().map(as_f64).collect()))
                .collect();
            parsed.unwrap_or_else(|| {
                s.err(format!("{}: expected an array of numeric input rows", s.key("predict")));
                Vec::new()
            })
        }
    };
    Outputs {
        mean: s.bool("mean").unwrap_or(true),
        covariance: s.bool("covariance").unwrap_or(true),
        quantiles,
        kd: s.bool("kd").unwrap_or(false),
        rp: s.count("rp", 1),
        rp_jitter: s.bool("rp_jitter").unwrap_or(false),
        draws: s.count("draws", 1),
        draws_seed: s.seed("draws_seed"),
        predict,
    }
}

fn parse_baselines(s: &Section<'_>) -> Option<Baselines> {
    let repetitions = s.count("repetitions", 1).unwrap_or(1);
    let mcmc_length = s.count("mcmc_length", 1);
    let burn_in = s.count("burn_in", 0);
    let exact_draws = s.count("exact_draws", 1);
    let chain = match s.str("chain") {
        None | Some("independence") => {
            if s.table.contains_key("step") {
                s.raw("step");
                s.err(format!("{}: only used with chain = \"random_walk\"", s.key("step")));
            }
            Some(ChainKind::Independence)
        }
        Some("random_walk") => {
            let step = s.req_f64_vec("step");
            match step {
                Some(v) if v.iter().all(|x| *x > 0.0) && !v.is_empty() => Some(ChainKind::RandomWalk { step: v }),
                Some(_) => {
                    s.err(format!("{}: step sizes must be positive", s.key("step")));
                    None
                }
                None => None,
            }
        }
        Some(other) => {
            s.err(format!(
                "{}: unknown chain {other:?} (expected independence or random_walk)",
                s.key("chain")
            ));
            None
        }
    };
    if mcmc_length.is_none() && exact_draws.is_none() {
        s.err(format!("{}: set mcmc_length, exact_draws or both", s.path));
    }
    Some(Baselines {
        repetitions,
        mcmc_length,
        burn_in,
        chain: chain?,
        exact_draws,
    })
}

/// Cross-section checks that need the parsed pieces together.
fn check_consistency(cfg: &RunConfig, errors: &mut Vec<String>) {
    let d = cfg.target.dim();
    let disc = &cfg.discretization;
    match &cfg.proposal {
        Some(blocks) => {
            let pd: usize = blocks.iter().map(BlockSpec::dim).sum();
            if pd != d {
                errors.push(format!(
                    "proposal: blocks cover {pd} coordinate(s) but target {} has dimension {d}",
                    cfg.target.model_name()
                ));
            }
        }
        None if !cfg.target.has_default_proposal() => errors.push(format!(
            "proposal: target {} has no default proposal; add [[proposal]] blocks",
            cfg.target.model_name()
        )),
        None => {}
    }
    if let TargetSpec::Subprocess { .. } | TargetSpec::MvNormal { .. } = cfg.target {
        if d == 0 {
            errors.push("target: dimension must be at least 1".into());
        }
    }
    match disc.generator {
        Generator::Midpoint1d if d != 1 => {
            errors.push(format!("discretization.generator: midpoint1d needs a 1-dimensional target, got {d}"))
        }
        Generator::Sobol if d > 100 => errors.push(format!("discretization.generator: sobol supports d <= 100, got {d}")),
        _ => {}
    }
    if disc.stages > 1 && disc.generator == Generator::Midpoint1d {
        errors.push("discretization.stages: multi-stage runs need a sequence generator (sobol or halton)".into());
    }
    for (i, q) in cfg.outputs.quantiles.iter().enumerate() {
        if q.coord > d {
            errors.push(format!("outputs.quantiles[{i}].coord: {} exceeds the target dimension {d}", q.coord));
        }
    }
    if cfg.outputs.kd && !cfg.target.has_cdf() {
        errors.push(format!(
            "outputs.kd: no closed-form CDF for target {} (available for beta_mixture and beta)",
            cfg.target.model_name()
        ));
    }
    if !cfg.outputs.predict.is_empty() {
        match cfg.target {
            TargetSpec::Gp { p, .. } => {
                if cfg.outputs.predict.iter().any(|r| r.len() != p) {
                    errors.push(format!("outputs.predict: every input row needs {p} value(s)"));
                }
            }
            _ => errors.push("outputs.predict: predictions are only available for the gp target".into()),
        }
    }
    if let Some(b) = &cfg.baselines {
        if b.exact_draws.is_some() && !cfg.target.has_exact_sampler() {
            errors.push(format!(
                "baselines.exact_draws: no closed-form sampler for target {}",
                cfg.target.model_name()
            ));
        }
        if let ChainKind::RandomWalk { step } = &b.chain {
            if step.len() != d {
                errors.push(format!("baselines.step: has {} entries, target dimension is {d}", step.len()));
            }
        }
        if b.mcmc_length.is_none() && b.burn_in.is_some() {
            errors.push("baselines.burn_in: set mcmc_length as well".into());
        }
    }
}

/// Parses and validates a config file's text.
pub fn parse(text: &str) -> Result<RunConfig, ConfigErrors> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigErrors(vec![format!("TOML syntax: {}", e.message())]))?;
    let errors = RefCell::new(Vec::new());
    let top = Section::new("", &root, &errors);

    match top.int("schema_version") {
        Some(SCHEMA_VERSION) => {}
        Some(v) => top.err(format!("schema_version: unsupported version {v} (this build reads {SCHEMA_VERSION})")),
        None if !root.contains_key("schema_version") => top.err("schema_version: missing required key".into()),
        None => {}
    }
    let seed = top.seed("seed").unwrap_or(1);

    let sub = |key: &str| -> Option<Section<'_>> {
        top.sub_table(key).map(|t| Section::new(key, t, &errors))
    };

    let target = match sub("target") {
        Some(s) => {
            let t = parse_target(&s);
            s.finish();
            t
        }
        None => {
            if !root.contains_key("target") {
                top.err("target: missing required table".into());
            }
            None
        }
    };

    let proposal = match top.raw("proposal") {
        None => Some(None),
        Some(Value::Array(items)) if !items.is_empty() => {
            let mut blocks = Vec::new();
            let mut ok = true;
            for (i, item) in items.iter().enumerate() {
                match item.as_table() {
                    Some(t) => {
                        let s = Section::new(format!("proposal[{i}]"), t, &errors);
                        match parse_block(&s) {
                            Some(b) => blocks.push(b),
                            None => ok = false,
                        }
                        s.finish();
                    }
                    None => {
                        top.err(format!("proposal[{i}]: expected a table"));
                        ok = false;
                    }
                }
            }
            ok.then_some(Some(blocks))
        }
        Some(_) => {
            top.err("proposal: expected one or more [[proposal]] tables".into());
            None
        }
    };

    let discretization = match sub("discretization") {
        Some(s) => {
            let d = parse_discretization(&s);
            s.finish();
            d
        }
        None => {
            if !root.contains_key("discretization") {
                top.err("discretization: missing required table".into());
            }
            None
        }
    };

    let empty = Table::new();
    let outputs = {
        let s = match top.sub_table("outputs") {
            Some(t) => Section::new("outputs", t, &errors),
            None => Section::new("outputs", &empty, &errors),
        };
        let o = parse_outputs(&s, &errors);
        s.finish();
        o
    };

    let baselines = match sub("baselines") {
        Some(s) => {
            let b = parse_baselines(&s);
            s.finish();
            b.map(Some)
        }
        None => Some(None),
    };
    top.finish();

    let mut errors = errors.into_inner();
    let (Some(target), Some(proposal), Some(discretization), Some(baselines)) =
        (target, proposal, discretization, baselines)
    else {
        return Err(ConfigErrors(errors));
    };
    let cfg = RunConfig {
        seed,
        target,
        proposal,
        discretization,
        outputs,
        baselines,
    };
    check_consistency(&cfg, &mut errors);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1

[target]
model = "beta_mixture"

[discretization]
generator = "midpoint1d"
m = 10

[outputs]
kd = true
"#;

    #[test]
    fn minimal_config() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.target.model_name(), "beta_mixture");
        assert_eq!(cfg.discretization.schedule, vec![10]);
        assert_eq!(cfg.discretization.generator, Generator::Midpoint1d);
        assert!(cfg.outputs.kd && cfg.outputs.mean);
        assert_eq!(cfg.seed, 1);
        assert!(cfg.proposal.is_none());
    }

    #[test]
    fn reports_every_problem() {
        let text = r#"
schema_version = 2
colour = "blue"

[target]
model = "beta"
a = -1

[[proposal]]
kind = "gamma"
shape = "two"

[discretization]
m = 0
generator = "lattice"

[outputs]
quantiles = [{ coord = 3, alpha = 1.5 }]
"#;
        let errs = parse(text).unwrap_err().0;
        let joined = errs.join("\n");
        for needle in [
            "schema_version",
            "colour: unknown key",
            "target.a: must be a positive",
            "target.b: missing",
            "proposal[0].shape: expected a number",
            "proposal[0].scale: missing",
            "discretization.m: must be at least 1",
            "discretization.generator: unknown generator",
            "outputs.quantiles[0].alpha",
        ] {
            assert!(joined.contains(needle), "missing {needle:?} in\n{joined}");
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let text = r#"
schema_version = 1
[target]
model = "normal2d"
[[proposal]]
kind = "uniform_box"
lower = [0.0]
upper = [1.0]
[discretization]
m = 100
[outputs]
kd = true
"#;
        let errs = parse(text).unwrap_err().0;
        assert_eq!(errs.len(), 2, "{errs:?}");
        assert!(errs[0].contains("dimension 2"));
        assert!(errs[1].contains("outputs.kd"));
    }

    #[test]
    fn syntax_errors_are_reported() {
        let errs = parse("schema_version = ").unwrap_err();
        assert!(errs.0[0].starts_with("TOML syntax"));
    }

    #[test]
    fn supports_parse() {
        assert_eq!(parse_support("real"), Some(Support::Real));
        assert_eq!(
            parse_support("interval:0:2.5"),
            Some(Support::Interval { lower: 0.0, upper: 2.5 })
        );
        assert_eq!(parse_support("interval:2:1"), None);
        assert_eq!(parse_support("complex"), None);
    }

    #[test]
    fn schedule_shorter_than_stages() {
        let text = r#"
schema_version = 1
[target]
model = "banana"
[discretization]
m = 100
stages = 3
schedule = [100, 100]
"#;
        let errs = parse(text).unwrap_err().0;
        assert!(errs.iter().any(|e| e.contains("stages = 3")), "{errs:?}");
    }
}
