//! Seeded experiments: instance generation, algorithm dispatch, worst-case
//! evaluation and CSV output, plus the strategy file format.
//!
//! Configuration files are flat `key = value` lines with `#` comments.
//! Recognized keys and their defaults are listed on [`ExperimentConfig`].

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::baselines::{
    budget_double_oracle, budget_greedy, nsg_double_oracle, nsg_greedy, worst_case_budget, worst_case_nsg,
    DoubleOracleConfig, WorstCase,
};
use crate::budget::{generate_bipartite, generate_skewed, BipartiteParams, BudgetInstance, RobustBudget};
use crate::equilibria::{equator_brmi, equator_mixed, equator_sample, MixedStrategy};
use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::matroid::Matroid;
use crate::nsg::{generate_geometric, GeometricParams, NetworkGame, ResourceRule};
use crate::optimizer::{sfw_run, ProblemOracles, SfwConfig, StartPoint};
use crate::rng::derive_seed;

const TAG_ALGORITHM: u64 = 0xe7_0001;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Nsg,
    Budget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Equator,
    EquatorBrmi,
    DoubleOracle,
    Greedy,
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nsg" => Ok(Domain::Nsg),
            "budget" => Ok(Domain::Budget),
            _ => Err(Error::Config(format!("field `domain`: unknown domain `{s}` (nsg, budget)"))),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Nsg => "nsg",
            Domain::Budget => "budget",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equator" => Ok(Algorithm::Equator),
            "equator-brmi" => Ok(Algorithm::EquatorBrmi),
            "double-oracle" => Ok(Algorithm::DoubleOracle),
            "greedy" => Ok(Algorithm::Greedy),
            _ => Err(Error::Config(format!(
                "field `algorithm`: unknown algorithm `{s}` (equator, equator-brmi, double-oracle, greedy)"
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Equator => "equator",
            Algorithm::EquatorBrmi => "equator-brmi",
            Algorithm::DoubleOracle => "double-oracle",
            Algorithm::Greedy => "greedy",
        })
    }
}

/// Budget instance family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetFamily {
    Bipartite,
    Skewed,
}

/// Algorithm parameters shared by `solve` and experiments.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveParams {
    /// `(K, c, u)`; domain defaults when absent.
    pub sfw: Option<(usize, usize, f64)>,
    pub start: StartPoint,
    pub eps: f64,
    pub delta: f64,
    /// Mixture size for `equator-brmi`.
    pub rho: usize,
    /// Overrides the sample count of the `equator` mixed strategy.
    pub samples: Option<usize>,
    /// Path enumeration cap for NSG baselines and evaluation.
    pub path_cap: usize,
    pub do_tol: f64,
    pub do_max_iter: usize,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            sfw: None,
            start: StartPoint::Origin,
            eps: 0.5,
            delta: 0.1,
            rho: 4,
            samples: None,
            path_cap: 10_000,
            do_tol: 1e-6,
            do_max_iter: 200,
        }
    }
}

/// Experiment configuration. Keys (defaults in parentheses):
///
/// * `domain` (required): `nsg` or `budget`
/// * `algorithm` (required): `equator`, `equator-brmi`, `double-oracle`, `greedy`
/// * `n` (required): vertices for `nsg`, channels = customers for `budget`
/// * `trials` (1), `seed` (0), `timeout` seconds (300), `out` (stdout)
/// * `timing` (`wall`): `off` writes 0 for runtimes so reruns are byte-identical
/// * `K`, `c`, `u`: solver parameters (NSG 100/60/0.1, budget 20/10/0.1)
/// * `start` (`origin`): `shifted` begins the solver at `u·1` instead
/// * `eps` (0.5), `delta` (0.1), `rho` (4), `samples`, `path_cap` (10000),
///   `do_tol` (1e-6), `do_max_iter` (200)
/// * NSG: `density` (0.1), `value_lo` (0), `value_hi` (100),
///   `k_fraction` (0.01) or `k`, `sources` (3)
/// * budget: `family` (`bipartite` or `skewed`), `edge_prob` (0.2),
///   `p_hi` (0.2), `w_lo` (0.5), `w_hi` (1.5), `gamma_frac` (0.5), `budget`
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub algorithm: Algorithm,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub timeout: Duration,
    pub out: Option<String>,
    pub record_time: bool,
    pub solve: SolveParams,
    pub geometric: GeometricParams,
    pub bipartite: BipartiteParams,
    pub budget_family: BudgetFamily,
}

impl ExperimentConfig {
    pub fn new(domain: Domain, algorithm: Algorithm, n: usize) -> Self {
        ExperimentConfig {
            domain,
            algorithm,
            n,
            trials: 1,
            seed: 0,
            timeout: Duration::from_secs(300),
            out: None,
            record_time: true,
            solve: SolveParams::default(),
            geometric: GeometricParams::standard(n),
            bipartite: BipartiteParams::standard(n),
            budget_family: BudgetFamily::Bipartite,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs: Vec<(usize, String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(Error::Parse {
                line: idx + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            pairs.push((idx + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let find = |key: &str| pairs.iter().rev().find(|(_, k, _)| k == key).map(|(_, _, v)| v.as_str());
        let required = |key: &str| find(key).ok_or_else(|| Error::Config(format!("field `{key}` is required")));
        let domain: Domain = required("domain")?.parse()?;
        let algorithm: Algorithm = required("algorithm")?.parse()?;
        let n: usize = field("n", required("n")?)?;
        let mut cfg = ExperimentConfig::new(domain, algorithm, n);
        for (line, key, value) in &pairs {
            let v = value.as_str();
            let s = &mut cfg.solve;
            let g = &mut cfg.geometric;
            let b = &mut cfg.bipartite;
            match key.as_str() {
                "domain" | "algorithm" | "n" => {}
                "trials" => cfg.trials = field(key, v)?,
                "seed" => cfg.seed = field(key, v)?,
                "timeout" => {
                    let secs: f64 = field(key, v)?;
                    if !(secs > 0.0 && secs.is_finite()) {
                        return Err(Error::Config(format!("field `timeout`: {secs} is not a positive duration")));
                    }
                    cfg.timeout = Duration::from_secs_f64(secs);
                }
                "out" => cfg.out = Some(v.to_string()),
                "timing" => {
                    cfg.record_time = match v {
                        "wall" => true,
                        "off" => false,
                        _ => return Err(Error::Config(format!("field `timing`: expected wall or off, got `{v}`"))),
                    }
                }
                "K" | "c" | "u" => {
                    let (mut kk, mut cc, mut uu) = s.sfw.unwrap_or(default_sfw(domain));
                    match key.as_str() {
                        "K" => kk = field(key, v)?,
                        "c" => cc = field(key, v)?,
                        _ => uu = field(key, v)?,
                    }
                    s.sfw = Some((kk, cc, uu));
                }
                "eps" => s.eps = field(key, v)?,
                "delta" => s.delta = field(key, v)?,
                "start" => {
                    s.start = match v {
                        "origin" => StartPoint::Origin,
                        "shifted" => StartPoint::Shifted,
                        _ => return Err(Error::Config(format!("field `start`: expected origin or shifted, got `{v}`"))),
                    }
                }
                "rho" => s.rho = field(key, v)?,
                "samples" => s.samples = Some(field(key, v)?),
                "path_cap" => s.path_cap = field(key, v)?,
                "do_tol" => s.do_tol = field(key, v)?,
                "do_max_iter" => s.do_max_iter = field(key, v)?,
                "density" => g.density = field(key, v)?,
                "value_lo" => g.value_lo = field(key, v)?,
                "value_hi" => g.value_hi = field(key, v)?,
                "k_fraction" => g.resources = ResourceRule::EdgeFraction(field(key, v)?),
                "k" => g.resources = ResourceRule::Fixed(field(key, v)?),
                "sources" => g.n_source_target = field(key, v)?,
                "family" => {
                    cfg.budget_family = match v {
                        "bipartite" => BudgetFamily::Bipartite,
                        "skewed" => BudgetFamily::Skewed,
                        _ => return Err(Error::Config(format!("field `family`: unknown family `{v}`"))),
                    }
                }
                "edge_prob" => b.edge_prob = field(key, v)?,
                "p_hi" => b.p_hi = field(key, v)?,
                "w_lo" => b.w_lo = field(key, v)?,
                "w_hi" => b.w_hi = field(key, v)?,
                "gamma_frac" => b.gamma_frac = field(key, v)?,
                "budget" => b.budget = Some(field(key, v)?),
                _ => {
                    return Err(Error::Parse {
                        line: *line,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("field `n` must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("field `trials` must be positive".into()));
        }
        if self.domain == Domain::Nsg && self.algorithm == Algorithm::EquatorBrmi {
            return Err(Error::Config(
                "field `algorithm`: equator-brmi needs a mixture best response, available for budget only".into(),
            ));
        }
        self.solve.validate(self.domain)
    }
}

fn field<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("field `{key}`: cannot parse `{value}`: {e}")))
}

fn default_sfw(domain: Domain) -> (usize, usize, f64) {
    match domain {
        Domain::Nsg => (100, 60, 0.1),
        Domain::Budget => (20, 10, 0.1),
    }
}

impl SolveParams {
    pub fn validate(&self, domain: Domain) -> Result<()> {
        self.sfw_config(domain, 0).validate()?;
        if !(self.eps > 0.0) {
            return Err(Error::Config("field `eps` must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config("field `delta` must lie in (0, 1)".into()));
        }
        if self.rho == 0 || self.path_cap == 0 || self.do_max_iter == 0 || self.samples == Some(0) {
            return Err(Error::Config("fields `rho`, `path_cap`, `do_max_iter`, `samples` must be positive".into()));
        }
        if !(self.do_tol > 0.0) {
            return Err(Error::Config("field `do_tol` must be positive".into()));
        }
        Ok(())
    }

    pub fn sfw_config(&self, domain: Domain, seed: u64) -> SfwConfig {
        let (k, c, u) = self.sfw.unwrap_or(default_sfw(domain));
        SfwConfig {
            start: self.start,
            ..SfwConfig::new(k, c, u, seed)
        }
    }
}

/// A game instance of either domain.
#[derive(Clone, Debug)]
pub enum Instance {
    Nsg(NetworkGame),
    Budget(RobustBudget),
}

impl Instance {
    pub fn domain(&self) -> Domain {
        match self {
            Instance::Nsg(_) => Domain::Nsg,
            Instance::Budget(_) => Domain::Budget,
        }
    }

    pub fn ground_size(&self) -> usize {
        match self {
            Instance::Nsg(g) => g.ground_size(),
            Instance::Budget(b) => b.instance.ground_size(),
        }
    }

    pub fn matroid(&self) -> Matroid {
        match self {
            Instance::Nsg(g) => g.matroid(),
            Instance::Budget(b) => b.instance.matroid(),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Instance::Nsg(g) => g.to_text(),
            Instance::Budget(b) => b.instance.to_text(&b.uncertainty),
        }
    }

    /// Parses either instance format, chosen by the header keyword.
    pub fn from_text(text: &str) -> Result<Self> {
        let first = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .find(|l| !l.is_empty())
            .unwrap_or("");
        match first.split_whitespace().next() {
            Some("nsg") => Ok(Instance::Nsg(NetworkGame::from_text(text)?)),
            Some("budget") => {
                let (inst, u) = BudgetInstance::from_text(text)?;
                Ok(Instance::Budget(RobustBudget::new(inst, u)?))
            }
            _ => Err(Error::Parse {
                line: 1,
                message: "expected an `nsg` or `budget` header".into(),
            }),
        }
    }

    pub fn generate(cfg: &ExperimentConfig, seed: u64) -> Result<Self> {
        match cfg.domain {
            Domain::Nsg => Ok(Instance::Nsg(generate_geometric(&cfg.geometric, seed)?)),
            Domain::Budget => {
                let (inst, u) = match cfg.budget_family {
                    BudgetFamily::Bipartite => generate_bipartite(&cfg.bipartite, seed)?,
                    BudgetFamily::Skewed => {
                        generate_skewed(cfg.n, cfg.bipartite.budget.unwrap_or(5 + cfg.n / 100), seed)?
                    }
                };
                Ok(Instance::Budget(RobustBudget::new(inst, u)?))
            }
        }
    }
}

/// Runs `algorithm` on `instance` and returns the defender's mixed strategy.
pub fn solve(
    instance: &Instance,
    algorithm: Algorithm,
    params: &SolveParams,
    seed: u64,
    deadline: Option<Instant>,
) -> Result<MixedStrategy> {
    params.validate(instance.domain())?;
    let matroid = instance.matroid();
    let mut sfw = params.sfw_config(instance.domain(), derive_seed(seed, 1));
    sfw.deadline = deadline;
    let do_cfg = DoubleOracleConfig {
        tol: params.do_tol,
        max_iter: params.do_max_iter,
        deadline,
    };
    let sample_seed = derive_seed(seed, 2);
    let equator = |adversary: &dyn crate::game::Adversary, family_size: f64| -> Result<MixedStrategy> {
        let res = sfw_run(&ProblemOracles::new(adversary, &matroid), &sfw)?;
        match params.samples {
            Some(r) => MixedStrategy::uniform(&equator_sample(&res, &matroid, r, sample_seed)?),
            None => equator_mixed(&res, &matroid, params.eps, params.delta, family_size, sample_seed),
        }
    };
    match (instance, algorithm) {
        (Instance::Nsg(g), Algorithm::Equator) => equator(g, g.family_size_surrogate(params.path_cap)),
        (Instance::Budget(b), Algorithm::Equator) => equator(b, b.family_size_surrogate()),
        (Instance::Budget(b), Algorithm::EquatorBrmi) => {
            let res = equator_brmi(
                b,
                &matroid,
                params.rho,
                &sfw,
                params.eps,
                params.delta,
                b.family_size_surrogate(),
                sample_seed,
            )?;
            Ok(res.strategy)
        }
        (Instance::Nsg(_), Algorithm::EquatorBrmi) => Err(Error::Config(
            "equator-brmi needs a mixture best response, available for budget only".into(),
        )),
        (Instance::Nsg(g), Algorithm::DoubleOracle) => Ok(nsg_double_oracle(g, params.path_cap, &do_cfg)?.0.defender),
        (Instance::Budget(b), Algorithm::DoubleOracle) => Ok(budget_double_oracle(b, &do_cfg)?.defender),
        (Instance::Nsg(g), Algorithm::Greedy) => Ok(MixedStrategy::pure(nsg_greedy(g)?)),
        (Instance::Budget(b), Algorithm::Greedy) => Ok(MixedStrategy::pure(budget_greedy(b))),
    }
}

/// Worst case of `strategy` over the adversary's strategy set.
pub fn evaluate(instance: &Instance, strategy: &MixedStrategy, path_cap: usize) -> Result<WorstCase> {
    strategy.validate(&instance.matroid())?;
    match instance {
        Instance::Nsg(g) => worst_case_nsg(g, &g.enumerate_paths(path_cap)?, strategy),
        Instance::Budget(b) => worst_case_budget(b, strategy),
    }
}

/// One line per support set: the weight, then the item indices.
pub fn strategy_to_text(strategy: &MixedStrategy) -> String {
    let mut s = String::new();
    for (w, set) in strategy.iter() {
        write!(s, "{w}").unwrap();
        for i in set.iter() {
            write!(s, " {i}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn strategy_from_text(text: &str) -> Result<MixedStrategy> {
    let mut support = Vec::new();
    let mut weights = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |message: String| Error::Parse { line: idx + 1, message };
        let mut fields = line.split_whitespace();
        let w: f64 = fields
            .next()
            .unwrap_or("")
            .parse()
            .map_err(|e| perr(format!("bad weight: {e}")))?;
        let items = fields
            .map(|f| f.parse::<usize>().map_err(|e| perr(format!("bad item `{f}`: {e}"))))
            .collect::<Result<ItemSet>>()?;
        weights.push(w);
        support.push(items);
    }
    MixedStrategy::new(support, weights)
}

pub const CSV_HEADER: &str = "domain,algorithm,n,trial,seed,value,runtime_ms,status";

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Ok,
    /// Worst case computed over a truncated adversary family.
    UpperBound,
    Timeout,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::UpperBound => "upper_bound",
            Status::Timeout => "timeout",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub value: Option<f64>,
    pub runtime_ms: f64,
    pub status: Status,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<TrialRow>,
}

impl ExperimentReport {
    pub fn all_timed_out(&self) -> bool {
        self.rows.iter().all(|r| r.status == Status::Timeout)
    }

    pub fn mean_value(&self) -> Option<f64> {
        mean_std(self.rows.iter().filter_map(|r| r.value)).map(|(m, _)| m)
    }

    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        writeln!(s, "{CSV_HEADER}").unwrap();
        for r in &self.rows {
            let value = r.value.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                c.domain, c.algorithm, c.n, r.trial, r.seed, value, r.runtime_ms, r.status
            )
            .unwrap();
        }
        let values = mean_std(self.rows.iter().filter_map(|r| r.value));
        let times = mean_std(self.rows.iter().map(|r| r.runtime_ms));
        let completed = self.rows.iter().filter(|r| r.value.is_some()).count();
        let status = if completed == self.rows.len() { "ok" } else { "partial" };
        for (label, pick) in [("mean", 0), ("std", 1)] {
            let v = values.map(|p| if pick == 0 { p.0 } else { p.1 });
            let t = times.map(|p| if pick == 0 { p.0 } else { p.1 }).unwrap_or(0.0);
            writeln!(
                s,
                "{},{},{},{label},{},{},{t},{status}",
                c.domain,
                c.algorithm,
                c.n,
                c.seed,
                v.map(|v| v.to_string()).unwrap_or_default()
            )
            .unwrap();
        }
        s
    }
}

/// Mean and sample standard deviation (0 for a single value).
fn mean_std(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    } else {
        0.0
    };
    Some((mean, var.sqrt()))
}

/// Runs every trial in order: instance seed `seed + trial`, algorithm seed
/// derived from it, timeout per trial.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let seed = cfg.seed.wrapping_add(trial as u64);
        let instance = Instance::generate(cfg, seed)?;
        let start = Instant::now();
        let outcome = solve(
            &instance,
            cfg.algorithm,
            &cfg.solve,
            derive_seed(seed, TAG_ALGORITHM),
            Some(start + cfg.timeout),
        );
        let elapsed = start.elapsed();
        let runtime_ms = if cfg.record_time {
            (elapsed.as_secs_f64() * 1e3).round()
        } else {
            0.0
        };
        let row = match outcome {
            Ok(strategy) => {
                let wc = evaluate(&instance, &strategy, cfg.solve.path_cap)?;
                TrialRow {
                    trial,
                    seed,
                    value: Some(wc.value),
                    runtime_ms,
                    status: if wc.exact { Status::Ok } else { Status::UpperBound },
                }
            }
            Err(Error::Timeout) => TrialRow {
                trial,
                seed,
                value: None,
                runtime_ms,
                status: Status::Timeout,
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_with_overrides() {
        let cfg = ExperimentConfig::parse(
            "# comment\ndomain = budget\nalgorithm = greedy\nn = 12\ntrials = 2\nK = 5\ngamma_frac = 0.25\n",
        )
        .unwrap();
        assert_eq!(cfg.domain, Domain::Budget);
        assert_eq!(cfg.solve.sfw, Some((5, 10, 0.1)));
        assert_eq!(cfg.bipartite.gamma_frac, 0.25);
        assert_eq!(cfg.trials, 2);
    }

    #[test]
    fn config_errors_name_the_field() {
        let err = ExperimentConfig::parse("domain = nsg\nalgorithm = greedy\n").unwrap_err();
        assert!(err.to_string().contains("`n`"));
        let err = ExperimentConfig::parse("domain = nsg\nalgorithm = greedy\nn = 10\neps = -1\n").unwrap_err();
        assert!(err.to_string().contains("`eps`"));
        let err = ExperimentConfig::parse("domain = nsg\nalgorithm = equator-brmi\nn = 10\n").unwrap_err();
        assert!(err.to_string().contains("`algorithm`"));
        assert!(ExperimentConfig::parse("domain = nsg\nalgorithm = greedy\nn = 10\nbogus = 1\n").is_err());
    }

    #[test]
    fn strategy_round_trip() {
        let s = MixedStrategy::new(vec![ItemSet::new([0, 3]), ItemSet::empty()], vec![0.25, 0.75]).unwrap();
        let text = strategy_to_text(&s);
        assert_eq!(text, "0.25 0 3\n0.75\n");
        assert_eq!(strategy_from_text(&text).unwrap(), s);
        assert!(matches!(strategy_from_text("0.5 1\nx\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn greedy_experiment_is_deterministic() {
        let mut cfg = ExperimentConfig::new(Domain::Budget, Algorithm::Greedy, 10);
        cfg.trials = 2;
        cfg.record_time = false;
        let a = run_experiment(&cfg).unwrap().to_csv();
        let b = run_experiment(&cfg).unwrap().to_csv();
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[3].starts_with("budget,greedy,10,mean,0,"));
    }
}
