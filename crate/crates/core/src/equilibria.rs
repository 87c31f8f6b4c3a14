//! From a fractional solution to strategies: swap-rounded samples, explicit
//! mixed strategies, the bicriteria single-set builder, and the mixture
//! variant driven by a best response to mixtures of independent
//! distributions.

use std::collections::HashMap;

use crate::error::{invalid, Error, Result};
use crate::function::{multilinear_gradient, multilinear_value, SetFunction};
use crate::game::MixtureAdversary;
use crate::items::ItemSet;
use crate::matroid::{ConvexDecomposition, Matroid};
use crate::optimizer::{frank_wolfe, SfwConfig, SfwResult};
use crate::rng::{derive_seed, stream, Stream};

/// Largest sample count any of the size formulas may produce.
pub const MAX_SAMPLES: usize = 10_000_000;

const TAG_SAMPLE: u64 = 0xe9_0001;
const TAG_BICRITERIA: u64 = 0xe9_0002;
const TAG_MIXTURE: u64 = 0xe9_0003;

/// A finite distribution over independent sets.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedStrategy {
    support: Vec<ItemSet>,
    weights: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(support: Vec<ItemSet>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return Err(invalid("mixed strategy needs matching nonempty support and weights"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(invalid("mixed strategy weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("mixed strategy weights sum to {total}")));
        }
        Ok(MixedStrategy { support, weights })
    }

    pub fn pure(set: ItemSet) -> Self {
        MixedStrategy {
            support: vec![set],
            weights: vec![1.0],
        }
    }

    /// Uniform distribution over `samples`, with repeated sets merged in
    /// order of first appearance.
    pub fn uniform(samples: &[ItemSet]) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("no samples"));
        }
        let w = 1.0 / samples.len() as f64;
        let mut index: HashMap<&ItemSet, usize> = HashMap::new();
        let mut support = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for s in samples {
            match index.get(s) {
                Some(&i) => weights[i] += w,
                None => {
                    index.insert(s, support.len());
                    support.push(s.clone());
                    weights.push(w);
                }
            }
        }
        Ok(MixedStrategy { support, weights })
    }

    pub fn support(&self) -> &[ItemSet] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &ItemSet)> {
        self.weights.iter().copied().zip(self.support.iter())
    }

    /// `E_{S~p}[f(S)]`.
    pub fn expected_value(&self, f: &dyn SetFunction) -> f64 {
        self.iter().map(|(w, s)| w * f.value(s)).sum()
    }

    /// Marginal probability of each item.
    pub fn marginals(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (w, s) in self.iter() {
            for j in s.iter().filter(|&j| j < n) {
                x[j] += w;
            }
        }
        x
    }

    pub fn validate(&self, m: &Matroid) -> Result<()> {
        match self.support.iter().find(|s| !m.is_independent(s)) {
            Some(s) => Err(invalid(format!("support set {s:?} is not independent"))),
            None => Ok(()),
        }
    }
}

/// `ρ` fractional points, each with its own decomposition into independent sets.
#[derive(Clone, Debug)]
pub struct MixtureOfMarginals {
    pub points: Vec<Vec<f64>>,
    pub decompositions: Vec<ConvexDecomposition>,
}

/// Multiplicative constants in the sample-size formulas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SizeConstants {
    /// Constant in front of `1/ε³` in sample counts.
    pub samples: f64,
    /// Constant in front of `W² ln|F| / ε²` in the mixture size.
    pub mixture: f64,
}

impl Default for SizeConstants {
    fn default() -> Self {
        SizeConstants {
            samples: 8.0,
            mixture: 1.0,
        }
    }
}

fn check_accuracy(eps: f64, delta: f64, family_size: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("eps = {eps} must be positive")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("delta = {delta} must lie in (0, 1)")));
    }
    if !(family_size >= 1.0) {
        return Err(Error::Config(format!("family size {family_size} must be >= 1")));
    }
    Ok(())
}

fn bounded_count(raw: f64) -> Result<usize> {
    if !(raw <= MAX_SAMPLES as f64) {
        return Err(Error::SizeLimit(format!(
            "sample count {raw} exceeds the cap of {MAX_SAMPLES}"
        )));
    }
    Ok((raw.ceil() as usize).max(1))
}

/// `r = ⌈(C/ε³)(ln|F| + ln(1/δ))⌉`.
pub fn mixed_sample_count(eps: f64, delta: f64, family_size: f64, c: &SizeConstants) -> Result<usize> {
    check_accuracy(eps, delta, family_size)?;
    bounded_count(c.samples / eps.powi(3) * (family_size.ln() + (1.0 / delta).ln()))
}

/// `(outer iterations, draws per batch) = (⌈e·ln(1/δ)⌉, ⌈C·ln|F|/ε³⌉ + 1)`.
pub fn bicriteria_counts(
    eps: f64,
    delta: f64,
    family_size: f64,
    c: &SizeConstants,
) -> Result<(usize, usize)> {
    check_accuracy(eps, delta, family_size)?;
    let outer = bounded_count(std::f64::consts::E * (1.0 / delta).ln())?;
    let draws = (c.samples * family_size.ln() / eps.powi(3)).ceil();
    if !(draws < MAX_SAMPLES as f64) {
        return Err(Error::SizeLimit(format!("batch size {draws} exceeds the cap")));
    }
    Ok((outer, draws as usize + 1))
}

/// `ρ = ⌈C·W²·ln|F| / ε²⌉`, at least one.
pub fn mixture_size(value_bound: f64, family_size: f64, eps: f64, c: &SizeConstants) -> Result<usize> {
    check_accuracy(eps, 0.5, family_size)?;
    bounded_count(c.mixture * value_bound * value_bound * family_size.ln() / (eps * eps))
}

/// `r = ⌈(C/ε³) ln(|F|·ρ/δ)⌉` draws per mixture point.
pub fn mixture_sample_count(
    eps: f64,
    delta: f64,
    family_size: f64,
    rho: usize,
    c: &SizeConstants,
) -> Result<usize> {
    check_accuracy(eps, delta, family_size)?;
    bounded_count(c.samples / eps.powi(3) * (family_size * rho as f64 / delta).ln())
}

fn draw_samples(
    decomposition: &ConvexDecomposition,
    m: &Matroid,
    count: usize,
    seed: u64,
) -> Result<Vec<ItemSet>> {
    decomposition.validate(m)?;
    let one = |i: usize| m.swap_round(decomposition, &mut stream(seed, i as u64));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(one).collect()
    }
}

/// `r` independent swap-rounding draws from the solver's output.
pub fn equator_sample(res: &SfwResult, m: &Matroid, r: usize, seed: u64) -> Result<Vec<ItemSet>> {
    draw_samples(&res.decomposition, m, r, derive_seed(seed, TAG_SAMPLE))
}

/// Uniform distribution over `r = ⌈(8/ε³)(ln|F| + ln(1/δ))⌉` swap-rounded
/// samples. `family_size` may be a surrogate upper bound on `|F|`.
pub fn equator_mixed(
    res: &SfwResult,
    m: &Matroid,
    eps: f64,
    delta: f64,
    family_size: f64,
    seed: u64,
) -> Result<MixedStrategy> {
    let r = mixed_sample_count(eps, delta, family_size, &SizeConstants::default())?;
    MixedStrategy::uniform(&equator_sample(res, m, r, seed)?)
}

#[derive(Clone, Debug)]
pub struct BicriteriaResult {
    pub set: ItemSet,
    pub value: f64,
    pub outer_iterations: usize,
    pub draws_per_batch: usize,
}

/// Deterministic robust optimization with a bicriteria guarantee: in each of
/// `⌈e·ln(1/δ)⌉` rounds, union `⌈8 ln|F|/ε³⌉ + 1` swap-rounded draws, and
/// keep the union with the best worst-case value under `evaluator`.
pub fn bicriteria<E>(
    res: &SfwResult,
    m: &Matroid,
    evaluator: E,
    eps: f64,
    delta: f64,
    family_size: f64,
    seed: u64,
) -> Result<BicriteriaResult>
where
    E: Fn(&ItemSet) -> f64,
{
    let (outer, draws) = bicriteria_counts(eps, delta, family_size, &SizeConstants::default())?;
    let base = derive_seed(seed, TAG_BICRITERIA);
    let mut best: Option<(ItemSet, f64)> = None;
    for round in 0..outer {
        let batch = draw_samples(&res.decomposition, m, draws, derive_seed(base, round as u64))?;
        let union = batch.iter().fold(ItemSet::empty(), |acc, s| acc.union(s));
        let value = evaluator(&union);
        debug_assert!(
            batch.iter().all(|s| evaluator(s) <= value + 1e-9),
            "worst-case value must be monotone under unions"
        );
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((union, value));
        }
    }
    let (set, value) = best.expect("at least one round");
    Ok(BicriteriaResult {
        set,
        value,
        outer_iterations: outer,
        draws_per_batch: draws,
    })
}

#[derive(Clone, Debug)]
pub struct BrmiResult {
    pub strategy: MixedStrategy,
    pub mixture: MixtureOfMarginals,
    pub samples_per_point: usize,
}

/// Frank-Wolfe over the product of `ρ` copies of the matroid polytope,
/// maximizing `min_i (1/ρ) Σ_j F_i(x^j)` with a mixture best response, then
/// `r = ⌈(8/ε³) ln(|F|ρ/δ)⌉` swap-rounded draws from every `x^j`.
#[allow(clippy::too_many_arguments)]
pub fn equator_brmi(
    brmi: &dyn MixtureAdversary,
    m: &Matroid,
    rho: usize,
    cfg: &SfwConfig,
    eps: f64,
    delta: f64,
    family_size: f64,
    seed: u64,
) -> Result<BrmiResult> {
    if rho == 0 {
        return Err(Error::Config("rho must be at least 1".into()));
    }
    let n = m.ground_size();
    if brmi.ground_size() != n {
        return Err(invalid("adversary and matroid disagree on the ground set"));
    }
    let r = mixture_sample_count(eps, delta, family_size, rho, &SizeConstants::default())?;
    let mc = cfg.mc_budget;
    let split = |y: &[f64]| -> Vec<Vec<f64>> { y.chunks(n).map(|c| c.to_vec()).collect() };
    let grad = |y: &[f64], rng: &mut Stream| -> Result<Vec<f64>> {
        let points = split(y);
        let f = brmi.best_response_mixture(&points)?;
        let mut out = Vec::with_capacity(y.len());
        for p in &points {
            let g = multilinear_gradient(f.as_ref(), p, mc, rng)?;
            out.extend(g.into_iter().map(|v| v / rho as f64));
        }
        Ok(out)
    };
    let linear_opt = |g: &[f64]| -> ItemSet {
        g.chunks(n)
            .enumerate()
            .flat_map(|(j, block)| {
                m.linear_opt(block)
                    .iter()
                    .map(move |i| j * n + i)
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let value = |y: &[f64], rng: &mut Stream| -> Result<f64> {
        let points = split(y);
        let f = brmi.best_response_mixture(&points)?;
        let mut total = 0.0;
        for p in &points {
            total += multilinear_value(f.as_ref(), p, mc, rng)?;
        }
        Ok(total / rho as f64)
    };
    let run = frank_wolfe(rho * n, cfg, grad, linear_opt, value)?;

    let k = cfg.iterations as f64;
    let mut points = Vec::with_capacity(rho);
    let mut decompositions = Vec::with_capacity(rho);
    for j in 0..rho {
        points.push(
            run.counts[j * n..(j + 1) * n]
                .iter()
                .map(|&c| c as f64 / k)
                .collect(),
        );
        let sets = run
            .vertices
            .iter()
            .map(|v| v.iter().filter(|&i| i / n == j).map(|i| i - j * n).collect())
            .collect();
        decompositions.push(ConvexDecomposition::uniform(sets)?);
    }

    let base = derive_seed(seed, TAG_MIXTURE);
    let mut samples = Vec::with_capacity(rho * r);
    for (j, d) in decompositions.iter().enumerate() {
        samples.extend(draw_samples(d, m, r, derive_seed(base, j as u64))?);
    }
    Ok(BrmiResult {
        strategy: MixedStrategy::uniform(&samples)?,
        mixture: MixtureOfMarginals {
            points,
            decompositions,
        },
        samples_per_point: r,
    })
}
