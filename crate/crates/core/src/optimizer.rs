//! Stochastic Frank-Wolfe over a matroid polytope for the nonsmooth
//! objective `G(x) = min_i F_i(x)`.
//!
//! The objective is smoothed by averaging over uniform perturbations in an
//! ℓ∞ ball of radius `u`. Each iteration estimates `∇G_μ` from `c` perturbed
//! best responses, moves `1/K` toward the linear maximizer over the
//! polytope, and only ever adds nonnegative vertices. Oracle queries are
//! clamped to `[0, 1]`. See [`StartPoint`] for where the iterates begin.

use std::time::Instant;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::function::{multilinear_gradient, multilinear_value, Handle};
use crate::game::Adversary;
use crate::items::ItemSet;
use crate::matroid::{ConvexDecomposition, Matroid};
use crate::rng::{derive_seed, stream, Stream};

const TAG_ITERATION: u64 = 0x5f77_0001;
const TAG_TRACE: u64 = 0x5f77_0002;

/// Where the Frank-Wolfe iterates begin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartPoint {
    /// `x⁰ = u·1`, with `u·1` subtracted from `x^K` at the end. Perturbed
    /// points are never negative, which the approximation proof relies on.
    /// At `u = 0.1` on a large ground set the shift dominates the budget and
    /// steers the early iterations badly.
    Shifted,
    /// `x⁰ = 0`; perturbations below zero are clamped and `x_final = x^K`.
    Origin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SfwConfig {
    /// Number of Frank-Wolfe steps `K`.
    pub iterations: usize,
    /// Gradient samples per step `c`.
    pub samples: usize,
    /// Smoothing radius `u`.
    pub radius: f64,
    pub seed: u64,
    /// Record a `G` estimate at every iterate.
    pub record_trace: bool,
    /// Draws per extension evaluation for objectives without a closed form.
    pub mc_budget: Option<usize>,
    /// Checked between iterations.
    pub deadline: Option<Instant>,
    pub start: StartPoint,
}

impl SfwConfig {
    pub fn new(iterations: usize, samples: usize, radius: f64, seed: u64) -> Self {
        SfwConfig {
            iterations,
            samples,
            radius,
            seed,
            record_trace: false,
            mc_budget: Some(crate::function::DEFAULT_MC_BUDGET),
            deadline: None,
            start: StartPoint::Shifted,
        }
    }

    /// The practical settings: `u` is a smoothing radius only, so the
    /// iterates start at the origin.
    pub fn practical(iterations: usize, samples: usize, radius: f64, seed: u64) -> Self {
        SfwConfig {
            start: StartPoint::Origin,
            ..SfwConfig::new(iterations, samples, radius, seed)
        }
    }

    /// K = 100, c = 60, u = 0.1, starting at the origin.
    pub fn network_defaults(seed: u64) -> Self {
        SfwConfig::practical(100, 60, 0.1, seed)
    }

    /// K = 20, c = 10, u = 0.1, starting at the origin.
    pub fn budget_defaults(seed: u64) -> Self {
        SfwConfig::practical(20, 10, 0.1, seed)
    }

    /// Parameters under which the `(1 − 1/e)·OPT − ε` guarantee holds with
    /// probability `1 − δ`: `u = ε/(4Mn)`, `K = 8M²k²n/ε²`,
    /// `c = 128M²k²/ε² · ln(4Kn/δ)`. These are very large at any
    /// interesting size.
    pub fn theory_scale(
        eps: f64,
        delta: f64,
        item_bound: f64,
        rank: usize,
        n: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(eps > 0.0 && delta > 0.0 && delta < 1.0 && item_bound > 0.0) {
            return Err(Error::Config("theory_scale needs eps > 0, delta in (0,1), M > 0".into()));
        }
        let (m, k, n_f) = (item_bound, rank as f64, n as f64);
        let radius = eps / (4.0 * m * n_f);
        let iterations = (8.0 * m * m * k * k * n_f / (eps * eps)).ceil();
        let samples =
            (128.0 * m * m * k * k / (eps * eps) * (4.0 * iterations * n_f / delta).ln()).ceil();
        if iterations > usize::MAX as f64 || samples > usize::MAX as f64 {
            return Err(Error::SizeLimit("theory-scale parameters overflow".into()));
        }
        Ok(SfwConfig::new(iterations as usize, samples as usize, radius, seed))
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations (K) must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples (c) must be at least 1".into()));
        }
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(Error::Config(format!(
                "smoothing radius u = {} must lie in (0, 1)",
                self.radius
            )));
        }
        Ok(())
    }
}

/// The oracles one Frank-Wolfe run needs: a best response to independent
/// distributions, the gradient of whatever it returns, and linear
/// optimization over the matroid.
#[derive(Clone, Copy)]
pub struct ProblemOracles<'a> {
    pub adversary: &'a dyn Adversary,
    pub matroid: &'a Matroid,
    pub mc_budget: Option<usize>,
}

impl<'a> ProblemOracles<'a> {
    pub fn new(adversary: &'a dyn Adversary, matroid: &'a Matroid) -> Self {
        ProblemOracles {
            adversary,
            matroid,
            mc_budget: Some(crate::function::DEFAULT_MC_BUDGET),
        }
    }

    fn gradient_at(&self, y: &[f64], rng: &mut Stream) -> Result<Vec<f64>> {
        let f = self.adversary.best_response(y)?;
        multilinear_gradient(f.as_ref(), y, self.mc_budget, rng)
    }

    fn value_at(&self, y: &[f64], rng: &mut Stream) -> Result<f64> {
        let f: Handle = self.adversary.best_response(y)?;
        multilinear_value(f.as_ref(), y, self.mc_budget, rng)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub vertex: ItemSet,
    pub gradient_norm: f64,
    /// `G` at the iterate after this step (clamped to the unit cube).
    pub value: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SfwResult {
    /// `x^K` less the starting point, computed exactly as `(1/K) Σ_ℓ 1_{v^ℓ}`.
    pub x_final: Vec<f64>,
    /// The `K` vertices with weight `1/K` each.
    pub decomposition: ConvexDecomposition,
    /// `x^K` itself; differs from `x_final` by `u·1` for a shifted start.
    pub last_iterate: Vec<f64>,
    pub trace: Vec<TraceEntry>,
}

fn perturbed_point(x: &[f64], radius: f64, rng: &mut Stream) -> Vec<f64> {
    x.iter()
        .map(|&xj| (xj + rng.gen_range(-radius..=radius)).clamp(0.0, 1.0))
        .collect()
}

/// Mean of `samples` gradient evaluations at independently perturbed,
/// clamped copies of `x`. Sample `t` uses stream `t` of `seed`, and the sum
/// is taken in sample order, so the result does not depend on threading.
pub(crate) fn averaged_gradient<G>(
    x: &[f64],
    radius: f64,
    samples: usize,
    seed: u64,
    grad: &G,
) -> Result<Vec<f64>>
where
    G: Fn(&[f64], &mut Stream) -> Result<Vec<f64>> + Sync,
{
    let one = |t: usize| -> Result<Vec<f64>> {
        let mut rng = stream(seed, t as u64);
        let y = perturbed_point(x, radius, &mut rng);
        grad(&y, &mut rng)
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Result<Vec<f64>>> = {
        use rayon::prelude::*;
        (0..samples).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<Vec<f64>>> = (0..samples).map(one).collect();

    let mut sum = vec![0.0; x.len()];
    for part in parts {
        for (s, g) in sum.iter_mut().zip(part?) {
            *s += g;
        }
    }
    let scale = 1.0 / samples as f64;
    sum.iter_mut().for_each(|s| *s *= scale);
    Ok(sum)
}

/// Unbiased estimate of the smoothed gradient `∇G_μ(x)` from `samples`
/// perturbed best responses.
pub fn smoothed_gradient(
    oracles: &ProblemOracles<'_>,
    x: &[f64],
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if x.len() != oracles.adversary.ground_size() {
        return Err(invalid("point dimension does not match the ground set"));
    }
    if samples == 0 || !(radius >= 0.0) {
        return Err(Error::Config("need samples >= 1 and radius >= 0".into()));
    }
    averaged_gradient(x, radius, samples, seed, &|y, rng| oracles.gradient_at(y, rng))
}

pub(crate) struct FrankWolfeRun {
    pub vertices: Vec<ItemSet>,
    pub counts: Vec<usize>,
    pub last_iterate: Vec<f64>,
    pub trace: Vec<TraceEntry>,
}

/// The generic loop shared by the single-point and product-polytope solvers.
pub(crate) fn frank_wolfe<G, L, V>(
    dim: usize,
    cfg: &SfwConfig,
    grad: G,
    linear_opt: L,
    value: V,
) -> Result<FrankWolfeRun>
where
    G: Fn(&[f64], &mut Stream) -> Result<Vec<f64>> + Sync,
    L: Fn(&[f64]) -> ItemSet,
    V: Fn(&[f64], &mut Stream) -> Result<f64>,
{
    cfg.validate()?;
    let k = cfg.iterations;
    let step = 1.0 / k as f64;
    let x0 = match cfg.start {
        StartPoint::Shifted => cfg.radius,
        StartPoint::Origin => 0.0,
    };
    let mut x = vec![x0; dim];
    let mut counts = vec![0usize; dim];
    let mut vertices = Vec::with_capacity(k);
    let mut trace = Vec::new();
    for ell in 0..k {
        if let Some(deadline) = cfg.deadline {
            if Instant::now() >= deadline {
                return Err(Error::Timeout);
            }
        }
        let seed = derive_seed(cfg.seed, TAG_ITERATION ^ ((ell as u64) << 20));
        let g = averaged_gradient(&x, cfg.radius, cfg.samples, seed, &grad)?;
        let v = linear_opt(&g);
        for j in v.iter() {
            x[j] += step;
            counts[j] += 1;
        }
        if cfg.record_trace {
            let mut rng = stream(derive_seed(cfg.seed, TAG_TRACE), ell as u64);
            let clamped: Vec<f64> = x.iter().map(|&v| v.min(1.0)).collect();
            trace.push(TraceEntry {
                iteration: ell + 1,
                vertex: v.clone(),
                gradient_norm: g.iter().map(|a| a * a).sum::<f64>().sqrt(),
                value: Some(value(&clamped, &mut rng)?),
            });
        }
        vertices.push(v);
    }
    Ok(FrankWolfeRun {
        vertices,
        counts,
        last_iterate: x,
        trace,
    })
}

/// Run stochastic Frank-Wolfe on `max_{x∈P} G(x)`.
pub fn sfw_run(oracles: &ProblemOracles<'_>, cfg: &SfwConfig) -> Result<SfwResult> {
    let n = oracles.matroid.ground_size();
    if n != oracles.adversary.ground_size() {
        return Err(invalid("adversary and matroid disagree on the ground set"));
    }
    let run = frank_wolfe(
        n,
        cfg,
        |y: &[f64], rng: &mut Stream| oracles.gradient_at(y, rng),
        |g: &[f64]| oracles.matroid.linear_opt(g),
        |y: &[f64], rng: &mut Stream| oracles.value_at(y, rng),
    )?;
    let k = cfg.iterations as f64;
    let x_final = run.counts.iter().map(|&c| c as f64 / k).collect();
    Ok(SfwResult {
        x_final,
        decomposition: ConvexDecomposition::uniform(run.vertices)?,
        last_iterate: run.last_iterate,
        trace: run.trace,
    })
}

/// `G(min(x, 1))` for a nonnegative, possibly over-unit point.
pub fn clamped_min_value<R: Rng + ?Sized>(
    oracles: &ProblemOracles<'_>,
    x: &[f64],
    rng: &mut R,
) -> Result<f64> {
    if let Some((j, v)) = x.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(invalid(format!("x[{j}] = {v} is negative")));
    }
    let clamped: Vec<f64> = x.iter().map(|&v| v.min(1.0)).collect();
    let f = oracles.adversary.best_response(&clamped)?;
    multilinear_value(f.as_ref(), &clamped, oracles.mc_budget, rng)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::function::Modular;
    use crate::game::EnumeratedFamily;

    fn single(weights: Vec<f64>) -> EnumeratedFamily {
        EnumeratedFamily::new(vec![Arc::new(Modular::new(weights).unwrap())]).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SfwConfig::new(0, 1, 0.1, 0).validate().is_err());
        assert!(SfwConfig::new(1, 0, 0.1, 0).validate().is_err());
        assert!(SfwConfig::new(1, 1, 1.0, 0).validate().is_err());
        assert!(SfwConfig::new(1, 1, 0.0, 0).validate().is_err());
        assert!(SfwConfig::network_defaults(0).validate().is_ok());
    }

    #[test]
    fn theory_scale_constants() {
        let cfg = SfwConfig::theory_scale(0.5, 0.1, 1.0, 1, 2, 0).unwrap();
        assert!((cfg.radius - 0.0625).abs() < 1e-15);
        assert_eq!(cfg.iterations, 64);
        let expected_c = (128.0 / 0.25 * (4.0 * 64.0 * 2.0 / 0.1f64).ln()).ceil() as usize;
        assert_eq!(cfg.samples, expected_c);
    }

    #[test]
    fn modular_gradient_is_exact() {
        let fam = single(vec![0.3, 1.2, 0.0]);
        let m = Matroid::uniform(3, 1).unwrap();
        let oracles = ProblemOracles::new(&fam, &m);
        let g = smoothed_gradient(&oracles, &[0.2, 0.5, 0.9], 0.1, 7, 3).unwrap();
        for (a, b) in g.iter().zip([0.3, 1.2, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn single_item_objective_reaches_optimum() {
        let fam = single(vec![1.0, 0.0]);
        let m = Matroid::uniform(2, 1).unwrap();
        let oracles = ProblemOracles::new(&fam, &m);
        for cfg in [SfwConfig::new(10, 3, 0.05, 1), SfwConfig::practical(10, 3, 0.05, 1)] {
            let res = sfw_run(&oracles, &cfg).unwrap();
            assert_eq!(res.x_final, vec![1.0, 0.0]);
            assert_eq!(fam.min_value(&res.x_final).unwrap(), 1.0);
        }
    }

    #[test]
    fn origin_start_has_no_shift() {
        let fam = single(vec![1.0, 2.0, 0.5]);
        let m = Matroid::uniform(3, 2).unwrap();
        let oracles = ProblemOracles::new(&fam, &m);
        let res = sfw_run(&oracles, &SfwConfig::practical(8, 2, 0.1, 4)).unwrap();
        assert_eq!(res.last_iterate, res.x_final);
        assert_eq!(res.x_final, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn clamped_value_examples() {
        let fam = single(vec![2.0, 1.0]);
        let m = Matroid::uniform(2, 1).unwrap();
        let oracles = ProblemOracles::new(&fam, &m);
        let mut rng = stream(0, 0);
        let a = clamped_min_value(&oracles, &[1.05, 0.2], &mut rng).unwrap();
        assert!((a - 2.2).abs() < 1e-12);
        assert_eq!(clamped_min_value(&oracles, &[0.0, 0.0], &mut rng).unwrap(), 0.0);
        assert!(clamped_min_value(&oracles, &[-0.1, 0.0], &mut rng).is_err());
    }

    #[test]
    fn deadline_in_the_past_times_out() {
        let fam = single(vec![1.0]);
        let m = Matroid::uniform(1, 1).unwrap();
        let oracles = ProblemOracles::new(&fam, &m);
        let mut cfg = SfwConfig::new(5, 1, 0.1, 0);
        cfg.deadline = Some(Instant::now());
        assert!(matches!(sfw_run(&oracles, &cfg), Err(Error::Timeout)));
    }
}
