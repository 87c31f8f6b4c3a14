//! Monotone submodular set functions and their multilinear extensions.
//!
//! Every objective implements [`SetFunction`]. Objectives with a known
//! closed form for the multilinear extension `F(x) = E_{S~x}[f(S)]` and its
//! gradient override [`SetFunction::extension`] and
//! [`SetFunction::extension_gradient`]; everything else is estimated by
//! sampling independent sets `S ~ x`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::items::ItemSet;

/// Default number of Monte-Carlo draws per extension evaluation.
pub const DEFAULT_MC_BUDGET: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtensionKind {
    ClosedForm,
    MonteCarlo,
}

/// A normalized monotone submodular function on `0..ground_size()`.
pub trait SetFunction: Send + Sync + fmt::Debug {
    fn ground_size(&self) -> usize;

    /// `f(S)`. Callers guarantee every item of `set` is in range.
    fn value(&self, set: &ItemSet) -> f64;

    /// Upper bound `M` on any single-item value `f({j})`.
    fn item_bound(&self) -> f64;

    fn extension_kind(&self) -> ExtensionKind {
        ExtensionKind::MonteCarlo
    }

    /// Closed-form `F(x)`, when available.
    fn extension(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Closed-form `∇F(x)`, when available.
    fn extension_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// Shared handle to an objective, as returned by best-response oracles.
pub type Handle = Arc<dyn SetFunction>;

pub fn eval_set(f: &dyn SetFunction, set: &ItemSet) -> Result<f64> {
    set.check_range(f.ground_size())?;
    Ok(f.value(set))
}

pub(crate) fn check_marginals(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(invalid(format!(
            "marginal vector has {} entries, expected {n}",
            x.len()
        )));
    }
    if let Some((j, v)) = x
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(invalid(format!("marginal x[{j}] = {v} outside [0, 1]")));
    }
    Ok(())
}

/// Draw `S` from the independent distribution with marginals `x`.
pub fn sample_independent<R: Rng + ?Sized>(x: &[f64], rng: &mut R) -> ItemSet {
    x.iter()
        .enumerate()
        .filter(|&(_, &p)| rng.gen::<f64>() < p)
        .map(|(j, _)| j)
        .collect()
}

fn mc_draws(f: &dyn SetFunction, mc_budget: Option<usize>) -> Result<usize> {
    match mc_budget {
        Some(0) => Err(Error::Config("mc_budget must be positive".into())),
        Some(m) => Ok(m),
        None => Err(Error::Config(format!(
            "objective {f:?} has no closed-form extension and no mc_budget was given"
        ))),
    }
}

/// `F(x)`: exact for closed-form objectives, else the mean of `f` over
/// `mc_budget` independent draws.
pub fn multilinear_value<R: Rng + ?Sized>(
    f: &dyn SetFunction,
    x: &[f64],
    mc_budget: Option<usize>,
    rng: &mut R,
) -> Result<f64> {
    check_marginals(x, f.ground_size())?;
    if f.extension_kind() == ExtensionKind::ClosedForm {
        if let Some(v) = f.extension(x) {
            return Ok(v);
        }
    }
    let draws = mc_draws(f, mc_budget)?;
    let total: f64 = (0..draws)
        .map(|_| f.value(&sample_independent(x, rng)))
        .sum();
    Ok(total / draws as f64)
}

/// `∇F(x)`. The sampled estimator reuses one draw `R ~ x` for both
/// `f(R ∪ {j})` and `f(R \ {j})`.
pub fn multilinear_gradient<R: Rng + ?Sized>(
    f: &dyn SetFunction,
    x: &[f64],
    mc_budget: Option<usize>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = f.ground_size();
    check_marginals(x, n)?;
    if f.extension_kind() == ExtensionKind::ClosedForm {
        if let Some(g) = f.extension_gradient(x) {
            return Ok(g);
        }
    }
    let draws = mc_draws(f, mc_budget)?;
    let mut grad = vec![0.0; n];
    for _ in 0..draws {
        let r = sample_independent(x, rng);
        let base = f.value(&r);
        for (j, g) in grad.iter_mut().enumerate() {
            let mut other = r.clone();
            *g += if other.remove(j) {
                base - f.value(&other)
            } else {
                other.insert(j);
                f.value(&other) - base
            };
        }
    }
    let scale = 1.0 / draws as f64;
    grad.iter_mut().for_each(|g| *g *= scale);
    Ok(grad)
}

/// `f(S) = Σ_{j∈S} w_j` with `w ≥ 0`.
#[derive(Clone, Debug)]
pub struct Modular {
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("modular function needs at least one item"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("modular weights must be finite and nonnegative"));
        }
        Ok(Modular { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl SetFunction for Modular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, set: &ItemSet) -> f64 {
        set.iter().map(|j| self.weights[j]).sum()
    }

    fn item_bound(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }

    fn extension_kind(&self) -> ExtensionKind {
        ExtensionKind::ClosedForm
    }

    fn extension(&self, x: &[f64]) -> Option<f64> {
        Some(x.iter().zip(&self.weights).map(|(a, b)| a * b).sum())
    }

    fn extension_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(self.weights.clone())
    }
}

/// Weighted probabilistic coverage: item `i` covers element `u` independently
/// with probability `p_iu`, and
/// `f(S) = Σ_u w_u (1 − Π_{i∈S} (1 − p_iu))`.
///
/// Deterministic coverage is the special case `p_iu ∈ {0, 1}`.
#[derive(Clone, Debug)]
pub struct Coverage {
    n_items: usize,
    weights: Vec<f64>,
    by_item: Vec<Vec<(usize, f64)>>,
    by_element: Vec<Vec<(usize, f64)>>,
}

impl Coverage {
    /// `cover[i]` lists `(element, probability)` pairs for item `i`.
    pub fn new(weights: Vec<f64>, cover: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if cover.is_empty() {
            return Err(invalid("coverage function needs at least one item"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("coverage weights must be finite and nonnegative"));
        }
        let mut by_element = vec![Vec::new(); weights.len()];
        for (i, list) in cover.iter().enumerate() {
            for &(u, p) in list {
                if u >= weights.len() {
                    return Err(invalid(format!("item {i} covers unknown element {u}")));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid(format!("coverage probability {p} outside [0, 1]")));
                }
                by_element[u].push((i, p));
            }
        }
        Ok(Coverage {
            n_items: cover.len(),
            weights,
            by_item: cover,
            by_element,
        })
    }

    /// Item `i` covers every element of `sets[i]` with certainty.
    pub fn deterministic(weights: Vec<f64>, sets: Vec<Vec<usize>>) -> Result<Self> {
        let cover = sets
            .into_iter()
            .map(|s| s.into_iter().map(|u| (u, 1.0)).collect())
            .collect();
        Coverage::new(weights, cover)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// For factors `a_0..a_m`, returns `Π_{t≠s} a_t` for every `s` without division.
pub(crate) fn leave_one_out_products(factors: &[f64]) -> Vec<f64> {
    let m = factors.len();
    let mut out = vec![1.0; m];
    let mut acc = 1.0;
    for t in 0..m {
        out[t] = acc;
        acc *= factors[t];
    }
    acc = 1.0;
    for t in (0..m).rev() {
        out[t] *= acc;
        acc *= factors[t];
    }
    out
}

impl SetFunction for Coverage {
    fn ground_size(&self) -> usize {
        self.n_items
    }

    fn value(&self, set: &ItemSet) -> f64 {
        let mut miss = vec![1.0; self.weights.len()];
        for i in set.iter() {
            for &(u, p) in &self.by_item[i] {
                miss[u] *= 1.0 - p;
            }
        }
        self.weights
            .iter()
            .zip(&miss)
            .map(|(w, m)| w * (1.0 - m))
            .sum()
    }

    fn item_bound(&self) -> f64 {
        self.by_item
            .iter()
            .map(|list| list.iter().map(|&(u, p)| self.weights[u] * p).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn extension_kind(&self) -> ExtensionKind {
        ExtensionKind::ClosedForm
    }

    fn extension(&self, x: &[f64]) -> Option<f64> {
        Some(
            self.by_element
                .iter()
                .zip(&self.weights)
                .map(|(list, w)| {
                    let miss: f64 = list.iter().map(|&(i, p)| 1.0 - x[i] * p).product();
                    w * (1.0 - miss)
                })
                .sum(),
        )
    }

    fn extension_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut grad = vec![0.0; self.n_items];
        for (list, &w) in self.by_element.iter().zip(&self.weights) {
            if w == 0.0 || list.is_empty() {
                continue;
            }
            let factors: Vec<f64> = list.iter().map(|&(i, p)| 1.0 - x[i] * p).collect();
            let others = leave_one_out_products(&factors);
            for (&(i, p), rest) in list.iter().zip(others) {
                grad[i] += w * p * rest;
            }
        }
        Some(grad)
    }
}

/// Hides the closed form of the wrapped objective so that extensions are
/// always estimated by sampling.
#[derive(Clone, Debug)]
pub struct SampledOnly(pub Handle);

impl SetFunction for SampledOnly {
    fn ground_size(&self) -> usize {
        self.0.ground_size()
    }

    fn value(&self, set: &ItemSet) -> f64 {
        self.0.value(set)
    }

    fn item_bound(&self) -> f64 {
        self.0.item_bound()
    }
}

/// An objective given as a closure; extensions are sampled.
pub struct FnSetFunction<F> {
    n: usize,
    bound: f64,
    f: F,
}

impl<F> FnSetFunction<F>
where
    F: Fn(&ItemSet) -> f64 + Send + Sync,
{
    pub fn new(n: usize, item_bound: f64, f: F) -> Self {
        FnSetFunction {
            n,
            bound: item_bound,
            f,
        }
    }
}

impl<F> fmt::Debug for FnSetFunction<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnSetFunction").field("n", &self.n).finish()
    }
}

impl<F> SetFunction for FnSetFunction<F>
where
    F: Fn(&ItemSet) -> f64 + Send + Sync,
{
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &ItemSet) -> f64 {
        (self.f)(set)
    }

    fn item_bound(&self) -> f64 {
        self.bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn unit_coverage() -> Coverage {
        // A1 = {1,2}, A2 = {2,3}, A3 = {4}; elements 0..5, element 0 unused.
        Coverage::deterministic(
            vec![1.0; 5],
            vec![vec![1, 2], vec![2, 3], vec![4]],
        )
        .unwrap()
    }

    #[test]
    fn coverage_value_counts_union() {
        let f = unit_coverage();
        assert_eq!(eval_set(&f, &ItemSet::new([0, 1])).unwrap(), 3.0);
        assert_eq!(eval_set(&f, &ItemSet::empty()).unwrap(), 0.0);
        assert!(eval_set(&f, &ItemSet::new([3])).is_err());
    }

    #[test]
    fn modular_gradient_is_weights() {
        let f = Modular::new(vec![1.0, 2.5, 0.0]).unwrap();
        let mut rng = stream(0, 0);
        let g = multilinear_gradient(&f, &[0.3, 0.9, 0.1], None, &mut rng).unwrap();
        assert_eq!(g, vec![1.0, 2.5, 0.0]);
    }

    #[test]
    fn budget_style_gradient_example() {
        // One customer, two copies of a channel reaching it with p = 0.2.
        let f = Coverage::new(vec![1.0], vec![vec![(0, 0.2)], vec![(0, 0.2)]]).unwrap();
        let g = f.extension_gradient(&[0.5, 0.0]).unwrap();
        assert!((g[0] - 0.2).abs() < 1e-15);
        assert!((g[1] - 0.18).abs() < 1e-15);
    }

    #[test]
    fn sampled_handle_requires_budget() {
        let f = SampledOnly(Arc::new(unit_coverage()));
        let mut rng = stream(1, 0);
        let err = multilinear_value(&f, &[0.5; 3], None, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(multilinear_value(&f, &[0.5; 3], Some(0), &mut rng).is_err());
    }

    #[test]
    fn rejects_marginals_out_of_range() {
        let f = Modular::new(vec![1.0, 1.0]).unwrap();
        let mut rng = stream(0, 0);
        assert!(multilinear_value(&f, &[0.5, 1.2], None, &mut rng).is_err());
        assert!(multilinear_value(&f, &[0.5], None, &mut rng).is_err());
    }

    #[test]
    fn leave_one_out_handles_zero_factor() {
        let p = leave_one_out_products(&[2.0, 0.0, 3.0]);
        assert_eq!(p, vec![0.0, 6.0, 0.0]);
    }

    #[test]
    fn closure_objective_is_sampled() {
        let f = FnSetFunction::new(3, 1.0, |s: &ItemSet| s.len().min(1) as f64);
        assert_eq!(f.extension_kind(), ExtensionKind::MonteCarlo);
        let mut rng = stream(3, 0);
        let v = multilinear_value(&f, &[1.0, 0.0, 0.0], Some(10), &mut rng).unwrap();
        assert_eq!(v, 1.0);
    }
}
