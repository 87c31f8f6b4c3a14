//! Adversary oracles for the minimizing player.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::function::{check_marginals, ExtensionKind, Handle, SetFunction};

/// Best response to an independent distribution: returns
/// `argmin_i F_i(x)` for marginals `x ∈ [0,1]^n`.
pub trait Adversary: Send + Sync {
    fn ground_size(&self) -> usize;

    fn best_response(&self, x: &[f64]) -> Result<Handle>;
}

/// Best response to a uniform mixture of independent distributions:
/// `argmin_i (1/ρ) Σ_j F_i(x^j)`.
pub trait MixtureAdversary: Send + Sync {
    fn ground_size(&self) -> usize;

    fn best_response_mixture(&self, points: &[Vec<f64>]) -> Result<Handle>;
}

/// An explicitly listed family of objectives with closed-form extensions.
/// Ties go to the lowest index.
#[derive(Clone, Debug)]
pub struct EnumeratedFamily {
    functions: Vec<Handle>,
}

impl EnumeratedFamily {
    pub fn new(functions: Vec<Handle>) -> Result<Self> {
        let Some(first) = functions.first() else {
            return Err(invalid("objective family is empty"));
        };
        let n = first.ground_size();
        if functions.iter().any(|f| f.ground_size() != n) {
            return Err(invalid("objectives disagree on the ground set size"));
        }
        if functions
            .iter()
            .any(|f| f.extension_kind() != ExtensionKind::ClosedForm)
        {
            return Err(invalid(
                "enumerated families require closed-form extensions",
            ));
        }
        Ok(EnumeratedFamily { functions })
    }

    pub fn functions(&self) -> &[Handle] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn item_bound(&self) -> f64 {
        self.functions
            .iter()
            .map(|f| f.item_bound())
            .fold(0.0, f64::max)
    }

    fn argmin(&self, score: impl Fn(&dyn SetFunction) -> f64) -> Handle {
        let mut best = 0;
        let mut best_value = f64::INFINITY;
        for (i, f) in self.functions.iter().enumerate() {
            let v = score(f.as_ref());
            if v < best_value {
                best = i;
                best_value = v;
            }
        }
        Arc::clone(&self.functions[best])
    }

    /// `G(x) = min_i F_i(x)`.
    pub fn min_value(&self, x: &[f64]) -> Result<f64> {
        check_marginals(x, self.ground_size_())?;
        Ok(self
            .functions
            .iter()
            .map(|f| f.extension(x).expect("closed form"))
            .fold(f64::INFINITY, f64::min))
    }

    fn ground_size_(&self) -> usize {
        self.functions[0].ground_size()
    }
}

impl Adversary for EnumeratedFamily {
    fn ground_size(&self) -> usize {
        self.ground_size_()
    }

    fn best_response(&self, x: &[f64]) -> Result<Handle> {
        check_marginals(x, self.ground_size_())?;
        Ok(self.argmin(|f| f.extension(x).expect("closed form")))
    }
}

impl MixtureAdversary for EnumeratedFamily {
    fn ground_size(&self) -> usize {
        self.ground_size_()
    }

    fn best_response_mixture(&self, points: &[Vec<f64>]) -> Result<Handle> {
        if points.is_empty() {
            return Err(invalid("mixture has no points"));
        }
        for p in points {
            check_marginals(p, self.ground_size_())?;
        }
        Ok(self.argmin(|f| {
            points
                .iter()
                .map(|p| f.extension(p).expect("closed form"))
                .sum::<f64>()
                / points.len() as f64
        }))
    }
}
