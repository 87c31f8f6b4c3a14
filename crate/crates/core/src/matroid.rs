//! Uniform and partition matroids: independence, greedy linear optimization
//! over the base polytope's vertices, and randomized swap rounding.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::items::ItemSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatroidKind {
    Uniform,
    Partition,
}

/// A partition matroid: item `j` belongs to block `block_of[j]` and at most
/// `capacity[b]` items may be taken from block `b`. The uniform matroid of
/// rank `k` is the single-block case.
#[derive(Clone, Debug, PartialEq)]
pub struct Matroid {
    kind: MatroidKind,
    block_of: Vec<usize>,
    capacity: Vec<usize>,
}

impl Matroid {
    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(invalid("uniform matroid needs n >= 1 and k >= 1"));
        }
        Ok(Matroid {
            kind: MatroidKind::Uniform,
            block_of: vec![0; n],
            capacity: vec![k],
        })
    }

    pub fn partition(block_of: Vec<usize>, capacity: Vec<usize>) -> Result<Self> {
        if block_of.is_empty() {
            return Err(invalid("partition matroid needs at least one item"));
        }
        if let Some(&b) = block_of.iter().find(|&&b| b >= capacity.len()) {
            return Err(invalid(format!("item assigned to unknown block {b}")));
        }
        let m = Matroid {
            kind: MatroidKind::Partition,
            block_of,
            capacity,
        };
        if m.rank() == 0 {
            return Err(invalid("partition matroid has rank 0"));
        }
        Ok(m)
    }

    pub fn kind(&self) -> MatroidKind {
        self.kind
    }

    pub fn ground_size(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_of(&self, item: usize) -> usize {
        self.block_of[item]
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacity
    }

    /// Size of every maximal independent set.
    pub fn rank(&self) -> usize {
        let mut sizes = vec![0usize; self.capacity.len()];
        for &b in &self.block_of {
            sizes[b] += 1;
        }
        sizes
            .iter()
            .zip(&self.capacity)
            .map(|(s, c)| (*s).min(*c))
            .sum()
    }

    pub fn is_independent(&self, set: &ItemSet) -> bool {
        if set.check_range(self.ground_size()).is_err() {
            return false;
        }
        let mut used = vec![0usize; self.capacity.len()];
        for j in set.iter() {
            let b = self.block_of[j];
            used[b] += 1;
            if used[b] > self.capacity[b] {
                return false;
            }
        }
        true
    }

    /// Greedy maximization of `Σ_{j∈S} w_j` over independent sets. Items with
    /// `w_j <= 0` are never taken; ties go to the lower index.
    pub fn linear_opt(&self, w: &[f64]) -> ItemSet {
        debug_assert_eq!(w.len(), self.ground_size());
        let mut order: Vec<usize> = (0..w.len()).filter(|&j| w[j] > 0.0).collect();
        order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
        let mut used = vec![0usize; self.capacity.len()];
        let mut picked = Vec::new();
        for j in order {
            let b = self.block_of[j];
            if used[b] < self.capacity[b] {
                used[b] += 1;
                picked.push(j);
            }
        }
        ItemSet::new(picked)
    }

    /// Randomized swap rounding of a convex combination of independent sets.
    ///
    /// Every set is first padded to a base with dummy items (indices `>= n`,
    /// one pool per block), the bases are merged left to right, and the
    /// dummies are stripped from the result.
    pub fn swap_round<R: Rng + ?Sized>(
        &self,
        decomposition: &ConvexDecomposition,
        rng: &mut R,
    ) -> Result<ItemSet> {
        decomposition.validate(self)?;
        let pad = Padding::new(self);
        let mut terms = decomposition.terms().iter();
        let (first_weight, first) = terms.next().expect("validated nonempty");
        let mut merged = pad.basis(self, first);
        let mut weight = *first_weight;
        for (lambda, set) in terms {
            let mut other = pad.basis(self, set);
            merge_bases(self, &pad, weight, &mut merged, *lambda, &mut other, rng);
            weight += lambda;
        }
        let n = self.ground_size();
        Ok(merged.into_iter().filter(|&j| j < n).collect())
    }
}

struct Padding {
    n: usize,
    /// First dummy index of each block, relative to `n`.
    offsets: Vec<usize>,
    dummy_block: Vec<usize>,
}

impl Padding {
    fn new(m: &Matroid) -> Self {
        let mut offsets = Vec::with_capacity(m.capacity.len());
        let mut dummy_block = Vec::new();
        for (b, &cap) in m.capacity.iter().enumerate() {
            offsets.push(dummy_block.len());
            dummy_block.extend(std::iter::repeat_n(b, cap));
        }
        Padding {
            n: m.ground_size(),
            offsets,
            dummy_block,
        }
    }

    fn block(&self, m: &Matroid, item: usize) -> usize {
        if item < self.n {
            m.block_of[item]
        } else {
            self.dummy_block[item - self.n]
        }
    }

    fn basis(&self, m: &Matroid, set: &ItemSet) -> BTreeSet<usize> {
        let mut used = vec![0usize; m.capacity.len()];
        for j in set.iter() {
            used[m.block_of[j]] += 1;
        }
        let mut basis: BTreeSet<usize> = set.iter().collect();
        for (b, &cap) in m.capacity.iter().enumerate() {
            for t in used[b]..cap {
                basis.insert(self.n + self.offsets[b] + t);
            }
        }
        basis
    }
}

/// Merge two bases into one, in place in `left`. With probability
/// `wl / (wl + wr)` an exchange moves `right` toward `left`, otherwise
/// `left` toward `right`.
fn merge_bases<R: Rng + ?Sized>(
    m: &Matroid,
    pad: &Padding,
    wl: f64,
    left: &mut BTreeSet<usize>,
    wr: f64,
    right: &mut BTreeSet<usize>,
    rng: &mut R,
) {
    // Padded bases share per-block counts, so every item of `left \ right`
    // has a same-block partner in `right \ left`.
    while let Some(&i) = left.difference(right).next() {
        let block = pad.block(m, i);
        let j = right
            .difference(left)
            .copied()
            .find(|&j| pad.block(m, j) == block)
            .expect("padded bases admit a same-block exchange");
        if rng.gen::<f64>() * (wl + wr) < wl {
            right.remove(&j);
            right.insert(i);
        } else {
            left.remove(&i);
            left.insert(j);
        }
    }
}

/// `x = Σ λ_ℓ 1_{S_ℓ}` with `λ_ℓ > 0` summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexDecomposition {
    terms: Vec<(f64, ItemSet)>,
}

impl ConvexDecomposition {
    pub fn new(terms: Vec<(f64, ItemSet)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(invalid("convex decomposition has no terms"));
        }
        if let Some((l, _)) = terms.iter().find(|(l, _)| !(*l > 0.0 && *l <= 1.0 + 1e-12)) {
            return Err(invalid(format!("coefficient {l} outside (0, 1]")));
        }
        Ok(ConvexDecomposition { terms })
    }

    /// Equal weights `1/len` on each set.
    pub fn uniform(sets: Vec<ItemSet>) -> Result<Self> {
        let w = 1.0 / sets.len().max(1) as f64;
        ConvexDecomposition::new(sets.into_iter().map(|s| (w, s)).collect())
    }

    pub fn terms(&self) -> &[(f64, ItemSet)] {
        &self.terms
    }

    pub fn point(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (l, s) in &self.terms {
            for j in s.iter().filter(|&j| j < n) {
                x[j] += l;
            }
        }
        x
    }

    pub fn validate(&self, m: &Matroid) -> Result<()> {
        let total: f64 = self.terms.iter().map(|(l, _)| l).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("coefficients sum to {total}, not 1")));
        }
        if let Some((_, s)) = self.terms.iter().find(|(_, s)| !m.is_independent(s)) {
            return Err(invalid(format!("set {s:?} is not independent")));
        }
        Ok(())
    }
}
