//! Instance builders and reference computations shared by the integration
//! tests.
#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use sbr_core::function::Coverage;
use sbr_core::matroid::{ConvexDecomposition, Matroid};
use sbr_core::{Handle, ItemSet, SetFunction};

/// Probabilistic coverage over `n` items and 3 to 6 elements: each item
/// reaches each element with probability one half, with a uniform `p`.
pub fn random_coverage<R: Rng>(n: usize, rng: &mut R) -> Coverage {
    let elements = rng.gen_range(3..=6);
    let weights: Vec<f64> = (0..elements).map(|_| rng.gen_range(0.1..1.0)).collect();
    let mut cover = vec![Vec::new(); n];
    for list in cover.iter_mut() {
        for u in 0..elements {
            if rng.gen_bool(0.5) {
                list.push((u, rng.gen_range(0.2..=1.0)));
            }
        }
    }
    Coverage::new(weights, cover).unwrap()
}

pub fn random_family<R: Rng>(n: usize, size: usize, rng: &mut R) -> Vec<Handle> {
    (0..size)
        .map(|_| Arc::new(random_coverage(n, rng)) as Handle)
        .collect()
}

pub fn random_point<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Either a uniform matroid or a partition matroid with two blocks.
pub fn random_matroid<R: Rng>(n: usize, rng: &mut R) -> Matroid {
    if rng.gen_bool(0.5) {
        Matroid::uniform(n, rng.gen_range(1..=3.min(n))).unwrap()
    } else {
        let block_of = (0..n).map(|i| usize::from(i >= n / 2)).collect();
        Matroid::partition(block_of, vec![rng.gen_range(1..=2), rng.gen_range(1..=2)]).unwrap()
    }
}

/// A random independent set: items in random order, kept while independent.
pub fn random_independent<R: Rng>(m: &Matroid, rng: &mut R) -> ItemSet {
    let mut order: Vec<usize> = (0..m.ground_size()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut set = ItemSet::empty();
    for i in order {
        if rng.gen_bool(0.8) && m.is_independent(&set.with(i)) {
            set.insert(i);
        }
    }
    set
}

pub fn random_decomposition<R: Rng>(m: &Matroid, terms: usize, rng: &mut R) -> ConvexDecomposition {
    let raw: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut coeffs: Vec<f64> = raw.iter().map(|c| c / total).collect();
    let head: f64 = coeffs[..terms - 1].iter().sum();
    coeffs[terms - 1] = 1.0 - head;
    ConvexDecomposition::new(
        coeffs
            .into_iter()
            .map(|c| (c, random_independent(m, rng)))
            .collect(),
    )
    .unwrap()
}

/// Central finite difference of the closed-form extension.
pub fn finite_difference(f: &dyn SetFunction, x: &[f64], j: usize, h: f64) -> f64 {
    let mut up = x.to_vec();
    let mut down = x.to_vec();
    up[j] += h;
    down[j] -= h;
    (f.extension(&up).unwrap() - f.extension(&down).unwrap()) / (2.0 * h)
}

pub fn min_extension(family: &[Handle], x: &[f64]) -> f64 {
    family
        .iter()
        .map(|f| f.extension(x).unwrap())
        .fold(f64::INFINITY, f64::min)
}

/// `max G` over grid points of step `1/steps` with `Σ x = k`. For a
/// monotone `G` on a uniform matroid polytope with `k < n` this equals the
/// maximum over the whole grid inside the polytope.
pub fn grid_optimum(family: &[Handle], n: usize, k: usize, steps: usize) -> f64 {
    fn rec(
        family: &[Handle],
        x: &mut Vec<f64>,
        n: usize,
        left: usize,
        steps: usize,
        best: &mut f64,
    ) {
        let j = x.len();
        if j == n - 1 {
            if left <= steps {
                x.push(left as f64 / steps as f64);
                *best = best.max(min_extension(family, x));
                x.pop();
            }
            return;
        }
        for a in 0..=steps.min(left) {
            x.push(a as f64 / steps as f64);
            rec(family, x, n, left - a, steps, best);
            x.pop();
        }
    }
    let mut best = f64::NEG_INFINITY;
    rec(family, &mut Vec::with_capacity(n), n, k * steps, steps, &mut best);
    best
}
