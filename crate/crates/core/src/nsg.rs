//! Network security games.
//!
//! The defender protects up to `k` edges of an undirected graph; the
//! attacker walks a simple path from any source to a target `t_j` and is
//! caught if the path uses a protected edge, in which case the defender
//! gains `τ_j`. Every path `P` induces the objective
//! `f_P(S) = τ_j · 1[S ∩ P ≠ ∅]` on edge sets. The sources are joined
//! implicitly through a supersource: Dijkstra starts from all of them at
//! once and paths start at whichever source they leave from.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::ops::ControlFlow;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;

use crate::equilibria::MixedStrategy;
use crate::error::{invalid, Error, Result};
use crate::function::{check_marginals, leave_one_out_products, ExtensionKind, Handle, SetFunction};
use crate::game::Adversary;
use crate::items::ItemSet;
use crate::matroid::Matroid;
use crate::rng::stream;

/// Edges whose survival probability `1 − x_e` falls below this are treated
/// as cut when choosing shortest paths.
const CUT_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    pub vertex: usize,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct NetworkGame {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    sources: Vec<usize>,
    targets: Vec<Target>,
    resources: usize,
    positions: Option<Vec<(f64, f64)>>,
    /// `(edge, neighbour)` pairs per vertex, in edge-index order.
    adjacency: Vec<Vec<(usize, usize)>>,
    target_at: Vec<Option<usize>>,
}

impl NetworkGame {
    pub fn new(
        n_nodes: usize,
        edges: Vec<(usize, usize)>,
        sources: Vec<usize>,
        targets: Vec<Target>,
        resources: usize,
    ) -> Result<Self> {
        if edges.is_empty() {
            return Err(invalid("network has no edges"));
        }
        if resources == 0 {
            return Err(invalid("defender needs at least one resource"));
        }
        if sources.is_empty() || targets.is_empty() {
            return Err(invalid("network needs at least one source and one target"));
        }
        for &(u, v) in &edges {
            if u >= n_nodes || v >= n_nodes {
                return Err(invalid(format!("edge ({u}, {v}) references a missing vertex")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at vertex {u}")));
            }
        }
        if let Some(&s) = sources.iter().find(|&&s| s >= n_nodes) {
            return Err(invalid(format!("source {s} is not a vertex")));
        }
        let mut target_at = vec![None; n_nodes];
        for (j, t) in targets.iter().enumerate() {
            if t.vertex >= n_nodes {
                return Err(invalid(format!("target {} is not a vertex", t.vertex)));
            }
            if !(t.value > 0.0 && t.value.is_finite()) {
                return Err(invalid(format!("target value {} must be positive", t.value)));
            }
            if target_at[t.vertex].is_some() {
                return Err(invalid(format!("vertex {} is listed as a target twice", t.vertex)));
            }
            target_at[t.vertex] = Some(j);
        }
        let mut adjacency = vec![Vec::new(); n_nodes];
        for (e, &(u, v)) in edges.iter().enumerate() {
            adjacency[u].push((e, v));
            adjacency[v].push((e, u));
        }
        let game = NetworkGame {
            n_nodes,
            edges,
            sources,
            targets,
            resources,
            positions: None,
            adjacency,
            target_at,
        };
        if game.reachable_targets().iter().all(|r| !r) {
            return Err(invalid("no target is reachable from any source"));
        }
        Ok(game)
    }

    pub fn with_positions(mut self, positions: Vec<(f64, f64)>) -> Result<Self> {
        if positions.len() != self.n_nodes {
            return Err(invalid("one position per vertex required"));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    pub fn positions(&self) -> Option<&[(f64, f64)]> {
        self.positions.as_deref()
    }

    /// Size of the defender's ground set (one item per edge).
    pub fn ground_size(&self) -> usize {
        self.edges.len()
    }

    pub fn matroid(&self) -> Matroid {
        Matroid::uniform(self.edges.len(), self.resources).expect("validated at construction")
    }

    /// `M = max_j τ_j`.
    pub fn item_bound(&self) -> f64 {
        self.targets.iter().map(|t| t.value).fold(0.0, f64::max)
    }

    /// Surrogate for the size of the attacker's strategy set.
    pub fn family_size_surrogate(&self, path_cap: usize) -> f64 {
        (self.targets.len() * path_cap.max(1)) as f64
    }

    pub fn reachable_targets(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n_nodes];
        let mut stack: Vec<usize> = self.sources.clone();
        for &s in &self.sources {
            seen[s] = true;
        }
        while let Some(u) = stack.pop() {
            for &(_, v) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        self.targets.iter().map(|t| seen[t.vertex]).collect()
    }

    fn edge_weight(&self, x: &[f64], e: usize) -> f64 {
        let survive = 1.0 - x[e];
        if survive < CUT_THRESHOLD {
            // Larger than any sum of uncut weights, each at most -ln(1e-12) < 28.
            28.0 * (self.edges.len() + 1) as f64
        } else {
            -(-x[e]).ln_1p()
        }
    }

    /// Multi-source Dijkstra on weights `-ln(1 − x_e)`. Returns distances and
    /// the predecessor `(edge, vertex)` of every reached vertex.
    pub fn survival_distances(&self, x: &[f64]) -> (Vec<f64>, Vec<Option<(usize, usize)>>) {
        let mut dist = vec![f64::INFINITY; self.n_nodes];
        let mut pred = vec![None; self.n_nodes];
        let mut heap = BinaryHeap::new();
        for &s in &self.sources {
            if dist[s] > 0.0 {
                dist[s] = 0.0;
                heap.push(Reverse((Dist(0.0), s)));
            }
        }
        while let Some(Reverse((Dist(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(e, v) in &self.adjacency[u] {
                let nd = d + self.edge_weight(x, e);
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = Some((e, u));
                    heap.push(Reverse((Dist(nd), v)));
                }
            }
        }
        (dist, pred)
    }

    fn trace_back(&self, pred: &[Option<(usize, usize)>], target: usize) -> Vec<usize> {
        let mut edges = Vec::new();
        let mut v = target;
        while let Some((e, u)) = pred[v] {
            edges.push(e);
            v = u;
        }
        edges.reverse();
        edges
    }

    /// Attacker best response to the independent defender distribution with
    /// marginals `x`: the path minimizing `τ_j (1 − Π_{e∈P}(1 − x_e))`,
    /// together with that value. Ties go to the lower target index.
    pub fn best_path(&self, x: &[f64]) -> Result<(AttackerPath, f64)> {
        check_marginals(x, self.edges.len())?;
        let (dist, pred) = self.survival_distances(x);
        let mut best: Option<(AttackerPath, f64)> = None;
        for (j, t) in self.targets.iter().enumerate() {
            if !dist[t.vertex].is_finite() {
                continue;
            }
            let edges = self.trace_back(&pred, t.vertex);
            let survive: f64 = edges.iter().map(|&e| 1.0 - x[e]).product();
            let value = t.value * (1.0 - survive);
            if best.as_ref().is_none_or(|(_, b)| value < *b) {
                best = Some((
                    AttackerPath {
                        edges,
                        target: j,
                        value: t.value,
                    },
                    value,
                ));
            }
        }
        best.ok_or_else(|| invalid("no target is reachable"))
    }

    pub fn path_objective(&self, path: &AttackerPath) -> PathObjective {
        PathObjective::new(self.edges.len(), path)
    }

    /// Visit every simple path from a source to a target, depth first, with
    /// sources in increasing order and edges in index order. Returns `false`
    /// if the visitor stopped early.
    pub fn for_each_path<F>(&self, deadline: Option<Instant>, mut visit: F) -> Result<bool>
    where
        F: FnMut(&[usize], usize) -> ControlFlow<()>,
    {
        let mut on_path = vec![false; self.n_nodes];
        let mut path: Vec<usize> = Vec::new();
        let mut steps: u64 = 0;
        for &s in &self.sources {
            if let Some(j) = self.target_at[s] {
                if visit(&[], j).is_break() {
                    return Ok(false);
                }
            }
            on_path[s] = true;
            // (vertex, next adjacency position)
            let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
            while let Some(top) = stack.last_mut() {
                steps += 1;
                if steps.is_multiple_of(16_384) {
                    if let Some(d) = deadline {
                        if Instant::now() >= d {
                            return Err(Error::Timeout);
                        }
                    }
                }
                let (u, pos) = *top;
                if pos == self.adjacency[u].len() {
                    stack.pop();
                    on_path[u] = false;
                    path.pop();
                    continue;
                }
                top.1 += 1;
                let (e, v) = self.adjacency[u][pos];
                if on_path[v] {
                    continue;
                }
                path.push(e);
                if let Some(j) = self.target_at[v] {
                    if visit(&path, j).is_break() {
                        return Ok(false);
                    }
                }
                on_path[v] = true;
                stack.push((v, 0));
            }
            // The source itself is popped with an empty path; nothing to undo.
            debug_assert!(path.is_empty());
        }
        Ok(true)
    }

    /// All simple source-to-target paths, truncated after `cap`.
    pub fn enumerate_paths(&self, cap: usize) -> Result<PathFamily> {
        self.enumerate_paths_until(cap, None)
    }

    pub fn enumerate_paths_until(&self, cap: usize, deadline: Option<Instant>) -> Result<PathFamily> {
        if cap == 0 {
            return Err(invalid("path cap must be at least 1"));
        }
        let mut paths = Vec::new();
        let mut truncated = false;
        self.for_each_path(deadline, |edges, j| {
            if paths.len() == cap {
                truncated = true;
                return ControlFlow::Break(());
            }
            paths.push(AttackerPath {
                edges: edges.to_vec(),
                target: j,
                value: self.targets[j].value,
            });
            ControlFlow::Continue(())
        })?;
        Ok(PathFamily { paths, truncated })
    }

    /// Exact attacker best response to an explicit defender mixture, by
    /// streaming over every simple path. Exponential in general.
    pub fn mixture_response_exhaustive(
        &self,
        strategy: &MixedStrategy,
        deadline: Option<Instant>,
    ) -> Result<(AttackerPath, f64)> {
        let mut best: Option<(AttackerPath, f64)> = None;
        self.for_each_path(deadline, |edges, j| {
            let v = caught_mass(strategy, edges) * self.targets[j].value;
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                best = Some((
                    AttackerPath {
                        edges: edges.to_vec(),
                        target: j,
                        value: self.targets[j].value,
                    },
                    v,
                ));
            }
            ControlFlow::Continue(())
        })?;
        best.ok_or_else(|| invalid("no target is reachable"))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "nsg {} {} {}", self.n_nodes, self.edges.len(), self.resources).unwrap();
        for &(u, v) in &self.edges {
            writeln!(s, "edge {u} {v}").unwrap();
        }
        for &v in &self.sources {
            writeln!(s, "source {v}").unwrap();
        }
        for t in &self.targets {
            writeln!(s, "target {} {}", t.vertex, t.value).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut edges = Vec::new();
        let mut sources = Vec::new();
        let mut targets = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            let num = |i: usize| -> Result<usize> {
                fields
                    .get(i)
                    .ok_or_else(|| parse_err(format!("missing field {i}")))?
                    .parse::<usize>()
                    .map_err(|e| parse_err(format!("bad integer: {e}")))
            };
            match (fields[0], fields.len()) {
                ("nsg", 4) if header.is_none() => header = Some((num(1)?, num(2)?, num(3)?)),
                ("edge", 3) => edges.push((num(1)?, num(2)?)),
                ("source", 2) => sources.push(num(1)?),
                ("target", 3) => {
                    let value = fields[2]
                        .parse::<f64>()
                        .map_err(|e| parse_err(format!("bad target value: {e}")))?;
                    targets.push(Target { vertex: num(1)?, value });
                }
                _ => return Err(parse_err(format!("unrecognized line `{line}`"))),
            }
            if header.is_none() {
                return Err(parse_err("expected `nsg <nodes> <edges> <k>` header first".into()));
            }
        }
        let (n_nodes, n_edges, k) =
            header.ok_or(Error::Parse { line: 0, message: "empty instance file".into() })?;
        if edges.len() != n_edges {
            return Err(invalid(format!(
                "header declares {n_edges} edges but {} were listed",
                edges.len()
            )));
        }
        NetworkGame::new(n_nodes, edges, sources, targets, k)
    }
}

#[derive(Clone, Copy, Debug)]
struct Dist(f64);

impl PartialEq for Dist {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Probability mass of the strategy's sets that intersect `path`.
pub fn caught_mass(strategy: &MixedStrategy, path: &[usize]) -> f64 {
    strategy
        .iter()
        .filter(|(_, s)| path.iter().any(|&e| s.contains(e)))
        .map(|(w, _)| w)
        .sum()
}

impl Adversary for NetworkGame {
    fn ground_size(&self) -> usize {
        self.edges.len()
    }

    fn best_response(&self, x: &[f64]) -> Result<Handle> {
        let (path, _) = self.best_path(x)?;
        Ok(Arc::new(self.path_objective(&path)))
    }
}

/// An attacker path: edges in traversal order from a source to `target`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackerPath {
    pub edges: Vec<usize>,
    /// Index into the game's target list.
    pub target: usize,
    /// `τ` of the target.
    pub value: f64,
}

/// `f_P(S) = τ · 1[S ∩ P ≠ ∅]`.
#[derive(Clone, Debug)]
pub struct PathObjective {
    n: usize,
    edges: ItemSet,
    tau: f64,
}

impl PathObjective {
    pub fn new(n: usize, path: &AttackerPath) -> Self {
        PathObjective {
            n,
            edges: path.edges.iter().copied().collect(),
            tau: path.value,
        }
    }

    pub fn edges(&self) -> &ItemSet {
        &self.edges
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

impl SetFunction for PathObjective {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &ItemSet) -> f64 {
        if set.intersects(&self.edges) {
            self.tau
        } else {
            0.0
        }
    }

    fn item_bound(&self) -> f64 {
        self.tau
    }

    fn extension_kind(&self) -> ExtensionKind {
        ExtensionKind::ClosedForm
    }

    fn extension(&self, x: &[f64]) -> Option<f64> {
        let survive: f64 = self.edges.iter().map(|e| 1.0 - x[e]).product();
        Some(self.tau * (1.0 - survive))
    }

    fn extension_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(nsg_path_gradient_unchecked(self.n, self.edges.as_slice(), self.tau, x))
    }
}

fn nsg_path_gradient_unchecked(n: usize, edges: &[usize], tau: f64, x: &[f64]) -> Vec<f64> {
    let factors: Vec<f64> = edges.iter().map(|&e| 1.0 - x[e]).collect();
    let mut g = vec![0.0; n];
    for (&e, rest) in edges.iter().zip(leave_one_out_products(&factors)) {
        g[e] += tau * rest;
    }
    g
}

/// Gradient of `F_P(x) = τ(1 − Π_{e∈P}(1 − x_e))`.
pub fn nsg_path_gradient(path: &AttackerPath, x: &[f64]) -> Vec<f64> {
    let edges: ItemSet = path.edges.iter().copied().collect();
    nsg_path_gradient_unchecked(x.len(), edges.as_slice(), path.value, x)
}

#[derive(Clone, Debug)]
pub struct PathFamily {
    pub paths: Vec<AttackerPath>,
    pub truncated: bool,
}

impl PathFamily {
    /// `min_P Σ_w p_w f_P(S_w)` over the listed paths, with the minimizing
    /// path index. An upper bound on the true worst case when truncated.
    pub fn worst_case(&self, strategy: &MixedStrategy) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.paths.iter().enumerate() {
            let v = p.value * caught_mass(strategy, &p.edges);
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResourceRule {
    /// `k = max(1, ⌈fraction · |E|⌉)`.
    EdgeFraction(f64),
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometricParams {
    pub n_nodes: usize,
    /// Expected fraction of vertex pairs joined by an edge.
    pub density: f64,
    pub value_lo: f64,
    pub value_hi: f64,
    pub resources: ResourceRule,
    /// Number of sources, and separately of targets.
    pub n_source_target: usize,
}

impl GeometricParams {
    /// Density 0.1, target values in `[0, 100]`, `k` one percent of the edges,
    /// three sources and three targets.
    pub fn standard(n_nodes: usize) -> Self {
        GeometricParams {
            n_nodes,
            density: 0.1,
            value_lo: 0.0,
            value_hi: 100.0,
            resources: ResourceRule::EdgeFraction(0.01),
            n_source_target: 3,
        }
    }
}

/// Probability that two uniform points in the unit square are within
/// distance `d`, by Simpson integration over the horizontal gap.
pub fn pair_distance_cdf(d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    if d >= std::f64::consts::SQRT_2 {
        return 1.0;
    }
    // Horizontal gap a = |x1 - x2| has density 2(1 - a); vertical gap b has
    // CDF 1 - (1 - b)^2 on [0, 1].
    let vertical = |b: f64| -> f64 {
        if b >= 1.0 {
            1.0
        } else {
            1.0 - (1.0 - b) * (1.0 - b)
        }
    };
    // Substituting a = d·sin θ removes the square-root kink at a = d; the
    // remaining kink where the vertical gap reaches 1 is a segment boundary.
    let theta_max = (d.min(1.0) / d).asin();
    let integrand = |t: f64| {
        let (a, b) = (d * t.sin(), d * t.cos());
        2.0 * (1.0 - a) * vertical(b) * d * t.cos()
    };
    let mut cuts = vec![0.0];
    if d > 1.0 {
        cuts.push((1.0 / d).acos());
    }
    cuts.push(theta_max);
    cuts.windows(2).map(|w| simpson(&integrand, w[0], w[1], 2000)).sum()
}

fn simpson(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> f64 {
    let h = (hi - lo) / steps as f64;
    let mut total = f(lo) + f(hi);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        total += w * f(lo + i as f64 * h);
    }
    total * h / 3.0
}

/// Connection radius whose expected edge fraction equals `density`.
pub fn radius_for_density(density: f64) -> f64 {
    if density >= 1.0 {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (0.0, std::f64::consts::SQRT_2);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if pair_distance_cdf(mid) < density {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Random geometric network game: points uniform in the unit square, edges
/// between points within the density radius, distinct random sources and
/// targets, target values uniform in `[value_lo, value_hi]`. Redraws up to
/// 100 times until every target is reachable.
pub fn generate_geometric(params: &GeometricParams, seed: u64) -> Result<NetworkGame> {
    let p = params;
    if p.n_nodes < 2 || p.n_source_target == 0 || 2 * p.n_source_target > p.n_nodes {
        return Err(Error::Config(
            "need at least 2 vertices and 2·n_source_target <= n_nodes".into(),
        ));
    }
    if !(p.density > 0.0 && p.density <= 1.0) {
        return Err(Error::Config(format!("density {} must lie in (0, 1]", p.density)));
    }
    if !(p.value_lo <= p.value_hi && p.value_hi > 0.0) {
        return Err(Error::Config("target value range is empty or nonpositive".into()));
    }
    let radius = radius_for_density(p.density);
    let mut rng = stream(seed, 0);
    for _ in 0..100 {
        let positions: Vec<(f64, f64)> = (0..p.n_nodes).map(|_| (rng.gen(), rng.gen())).collect();
        let mut edges = Vec::new();
        for u in 0..p.n_nodes {
            for v in u + 1..p.n_nodes {
                let (dx, dy) = (positions[u].0 - positions[v].0, positions[u].1 - positions[v].1);
                if (dx * dx + dy * dy).sqrt() <= radius {
                    edges.push((u, v));
                }
            }
        }
        let picks = sample(&mut rng, p.n_nodes, 2 * p.n_source_target).into_vec();
        let sources = picks[..p.n_source_target].to_vec();
        let targets: Vec<Target> = picks[p.n_source_target..]
            .iter()
            .map(|&v| Target {
                vertex: v,
                value: rng.gen_range(p.value_lo..=p.value_hi).max(1e-6),
            })
            .collect();
        if edges.is_empty() {
            continue;
        }
        let k = match p.resources {
            ResourceRule::Fixed(k) => k,
            ResourceRule::EdgeFraction(f) => ((f * edges.len() as f64).ceil() as usize).max(1),
        };
        let game = match NetworkGame::new(p.n_nodes, edges, sources, targets, k) {
            Ok(g) => g,
            Err(Error::InvalidInput(_)) => continue,
            Err(e) => return Err(e),
        };
        if game.reachable_targets().iter().all(|&r| r) {
            return game.with_positions(positions);
        }
    }
    Err(Error::Generation(
        "no instance with all targets reachable after 100 attempts".into(),
    ))
}
