//! Reference algorithms: greedy, an exact matrix-game solver, double oracle
//! for both domains, brute-force minimax on enumerable games, and exact
//! worst-case evaluation of mixed strategies.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use crate::budget::RobustBudget;
use crate::equilibria::MixedStrategy;
use crate::error::{invalid, Error, Result};
use crate::function::{Coverage, Handle, SetFunction};
use crate::items::ItemSet;
use crate::matroid::Matroid;
use crate::nsg::{caught_mass, AttackerPath, NetworkGame, PathFamily};

/// Plain greedy: repeatedly adds the feasible item with the largest positive
/// marginal gain, lowest index first on ties.
pub fn greedy(f: &dyn SetFunction, m: &Matroid) -> ItemSet {
    let mut set = ItemSet::empty();
    let mut current = f.value(&set);
    loop {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m.ground_size() {
            if set.contains(i) {
                continue;
            }
            let cand = set.with(i);
            if !m.is_independent(&cand) {
                continue;
            }
            let gain = f.value(&cand) - current;
            if gain > 0.0 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        match best {
            Some((i, _)) => {
                set.insert(i);
                current = f.value(&set);
            }
            None => return set,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Key(f64, Reverse<usize>);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Greedy with stale upper bounds on marginal gains. Submodularity makes a
/// stale bound valid, so an item whose refreshed gain still beats every
/// other bound is the greedy choice. Output equals [`greedy`].
pub fn lazy_greedy(f: &dyn SetFunction, m: &Matroid) -> ItemSet {
    let mut set = ItemSet::empty();
    let mut current = f.value(&set);
    let mut heap: BinaryHeap<Key> = (0..m.ground_size())
        .map(|i| Key(f64::INFINITY, Reverse(i)))
        .collect();
    while let Some(Key(_, Reverse(i))) = heap.pop() {
        let cand = set.with(i);
        if !m.is_independent(&cand) {
            continue;
        }
        let gain = f.value(&cand) - current;
        if gain <= 0.0 {
            continue;
        }
        let fresh = Key(gain, Reverse(i));
        if heap.peek().is_none_or(|top| fresh > *top) {
            set.insert(i);
            current = f.value(&set);
        } else {
            heap.push(fresh);
        }
    }
    set
}

/// Zero-sum game in normal form; rows maximize, columns minimize.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGame {
    payoff: Vec<Vec<f64>>,
}

impl MatrixGame {
    pub fn new(payoff: Vec<Vec<f64>>) -> Result<Self> {
        let cols = payoff.first().map_or(0, Vec::len);
        if payoff.is_empty() || cols == 0 {
            return Err(invalid("payoff matrix is empty"));
        }
        if payoff.iter().any(|r| r.len() != cols) {
            return Err(invalid("payoff matrix is ragged"));
        }
        if payoff.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("payoff entries must be finite"));
        }
        Ok(MatrixGame { payoff })
    }

    pub fn rows(&self) -> usize {
        self.payoff.len()
    }

    pub fn cols(&self) -> usize {
        self.payoff[0].len()
    }

    pub fn payoff(&self) -> &[Vec<f64>] {
        &self.payoff
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSolution {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    pub value: f64,
}

/// Exact minimax solution by the simplex method with Bland's rule.
///
/// After shifting payoffs to be positive, the column player's problem is
/// `max Σ y` subject to `A y ≤ 1, y ≥ 0`; the optimum is `1/v` and the
/// row strategy is read off the duals. `tol` only bounds the reported
/// error, which is at floating-point level.
pub fn solve_matrix_game(game: &MatrixGame, tol: f64) -> Result<MatrixSolution> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let (m, n) = (game.rows(), game.cols());
    let lo = game.payoff.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - lo;
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        for j in 0..n {
            t[i][j] = game.payoff[i][j] + shift;
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = 1.0;
    }
    for j in 0..n {
        t[m][j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    const EPS: f64 = 1e-12;
    loop {
        let Some(enter) = (0..width - 1).find(|&j| t[m][j] < -EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i][enter];
            if a > EPS {
                let ratio = t[i][width - 1] / a;
                let better = match leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < best - EPS || (ratio <= best + EPS && basis[i] < basis[r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (r, _) = leave.ok_or_else(|| invalid("matrix game LP is unbounded"))?;
        let pivot = t[r][enter];
        for v in t[r].iter_mut() {
            *v /= pivot;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[enter];
            if factor != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
        basis[r] = enter;
    }
    let mut y = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = t[i][width - 1];
        }
    }
    let x: Vec<f64> = (0..m).map(|i| t[m][n + i]).collect();
    let normalize = |v: Vec<f64>| -> Vec<f64> {
        let clipped: Vec<f64> = v.into_iter().map(|a| a.max(0.0)).collect();
        let s: f64 = clipped.iter().sum();
        clipped.into_iter().map(|a| a / s).collect()
    };
    let total = t[m][width - 1];
    let row = normalize(x);
    let col = normalize(y);
    Ok(MatrixSolution {
        row,
        col,
        value: 1.0 / total - shift,
    })
}

/// One player's view of a game solved by double oracle. Columns are the
/// adversary's pure strategies in whatever representation the domain uses.
pub trait DoubleOracleGame {
    type Column: Clone;

    fn payoff(&self, set: &ItemSet, column: &Self::Column) -> f64;

    /// Best defender set against the mixture `weights` over `columns`.
    fn defender_response(&mut self, columns: &[Self::Column], weights: &[f64]) -> Result<ItemSet>;

    /// Best adversary column against a defender mixture.
    fn adversary_response(&mut self, strategy: &MixedStrategy) -> Result<Self::Column>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleOracleConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub deadline: Option<Instant>,
}

impl Default for DoubleOracleConfig {
    fn default() -> Self {
        DoubleOracleConfig {
            tol: 1e-6,
            max_iter: 200,
            deadline: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoubleOracleStep {
    pub iteration: usize,
    pub restricted_value: f64,
    /// Best certified defender value so far.
    pub lower_bound: f64,
    /// Best certified adversary value so far.
    pub upper_bound: f64,
}

#[derive(Clone, Debug)]
pub struct DoubleOracleResult<C> {
    /// Restricted-game equilibrium strategy of the final round.
    pub defender: MixedStrategy,
    pub adversary: Vec<(f64, C)>,
    /// Restricted-game value of the final round.
    pub value: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<DoubleOracleStep>,
}

/// Double oracle: solve the restricted game, add each player's best
/// response if it beats the restricted value by more than `tol`, stop when
/// neither does. Bounds are running bests over all rounds, so they are
/// monotone by construction.
pub fn double_oracle<G: DoubleOracleGame>(
    game: &mut G,
    initial_sets: Vec<ItemSet>,
    initial_columns: Vec<G::Column>,
    cfg: &DoubleOracleConfig,
) -> Result<DoubleOracleResult<G::Column>> {
    if cfg.max_iter == 0 || !(cfg.tol > 0.0) {
        return Err(Error::Config("double oracle needs max_iter >= 1 and tol > 0".into()));
    }
    if initial_sets.is_empty() || initial_columns.is_empty() {
        return Err(invalid("double oracle needs initial strategies for both players"));
    }
    let mut sets: Vec<ItemSet> = Vec::new();
    let mut seen: HashSet<ItemSet> = HashSet::new();
    for s in initial_sets {
        if seen.insert(s.clone()) {
            sets.push(s);
        }
    }
    let mut columns = initial_columns;
    let mut matrix: Vec<Vec<f64>> = sets
        .iter()
        .map(|s| columns.iter().map(|c| game.payoff(s, c)).collect())
        .collect();
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut trace = Vec::new();
    let mut iteration = 0;
    loop {
        if let Some(d) = cfg.deadline {
            if Instant::now() >= d {
                return Err(Error::Timeout);
            }
        }
        iteration += 1;
        let sol = solve_matrix_game(&MatrixGame::new(matrix.clone())?, cfg.tol)?;
        let defender = MixedStrategy::new(sets.clone(), sol.row.clone())?;
        let new_set = game.defender_response(&columns, &sol.col)?;
        let set_value: f64 = columns
            .iter()
            .zip(&sol.col)
            .map(|(c, q)| q * game.payoff(&new_set, c))
            .sum();
        let new_column = game.adversary_response(&defender)?;
        let column_value: f64 = sets
            .iter()
            .zip(&sol.row)
            .map(|(s, p)| p * game.payoff(s, &new_column))
            .sum();
        lower = lower.max(column_value);
        upper = upper.min(set_value);
        trace.push(DoubleOracleStep {
            iteration,
            restricted_value: sol.value,
            lower_bound: lower,
            upper_bound: upper,
        });
        let add_set = set_value > sol.value + cfg.tol && !seen.contains(&new_set);
        let add_column = column_value < sol.value - cfg.tol;
        if !add_set && !add_column || iteration >= cfg.max_iter {
            let converged = !add_set && !add_column;
            return Ok(DoubleOracleResult {
                defender,
                adversary: sol.col.iter().copied().zip(columns).collect(),
                value: sol.value,
                lower_bound: lower,
                upper_bound: upper,
                iterations: iteration,
                converged,
                trace,
            });
        }
        if add_set {
            matrix.push(columns.iter().map(|c| game.payoff(&new_set, c)).collect());
            seen.insert(new_set.clone());
            sets.push(new_set);
        }
        if add_column {
            for (row, s) in matrix.iter_mut().zip(&sets) {
                row.push(game.payoff(s, &new_column));
            }
            columns.push(new_column);
        }
    }
}

/// A game with every defender set and every objective listed; both best
/// responses are exact.
#[derive(Clone, Debug)]
pub struct ExplicitGame {
    pub sets: Vec<ItemSet>,
    pub functions: Vec<Handle>,
}

impl DoubleOracleGame for ExplicitGame {
    type Column = usize;

    fn payoff(&self, set: &ItemSet, column: &usize) -> f64 {
        self.functions[*column].value(set)
    }

    fn defender_response(&mut self, columns: &[usize], weights: &[f64]) -> Result<ItemSet> {
        let score = |s: &ItemSet| -> f64 {
            columns.iter().zip(weights).map(|(&c, w)| w * self.functions[c].value(s)).sum()
        };
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for (i, s) in self.sets.iter().enumerate() {
            let v = score(s);
            if v > best_value {
                best = i;
                best_value = v;
            }
        }
        Ok(self.sets[best].clone())
    }

    fn adversary_response(&mut self, strategy: &MixedStrategy) -> Result<usize> {
        let mut best = 0;
        let mut best_value = f64::INFINITY;
        for (i, f) in self.functions.iter().enumerate() {
            let v = strategy.expected_value(f.as_ref());
            if v < best_value {
                best = i;
                best_value = v;
            }
        }
        Ok(best)
    }
}

/// All independent sets of a small matroid, in order of increasing size
/// then lexicographically. Fails beyond `limit` sets.
pub fn independent_sets(m: &Matroid, limit: usize) -> Result<Vec<ItemSet>> {
    let mut out = vec![ItemSet::empty()];
    let mut frontier = vec![ItemSet::empty()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.as_slice().last().map_or(0, |&l| l + 1);
            for i in start..m.ground_size() {
                let t = s.with(i);
                if m.is_independent(&t) {
                    next.push(t);
                    if out.len() + next.len() > limit {
                        return Err(Error::SizeLimit(format!(
                            "more than {limit} independent sets"
                        )));
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(out)
}

/// Exact game value by solving the full payoff matrix. Requires
/// `|sets|·|functions| ≤ 10^6`.
pub fn brute_force_minimax(sets: &[ItemSet], functions: &[Handle], tol: f64) -> Result<MatrixSolution> {
    if sets.len().saturating_mul(functions.len()) > 1_000_000 {
        return Err(Error::SizeLimit(format!(
            "{} x {} payoff matrix exceeds 10^6 entries",
            sets.len(),
            functions.len()
        )));
    }
    let payoff = sets
        .iter()
        .map(|s| functions.iter().map(|f| f.value(s)).collect())
        .collect();
    solve_matrix_game(&MatrixGame::new(payoff)?, tol)
}

/// `min_f E_{S~strategy}[f(S)]` over an explicit family.
pub fn worst_case_enumerated(strategy: &MixedStrategy, functions: &[Handle]) -> f64 {
    functions
        .iter()
        .map(|f| strategy.expected_value(f.as_ref()))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorstCase {
    pub value: f64,
    /// False when the value is only an upper bound on the true worst case.
    pub exact: bool,
}

pub fn worst_case_budget(game: &RobustBudget, strategy: &MixedStrategy) -> Result<WorstCase> {
    Ok(WorstCase {
        value: game.worst_case_strategy(strategy)?.1 + 0.0,
        exact: true,
    })
}

/// Minimum over the enumerated paths (and the attacker's best response to
/// the strategy's marginals); exact when `family` is complete.
pub fn worst_case_nsg(game: &NetworkGame, family: &PathFamily, strategy: &MixedStrategy) -> Result<WorstCase> {
    let mut value = family.worst_case(strategy).map_or(f64::INFINITY, |(_, v)| v);
    if family.truncated {
        let x = strategy.marginals(game.ground_size()).iter().map(|v| v.min(1.0)).collect::<Vec<_>>();
        let (path, _) = game.best_path(&x)?;
        value = value.min(path.value * caught_mass(strategy, &path.edges));
    }
    Ok(WorstCase {
        // `+ 0.0` turns a negative zero into zero for printing.
        value: value + 0.0,
        exact: !family.truncated,
    })
}

/// Largest number of `k`-subsets the NSG defender oracle enumerates before
/// falling back to greedy.
pub const EXACT_SUBSET_LIMIT: f64 = 2e6;

/// Double-oracle view of a network security game. The attacker oracle is an
/// exact minimum over the complete path list when it fits under the cap,
/// otherwise an exhaustive streaming search over all simple paths.
#[derive(Clone, Debug)]
pub struct NsgOracleGame<'a> {
    pub game: &'a NetworkGame,
    pub family: PathFamily,
    pub deadline: Option<Instant>,
}

impl<'a> NsgOracleGame<'a> {
    pub fn new(game: &'a NetworkGame, path_cap: usize, deadline: Option<Instant>) -> Result<Self> {
        let family = game.enumerate_paths_until(path_cap, deadline)?;
        Ok(NsgOracleGame { game, family, deadline })
    }

    /// Starting strategies: the attacker's response to the uniform marginal
    /// `k/|E|`, and greedy against it.
    pub fn initial(&self) -> Result<(ItemSet, AttackerPath)> {
        let n = self.game.ground_size();
        let x = vec![(self.game.resources() as f64 / n as f64).min(1.0); n];
        let (path, _) = self.game.best_path(&x)?;
        let f = self.game.path_objective(&path);
        Ok((lazy_greedy(&f, &self.game.matroid()), path))
    }
}

fn hits(set: &ItemSet, path: &AttackerPath) -> bool {
    path.edges.iter().any(|&e| set.contains(e))
}

/// Number of `k`-subsets of `n` items, saturating at `cap`.
fn choose_capped(n: usize, k: usize, cap: f64) -> f64 {
    let mut c = 1.0;
    for i in 0..k.min(n) {
        c = c * (n - i) as f64 / (i + 1) as f64;
        if c > cap {
            return f64::INFINITY;
        }
    }
    c
}

/// Best `k`-subset of `edges` for the weighted path-hitting objective,
/// scanning subsets in lexicographic order.
fn best_hitting_subset(edges: &[usize], k: usize, paths: &[(f64, &AttackerPath)]) -> ItemSet {
    let path_sets: Vec<ItemSet> = paths.iter().map(|(_, p)| p.edges.iter().copied().collect()).collect();
    let hit_by: Vec<Vec<usize>> = edges
        .iter()
        .map(|&e| (0..paths.len()).filter(|&j| path_sets[j].contains(e)).collect())
        .collect();
    let mut count = vec![0u32; paths.len()];
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    fn recurse(
        start: usize,
        k: usize,
        value: f64,
        hit_by: &[Vec<usize>],
        paths: &[(f64, &AttackerPath)],
        count: &mut [u32],
        chosen: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
    ) {
        if chosen.len() == k || start == hit_by.len() {
            if value > best.0 {
                *best = (value, chosen.clone());
            }
            return;
        }
        for i in start..hit_by.len() {
            let mut gained = value;
            for &j in &hit_by[i] {
                if count[j] == 0 {
                    gained += paths[j].0 * paths[j].1.value;
                }
                count[j] += 1;
            }
            chosen.push(i);
            recurse(i + 1, k, gained, hit_by, paths, count, chosen, best);
            chosen.pop();
            for &j in &hit_by[i] {
                count[j] -= 1;
            }
            if hit_by.len() - i - 1 < k - chosen.len() {
                break;
            }
        }
    }
    recurse(0, k, 0.0, &hit_by, paths, &mut count, &mut chosen, &mut best);
    best.1.into_iter().map(|i| edges[i]).collect()
}

impl DoubleOracleGame for NsgOracleGame<'_> {
    type Column = AttackerPath;

    fn payoff(&self, set: &ItemSet, column: &AttackerPath) -> f64 {
        if hits(set, column) {
            column.value
        } else {
            0.0
        }
    }

    fn defender_response(&mut self, columns: &[AttackerPath], weights: &[f64]) -> Result<ItemSet> {
        let active: Vec<(f64, &AttackerPath)> = weights
            .iter()
            .copied()
            .zip(columns)
            .filter(|(w, _)| *w > 0.0)
            .collect();
        let mut edges: Vec<usize> = active.iter().flat_map(|(_, p)| p.edges.iter().copied()).collect();
        edges.sort_unstable();
        edges.dedup();
        let k = self.game.resources();
        if edges.len() <= k {
            return Ok(edges.into_iter().collect());
        }
        if choose_capped(edges.len(), k, EXACT_SUBSET_LIMIT).is_finite() {
            return Ok(best_hitting_subset(&edges, k, &active));
        }
        let n = self.game.ground_size();
        let mut sets = vec![Vec::new(); n];
        for (j, (_, p)) in active.iter().enumerate() {
            for &e in &p.edges {
                sets[e].push(j);
            }
        }
        let weights: Vec<f64> = active.iter().map(|(w, p)| w * p.value).collect();
        let f = Coverage::deterministic(weights, sets)?;
        Ok(lazy_greedy(&f, &self.game.matroid()))
    }

    fn adversary_response(&mut self, strategy: &MixedStrategy) -> Result<AttackerPath> {
        if self.family.truncated {
            return Ok(self.game.mixture_response_exhaustive(strategy, self.deadline)?.0);
        }
        let (i, _) = self
            .family
            .worst_case(strategy)
            .ok_or_else(|| invalid("network has no attacker paths"))?;
        Ok(self.family.paths[i].clone())
    }
}

/// Double oracle on a network game with path cap `path_cap`.
pub fn nsg_double_oracle(
    game: &NetworkGame,
    path_cap: usize,
    cfg: &DoubleOracleConfig,
) -> Result<(DoubleOracleResult<AttackerPath>, PathFamily)> {
    let mut oracle = NsgOracleGame::new(game, path_cap, cfg.deadline)?;
    let (set, path) = oracle.initial()?;
    let res = double_oracle(&mut oracle, vec![set], vec![path], cfg)?;
    Ok((res, oracle.family))
}

/// Double-oracle view of robust budget allocation: greedy for the
/// advertiser (a (1 − 1/e) oracle, so the result is a baseline rather than
/// an exact value) and the exact knapsack adversary.
#[derive(Clone, Debug)]
pub struct BudgetOracleGame<'a> {
    pub game: &'a RobustBudget,
}

impl DoubleOracleGame for BudgetOracleGame<'_> {
    type Column = Vec<f64>;

    fn payoff(&self, set: &ItemSet, column: &Vec<f64>) -> f64 {
        let q = self.game.instance.coverage_of_set(set).expect("sets come from the ground set");
        q.iter().zip(column).map(|(q, w)| q * w).sum()
    }

    fn defender_response(&mut self, columns: &[Vec<f64>], weights: &[f64]) -> Result<ItemSet> {
        let mut avg = vec![0.0; self.game.instance.n_customers()];
        for (w, col) in weights.iter().zip(columns) {
            for (a, c) in avg.iter_mut().zip(col) {
                *a += w * c;
            }
        }
        let f = self.game.instance.objective(avg)?;
        Ok(lazy_greedy(&f, &self.game.instance.matroid()))
    }

    fn adversary_response(&mut self, strategy: &MixedStrategy) -> Result<Vec<f64>> {
        Ok(self.game.worst_case_strategy(strategy)?.0)
    }
}

pub fn budget_double_oracle(
    game: &RobustBudget,
    cfg: &DoubleOracleConfig,
) -> Result<DoubleOracleResult<Vec<f64>>> {
    let inst = &game.instance;
    let start = lazy_greedy(&inst.nominal_objective(), &inst.matroid());
    let n = inst.ground_size();
    let x = vec![inst.budget() as f64 / n as f64; n];
    let (w, _) = game.worst_at(&x)?;
    double_oracle(&mut BudgetOracleGame { game }, vec![start], vec![w], cfg)
}

/// Greedy against the nominal objective of a budget instance.
pub fn budget_greedy(game: &RobustBudget) -> ItemSet {
    lazy_greedy(&game.instance.nominal_objective(), &game.instance.matroid())
}

/// Greedy against the attacker's response to the uniform marginal.
pub fn nsg_greedy(game: &NetworkGame) -> Result<ItemSet> {
    let n = game.ground_size();
    let x = vec![(game.resources() as f64 / n as f64).min(1.0); n];
    let (path, _) = game.best_path(&x)?;
    Ok(lazy_greedy(&game.path_objective(&path), &game.matroid()))
}

/// Wraps handles as an explicit game over all independent sets of `m`.
pub fn explicit_game(m: &Matroid, functions: Vec<Handle>, limit: usize) -> Result<ExplicitGame> {
    Ok(ExplicitGame {
        sets: independent_sets(m, limit)?,
        functions,
    })
}

pub fn handles<F: SetFunction + 'static>(fs: Vec<F>) -> Vec<Handle> {
    fs.into_iter().map(|f| Arc::new(f) as Handle).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Modular;
    use crate::nsg::Target;

    fn solve(rows: Vec<Vec<f64>>) -> MatrixSolution {
        solve_matrix_game(&MatrixGame::new(rows).unwrap(), 1e-9).unwrap()
    }

    #[test]
    fn matrix_game_examples() {
        let s = solve(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!((s.value - 0.5).abs() < 1e-9);
        assert!((s.row[0] - 0.5).abs() < 1e-9 && (s.col[0] - 0.5).abs() < 1e-9);
        assert!((solve(vec![vec![2.0]]).value - 2.0).abs() < 1e-12);
        let s = solve(vec![vec![3.0, 1.0], vec![1.0, 3.0]]);
        assert!((s.value - 2.0).abs() < 1e-9 && (s.row[0] - 0.5).abs() < 1e-9);
        assert!(MatrixGame::new(vec![]).is_err());
        assert!(MatrixGame::new(vec![vec![]]).is_err());
    }

    #[test]
    fn dominated_rows_get_no_weight() {
        let s = solve(vec![vec![0.0, 0.0], vec![5.0, 4.0]]);
        assert!((s.value - 4.0).abs() < 1e-9);
        assert!(s.row[0].abs() < 1e-12);
    }

    #[test]
    fn lazy_greedy_coverage_example() {
        // A1 = {1, 2}, A2 = {2, 3}, A3 = {4} over elements 1..=4 (shifted to 0..4).
        let f = Coverage::deterministic(vec![1.0; 4], vec![vec![0, 1], vec![1, 2], vec![3]]).unwrap();
        let m = Matroid::uniform(3, 2).unwrap();
        let s = lazy_greedy(&f, &m);
        assert_eq!(s, ItemSet::new([0, 1]));
        assert_eq!(f.value(&s), 3.0);
        assert_eq!(greedy(&f, &m), s);
        let all = Matroid::uniform(3, 5).unwrap();
        assert_eq!(lazy_greedy(&f, &all), ItemSet::new([0, 1, 2]));
    }

    #[test]
    fn modular_greedy_is_top_k() {
        let f = Modular::new(vec![0.3, 0.9, 0.0, 0.5]).unwrap();
        let m = Matroid::uniform(4, 2).unwrap();
        assert_eq!(lazy_greedy(&f, &m), m.linear_opt(f.weights()));
    }

    #[test]
    fn matching_pennies_double_oracle() {
        let m = Matroid::uniform(2, 1).unwrap();
        let fs = handles(vec![Modular::new(vec![1.0, 0.0]).unwrap(), Modular::new(vec![0.0, 1.0]).unwrap()]);
        let mut g = explicit_game(&m, fs.clone(), 100).unwrap();
        let res = double_oracle(&mut g, vec![ItemSet::new([0])], vec![0], &DoubleOracleConfig::default()).unwrap();
        assert!(res.converged);
        assert!((res.value - 0.5).abs() < 1e-6);
        assert!((worst_case_enumerated(&res.defender, &fs) - 0.5).abs() < 1e-6);
        let bf = brute_force_minimax(&g.sets, &fs, 1e-9).unwrap();
        assert!((bf.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn single_function_game_is_maximization() {
        let m = Matroid::uniform(3, 2).unwrap();
        let f = Coverage::deterministic(vec![1.0; 4], vec![vec![0, 1], vec![1, 2], vec![3]]).unwrap();
        let mut g = explicit_game(&m, handles(vec![f]), 100).unwrap();
        let res = double_oracle(&mut g, vec![ItemSet::empty()], vec![0], &DoubleOracleConfig::default()).unwrap();
        assert!((res.value - 3.0).abs() < 1e-6);
    }

    #[test]
    fn tiny_network_value() {
        let g = NetworkGame::new(
            6,
            vec![(0, 1), (1, 2), (3, 4), (4, 5)],
            vec![0, 3],
            vec![Target { vertex: 2, value: 10.0 }, Target { vertex: 5, value: 4.0 }],
            1,
        )
        .unwrap();
        let (res, family) = nsg_double_oracle(&g, 100, &DoubleOracleConfig::default()).unwrap();
        assert!(res.converged);
        assert!((res.value - 20.0 / 7.0).abs() < 1e-6, "{}", res.value);
        let wc = worst_case_nsg(&g, &family, &res.defender).unwrap();
        assert!(wc.exact);
        assert!((wc.value - 20.0 / 7.0).abs() < 1e-6);
    }

    #[test]
    fn independent_set_listing() {
        let m = Matroid::uniform(4, 2).unwrap();
        assert_eq!(independent_sets(&m, 100).unwrap().len(), 1 + 4 + 6);
        assert!(independent_sets(&m, 5).is_err());
    }

    #[test]
    fn brute_force_size_guard() {
        let sets = vec![ItemSet::empty(); 1001];
        let fs = handles((0..1000).map(|_| Modular::new(vec![1.0]).unwrap()).collect());
        assert!(matches!(brute_force_minimax(&sets, &fs, 1e-9), Err(Error::SizeLimit(_))));
    }
}
