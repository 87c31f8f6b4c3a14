//! Robust budget allocation.
//!
//! An advertiser splits `B` units of budget across channels `L`; channel `s`
//! reaches customer `v` independently with probability `p_sv` per unit.
//! Customer values are uncertain inside a D-norm set around a point
//! estimate `ŵ`, and the adversary picks the values after seeing the
//! advertiser's (mixed) allocation. Each channel appears as `B` copies in
//! the ground set (copies of channel `s` are items `s·B .. s·B + B`) and the
//! allocation is any set of at most `B` items.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;

use crate::equilibria::MixedStrategy;
use crate::error::{invalid, Error, Result};
use crate::function::{check_marginals, Coverage, Handle};
use crate::game::{Adversary, MixtureAdversary};
use crate::items::ItemSet;
use crate::matroid::Matroid;
use crate::rng::stream;

#[derive(Clone, Debug, PartialEq)]
pub struct BudgetInstance {
    n_channels: usize,
    n_customers: usize,
    /// `(customer, p)` pairs per channel, customers ascending.
    by_channel: Vec<Vec<(usize, f64)>>,
    /// `(channel, p)` pairs per customer, channels ascending.
    by_customer: Vec<Vec<(usize, f64)>>,
    w_hat: Vec<f64>,
    budget: usize,
}

impl BudgetInstance {
    /// `probs` lists `(channel, customer, p)`; repeated pairs are rejected.
    pub fn new(
        n_channels: usize,
        n_customers: usize,
        probs: &[(usize, usize, f64)],
        w_hat: Vec<f64>,
        budget: usize,
    ) -> Result<Self> {
        if n_channels == 0 || n_customers == 0 {
            return Err(invalid("instance needs at least one channel and one customer"));
        }
        if budget == 0 {
            return Err(invalid("budget must be at least 1"));
        }
        if w_hat.len() != n_customers {
            return Err(invalid("one nominal value per customer required"));
        }
        if w_hat.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("nominal values must be finite and nonnegative"));
        }
        let mut table = BTreeMap::new();
        for &(s, v, p) in probs {
            if s >= n_channels || v >= n_customers {
                return Err(invalid(format!("edge ({s}, {v}) out of range")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("probability {p} outside [0, 1]")));
            }
            if table.insert((s, v), p).is_some() {
                return Err(invalid(format!("edge ({s}, {v}) listed twice")));
            }
        }
        let mut by_channel = vec![Vec::new(); n_channels];
        let mut by_customer = vec![Vec::new(); n_customers];
        for (&(s, v), &p) in &table {
            by_channel[s].push((v, p));
            by_customer[v].push((s, p));
        }
        for list in &mut by_customer {
            list.sort_by_key(|&(s, _)| s);
        }
        Ok(BudgetInstance {
            n_channels,
            n_customers,
            by_channel,
            by_customer,
            w_hat,
            budget,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_customers(&self) -> usize {
        self.n_customers
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn w_hat(&self) -> &[f64] {
        &self.w_hat
    }

    pub fn channel_edges(&self, channel: usize) -> &[(usize, f64)] {
        &self.by_channel[channel]
    }

    /// `n = B·|L|`.
    pub fn ground_size(&self) -> usize {
        self.budget * self.n_channels
    }

    pub fn channel_of(&self, item: usize) -> usize {
        item / self.budget
    }

    pub fn matroid(&self) -> Matroid {
        Matroid::uniform(self.ground_size(), self.budget).expect("budget >= 1")
    }

    /// Upper bound `W = Σ_v ŵ_v` on any objective value.
    pub fn value_bound(&self) -> f64 {
        self.w_hat.iter().sum()
    }

    /// Coverage objective `f_w` on the copy ground set.
    pub fn objective(&self, weights: Vec<f64>) -> Result<Coverage> {
        if weights.len() != self.n_customers {
            return Err(invalid("one weight per customer required"));
        }
        let cover = (0..self.ground_size())
            .map(|i| self.by_channel[self.channel_of(i)].clone())
            .collect();
        Coverage::new(weights, cover)
    }

    pub fn nominal_objective(&self) -> Coverage {
        self.objective(self.w_hat.clone()).expect("validated at construction")
    }

    /// `q_v = 1 − Π_i (1 − x_i p_{s(i)v})`.
    pub fn coverage_probs(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_marginals(x, self.ground_size())?;
        Ok(self
            .by_customer
            .iter()
            .map(|list| {
                let mut miss = 1.0;
                for &(s, p) in list {
                    for b in 0..self.budget {
                        miss *= 1.0 - x[s * self.budget + b] * p;
                    }
                }
                1.0 - miss
            })
            .collect())
    }

    /// `q_v` for the deterministic allocation `set`.
    pub fn coverage_of_set(&self, set: &ItemSet) -> Result<Vec<f64>> {
        set.check_range(self.ground_size())?;
        let mut miss = vec![1.0; self.n_customers];
        for i in set.iter() {
            for &(v, p) in &self.by_channel[self.channel_of(i)] {
                miss[v] *= 1.0 - p;
            }
        }
        Ok(miss.into_iter().map(|m| 1.0 - m).collect())
    }

    pub fn to_text(&self, uncertainty: &DNormSet) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "budget {} {} {} {}",
            self.n_channels, self.n_customers, self.budget, uncertainty.gamma
        )
        .unwrap();
        for (ch, list) in self.by_channel.iter().enumerate() {
            for &(v, p) in list {
                writeln!(s, "p {ch} {v} {p}").unwrap();
            }
        }
        for (v, w) in self.w_hat.iter().enumerate() {
            writeln!(s, "w {v} {w}").unwrap();
        }
        s
    }

    /// Parses the instance format; customers without a `w` line get 1.0.
    pub fn from_text(text: &str) -> Result<(BudgetInstance, DNormSet)> {
        let mut header: Option<(usize, usize, usize, f64)> = None;
        let mut probs = Vec::new();
        let mut weights: Vec<Option<f64>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let perr = |message: String| Error::Parse { line: line_no, message };
            let int = |i: usize| -> Result<usize> {
                f[i].parse().map_err(|e| perr(format!("bad integer `{}`: {e}", f[i])))
            };
            let real = |i: usize| -> Result<f64> {
                f[i].parse().map_err(|e| perr(format!("bad number `{}`: {e}", f[i])))
            };
            match (f[0], f.len(), header) {
                ("budget", 5, None) => {
                    let h = (int(1)?, int(2)?, int(3)?, real(4)?);
                    weights = vec![None; h.1];
                    header = Some(h);
                }
                ("p", 4, Some(_)) => probs.push((int(1)?, int(2)?, real(3)?)),
                ("w", 3, Some((_, n_cust, _, _))) => {
                    let v = int(1)?;
                    if v >= n_cust {
                        return Err(perr(format!("customer {v} out of range")));
                    }
                    weights[v] = Some(real(2)?);
                }
                (_, _, None) => {
                    return Err(perr("expected `budget <L> <R> <B> <gamma>` header first".into()))
                }
                _ => return Err(perr(format!("unrecognized line `{line}`"))),
            }
        }
        let (l, r, b, gamma) =
            header.ok_or(Error::Parse { line: 0, message: "empty instance file".into() })?;
        let w_hat: Vec<f64> = weights.into_iter().map(|w| w.unwrap_or(1.0)).collect();
        let inst = BudgetInstance::new(l, r, &probs, w_hat.clone(), b)?;
        let u = DNormSet::new(gamma, w_hat)?;
        Ok((inst, u))
    }
}

/// `{ w : w_v = (1 − c_v) ŵ_v, c ∈ [0,1]^R, Σ c_v ≤ γ }`.
#[derive(Clone, Debug, PartialEq)]
pub struct DNormSet {
    gamma: f64,
    base: Vec<f64>,
}

impl DNormSet {
    pub fn new(gamma: f64, base: Vec<f64>) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid(format!("gamma {gamma} must be finite and nonnegative")));
        }
        Ok(DNormSet { gamma, base })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    /// Number of integral vertices `C(|R|, ⌈γ⌉)`, capped at `cap`.
    pub fn vertex_count(&self, cap: f64) -> f64 {
        let n = self.base.len() as f64;
        let k = self.gamma.ceil().min(n);
        let mut c = 1.0;
        let mut i = 0.0;
        while i < k {
            c = c * (n - i) / (i + 1.0);
            if c >= cap {
                return cap;
            }
            i += 1.0;
        }
        c.max(1.0)
    }
}

/// Minimizes `Σ_v w_v q_v` over the D-norm set: the `⌊γ⌋` customers with
/// the largest `ŵ_v q_v` are zeroed, the next one is reduced by the
/// fractional remainder. Ties go to the lower customer index.
pub fn dnorm_worst_weights(u: &DNormSet, q: &[f64]) -> Result<(Vec<f64>, f64)> {
    if q.len() != u.base.len() {
        return Err(invalid("coverage vector length differs from the number of customers"));
    }
    let contrib: Vec<f64> = u.base.iter().zip(q).map(|(w, q)| w * q).collect();
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by(|&a, &b| contrib[b].total_cmp(&contrib[a]).then(a.cmp(&b)));
    let mut w = u.base.clone();
    let mut left = u.gamma;
    for &v in &order {
        if left <= 0.0 {
            break;
        }
        let c = left.min(1.0);
        w[v] = (1.0 - c) * u.base[v];
        left -= c;
    }
    let value = w.iter().zip(q).map(|(w, q)| w * q).sum();
    Ok((w, value))
}

/// A budget instance with its uncertainty set; the adversary of the game.
#[derive(Clone, Debug)]
pub struct RobustBudget {
    pub instance: Arc<BudgetInstance>,
    pub uncertainty: DNormSet,
}

impl RobustBudget {
    pub fn new(instance: BudgetInstance, uncertainty: DNormSet) -> Result<Self> {
        if uncertainty.base.len() != instance.n_customers {
            return Err(invalid("uncertainty set and instance disagree on customers"));
        }
        Ok(RobustBudget {
            instance: Arc::new(instance),
            uncertainty,
        })
    }

    /// Worst-case weights and value against marginals `x`.
    pub fn worst_at(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        dnorm_worst_weights(&self.uncertainty, &self.instance.coverage_probs(x)?)
    }

    /// Worst-case weights and value against a uniform mixture of
    /// independent distributions.
    pub fn worst_at_mixture(&self, points: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
        if points.is_empty() {
            return Err(invalid("mixture has no points"));
        }
        let mut q_bar = vec![0.0; self.instance.n_customers];
        for x in points {
            for (acc, q) in q_bar.iter_mut().zip(self.instance.coverage_probs(x)?) {
                *acc += q / points.len() as f64;
            }
        }
        dnorm_worst_weights(&self.uncertainty, &q_bar)
    }

    /// Exact `min_w E_{S~strategy}[f_w(S)]`: the adversary commits to `w`
    /// before the allocation is drawn, so only the averaged coverage matters.
    pub fn worst_case_strategy(&self, strategy: &MixedStrategy) -> Result<(Vec<f64>, f64)> {
        let mut q_bar = vec![0.0; self.instance.n_customers];
        for (p, set) in strategy.iter() {
            for (acc, q) in q_bar.iter_mut().zip(self.instance.coverage_of_set(set)?) {
                *acc += p * q;
            }
        }
        dnorm_worst_weights(&self.uncertainty, &q_bar)
    }

    /// Surrogate for the number of adversary strategies.
    pub fn family_size_surrogate(&self) -> f64 {
        self.uncertainty.vertex_count(1e6)
    }
}

impl Adversary for RobustBudget {
    fn ground_size(&self) -> usize {
        self.instance.ground_size()
    }

    fn best_response(&self, x: &[f64]) -> Result<Handle> {
        budget_bri(self, x)
    }
}

impl MixtureAdversary for RobustBudget {
    fn ground_size(&self) -> usize {
        self.instance.ground_size()
    }

    fn best_response_mixture(&self, points: &[Vec<f64>]) -> Result<Handle> {
        budget_brmi(self, points)
    }
}

/// Coverage objective under the adversary's best weights against `x`.
pub fn budget_bri(game: &RobustBudget, x: &[f64]) -> Result<Handle> {
    let (w, _) = game.worst_at(x)?;
    Ok(Arc::new(game.instance.objective(w)?))
}

/// Coverage objective under the adversary's best weights against the
/// uniform mixture of `points`.
pub fn budget_brmi(game: &RobustBudget, points: &[Vec<f64>]) -> Result<Handle> {
    let (w, _) = game.worst_at_mixture(points)?;
    Ok(Arc::new(game.instance.objective(w)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteParams {
    /// `|L| = |R| = n`.
    pub n: usize,
    pub edge_prob: f64,
    /// Edge probabilities are uniform in `[0, p_hi]`.
    pub p_hi: f64,
    pub w_lo: f64,
    pub w_hi: f64,
    /// `γ = gamma_frac · n`.
    pub gamma_frac: f64,
    /// Defaults to `5 + ⌊n / 100⌋`.
    pub budget: Option<usize>,
}

impl BipartiteParams {
    pub fn standard(n: usize) -> Self {
        BipartiteParams {
            n,
            edge_prob: 0.2,
            p_hi: 0.2,
            w_lo: 0.5,
            w_hi: 1.5,
            gamma_frac: 0.5,
            budget: None,
        }
    }

    fn check(&self) -> Result<()> {
        let ok = self.n > 0
            && (0.0..=1.0).contains(&self.edge_prob)
            && (0.0..=1.0).contains(&self.p_hi)
            && 0.0 <= self.w_lo
            && self.w_lo <= self.w_hi
            && self.gamma_frac >= 0.0
            && self.budget != Some(0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid bipartite parameters {self:?}")))
        }
    }
}

/// Random bipartite instance with `|L| = |R| = n`.
pub fn generate_bipartite(params: &BipartiteParams, seed: u64) -> Result<(BudgetInstance, DNormSet)> {
    params.check()?;
    let n = params.n;
    let mut rng = stream(seed, 0);
    let mut probs = Vec::new();
    for s in 0..n {
        for v in 0..n {
            if rng.gen::<f64>() < params.edge_prob {
                probs.push((s, v, rng.gen_range(0.0..=params.p_hi)));
            }
        }
    }
    let w_hat: Vec<f64> = (0..n).map(|_| rng.gen_range(params.w_lo..=params.w_hi)).collect();
    let budget = params.budget.unwrap_or(5 + n / 100);
    let inst = BudgetInstance::new(n, n, &probs, w_hat.clone(), budget)?;
    let u = DNormSet::new(params.gamma_frac * n as f64, w_hat)?;
    Ok((inst, u))
}

/// An instance on which nominal greedy has no robustness: customers
/// `0..n/2` are worth ten times the rest, are reached only by channels
/// `0..n/2`, and the adversary may zero `n/2` customers. Every customer is
/// reached by at least one channel.
pub fn generate_skewed(n: usize, budget: usize, seed: u64) -> Result<(BudgetInstance, DNormSet)> {
    if n < 2 || budget == 0 {
        return Err(Error::Config("skewed instance needs n >= 2 and budget >= 1".into()));
    }
    let half = n / 2;
    let mut rng = stream(seed, 0);
    let mut probs = Vec::new();
    let block = |i: usize| usize::from(i >= half);
    for v in 0..n {
        let (lo, hi) = if block(v) == 0 { (0, half) } else { (half, n) };
        let forced = rng.gen_range(lo..hi);
        for s in lo..hi {
            if s == forced || rng.gen::<f64>() < 0.3 {
                probs.push((s, v, rng.gen_range(0.05..=0.3)));
            }
        }
    }
    let w_hat: Vec<f64> = (0..n)
        .map(|v| if block(v) == 0 { 10.0 } else { 1.0 })
        .collect();
    let inst = BudgetInstance::new(n, n, &probs, w_hat.clone(), budget)?;
    let u = DNormSet::new(half as f64, w_hat)?;
    Ok((inst, u))
}

/// Bid records grouped by phrase (channel) and account (customer).
#[derive(Clone, Debug, Default)]
pub struct BidTable {
    pub phrases: Vec<String>,
    pub accounts: Vec<String>,
    /// `(phrase, account) -> p`, with repeated records combined.
    pub probs: BTreeMap<(usize, usize), f64>,
    /// Declared account values; the largest declaration wins.
    pub values: Vec<Option<f64>>,
}

/// Reads `<phrase_id> <account_id> <p> [w]` records. Repeated
/// `(phrase, account)` pairs combine as `1 − Π(1 − p)`; an account's value
/// is the largest `w` declared for it, or 1.0 if none is.
pub fn ingest_bids<R: BufRead>(reader: R) -> Result<BidTable> {
    let mut table = BidTable::default();
    let mut phrase_ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut account_ids: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let f: Vec<&str> = body.split_whitespace().collect();
        let perr = |message: String| Error::Parse { line: line_no, message };
        if f.len() != 3 && f.len() != 4 {
            return Err(perr(format!("expected 3 or 4 fields, found {}", f.len())));
        }
        let p: f64 = f[2].parse().map_err(|e| perr(format!("bad probability: {e}")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(perr(format!("probability {p} outside [0, 1]")));
        }
        let w = match f.get(3) {
            Some(raw) => {
                let w: f64 = raw.parse().map_err(|e| perr(format!("bad value: {e}")))?;
                if !(w.is_finite() && w >= 0.0) {
                    return Err(perr(format!("value {w} must be nonnegative")));
                }
                Some(w)
            }
            None => None,
        };
        let next_phrase = phrase_ids.len();
        let s = *phrase_ids.entry(f[0].to_string()).or_insert_with(|| {
            table.phrases.push(f[0].to_string());
            next_phrase
        });
        let next_account = account_ids.len();
        let v = *account_ids.entry(f[1].to_string()).or_insert_with(|| {
            table.accounts.push(f[1].to_string());
            table.values.push(None);
            next_account
        });
        let slot = table.probs.entry((s, v)).or_insert(0.0);
        *slot = 1.0 - (1.0 - *slot) * (1.0 - p);
        if let Some(w) = w {
            table.values[v] = Some(table.values[v].map_or(w, |old| old.max(w)));
        }
    }
    if table.probs.is_empty() {
        return Err(invalid("bid file contains no records"));
    }
    Ok(table)
}

impl BidTable {
    /// Keeps `n_channels` phrases chosen at random (all of them if fewer
    /// exist) and the accounts they reach, in original order.
    pub fn subsample(&self, n_channels: usize, seed: u64) -> BidTable {
        if n_channels >= self.phrases.len() {
            return self.clone();
        }
        let mut rng = stream(seed, 0);
        let mut keep = sample(&mut rng, self.phrases.len(), n_channels).into_vec();
        keep.sort_unstable();
        let phrase_map: BTreeMap<usize, usize> =
            keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let mut reached: Vec<usize> = self
            .probs
            .keys()
            .filter(|(s, _)| phrase_map.contains_key(s))
            .map(|&(_, v)| v)
            .collect();
        reached.sort_unstable();
        reached.dedup();
        let account_map: BTreeMap<usize, usize> =
            reached.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        BidTable {
            phrases: keep.iter().map(|&s| self.phrases[s].clone()).collect(),
            accounts: reached.iter().map(|&v| self.accounts[v].clone()).collect(),
            probs: self
                .probs
                .iter()
                .filter_map(|(&(s, v), &p)| Some(((*phrase_map.get(&s)?, *account_map.get(&v)?), p)))
                .collect(),
            values: reached.iter().map(|&v| self.values[v]).collect(),
        }
    }

    pub fn into_instance(&self, budget: usize, gamma: f64) -> Result<(BudgetInstance, DNormSet)> {
        let probs: Vec<(usize, usize, f64)> =
            self.probs.iter().map(|(&(s, v), &p)| (s, v, p)).collect();
        let w_hat: Vec<f64> = self.values.iter().map(|w| w.unwrap_or(1.0)).collect();
        let inst = BudgetInstance::new(
            self.phrases.len(),
            self.accounts.len(),
            &probs,
            w_hat.clone(),
            budget,
        )?;
        Ok((inst, DNormSet::new(gamma, w_hat)?))
    }
}
