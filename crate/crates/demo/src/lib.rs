//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function takes plain numbers and returns a JSON string the
//! page draws from. The same computations are available as ordinary Rust
//! functions returning [`serde_json::Value`], which is what the tests call.

use rand::Rng;
use sbr_core::baselines::{budget_greedy, nsg_greedy, worst_case_budget, worst_case_nsg};
use sbr_core::budget::{generate_bipartite, generate_skewed, BipartiteParams, RobustBudget};
use sbr_core::equilibria::equator_mixed;
use sbr_core::game::Adversary;
use sbr_core::matroid::{ConvexDecomposition, Matroid};
use sbr_core::nsg::{generate_geometric, GeometricParams, NetworkGame, ResourceRule};
use sbr_core::optimizer::{sfw_run, ProblemOracles, SfwConfig, SfwResult};
use sbr_core::rng::{derive_seed, stream};
use sbr_core::{Error, ItemSet, MixedStrategy, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Paths enumerated when scoring NSG strategies; larger graphs fall back to
/// an upper bound.
const PATH_CAP: usize = 2_000;
const EPS: f64 = 0.5;
const DELTA: f64 = 0.1;

fn run_solver(adversary: &dyn Adversary, m: &Matroid, k: usize, c: usize, u: f64, seed: u64) -> Result<SfwResult> {
    let mut cfg = SfwConfig::practical(k, c, u, derive_seed(seed, 1));
    cfg.record_trace = true;
    sfw_run(&ProblemOracles::new(adversary, m), &cfg)
}

fn trace_values(res: &SfwResult) -> Vec<f64> {
    res.trace.iter().filter_map(|t| t.value).collect()
}

fn nsg_instance(n_nodes: usize, density: f64, resources: usize, seed: u64) -> Result<NetworkGame> {
    let params = GeometricParams {
        n_nodes,
        density,
        value_lo: 0.0,
        value_hi: 100.0,
        resources: ResourceRule::Fixed(resources),
        n_source_target: 2,
    };
    generate_geometric(&params, seed)
}

/// Generate a geometric network, run the solver, and report the per-edge
/// patrol probabilities together with worst-case values of the solver's
/// mixed strategy and of greedy.
pub fn nsg_solve(
    n_nodes: usize,
    density: f64,
    resources: usize,
    iterations: usize,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<Value> {
    let game = nsg_instance(n_nodes, density, resources, seed)?;
    let m = game.matroid();
    let res = run_solver(&game, &m, iterations, samples, radius, seed)?;
    let strategy = equator_mixed(
        &res,
        &m,
        EPS,
        DELTA,
        game.family_size_surrogate(PATH_CAP),
        derive_seed(seed, 2),
    )?;
    let family = game.enumerate_paths(PATH_CAP)?;
    let equator = worst_case_nsg(&game, &family, &strategy)?;
    let greedy = worst_case_nsg(&game, &family, &MixedStrategy::pure(nsg_greedy(&game)?))?;
    let positions: Vec<[f64; 2]> = game
        .positions()
        .map(|p| p.iter().map(|&(a, b)| [a, b]).collect())
        .unwrap_or_default();
    let targets: Vec<Value> = game
        .targets()
        .iter()
        .map(|t| json!({ "vertex": t.vertex, "value": t.value }))
        .collect();
    let (path, _) = game.best_path(&strategy.marginals(game.ground_size()))?;
    Ok(json!({
        "positions": positions,
        "edges": game.edges(),
        "sources": game.sources(),
        "targets": targets,
        "resources": game.resources(),
        "x": res.x_final,
        "marginals": strategy.marginals(game.ground_size()),
        "attack_path": path.edges.as_slice(),
        "trace": trace_values(&res),
        "equator": equator.value,
        "greedy": greedy.value,
        "exact": equator.exact,
        "support": strategy.support().len(),
    }))
}

/// Robust budget allocation: solver trace, per-channel budget split, and
/// worst-case profit of the solver's mixed strategy against nominal greedy.
#[allow(clippy::too_many_arguments)]
pub fn budget_solve(
    n: usize,
    skewed: bool,
    gamma_frac: f64,
    budget: usize,
    iterations: usize,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<Value> {
    let (inst, u) = if skewed {
        generate_skewed(n, budget, seed)?
    } else {
        let mut p = BipartiteParams::standard(n);
        p.gamma_frac = gamma_frac;
        p.budget = Some(budget);
        generate_bipartite(&p, seed)?
    };
    let game = RobustBudget::new(inst, u)?;
    let m = game.instance.matroid();
    let res = run_solver(&game, &m, iterations, samples, radius, seed)?;
    let strategy = equator_mixed(&res, &m, EPS, DELTA, game.family_size_surrogate(), derive_seed(seed, 2))?;
    let equator = worst_case_budget(&game, &strategy)?.value;
    let greedy = worst_case_budget(&game, &MixedStrategy::pure(budget_greedy(&game)))?.value;
    let b = game.instance.budget();
    let allocation: Vec<f64> = res.x_final.chunks(b).map(|c| c.iter().sum()).collect();
    let (weights, _) = game.worst_at(&res.x_final)?;
    Ok(json!({
        "channels": game.instance.n_channels(),
        "customers": game.instance.n_customers(),
        "budget": b,
        "gamma": game.uncertainty.gamma(),
        "allocation": allocation,
        "coverage": game.instance.coverage_probs(&res.x_final)?,
        "w_hat": game.instance.w_hat(),
        "w_worst": weights,
        "trace": trace_values(&res),
        "equator": equator,
        "greedy": greedy,
        "support": strategy.support().len(),
    }))
}

/// Draw `draws` swap-roundings of a random convex combination of `terms`
/// bases of the rank-`k` uniform matroid on `n` items, and compare the
/// empirical inclusion frequencies with the fractional point.
pub fn swap_rounding(n: usize, k: usize, terms: usize, draws: usize, seed: u64) -> Result<Value> {
    if terms == 0 || draws == 0 || draws > 1_000_000 {
        return Err(Error::Config("need terms >= 1 and 1 <= draws <= 10^6".into()));
    }
    let m = Matroid::uniform(n, k)?;
    let mut rng = stream(seed, 0);
    let raw: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let sets: Vec<(f64, ItemSet)> = raw
        .iter()
        .map(|r| {
            let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            (r / total, m.linear_opt(&w))
        })
        .collect();
    let decomposition = ConvexDecomposition::new(sets)?;
    let x = decomposition.point(n);
    let mut counts = vec![0usize; n];
    let mut examples = Vec::new();
    for i in 0..draws {
        let set = m.swap_round(&decomposition, &mut stream(seed, 1 + i as u64))?;
        for j in set.iter() {
            counts[j] += 1;
        }
        if examples.len() < 8 {
            examples.push(set.as_slice().to_vec());
        }
    }
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / draws as f64).collect();
    let terms: Vec<Value> = decomposition
        .terms()
        .iter()
        .map(|(w, s)| json!({ "weight": w, "set": s.as_slice() }))
        .collect();
    Ok(json!({ "x": x, "frequency": freq, "terms": terms, "examples": examples }))
}

fn to_js(v: Result<Value>) -> std::result::Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = nsgSolve)]
pub fn nsg_solve_js(
    n_nodes: usize,
    density: f64,
    resources: usize,
    iterations: usize,
    samples: usize,
    radius: f64,
    seed: u32,
) -> std::result::Result<String, JsValue> {
    to_js(nsg_solve(n_nodes, density, resources, iterations, samples, radius, seed.into()))
}

#[wasm_bindgen(js_name = budgetSolve)]
#[allow(clippy::too_many_arguments)]
pub fn budget_solve_js(
    n: usize,
    skewed: bool,
    gamma_frac: f64,
    budget: usize,
    iterations: usize,
    samples: usize,
    radius: f64,
    seed: u32,
) -> std::result::Result<String, JsValue> {
    to_js(budget_solve(n, skewed, gamma_frac, budget, iterations, samples, radius, seed.into()))
}

#[wasm_bindgen(js_name = swapRounding)]
pub fn swap_rounding_js(n: usize, k: usize, terms: usize, draws: usize, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(swap_rounding(n, k, terms, draws, seed.into()))
}
