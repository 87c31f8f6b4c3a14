//! Acceptance suite. Runs every acceptance criterion at its stated
//! tolerance, prints one PASS/FAIL line per criterion and exits nonzero if
//! any fails. Built without the test harness so the lines always show.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use rand::Rng;
use sbr_core::baselines::{
    brute_force_minimax, budget_greedy, double_oracle, independent_sets, nsg_double_oracle,
    DoubleOracleConfig, ExplicitGame,
};
use sbr_core::budget::{
    dnorm_worst_weights, generate_bipartite, generate_skewed, BipartiteParams, DNormSet, RobustBudget,
};
use sbr_core::equilibria::MixedStrategy;
use sbr_core::experiment::{evaluate, solve, Algorithm, Instance, SolveParams};
use sbr_core::function::multilinear_value;
use sbr_core::game::EnumeratedFamily;
use sbr_core::matroid::Matroid;
use sbr_core::nsg::{generate_geometric, GeometricParams, NetworkGame, ResourceRule};
use sbr_core::optimizer::{sfw_run, ProblemOracles, SfwConfig};
use sbr_core::rng::stream;
use sbr_core::{ItemSet, SetFunction};

use common::*;

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Verdict {
            passed,
            detail: detail.into(),
        }
    }
}

const PATH_LIMIT: usize = 10_000;

fn nsg_params(n_nodes: usize) -> GeometricParams {
    GeometricParams {
        n_nodes,
        density: 0.1,
        value_lo: 0.0,
        value_hi: 100.0,
        resources: ResourceRule::Fixed(2),
        n_source_target: 2,
    }
}

/// The first 20 seeds whose instance has at most 10^4 attacker paths.
fn enumerable_networks(count: usize) -> Vec<(u64, NetworkGame)> {
    let mut out = Vec::new();
    for seed in 0..1000u64 {
        let g = generate_geometric(&nsg_params(30), seed).expect("generator");
        if !g.enumerate_paths(PATH_LIMIT).unwrap().truncated {
            out.push((seed, g));
        }
        if out.len() == count {
            break;
        }
    }
    out
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let params = SolveParams::default();
    let mut wins = 0;
    let mut worst_ratio = f64::INFINITY;
    let instances = enumerable_networks(20);
    for (seed, g) in &instances {
        let inst = Instance::Nsg(g.clone());
        let eq = solve(&inst, Algorithm::Equator, &params, *seed, None).unwrap();
        let dbl = solve(&inst, Algorithm::DoubleOracle, &params, *seed, None).unwrap();
        let eq_v = evaluate(&inst, &eq, PATH_LIMIT).unwrap();
        let do_v = evaluate(&inst, &dbl, PATH_LIMIT).unwrap();
        assert!(eq_v.exact && do_v.exact);
        let ratio = eq_v.value / do_v.value;
        worst_ratio = worst_ratio.min(ratio);
        if eq_v.value >= 0.85 * do_v.value {
            wins += 1;
        }
    }
    Verdict::new(
        instances.len() == 20 && wins >= 17,
        format!(
            "{wins}/{} instances with EQUATOR >= 0.85 x double oracle (worst ratio {worst_ratio:.3}, {:.1}s)",
            instances.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn budget_game(seed: u64) -> RobustBudget {
    let mut p = BipartiteParams::standard(40);
    p.budget = Some(5);
    let (inst, u) = generate_bipartite(&p, seed).unwrap();
    assert_eq!(u.gamma(), 20.0);
    RobustBudget::new(inst, u).unwrap()
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let params = SolveParams::default();
    let mut wins = 0;
    let mut worst_ratio = f64::INFINITY;
    for seed in 0..20u64 {
        let inst = Instance::Budget(budget_game(seed));
        let eq = solve(&inst, Algorithm::Equator, &params, seed, None).unwrap();
        let dbl = solve(&inst, Algorithm::DoubleOracle, &params, seed, None).unwrap();
        let eq_v = evaluate(&inst, &eq, PATH_LIMIT).unwrap().value;
        let do_v = evaluate(&inst, &dbl, PATH_LIMIT).unwrap().value;
        worst_ratio = worst_ratio.min(eq_v / do_v);
        if eq_v >= 0.85 * do_v {
            wins += 1;
        }
    }
    Verdict::new(
        wins >= 17,
        format!(
            "{wins}/20 instances with EQUATOR >= 0.85 x double oracle (worst ratio {worst_ratio:.3}, {:.1}s)",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_3() -> Verdict {
    let params = SolveParams::default();
    let mut wins = 0;
    let mut summary = Vec::new();
    for seed in 0..20u64 {
        let (inst, u) = generate_skewed(40, 5, seed).unwrap();
        let game = RobustBudget::new(inst, u).unwrap();
        let greedy_v = game
            .worst_case_strategy(&MixedStrategy::pure(budget_greedy(&game)))
            .unwrap()
            .1;
        let inst = Instance::Budget(game);
        let eq = solve(&inst, Algorithm::Equator, &params, seed, None).unwrap();
        let eq_v = evaluate(&inst, &eq, PATH_LIMIT).unwrap().value;
        if eq_v > 0.0 && greedy_v <= 0.5 * eq_v {
            wins += 1;
        }
        if seed < 3 {
            summary.push(format!("{greedy_v:.3} vs {eq_v:.3}"));
        }
    }
    Verdict::new(
        wins >= 15,
        format!(
            "{wins}/20 seeds with greedy <= 0.5 x EQUATOR (first seeds: {})",
            summary.join(", ")
        ),
    )
}

fn criterion_4() -> Verdict {
    let mut rng = stream(4, 0);
    let mut passes = 0;
    let mut worst_margin = f64::INFINITY;
    let factor = 1.0 - (-1.0f64).exp();
    for t in 0..20u64 {
        let n = rng.gen_range(4..=5);
        let k = rng.gen_range(1..=2);
        let size = rng.gen_range(2..=4);
        let family = random_family(n, size, &mut rng);
        let adversary = EnumeratedFamily::new(family.clone()).unwrap();
        let m = Matroid::uniform(n, k).unwrap();
        let cfg = SfwConfig::network_defaults(t);
        let res = sfw_run(&ProblemOracles::new(&adversary, &m), &cfg).unwrap();
        let achieved = adversary.min_value(&res.x_final).unwrap();
        let opt = grid_optimum(&family, n, k, 50);
        let margin = achieved - (factor * opt - 0.05);
        worst_margin = worst_margin.min(margin);
        if margin >= 0.0 {
            passes += 1;
        }
    }
    Verdict::new(
        passes == 20,
        format!("{passes}/20 tiny instances with G(x_final) >= (1-1/e) OPT_grid - 0.05 (smallest slack {worst_margin:.4})"),
    )
}

fn criterion_5() -> Verdict {
    const DRAWS: usize = 10_000;
    let mut rng = stream(5, 0);
    let mut failures = Vec::new();
    for d in 0..20u64 {
        let n = rng.gen_range(4..=8);
        let m = random_matroid(n, &mut rng);
        let terms = rng.gen_range(1..=4);
        let decomp = random_decomposition(&m, terms, &mut rng);
        let f = random_coverage(n, &mut rng);
        let x = decomp.point(n);
        let mut counts = vec![0usize; n];
        let mut values = Vec::with_capacity(DRAWS);
        let mut draw_rng = stream(5, 1 + d);
        for _ in 0..DRAWS {
            let r = m.swap_round(&decomp, &mut draw_rng).unwrap();
            if !m.is_independent(&r) {
                failures.push(format!("decomposition {d}: dependent output {r:?}"));
                break;
            }
            for i in r.iter() {
                counts[i] += 1;
            }
            values.push(f.value(&r));
        }
        for j in 0..n {
            let freq = counts[j] as f64 / DRAWS as f64;
            let se = (x[j] * (1.0 - x[j]) / DRAWS as f64).sqrt();
            if (freq - x[j]).abs() > 4.0 * se + 1e-12 {
                failures.push(format!("decomposition {d}: item {j} frequency {freq} vs x {}", x[j]));
            }
        }
        let mean = values.iter().sum::<f64>() / DRAWS as f64;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (DRAWS - 1) as f64).sqrt();
        let fx = f.extension(&x).unwrap();
        if mean < fx - 4.0 * sd / (DRAWS as f64).sqrt() - 1e-12 {
            failures.push(format!("decomposition {d}: E[f(R)] {mean} below F(x) {fx}"));
        }
    }
    Verdict::new(
        failures.is_empty(),
        if failures.is_empty() {
            "20/20 decompositions preserve marginals and dominate F(x) at 4 standard errors".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_6() -> Verdict {
    let mut rng = stream(6, 0);
    let mut worst = 0.0f64;
    let mut checks = 0;
    for seed in 0..20u64 {
        let mut p = nsg_params(rng.gen_range(12..=30));
        p.density = rng.gen_range(0.1..0.25);
        let Ok(g) = generate_geometric(&p, 100 + seed) else { continue };
        let family = g.enumerate_paths(PATH_LIMIT).unwrap();
        if family.truncated {
            continue;
        }
        for t in 0..50 {
            let mut x = random_point(g.ground_size(), 0.0, 1.0, &mut rng);
            if t % 5 == 0 {
                for v in x.iter_mut().filter(|_| rng.gen_bool(0.2)) {
                    *v = 1.0;
                }
            }
            let (_, bri) = g.best_path(&x).unwrap();
            let exact = family
                .paths
                .iter()
                .map(|p| g.path_objective(p).extension(&x).unwrap())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max((bri - exact).abs());
            checks += 1;
        }
    }
    for _ in 0..20 {
        let r = rng.gen_range(2..=10);
        let gamma = rng.gen_range(0..=r) as f64;
        let base = random_point(r, 0.0, 2.0, &mut rng);
        let u = DNormSet::new(gamma, base.clone()).unwrap();
        for _ in 0..10 {
            let q = random_point(r, 0.0, 1.0, &mut rng);
            let (_, value) = dnorm_worst_weights(&u, &q).unwrap();
            let exact = zero_patterns(r, gamma as usize)
                .into_iter()
                .map(|zeros| {
                    (0..r)
                        .filter(|v| !zeros.contains(v))
                        .map(|v| base[v] * q[v])
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min);
            worst = worst.max((value - exact).abs());
            checks += 1;
        }
    }
    Verdict::new(
        worst <= 1e-9,
        format!("{checks} oracle comparisons, largest deviation {worst:.2e}"),
    )
}

/// All subsets of `0..r` with exactly `k` elements.
fn zero_patterns(r: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << r)
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..r).filter(|v| mask >> v & 1 == 1).collect())
        .collect()
}

fn criterion_7() -> Verdict {
    let mut rng = stream(7, 0);
    let mut failures: Vec<String> = Vec::new();

    // Gradients against central differences.
    for t in 0..20 {
        let n = rng.gen_range(2..=6);
        let f = random_coverage(n, &mut rng);
        let x = random_point(n, 0.05, 0.95, &mut rng);
        let g = f.extension_gradient(&x).unwrap();
        for j in 0..n {
            let fd = finite_difference(&f, &x, j, 1e-5);
            if (g[j] - fd).abs() > 1e-5 * fd.abs() + 1e-8 {
                failures.push(format!("gradient {t}/{j}: {} vs {fd}", g[j]));
            }
        }
    }

    // Up-concavity along nonnegative directions.
    for t in 0..50 {
        let n = rng.gen_range(2..=6);
        let family = random_family(n, rng.gen_range(1..=4), &mut rng);
        let x = random_point(n, 0.0, 0.5, &mut rng);
        let d: Vec<f64> = x.iter().map(|&v| rng.gen_range(0.0..=1.0 - v)).collect();
        let end: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
        let mid: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b / 2.0).collect();
        let lhs = min_extension(&family, &mid);
        let rhs = (min_extension(&family, &x) + min_extension(&family, &end)) / 2.0;
        if lhs < rhs - 1e-8 {
            failures.push(format!("up-concavity probe {t}: {lhs} < {rhs}"));
        }
    }

    // Smoothing error |G_mu(x) - G(x)| <= M n u / 2.
    for t in 0..10 {
        let n = rng.gen_range(2..=5);
        let family = random_family(n, 3, &mut rng);
        let m_bound = family.iter().map(|f| f.item_bound()).fold(0.0, f64::max);
        let u = 0.1;
        let x = random_point(n, u, 1.0 - u, &mut rng);
        let samples: Vec<f64> = (0..10_000)
            .map(|_| {
                let z: Vec<f64> = x.iter().map(|&v| v + rng.gen_range(-u..=u)).collect();
                min_extension(&family, &z)
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let sd = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64).sqrt();
        let g = min_extension(&family, &x);
        if (mean - g).abs() > m_bound * n as f64 * u / 2.0 + 4.0 * sd / 100.0 {
            failures.push(format!("smoothing {t}: |{mean} - {g}| too large"));
        }
    }

    // Shift loss F(x - u1) >= F(x) - u M n.
    for t in 0..20 {
        let n = rng.gen_range(2..=6);
        let f = random_coverage(n, &mut rng);
        let u = rng.gen_range(0.01..0.2);
        let x = random_point(n, u, 1.0, &mut rng);
        let shifted: Vec<f64> = x.iter().map(|v| v - u).collect();
        let lhs = f.extension(&shifted).unwrap();
        let rhs = f.extension(&x).unwrap() - u * f.item_bound() * n as f64;
        if lhs < rhs - 1e-9 {
            failures.push(format!("shift {t}: {lhs} < {rhs}"));
        }
    }

    // Double oracle against the full payoff matrix.
    let tol = 1e-6;
    for t in 0..20 {
        let n = rng.gen_range(2..=5);
        let m = Matroid::uniform(n, rng.gen_range(1..=2)).unwrap();
        let functions = random_family(n, rng.gen_range(2..=4), &mut rng);
        let sets = independent_sets(&m, 1000).unwrap();
        let exact = brute_force_minimax(&sets, &functions, tol).unwrap().value;
        let mut game = ExplicitGame {
            sets: sets.clone(),
            functions: functions.clone(),
        };
        let cfg = DoubleOracleConfig::default();
        let res = double_oracle(&mut game, vec![ItemSet::empty()], vec![0], &cfg).unwrap();
        if !res.converged || (res.value - exact).abs() > 2.0 * tol {
            failures.push(format!("double oracle {t}: {} vs {exact}", res.value));
        }
        let monotone = res.trace.windows(2).all(|w| {
            w[1].lower_bound >= w[0].lower_bound - tol && w[1].upper_bound <= w[0].upper_bound + tol
        });
        if !monotone || res.lower_bound > res.upper_bound + tol {
            failures.push(format!("double oracle {t}: bounds not monotone"));
        }
    }

    // Monte-Carlo extension against the closed form.
    for t in 0..5 {
        let n = rng.gen_range(2..=5);
        let f = random_coverage(n, &mut rng);
        let x = random_point(n, 0.0, 1.0, &mut rng);
        let sampled = sbr_core::function::SampledOnly(Arc::new(f.clone()));
        let draws = 100_000;
        let est = multilinear_value(&sampled, &x, Some(draws), &mut rng).unwrap();
        let exact = f.extension(&x).unwrap();
        let bound: f64 = f.weights().iter().sum();
        // Values lie in [0, W], so W / 2 bounds the standard deviation.
        if (est - exact).abs() > 4.0 * bound / 2.0 / (draws as f64).sqrt() {
            failures.push(format!("monte carlo {t}: {est} vs {exact}"));
        }
    }

    Verdict::new(
        failures.is_empty(),
        if failures.is_empty() {
            "gradient, up-concavity, smoothing, shift, double-oracle and sampling suites all hold".to_string()
        } else {
            failures.join("; ")
        },
    )
}

const SCALE_TIMEOUT: Duration = Duration::from_secs(300);

fn criterion_8_double_oracle() -> (bool, String) {
    let g = generate_geometric(&GeometricParams::standard(100), 8).unwrap();
    let start = Instant::now();
    let cfg = DoubleOracleConfig {
        deadline: Some(start + SCALE_TIMEOUT),
        ..DoubleOracleConfig::default()
    };
    let outcome = nsg_double_oracle(&g, PATH_LIMIT, &cfg);
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Err(sbr_core::Error::Timeout) => (
            true,
            format!("double oracle on n=100 timed out after {elapsed:.0}s"),
        ),
        Ok((res, _)) => (
            false,
            format!("double oracle on n=100 finished in {elapsed:.1}s (value {:.3})", res.value),
        ),
        Err(e) => (false, format!("double oracle on n=100 failed: {e}")),
    }
}

fn criterion_8_equator() -> (bool, String) {
    let g = generate_geometric(&GeometricParams::standard(500), 8).unwrap();
    let edges = g.ground_size();
    let inst = Instance::Nsg(g);
    let start = Instant::now();
    let strategy = solve(
        &inst,
        Algorithm::Equator,
        &SolveParams::default(),
        8,
        Some(start + SCALE_TIMEOUT),
    );
    let elapsed = start.elapsed().as_secs_f64();
    match strategy {
        Ok(s) => (
            elapsed < SCALE_TIMEOUT.as_secs_f64(),
            format!(
                "EQUATOR on n=500 ({edges} edges) finished in {elapsed:.1}s with {} support sets",
                s.support().len()
            ),
        ),
        Err(e) => (false, format!("EQUATOR on n=500 failed after {elapsed:.1}s: {e}")),
    }
}

fn main() -> ExitCode {
    let background = thread::spawn(criterion_8_double_oracle);
    let criteria: [(u32, &str, fn() -> Verdict); 7] = [
        (1, "NSG solution quality vs double oracle", criterion_1),
        (2, "budget solution quality vs double oracle", criterion_2),
        (3, "robustness gap of nominal greedy", criterion_3),
        (4, "continuous solver guarantee on tiny games", criterion_4),
        (5, "swap rounding marginals and value domination", criterion_5),
        (6, "best-response oracle exactness", criterion_6),
        (7, "property suites", criterion_7),
    ];
    let mut all_passed = true;
    let mut report = |id: u32, name: &str, v: Verdict| {
        all_passed &= v.passed;
        println!(
            "criterion {id} [{}] {name}: {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
    };
    for (id, name, run) in criteria {
        let v = run();
        report(id, name, v);
    }
    let (eq_ok, eq_detail) = criterion_8_equator();
    let (do_ok, do_detail) = background.join().expect("double oracle thread");
    report(
        8,
        "scaling of EQUATOR vs exact double oracle",
        Verdict::new(eq_ok && do_ok, format!("{eq_detail}; {do_detail}")),
    );
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
