use sbr_demo::{budget_solve, nsg_solve, swap_rounding};
use serde_json::Value;

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|a| a.as_f64().unwrap()).collect()
}

#[test]
fn nsg_payload_is_consistent() {
    let out = nsg_solve(20, 0.25, 2, 30, 10, 0.1, 7).unwrap();
    let edges = out["edges"].as_array().unwrap().len();
    let x = floats(&out["x"]);
    assert_eq!(x.len(), edges);
    assert!(x.iter().sum::<f64>() <= 2.0 + 1e-9);
    assert_eq!(out["positions"].as_array().unwrap().len(), 20);
    assert_eq!(floats(&out["trace"]).len(), 30);
    assert!(out["equator"].as_f64().unwrap() >= 0.0);
}

#[test]
fn budget_payload_splits_the_budget() {
    let out = budget_solve(12, false, 0.5, 3, 10, 5, 0.1, 1).unwrap();
    let allocation = floats(&out["allocation"]);
    assert_eq!(allocation.len(), 12);
    assert!((allocation.iter().sum::<f64>() - 3.0).abs() < 1e-9);
    assert_eq!(floats(&out["coverage"]).len(), 12);
    assert_eq!(out["gamma"].as_f64(), Some(6.0));

    let skewed = budget_solve(20, true, 0.5, 3, 20, 10, 0.1, 2).unwrap();
    assert!(skewed["equator"].as_f64().unwrap() >= skewed["greedy"].as_f64().unwrap());
}

#[test]
fn swap_rounding_frequencies_track_the_point() {
    let out = swap_rounding(8, 3, 4, 20_000, 3).unwrap();
    let x = floats(&out["x"]);
    let f = floats(&out["frequency"]);
    assert!((x.iter().sum::<f64>() - 3.0).abs() < 1e-9);
    for (a, b) in x.iter().zip(&f) {
        // Bernoulli standard error at 20000 draws is below 0.0036.
        assert!((a - b).abs() < 0.015, "{a} vs {b}");
    }
    assert!(swap_rounding(8, 3, 0, 10, 3).is_err());
}
