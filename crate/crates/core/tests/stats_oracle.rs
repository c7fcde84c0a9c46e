//! Statistics checked against values frozen from statsmodels/scipy
//! (fixtures/gen_stats_oracle.py) plus seeded simulation checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::Value;

use spark_core::stats::*;

fn oracle() -> Value {
    serde_json::from_str(include_str!("fixtures/stats_oracle.json")).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

fn check_logit_case(case: &Value) {
    let x = floats(&case["x"]);
    let y = floats(&case["y"]);
    let mut cols = vec![("x".to_string(), x)];
    let names = case["dummy_names"].as_array().unwrap();
    for (n, d) in names.iter().zip(case["dummies"].as_array().unwrap()) {
        cols.push((n.as_str().unwrap().to_string(), floats(d)));
    }
    let fit = fit_logistic(&cols, &y, FitOptions::default()).unwrap();
    let params = floats(&case["params"]);
    let bse = floats(&case["bse"]);
    let p = floats(&case["p"]);
    for k in 0..params.len() {
        assert!(rel_close(fit.beta[k], params[k], 1e-6), "beta[{k}] {} vs {}", fit.beta[k], params[k]);
        assert!(rel_close(fit.se(k), bse[k], 1e-6), "se[{k}] {} vs {}", fit.se(k), bse[k]);
        let (_, pk) = wald_test(fit.beta[k], fit.se(k)).unwrap();
        assert!(rel_close(pk, p[k], 1e-6), "p[{k}] {pk} vs {}", p[k]);
    }
}

#[test]
fn logistic_small_fixture() {
    check_logit_case(&oracle()["logit_small"]);
}

#[test]
fn logistic_with_domain_dummies() {
    let o = oracle();
    let case = &o["logit_dummies"];
    check_logit_case(case);
    // the dummy builder reproduces the fixture's columns (reference = most frequent)
    let labels: Vec<String> = case["domains"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    let d = Dummies::from_labels(&labels);
    assert_eq!(d.reference.as_deref(), Some("a"));
    let r = fit_one("x", &floats(&case["x"]), &d, &floats(&case["y"]), FitOptions::default()).unwrap();
    assert!(rel_close(r.beta, floats(&case["params"])[1], 1e-6));
    assert!(rel_close(r.z, floats(&case["z"])[1], 1e-6));
}

#[test]
fn bh_matches_reference() {
    for case in oracle()["bh"].as_array().unwrap() {
        let r = fdr_correct(&floats(&case["p"]), 0.05).unwrap();
        let adj = floats(&case["adjusted"]);
        for (a, b) in r.adjusted.iter().zip(&adj) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let rej: Vec<bool> = case["reject"].as_array().unwrap().iter().map(|v| v.as_bool().unwrap()).collect();
        assert_eq!(r.reject, rej);
    }
}

#[test]
fn correlations_match_reference() {
    let o = oracle();
    for case in o["spearman"].as_array().unwrap() {
        let r = spearman(&floats(&case["x"]), &floats(&case["y"])).unwrap();
        assert!((r.rho - case["rho"].as_f64().unwrap()).abs() < 1e-12);
        assert!(rel_close(r.p, case["p"].as_f64().unwrap(), 1e-9), "{} vs {}", r.p, case["p"]);
    }
    let raters: Vec<Vec<f64>> = o["pearson"]["raters"].as_array().unwrap().iter().map(floats).collect();
    let pairwise = floats(&o["pearson"]["pairwise"]);
    assert!((pearson(&raters[0], &raters[1]).unwrap() - pairwise[0]).abs() < 1e-12);
    let m = mean_pairwise_pearson(&raters).unwrap();
    assert!((m - o["pearson"]["mean"].as_f64().unwrap()).abs() < 1e-12);
}

/// Draws (x, domains, y) from logit P = b0 + bx x + a_b D_b + a_c D_c.
pub fn simulate(rng: &mut ChaCha8Rng, n: usize, bx: f64) -> (Vec<f64>, Vec<String>, Vec<f64>) {
    let (b0, ab, ac) = (-0.5, 0.8, -0.6);
    let mut xs = Vec::with_capacity(n);
    let mut ds = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = StandardNormal.sample(rng);
        let u: f64 = rng.gen();
        let d = if u < 0.5 { "a" } else if u < 0.8 { "b" } else { "c" };
        let eta = b0 + bx * x + if d == "b" { ab } else { 0.0 } + if d == "c" { ac } else { 0.0 };
        let y = f64::from(u8::from(rng.gen::<f64>() < 1.0 / (1.0 + (-eta).exp())));
        xs.push(x);
        ds.push(d.to_string());
        ys.push(y);
    }
    (xs, ds, ys)
}

#[test]
fn monte_carlo_recovery() {
    let true_beta = 0.7;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut covered = 0;
    for _ in 0..100 {
        let (x, d, y) = simulate(&mut rng, 400, true_beta);
        let r = fit_one("x", &x, &Dummies::from_labels(&d), &y, FitOptions::default()).unwrap();
        if (r.beta - true_beta).abs() <= 3.0 * r.se {
            covered += 1;
        }
    }
    assert!(covered >= 95, "covered {covered}/100");
}

#[test]
fn null_screen_has_few_discoveries() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 300;
    let y: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.gen::<f64>() < 0.4))).collect();
    let features: Vec<(String, Vec<f64>)> = (0..100)
        .map(|k| (format!("f{k:03}"), (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()))
        .collect();
    let rows = run_feature_screen(&features, &Dummies::default(), &y, ALPHA);
    assert_eq!(rows.len(), 100);
    let rejected = rows.iter().filter(|r| r.significant).count();
    assert!(rejected <= 10, "{rejected} null rejections");
}
