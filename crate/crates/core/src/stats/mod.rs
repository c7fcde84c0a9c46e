//! Per-characteristic logistic screens with domain dummies, Wald tests, odds
//! ratios, Benjamini–Hochberg correction and rank/linear correlations.

pub mod logistic;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub use logistic::{fit_logistic, FitOptions, LogisticFit, INTERCEPT};

pub const ALPHA: f64 = 0.05;

/// Two-sided Wald test: `(z, p)` with `z = beta / se`.
pub fn wald_test(beta: f64, se: f64) -> Result<(f64, f64)> {
    if !(se > 0.0) || !se.is_finite() {
        return Err(Error::InvalidInput(format!("standard error must be positive, got {se}")));
    }
    let z = beta / se;
    Ok((z, erfc(z.abs() / std::f64::consts::SQRT_2)))
}

pub fn odds_ratio(beta: f64) -> f64 {
    beta.exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdrResult {
    pub adjusted: Vec<f64>,
    pub reject: Vec<bool>,
}

/// Benjamini–Hochberg step-up adjustment, in input order. A hypothesis is
/// rejected when its adjusted p-value is strictly below `alpha`.
pub fn fdr_correct(pvalues: &[f64], alpha: f64) -> Result<FdrResult> {
    if let Some(p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidInput(format!("p-value {p} outside [0, 1]")));
    }
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for rank in (0..m).rev() {
        let i = order[rank];
        running = running.min(m as f64 * pvalues[i] / (rank + 1) as f64).min(1.0);
        adjusted[i] = running;
    }
    let reject = adjusted.iter().map(|&a| a < alpha).collect();
    Ok(FdrResult { adjusted, reject })
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::TooFewRows { required: 3, actual: x.len() });
    }
    Ok(())
}

/// Sample Pearson correlation; undefined for constant input.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation of a constant input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Mean Pearson correlation over all rater pairs.
pub fn mean_pairwise_pearson(raters: &[Vec<f64>]) -> Result<f64> {
    if raters.len() < 2 {
        return Err(Error::TooFewRows { required: 2, actual: raters.len() });
    }
    let mut rs = Vec::new();
    for i in 0..raters.len() {
        for j in i + 1..raters.len() {
            rs.push(pearson(&raters[i], &raters[j])?);
        }
    }
    Ok(rs.iter().sum::<f64>() / rs.len() as f64)
}

/// 1-based ranks with ties sharing their mean rank.
pub fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho: f64,
    pub p: f64,
    pub n: usize,
}

/// Spearman rho (Pearson on mid-ranks) with a two-sided t-approximation
/// p-value on n − 2 degrees of freedom.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_pair(x, y)?;
    let rho = pearson(&mid_ranks(x), &mid_ranks(y))?;
    let n = x.len();
    let df = (n - 2) as f64;
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / ((1.0 - rho) * (1.0 + rho))).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Undefined(e.to_string()))?;
        2.0 * dist.cdf(-t.abs())
    };
    Ok(Correlation { rho, p, n })
}

/// Domain indicator columns with the most frequent domain as the dropped
/// reference (ties go to the lexicographically smallest).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dummies {
    pub reference: Option<String>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl Dummies {
    pub fn from_labels(labels: &[String]) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for l in labels {
            *counts.entry(l.as_str()).or_default() += 1;
        }
        let Some(reference) = counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(k, _)| k.to_string())
        else {
            return Dummies::default();
        };
        let columns = counts
            .keys()
            .filter(|k| **k != reference)
            .map(|k| (format!("domain_{k}"), labels.iter().map(|l| f64::from(u8::from(l == k))).collect()))
            .collect();
        Dummies { reference: Some(reference), columns }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub feature: String,
    pub beta: f64,
    pub se: f64,
    pub z: f64,
    pub p: f64,
    pub p_adjusted: f64,
    pub odds_ratio: f64,
    pub significant: bool,
    pub n_obs: usize,
    pub error: Option<String>,
}

impl RegressionResult {
    fn failed(feature: &str, n_obs: usize, e: &Error) -> Self {
        RegressionResult {
            feature: feature.to_string(),
            beta: f64::NAN,
            se: f64::NAN,
            z: f64::NAN,
            p: f64::NAN,
            p_adjusted: f64::NAN,
            odds_ratio: f64::NAN,
            significant: false,
            n_obs,
            error: Some(e.to_string()),
        }
    }
}

/// Fits `Y ~ 1 + X + dummies` for one characteristic.
pub fn fit_one(feature: &str, x: &[f64], dummies: &Dummies, y: &[f64], opts: FitOptions) -> Result<RegressionResult> {
    let mut cols = vec![(feature.to_string(), x.to_vec())];
    cols.extend(dummies.columns.iter().cloned());
    let fit = fit_logistic(&cols, y, opts)?;
    let beta = fit.beta[1];
    let se = fit.se(1);
    let (z, p) = wald_test(beta, se)?;
    Ok(RegressionResult {
        feature: feature.to_string(),
        beta,
        se,
        z,
        p,
        p_adjusted: f64::NAN,
        odds_ratio: odds_ratio(beta),
        significant: false,
        n_obs: y.len(),
        error: None,
    })
}

/// One independent fit per characteristic; fit errors stay on their row.
/// BH correction runs over the successful rows; results are sorted by odds
/// ratio descending with failed rows last.
pub fn run_feature_screen(features: &[(String, Vec<f64>)], dummies: &Dummies, y: &[f64], alpha: f64) -> Vec<RegressionResult> {
    let mut rows: Vec<RegressionResult> = features
        .par_iter()
        .map(|(name, x)| {
            fit_one(name, x, dummies, y, FitOptions::default()).unwrap_or_else(|e| {
                log::warn!("feature {name}: {e}");
                RegressionResult::failed(name, y.len(), &e)
            })
        })
        .collect();
    let ok: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].error.is_none()).collect();
    let ps: Vec<f64> = ok.iter().map(|&i| rows[i].p).collect();
    if let Ok(fdr) = fdr_correct(&ps, alpha) {
        for (k, &i) in ok.iter().enumerate() {
            rows[i].p_adjusted = fdr.adjusted[k];
            rows[i].significant = fdr.reject[k];
        }
    }
    sort_by_odds_ratio(&mut rows);
    rows
}

pub fn sort_by_odds_ratio(rows: &mut [RegressionResult]) {
    rows.sort_by(|a, b| {
        a.error
            .is_some()
            .cmp(&b.error.is_some())
            .then(b.odds_ratio.total_cmp(&a.odds_ratio))
            .then(a.feature.cmp(&b.feature))
    });
}

const REGRESSION_HEADER: [&str; 9] = ["feature", "beta", "se", "z", "p", "p_adjusted", "odds_ratio", "n_obs", "error"];

pub fn write_regression_csv(rows: &[RegressionResult], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(REGRESSION_HEADER)?;
    for r in rows {
        w.write_record([
            r.feature.clone(),
            r.beta.to_string(),
            r.se.to_string(),
            r.z.to_string(),
            r.p.to_string(),
            r.p_adjusted.to_string(),
            r.odds_ratio.to_string(),
            r.n_obs.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_regression_csv(path: &Path, alpha: f64) -> Result<Vec<RegressionResult>> {
    let mut r = csv::Reader::from_path(path)?;
    let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Csv(format!("{}: bad number {s:?}", path.display())));
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |k: usize| rec.get(k).unwrap_or_default();
        let p_adjusted = num(f(5))?;
        out.push(RegressionResult {
            feature: f(0).to_string(),
            beta: num(f(1))?,
            se: num(f(2))?,
            z: num(f(3))?,
            p: num(f(4))?,
            p_adjusted,
            odds_ratio: num(f(6))?,
            significant: p_adjusted < alpha,
            n_obs: f(7).parse().map_err(|_| Error::Csv(format!("{}: bad n_obs", path.display())))?,
            error: Some(f(8).to_string()).filter(|s| !s.is_empty()),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub cevent_id: String,
    pub rho: f64,
    pub p: f64,
    pub n: usize,
}

pub fn write_correlation_csv(rows: &[CorrelationRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["cevent_id", "rho", "p", "n"])?;
    for r in rows {
        w.write_record([r.cevent_id.clone(), r.rho.to_string(), r.p.to_string(), r.n.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_correlation_csv(path: &Path) -> Result<Vec<CorrelationRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}
