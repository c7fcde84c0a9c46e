//! Maximum-likelihood logistic regression by iteratively reweighted least
//! squares, with an intercept column named `const`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INTERCEPT: &str = "const";
/// Coefficients beyond this magnitude with non-shrinking Newton steps are
/// treated as diverging.
pub const SEPARATION_BETA: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tol: 1e-8, max_iter: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    /// `const` first, then the predictors in input order.
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    /// Inverse observed information at the estimate.
    pub cov: Vec<Vec<f64>>,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub n_obs: usize,
}

impl LogisticFit {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn se(&self, k: usize) -> f64 {
        self.cov[k][k].sqrt()
    }

    pub fn fitted(&self, row: &[f64]) -> f64 {
        let eta = self.beta[0] + row.iter().zip(&self.beta[1..]).map(|(x, b)| x * b).sum::<f64>();
        sigmoid(eta)
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(eta)) without overflow.
fn log1pexp(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

/// Names of columns that are linear combinations of earlier ones, each
/// followed by the columns it depends on.
fn collinear_columns(x: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let mut kept: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).clone_owned();
        let norm = col.norm();
        if norm == 0.0 {
            out.push(names[j].clone());
            continue;
        }
        if kept.is_empty() {
            kept.push(j);
            continue;
        }
        let basis = x.select_columns(&kept);
        let svd = basis.clone().svd(true, true);
        let coef = svd.solve(&col, 1e-12).unwrap_or_else(|_| DVector::zeros(kept.len()));
        let resid = (&col - &basis * &coef).norm();
        if resid <= 1e-9 * norm {
            out.push(names[j].clone());
            for (k, c) in kept.iter().zip(coef.iter()) {
                if c.abs() > 1e-8 && !out.contains(&names[*k]) {
                    out.push(names[*k].clone());
                }
            }
        } else {
            kept.push(j);
        }
    }
    out
}

/// Fits `logit P(y = 1) = b0 + sum_k b_k x_k` for the named predictor columns.
pub fn fit_logistic(columns: &[(String, Vec<f64>)], y: &[f64], opts: FitOptions) -> Result<LogisticFit> {
    let n = y.len();
    if let Some((name, c)) = columns.iter().find(|(_, c)| c.len() != n) {
        return Err(Error::InvalidInput(format!("column {name} has {} rows, response has {n}", c.len())));
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidInput("response must be 0/1".into()));
    }
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    if ones == 0 || ones == n {
        return Err(Error::SingleClassResponse);
    }
    if let Some((name, _)) = columns.iter().find(|(_, c)| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidInput(format!("column {name} has non-finite values")));
    }
    let mut names = vec![INTERCEPT.to_string()];
    names.extend(columns.iter().map(|(n, _)| n.clone()));
    let p = names.len();
    let x = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { columns[j - 1].1[i] });
    let bad = collinear_columns(&x, &names);
    if !bad.is_empty() {
        return Err(Error::RankDeficient { columns: bad });
    }
    let yv = DVector::from_column_slice(y);
    let mut beta = DVector::<f64>::zeros(p);
    let mut prev_step = f64::INFINITY;
    let info_at = |beta: &DVector<f64>| -> (DMatrix<f64>, DVector<f64>) {
        let eta = &x * beta;
        let mu = eta.map(sigmoid);
        let w = mu.map(|m| m * (1.0 - m));
        let xw = DMatrix::from_fn(n, p, |i, j| x[(i, j)] * w[i]);
        (x.transpose() * xw, x.transpose() * (&yv - mu))
    };
    let max_abs = |b: &DVector<f64>| b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for iter in 1..=opts.max_iter {
        let (info, grad) = info_at(&beta);
        let step = match info.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => match info.lu().solve(&grad) {
                Some(s) => s,
                None if max_abs(&beta) > SEPARATION_BETA => {
                    return Err(Error::PerfectSeparation { max_abs_beta: max_abs(&beta), iterations: iter });
                }
                None => return Err(Error::RankDeficient { columns: names.clone() }),
            },
        };
        beta += &step;
        let change = max_abs(&step);
        if !beta.iter().all(|b| b.is_finite()) {
            return Err(Error::PerfectSeparation { max_abs_beta: f64::INFINITY, iterations: iter });
        }
        if change < opts.tol {
            let (info, _) = info_at(&beta);
            let cov = info
                .try_inverse()
                .ok_or_else(|| Error::PerfectSeparation { max_abs_beta: max_abs(&beta), iterations: iter })?;
            let eta = &x * &beta;
            let ll: f64 = eta.iter().zip(y).map(|(e, yi)| yi * e - log1pexp(*e)).sum();
            return Ok(LogisticFit {
                names,
                beta: beta.iter().copied().collect(),
                cov: (0..p).map(|i| (0..p).map(|j| cov[(i, j)]).collect()).collect(),
                iterations: iter,
                log_likelihood: ll,
                n_obs: n,
            });
        }
        if max_abs(&beta) > SEPARATION_BETA && change >= 0.99 * prev_step {
            return Err(Error::PerfectSeparation { max_abs_beta: max_abs(&beta), iterations: iter });
        }
        prev_step = change;
    }
    if max_abs(&beta) > SEPARATION_BETA {
        return Err(Error::PerfectSeparation { max_abs_beta: max_abs(&beta), iterations: opts.max_iter });
    }
    Err(Error::NotConverged { max_iter: opts.max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(name: &str, v: &[f64]) -> (String, Vec<f64>) {
        (name.to_string(), v.to_vec())
    }

    #[test]
    fn intercept_only_balanced() {
        let f = fit_logistic(&[], &[0.0, 1.0, 0.0, 1.0], FitOptions::default()).unwrap();
        assert!(f.beta[0].abs() < 1e-12);
        // se of logit(0.5) with n = 4 is 1/sqrt(n p (1-p)) = 1
        assert!((f.se(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separation_is_detected() {
        let y = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let e = fit_logistic(&[col("x", &y)], &y, FitOptions::default()).unwrap_err();
        assert!(matches!(e, Error::PerfectSeparation { .. }), "{e}");
    }

    #[test]
    fn rank_deficiency_names_columns() {
        let y = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 7.0];
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        match fit_logistic(&[col("a", &a), col("b", &b)], &y, FitOptions::default()) {
            Err(Error::RankDeficient { columns }) => assert_eq!(columns, vec!["b".to_string(), "a".to_string()]),
            other => panic!("{other:?}"),
        }
        match fit_logistic(&[col("k", &[3.0; 6])], &y, FitOptions::default()) {
            Err(Error::RankDeficient { columns }) => assert_eq!(columns, vec!["k".to_string(), "const".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn input_validation() {
        assert!(matches!(fit_logistic(&[], &[1.0, 1.0], FitOptions::default()), Err(Error::SingleClassResponse)));
        assert!(matches!(fit_logistic(&[], &[0.0, 2.0], FitOptions::default()), Err(Error::InvalidInput(_))));
        assert!(matches!(
            fit_logistic(&[col("x", &[1.0])], &[0.0, 1.0], FitOptions::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    fn data() -> (Vec<f64>, Vec<f64>) {
        let x = vec![0.3, -1.2, 2.2, 0.7, -0.4, 1.9, -2.0, 0.1, 1.1, -0.9, 0.5, 1.4];
        let y = vec![0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0];
        (x, y)
    }

    proptest! {
        #[test]
        fn rescaling_x(c in 0.1f64..10.0) {
            let (x, y) = data();
            let a = fit_logistic(&[col("x", &x)], &y, FitOptions::default()).unwrap();
            let xs: Vec<f64> = x.iter().map(|v| v * c).collect();
            let b = fit_logistic(&[col("x", &xs)], &y, FitOptions::default()).unwrap();
            prop_assert!((a.beta[1] / c - b.beta[1]).abs() < 1e-8);
            prop_assert!((a.beta[1] / a.se(1) - b.beta[1] / b.se(1)).abs() < 1e-8);
            for (xi, xsi) in x.iter().zip(&xs) {
                prop_assert!((a.fitted(&[*xi]) - b.fitted(&[*xsi])).abs() < 1e-8);
            }
        }

        #[test]
        fn row_permutation(seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let (x, y) = data();
            let mut idx: Vec<usize> = (0..x.len()).collect();
            idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let xp: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
            let yp: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
            let a = fit_logistic(&[col("x", &x)], &y, FitOptions::default()).unwrap();
            let b = fit_logistic(&[col("x", &xp)], &yp, FitOptions::default()).unwrap();
            for k in 0..2 {
                prop_assert!((a.beta[k] - b.beta[k]).abs() < 1e-9);
                prop_assert!((a.se(k) - b.se(k)).abs() < 1e-9);
            }
        }
    }
}
