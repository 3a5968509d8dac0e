//! Closed-form ridge regression on standardized features.
//!
//! Columns are centered and scaled to unit standard deviation before the
//! penalty is applied, and the intercept is left unpenalized:
//!
//! ```text
//! (ZᵀZ + λI) θ = Zᵀ(y - ȳ),   intercept = ȳ
//! ```
//!
//! Columns with zero variance get scale 1 and coefficient 0.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};

/// Fitted ridge model. `theta` acts on standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub theta: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub feature_means: Vec<f64>,
    pub feature_scales: Vec<f64>,
}

impl RidgeModel {
    pub fn num_features(&self) -> usize {
        self.theta.len()
    }

    /// A model that always predicts `intercept`.
    pub fn constant(num_features: usize, intercept: f64) -> Self {
        Self {
            theta: vec![0.0; num_features],
            intercept,
            lambda: 0.0,
            feature_means: vec![0.0; num_features],
            feature_scales: vec![1.0; num_features],
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept
            + row
                .iter()
                .zip(&self.theta)
                .zip(self.feature_means.iter().zip(&self.feature_scales))
                .map(|((x, t), (m, s))| (x - m) / s * t)
                .sum::<f64>()
    }

    pub fn predict(&self, features: &Matrix) -> Result<Vec<f64>> {
        if features.cols() != self.num_features() {
            return Err(Error::Shape(format!(
                "model has {} features, input has {}",
                self.num_features(),
                features.cols()
            )));
        }
        Ok(features.iter_rows().map(|r| self.predict_row(r)).collect())
    }

    /// Euclidean norm of the standardized coefficients.
    pub fn theta_norm(&self) -> f64 {
        self.theta.iter().map(|t| t * t).sum::<f64>().sqrt()
    }
}

/// Sufficient statistics of a design for ridge solves at any `λ`.
///
/// Building it costs one pass over the data; each [`solve`](Self::solve) is
/// then a `p x p` Cholesky factorization.
#[derive(Debug, Clone)]
pub struct RidgeProblem {
    means: Vec<f64>,
    scales: Vec<f64>,
    /// Indices of columns with non-zero variance.
    active: Vec<usize>,
    /// Standardized Gram matrix over active columns.
    gram: Vec<f64>,
    /// Standardized `Zᵀ(y - ȳ)` over active columns.
    rhs: Vec<f64>,
    target_mean: f64,
}

impl RidgeProblem {
    pub fn new(features: &Matrix, target: &[f64]) -> Result<Self> {
        let n = features.rows();
        let p = features.cols();
        if n != target.len() {
            return Err(Error::Shape(format!(
                "{n} feature rows but {} targets",
                target.len()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument(
                "ridge fit needs at least one row".into(),
            ));
        }
        if features.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
        if target.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("target"));
        }

        let nf = n as f64;
        let target_mean = target.iter().sum::<f64>() / nf;
        let mut means = vec![0.0; p];
        for row in features.iter_rows() {
            for (m, x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= nf);

        // Centered cross products, lower triangle.
        let mut cross = vec![0.0; p * p];
        let mut xy = vec![0.0; p];
        let mut centered = vec![0.0; p];
        for (row, y) in features.iter_rows().zip(target) {
            for ((c, x), m) in centered.iter_mut().zip(row).zip(&means) {
                *c = x - m;
            }
            let yc = y - target_mean;
            for i in 0..p {
                let ci = centered[i];
                xy[i] += ci * yc;
                let dst = &mut cross[i * p..i * p + i + 1];
                for (d, cj) in dst.iter_mut().zip(&centered[..=i]) {
                    *d += ci * cj;
                }
            }
        }

        let mut scales = vec![1.0; p];
        let mut active = Vec::with_capacity(p);
        for j in 0..p {
            let var = cross[j * p + j] / nf;
            let sd = var.max(0.0).sqrt();
            if sd > 0.0 && sd > f64::EPSILON * means[j].abs() {
                scales[j] = sd;
                active.push(j);
            }
        }

        let q = active.len();
        let mut gram = vec![0.0; q * q];
        let mut rhs = vec![0.0; q];
        for (a, &i) in active.iter().enumerate() {
            rhs[a] = xy[i] / scales[i];
            for (b, &j) in active.iter().enumerate().take(a + 1) {
                let v = cross[i * p + j] / (scales[i] * scales[j]);
                gram[a * q + b] = v;
                gram[b * q + a] = v;
            }
        }

        Ok(Self {
            means,
            scales,
            active,
            gram,
            rhs,
            target_mean,
        })
    }

    pub fn num_features(&self) -> usize {
        self.means.len()
    }

    pub fn solve(&self, lambda: f64) -> Result<RidgeModel> {
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        let q = self.active.len();
        let mut theta = vec![0.0; self.num_features()];
        if q > 0 {
            let mut a = self.gram.clone();
            for i in 0..q {
                a[i * q + i] += lambda;
            }
            let sol = Cholesky::factor(&a, q)?.solve(&self.rhs);
            for (&j, t) in self.active.iter().zip(sol) {
                theta[j] = t;
            }
        }
        Ok(RidgeModel {
            theta,
            intercept: self.target_mean,
            lambda,
            feature_means: self.means.clone(),
            feature_scales: self.scales.clone(),
        })
    }
}

/// Fits a ridge model with penalty `lambda`.
pub fn fit_ridge(features: &Matrix, target: &[f64], lambda: f64) -> Result<RidgeModel> {
    RidgeProblem::new(features, target)?.solve(lambda)
}

/// Outcome of a validation grid search.
#[derive(Debug, Clone)]
pub struct LambdaSelection {
    pub lambda: f64,
    pub model: RidgeModel,
    /// Validation score per grid entry, in grid order.
    pub scores: Vec<(f64, f64)>,
}

/// Fits on the training rows for every `λ` in `grid`, scores each fit on the
/// validation rows with `metric(actual, predicted)`, and keeps the lowest
/// score. Ties go to the larger `λ`.
pub fn select_lambda<M>(
    features_train: &Matrix,
    target_train: &[f64],
    features_valid: &Matrix,
    target_valid: &[f64],
    grid: &[f64],
    metric: M,
) -> Result<LambdaSelection>
where
    M: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    if grid.is_empty() {
        return Err(Error::InvalidArgument("lambda grid is empty".into()));
    }
    let problem = RidgeProblem::new(features_train, target_train)?;
    let fits: Vec<(RidgeModel, f64)> = grid
        .par_iter()
        .map(|&lambda| {
            let model = problem.solve(lambda)?;
            let pred = model.predict(features_valid)?;
            let score = metric(target_valid, &pred)?;
            Ok((model, score))
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (i, (model, score)) in fits.iter().enumerate().skip(1) {
        let (best_model, best_score) = &fits[best];
        if *score < *best_score || (*score == *best_score && model.lambda > best_model.lambda) {
            best = i;
        }
    }
    let scores = fits.iter().map(|(m, s)| (m.lambda, *s)).collect();
    let (model, _) = fits.into_iter().nth(best).expect("grid is non-empty");
    Ok(LambdaSelection {
        lambda: model.lambda,
        model,
        scores,
    })
}

/// `count` values logarithmically spaced from `low` to `high` inclusive.
pub fn log_grid(low: f64, high: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![low],
        _ => {
            let (a, b) = (low.log10(), high.log10());
            (0..count)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
                .collect()
        }
    }
}

/// Thirteen points from `1e-6` to `1e6`, one per decade.
pub fn default_lambda_grid() -> Vec<f64> {
    (-6..=6).map(|e| 10f64.powi(e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rmse(a: &[f64], p: &[f64]) -> Result<f64> {
        Ok((a.iter().zip(p).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt())
    }

    #[test]
    fn perfect_single_feature_fit() {
        let y: Vec<f64> = (0..20)
            .map(|i| (i as f64 * 0.7).sin() * 3.0 + 1.0)
            .collect();
        let x = Matrix::column(&y);
        let m = fit_ridge(&x, &y, 0.0).unwrap();
        let pred = m.predict(&x).unwrap();
        for (a, b) in y.iter().zip(&pred) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn huge_lambda_predicts_mean() {
        let x = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![2.0, 1.0],
            vec![3.0, 5.0],
            vec![4.0, 2.0],
        ])
        .unwrap();
        let y = [1.0, 3.0, 2.0, 6.0];
        let m = fit_ridge(&x, &y, 1e12).unwrap();
        assert!(m.theta_norm() < 1e-9);
        for p in m.predict(&x).unwrap() {
            assert!((p - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_variance_features() {
        let x = Matrix::from_rows(&[vec![2.0, 0.0], vec![2.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let y = [1.0, 2.0, 6.0];
        let m = fit_ridge(&x, &y, 0.0).unwrap();
        assert_eq!(m.theta, vec![0.0, 0.0]);
        assert_eq!(m.feature_scales, vec![1.0, 1.0]);
        assert_eq!(m.predict(&x).unwrap(), vec![3.0; 3]);
    }

    #[test]
    fn rank_deficient_needs_positive_lambda() {
        let x = Matrix::from_rows(&[
            vec![1.0, 2.0],
            vec![2.0, 4.0],
            vec![3.0, 6.0],
            vec![5.0, 10.0],
        ])
        .unwrap();
        let y = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(
            fit_ridge(&x, &y, 0.0),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let m = fit_ridge(&x, &y, 0.1).unwrap();
        // Symmetric solution on two identical standardized columns.
        assert!((m.theta[0] - m.theta[1]).abs() < 1e-12);
    }

    #[test]
    fn input_validation() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(fit_ridge(&x, &[1.0], 1.0).is_err());
        assert!(fit_ridge(&x, &[1.0, f64::NAN], 1.0).is_err());
        assert!(fit_ridge(&x, &[1.0, 2.0], -1.0).is_err());
        let m = fit_ridge(&x, &[1.0, 2.0], 1.0).unwrap();
        let wide = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(m.predict(&wide).is_err());
    }

    #[test]
    fn single_element_grid() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![4.0]]).unwrap();
        let y = [1.0, 2.5, 3.0];
        let sel = select_lambda(&x, &y, &x, &y, &[0.5], rmse).unwrap();
        assert_eq!(sel.lambda, 0.5);
        assert!(select_lambda(&x, &y, &x, &y, &[], rmse).is_err());
    }

    #[test]
    fn noiseless_picks_smallest_lambda() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![i as f64, ((i * 7) % 11) as f64])
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] - 3.0 * r[1] + 5.0).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let grid = default_lambda_grid();
        let sel = select_lambda(&x, &y, &x, &y, &grid, rmse).unwrap();
        assert_eq!(sel.lambda, 1e-6);
    }

    #[test]
    fn ties_prefer_larger_lambda() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let y = [1.0, 2.0, 3.0];
        let constant = |_: &[f64], _: &[f64]| Ok(1.0);
        let sel = select_lambda(&x, &y, &x, &y, &[0.1, 10.0, 1.0], constant).unwrap();
        assert_eq!(sel.lambda, 10.0);
    }

    #[test]
    fn grids() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 1e-6);
        assert_eq!(g[12], 1e6);
        let l = log_grid(1e-2, 1e2, 5);
        assert!((l[2] - 1.0).abs() < 1e-12);
    }
}
