use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigwin::pipeline::rmse;
use sigwin::ridge::{log_grid, RidgeProblem};
use sigwin::{fit_ridge, select_lambda, Matrix};

fn design(n: usize, p: usize, seed: u64) -> (Matrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut data = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..p)
            .map(|j| rng.random_range(-1.0..1.0) * (j + 1) as f64 + j as f64)
            .collect();
        y.push(
            3.0 + row.iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>()
                + rng.random_range(-0.5..0.5),
        );
        data.extend(row);
    }
    (Matrix::from_vec(n, p, data).unwrap(), y)
}

/// Standardize with population sd, then solve the normal equations with nalgebra's LU.
fn oracle(x: &Matrix, y: &[f64], lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let (n, p) = (x.rows(), x.cols());
    let mut z = DMatrix::<f64>::zeros(n, p);
    for j in 0..p {
        let col: Vec<f64> = (0..n).map(|i| x.get(i, j)).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        for i in 0..n {
            z[(i, j)] = (col[i] - mean) / sd;
        }
    }
    let ybar = y.iter().sum::<f64>() / n as f64;
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - ybar));
    let a = z.transpose() * &z + DMatrix::<f64>::identity(p, p) * lambda;
    let theta = a.lu().solve(&(z.transpose() * yc)).unwrap();
    let fitted = &z * &theta;
    (
        theta.iter().copied().collect(),
        fitted.iter().map(|v| v + ybar).collect(),
    )
}

#[test]
fn matches_normal_equations_oracle() {
    let (x, y) = design(200, 6, 1);
    for lambda in [0.0, 1e-3, 1.0, 50.0, 1e4] {
        let model = fit_ridge(&x, &y, lambda).unwrap();
        let (theta, fitted) = oracle(&x, &y, lambda);
        for (a, b) in model.theta.iter().zip(&theta) {
            assert!(
                (a - b).abs() <= 1e-8 * (1.0 + b.abs()),
                "lambda {lambda}: {a} vs {b}"
            );
        }
        for (a, b) in model.predict(&x).unwrap().iter().zip(&fitted) {
            assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn zero_lambda_on_rank_deficient_design_fails() {
    let x = Matrix::from_rows(&[
        vec![1.0, 2.0],
        vec![2.0, 4.0],
        vec![3.0, 6.0],
        vec![5.0, 10.0],
    ])
    .unwrap();
    let y = [1.0, 2.0, 2.5, 4.0];
    assert!(fit_ridge(&x, &y, 0.0).is_err());
    assert!(fit_ridge(&x, &y, 1e-3).is_ok());
}

#[test]
fn constant_column_is_ignored() {
    let x = Matrix::from_rows(&[vec![1.0, 7.0], vec![2.0, 7.0], vec![4.0, 7.0]]).unwrap();
    let model = fit_ridge(&x, &[2.0, 4.0, 8.0], 0.0).unwrap();
    assert_eq!(model.theta[1], 0.0);
    assert_eq!(model.feature_scales[1], 1.0);
    assert!((model.predict_row(&[3.0, 0.0]) - 6.0).abs() < 1e-12);
}

#[test]
fn bad_inputs() {
    let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
    assert!(fit_ridge(&x, &[1.0], 1.0).is_err());
    assert!(fit_ridge(&x, &[1.0, f64::NAN], 1.0).is_err());
    assert!(fit_ridge(&x, &[1.0, 2.0], -1.0).is_err());
}

#[test]
fn selection_matches_exhaustive_search() {
    let (x, y) = design(240, 8, 9);
    let train = x.slice_rows(0..160);
    let valid = x.slice_rows(160..240);
    let grid = log_grid(1e-4, 1e4, 17);
    let sel = select_lambda(&train, &y[..160], &valid, &y[160..], &grid, rmse).unwrap();

    let mut best = (f64::INFINITY, 0.0);
    for &lambda in &grid {
        let m = fit_ridge(&train, &y[..160], lambda).unwrap();
        let score = rmse(&y[160..], &m.predict(&valid).unwrap()).unwrap();
        if score < best.0 || (score == best.0 && lambda > best.1) {
            best = (score, lambda);
        }
    }
    assert_eq!(sel.lambda, best.1);
    assert_eq!(sel.scores.len(), grid.len());
}

#[test]
fn ties_go_to_larger_lambda() {
    // Constant target: theta is exactly zero for every lambda, so all scores tie.
    let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
    let y = [5.0, 5.0, 5.0];
    let sel = select_lambda(&x, &y, &x, &y, &[0.1, 10.0, 1.0], rmse).unwrap();
    assert_eq!(sel.lambda, 10.0);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn shrinkage_is_monotone(seed in 0u64..500) {
        let (x, y) = design(60, 5, seed);
        let problem = RidgeProblem::new(&x, &y).unwrap();
        let mut last = f64::INFINITY;
        for lambda in log_grid(1e-3, 1e5, 9) {
            let norm = problem.solve(lambda).unwrap().theta_norm();
            prop_assert!(norm <= last * (1.0 + 1e-12));
            last = norm;
        }
    }

    #[test]
    fn predictions_invariant_to_column_scaling(seed in 0u64..500, scale in 0.01f64..100.0, shift in -100.0f64..100.0) {
        let (x, y) = design(50, 3, seed);
        let rows: Vec<Vec<f64>> = x.iter_rows().map(|r| vec![r[0] * scale + shift, r[1], r[2]]).collect();
        let scaled = Matrix::from_rows(&rows).unwrap();
        let a = fit_ridge(&x, &y, 2.0).unwrap().predict(&x).unwrap();
        let b = fit_ridge(&scaled, &y, 2.0).unwrap().predict(&scaled).unwrap();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() < 1e-8 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn problem_reuse_equals_fresh_fit(seed in 0u64..500, lambda in 0.0f64..100.0) {
        let (x, y) = design(40, 4, seed);
        let reused = RidgeProblem::new(&x, &y).unwrap().solve(lambda).unwrap();
        prop_assert_eq!(reused, fit_ridge(&x, &y, lambda).unwrap());
    }
}
