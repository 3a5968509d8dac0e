//! Ridge regression with the penalty chosen on a validation split.

use sigwin::pipeline::rmse;
use sigwin::ridge::log_grid;
use sigwin::{select_lambda, Matrix};

fn main() -> sigwin::Result<()> {
    // y = 2 x0 - x1 + noise; x2 is a near copy of x0.
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|i| {
            let t = i as f64;
            let x0 = (0.1 * t).sin();
            vec![x0, (0.07 * t).cos(), x0 + 1e-3 * (1.3 * t).sin()]
        })
        .collect();
    let y: Vec<f64> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| 2.0 * r[0] - r[1] + 0.05 * (i as f64 * 2.1).sin())
        .collect();
    let x = Matrix::from_rows(&rows)?;

    let grid = log_grid(1e-6, 1e2, 9);
    let sel = select_lambda(
        &x.slice_rows(0..200),
        &y[..200],
        &x.slice_rows(200..300),
        &y[200..],
        &grid,
        rmse,
    )?;
    for (lambda, score) in &sel.scores {
        let mark = if *lambda == sel.lambda { " <" } else { "" };
        println!("lambda {lambda:>8.0e}  validation RMSE {score:.5}{mark}");
    }
    println!("theta (standardized) = {:?}", sel.model.theta);
    Ok(())
}
