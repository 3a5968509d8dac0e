//! Truncation-order sweep of RidgeSig on synthetic demand (alpha = 0.005).
//! Prints test RMSE per (window, order) as CSV, ready for plotting.
//!
//! Usage: `order_sweep [--hourly]`

use sigwin::data::{gen_synthetic, reference_climate, ClimateConfig};
use sigwin::pipeline::best_cell;
use sigwin::{Experiment, ForecastConfig};

fn main() -> sigwin::Result<()> {
    let hourly = std::env::args().any(|a| a == "--hourly");
    let climate = reference_climate(&ClimateConfig::default())?;
    let synth = gen_synthetic(climate.temperature(), climate.demand(), 0.005, 500.0, 7)?;
    let frame = climate.with_demand(synth.demand)?;
    let config = ForecastConfig {
        stride: if hourly { 2 } else { 1 },
        ..ForecastConfig::default()
    };
    let experiment = Experiment::new(&frame, config)?;
    let windows = [2, 4, 6, 9, 12, 16, 24, 32];
    let orders = [2, 3, 4, 5, 6, 7];
    let cells = experiment.sweep(&windows, &orders)?;

    println!("window_days,order,lambda,validation_rmse,test_rmse");
    for c in &cells {
        println!(
            "{},{},{:e},{:.1},{:.1}",
            c.window_days, c.order, c.lambda, c.validation_rmse, c.test_rmse
        );
    }
    for n in orders {
        let row: Vec<_> = cells.iter().filter(|c| c.order == n).cloned().collect();
        let best = best_cell(&row, |c| c.test_rmse).unwrap();
        eprintln!(
            "N = {n}: best test RMSE {:.0} MW at {} days",
            best.test_rmse, best.window_days
        );
    }
    Ok(())
}
