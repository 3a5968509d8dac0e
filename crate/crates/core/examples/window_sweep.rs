//! Window-size sweep of RidgeSig on synthetic demand for two smoothing
//! parameters. Longer temperature memory (smaller alpha) should favour a
//! longer window. Prints a CSV of validation and test RMSE per window.
//!
//! Usage: `window_sweep [--hourly] [--order N]`

use sigwin::data::{gen_synthetic, reference_climate, ClimateConfig};
use sigwin::pipeline::best_cell;
use sigwin::{Experiment, ForecastConfig};

fn main() -> sigwin::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let hourly = args.iter().any(|a| a == "--hourly");
    let order = args
        .iter()
        .position(|a| a == "--order")
        .and_then(|i| args.get(i + 1))
        .and_then(|v| v.parse().ok())
        .unwrap_or(5);
    let climate = reference_climate(&ClimateConfig::default())?;
    let windows: Vec<usize> = (2..=32).collect();

    println!("alpha,window_days,order,lambda,validation_rmse,test_rmse,test_mape");
    for alpha in [0.005, 0.05] {
        let synth = gen_synthetic(climate.temperature(), climate.demand(), alpha, 500.0, 7)?;
        let frame = climate.with_demand(synth.demand)?;
        let config = ForecastConfig {
            alpha,
            order,
            stride: if hourly { 2 } else { 1 },
            ..ForecastConfig::default()
        };
        let cells = Experiment::new(&frame, config)?.sweep(&windows, &[order])?;
        for c in &cells {
            println!(
                "{alpha},{},{},{:e},{:.1},{:.1},{:.3}",
                c.window_days, c.order, c.lambda, c.validation_rmse, c.test_rmse, c.test_mape
            );
        }
        let by_valid = best_cell(&cells, |c| c.validation_rmse).unwrap();
        let by_test = best_cell(&cells, |c| c.test_rmse).unwrap();
        eprintln!(
            "alpha = {alpha}: best window {} days on validation, {} days on test",
            by_valid.window_days, by_test.window_days
        );
    }
    Ok(())
}
