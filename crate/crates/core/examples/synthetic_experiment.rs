//! Synthetic demand experiment: RidgeSig against linear baselines.
//!
//! Generates a four-year reference climate, replaces its demand with the
//! quadratic-in-smoothed-temperature synthetic series, and compares test
//! errors of every model. Pass `--hourly` to subsample to hourly data.

use sigwin::data::{gen_synthetic, reference_climate, ClimateConfig};
use sigwin::{Experiment, ForecastConfig, ModelSpec};

fn main() -> sigwin::Result<()> {
    let hourly = std::env::args().any(|a| a == "--hourly");
    let climate = reference_climate(&ClimateConfig::default())?;
    let synth = gen_synthetic(climate.temperature(), climate.demand(), 0.005, 1000.0, 7)?;
    println!(
        "fitted demand = {:.1} + {:.2} T̄ + {:.3} T̄²",
        synth.theta0, synth.theta1, synth.theta2
    );
    let frame = climate.with_demand(synth.demand)?;

    let config = ForecastConfig {
        stride: if hourly { 2 } else { 1 },
        ..ForecastConfig::default()
    };
    let experiment = Experiment::new(&frame, config)?;
    let report = experiment.evaluate(&ModelSpec::synthetic_suite())?;
    println!("{:<18} {:>10} {:>8}", "model", "RMSE (MW)", "MAPE %");
    for m in &report.models {
        println!("{:<18} {:>10.0} {:>8.2}", m.name, m.rmse, m.mape);
    }
    Ok(())
}
