//! Reference data to CSV and back, then synthetic demand and a signature
//! feature dump, all through the library.

use sigwin::data::{gen_synthetic, load_csv, reference_climate, write_csv, ClimateConfig};
use sigwin::pipeline::build_feature_table;
use sigwin::Matrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("sigwin-csv-pipeline");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("climate.csv");

    let climate = reference_climate(&ClimateConfig {
        days: 60,
        ..ClimateConfig::default()
    })?;
    write_csv(&climate, &path)?;
    let frame = load_csv(&path)?;
    println!(
        "{} rows every {} s from {}",
        frame.len(),
        frame.step_seconds(),
        path.display()
    );

    let synth = gen_synthetic(frame.temperature(), frame.demand(), 0.05, 500.0, 1)?;
    let frame = frame.with_demand(synth.demand)?.subsample(2)?;

    let table = build_feature_table(
        &Matrix::column(frame.temperature()),
        3,
        2 * frame.steps_per_day(),
    )?;
    println!(
        "{} windows x {} features; first row {:?}",
        table.features.rows(),
        table.features.cols(),
        table.row_at(table.first_t)
    );
    Ok(())
}
