//! Signature features of one time-augmented window, with their multi-indices.

use sigwin::signature::{feature_indices, flatten_features};
use sigwin::{window_signature, AugmentedWindow};

fn main() -> sigwin::Result<()> {
    // Six hourly temperatures; time is added as channel 1, rescaled to [0, 1].
    let temps = [11.0, 10.4, 10.1, 10.9, 12.6, 14.2];
    let samples: Vec<Vec<f64>> = temps.iter().map(|t| vec![*t]).collect();
    let window = AugmentedWindow::new(&samples)?;
    let sig = window_signature(&window, 3)?;

    let names = feature_indices(window.dim(), 3)?;
    for (idx, value) in names.iter().zip(flatten_features(&sig)) {
        println!("{:<10} {value:>12.6}", format!("S{idx}"));
    }
    Ok(())
}
