//! Streaming signatures: two products per new sample instead of one per
//! window step, checked against recomputation.

use sigwin::bench::random_walk;
use sigwin::{window_signature, AugmentedWindow, SlidingParams, SlidingSignatureState};

fn main() -> sigwin::Result<()> {
    let window = 48;
    let params = SlidingParams::new(3, 4, window);
    let stream = random_walk(500, 2, 42);

    let mut engine = SlidingSignatureState::new(params)?;
    for (t, sample) in stream.iter().enumerate() {
        if engine.push(sample)? && t % 100 == 0 {
            let fresh =
                AugmentedWindow::with_time_step(&stream[t - window..=t], params.time_step())?;
            let err = engine
                .signature()
                .expect("window is full")
                .max_relative_error(&window_signature(&fresh, params.order)?);
            println!(
                "t = {t:>3}: {} features, drift vs recompute {err:.1e}",
                engine.feature_len()
            );
        }
    }
    println!("update products so far: {}", engine.update_products());

    // Step back one sample.
    let dropped = engine.unslide(&stream[stream.len() - window - 2])?;
    println!("unslide dropped {dropped:?}");
    Ok(())
}
