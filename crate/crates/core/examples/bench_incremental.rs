//! Incremental sliding updates against per-window recomputation.
//!
//! `cargo run --release --example bench_incremental -- [window] [order]`

use sigwin::bench::{run_bench, BenchConfig};

fn main() -> sigwin::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>());
    let defaults = BenchConfig::default();
    let config = BenchConfig {
        window: args.next().and_then(Result::ok).unwrap_or(defaults.window),
        order: args.next().and_then(Result::ok).unwrap_or(defaults.order),
        ..defaults
    };
    let r = run_bench(&config)?;
    println!(
        "w = {}, N = {}, {} slides",
        config.window, config.order, config.slides
    );
    println!(
        "incremental {:.4} s ({} products/slide), naive {:.3} s ({} products/slide)",
        r.incremental_seconds,
        r.incremental_products_per_slide(),
        r.naive_seconds,
        r.naive_products_per_slide()
    );
    println!(
        "speedup {:.0}x, final difference {:.1e}",
        r.speedup(),
        r.final_relative_error
    );
    Ok(())
}
