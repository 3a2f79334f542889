//! Five rounds of 4x decimation per sampler and cloud size, printed as CSV.
//!
//! cargo run --release --example decimation_benchmark -- [max_points]

use std::time::Duration;

use randla::sampling::{run_decimation_benchmark, BenchConfig};

fn main() -> randla::Result<()> {
    let max: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100_000);
    let sizes = [1_000, 10_000, 100_000, 1_000_000].into_iter().filter(|&n| n <= max).collect();
    let cfg = BenchConfig { sizes, time_budget: Duration::from_secs(60), memory_budget: 512 << 20, ..Default::default() };
    let report = run_decimation_benchmark(&cfg)?;
    print!("{}", report.to_csv());
    Ok(())
}
