//! Drive the identity suites from an inline config, as the CLI does, and print
//! the assertion table.
//!
//!     cargo run --release --example verify_suite -- duality

use matwave::config::ExperimentConfig;
use matwave::harness::{all_pass, verify, write_assertions_csv};

const CONFIG: &str = "
[dimensions]
n = 4
m = 2
k = 1
alpha = 2.5

[phantom]
kind = shifted
width = 1.0
center = 0.3, -0.2, 0.5, 0.1, 0.0, 0.7, -0.4, 0.2

[sampling]
seed = 7
samples = 50000
pairs = 5
";

fn main() -> matwave::Result<()> {
    let suite = std::env::args().nth(1).unwrap_or_else(|| "projection_slice".into());
    let cfg = ExperimentConfig::parse(CONFIG)?;
    let rows = verify(&cfg, Some(&suite))?;
    write_assertions_csv(&rows, std::io::stdout().lock())?;
    println!("{}", if all_pass(&rows) { "all assertions pass" } else { "some assertions FAIL" });
    Ok(())
}
