//! Special functions and the constants of a setup.
//!
//!     cargo run --release --example constants -- 4 2 1 2.5

use matwave::config::ExperimentConfig;
use matwave::harness::render_constants;
use matwave::special::{siegel_gamma_real, stiefel_volume};

fn main() -> matwave::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let (n, m, k, alpha) = match args.as_slice() {
        [n, m, k, a] => (*n as usize, *m as usize, *k as usize, *a),
        _ => (3, 2, 1, 2.5),
    };

    for a in [1.0, 1.5, 2.0, 2.5, 3.0] {
        println!("Gamma_2({a}) = {:.15}", siegel_gamma_real(2, a)?);
    }
    println!("|V_{{{n},{m}}}| = {:.15}", stiefel_volume(n, m));
    println!();

    let cfg = ExperimentConfig::with_dims(n, m, k, alpha);
    print!("{}", render_constants(&cfg));
    Ok(())
}
