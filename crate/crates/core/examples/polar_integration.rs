//! Monte Carlo integration over M_{3,2}: Cartesian, polar (Wishart radial part)
//! and the plane-decomposition identity, each with its standard error.

use std::f64::consts::PI;

use matwave::sampling::{integrate_matrix_space, integrate_polar, verify_smith_solmon, RngStream};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn main() -> matwave::Result<()> {
    let (n, m) = (3, 2);
    let f = |x: &DMatrix<f64>| Complex64::new((-PI * x.norm_squared()).exp(), 0.0);
    let exact = 1.0;

    let cart = integrate_matrix_space(f, n, m, 0.7, &RngStream::new(7, 0), 100_000)?;
    let polar = integrate_polar(f, n, m, n as f64, 0.7, &RngStream::new(7, 1), 100_000)?;
    println!("exact     {exact:.6}");
    println!("cartesian {:.6} ± {:.1e}", cart.mean.re, cart.se);
    println!("polar     {:.6} ± {:.1e}", polar.mean.re, polar.se);

    let g = |x: &DMatrix<f64>| Complex64::new((-x.norm_squared() / 2.0).exp() * (1.0 + x[(0, 0)].powi(2)), 0.0);
    for k in 1..n - m + 1 {
        let r = verify_smith_solmon(g, n, m, k, 1.0, &RngStream::new(7, 2 + k as u64), 100_000)?;
        println!(
            "plane decomposition k={k}: {:.5} ± {:.1e} vs {:.5} ± {:.1e} ({})",
            r.lhs.mean.re,
            r.lhs.se,
            r.rhs.mean.re,
            r.rhs.se,
            if r.pass { "agree" } else { "DISAGREE" }
        );
    }
    Ok(())
}
