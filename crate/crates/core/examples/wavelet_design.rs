//! Band-limited spectral wavelets: profile, admissibility constants, their
//! convergence over a truncation schedule, and the spatial wavelet on a lattice.

use matwave::field::GridSpec;
use matwave::inversion::TruncationSchedule;
use matwave::wavelet::{calderon_constant, lattice_radial_deviation, make_band_wavelet, riesz_inversion_constant, spatial_wavelet, WaveletSpec};
use num_complex::Complex64;

fn main() -> matwave::Result<()> {
    let spec = WaveletSpec::parse("m = 2\ndelta = 0.25\nlambda = 4\nbump_degree = 5\n")?;
    let w = spec.wavelet(4)?;
    println!("support {:?}, breakpoints {:?}", w.support(), w.breakpoints());
    for lam in [0.2, 0.3, 0.5, 1.0, 2.0, 3.5] {
        println!("  u0 factor at {lam}: {:.6}", w.factor(lam));
    }

    let schedule = TruncationSchedule::geometric(6, 2.0, 64)?;
    let c = calderon_constant(&w, 4, 2, &schedule.pairs)?;
    for s in &c.steps {
        println!("  ({:.4}, {:>5}) partial c_nu = {:.10}", s.eps, s.rho, s.value);
    }
    println!("c_nu = {:.12}", c.value);
    for alpha in [0.5, 1.0, 2.0] {
        println!("d_w({alpha}) = {:.12}", riesz_inversion_constant(&w, 4, 2, Complex64::new(alpha, 0.0))?.re);
    }

    let w21 = make_band_wavelet(2, 1, 0.25, 4.0)?;
    let g = spatial_wavelet(&w21, GridSpec::new(2, 1, 128, 32.0)?)?;
    println!("spatial wavelet on M_2,1: max {:.4e}, radial deviation {:.1e}", g.max_abs(), lattice_radial_deviation(&g));
    Ok(())
}
