//! Reconstruction errors on M_{4,2} computed on the Fourier side, where a
//! lattice would need 64^8 points. All four formulas share one schedule.

use matwave::field::GaussianMixtureField;
use matwave::inversion::{calderon_spectral, radon_invert_spectral, riesz_invert_spectral, RadonMethod, TruncationSchedule};
use matwave::linalg::OrderParams;
use matwave::wavelet::SpectralWavelet;
use num_complex::Complex64;

fn main() -> matwave::Result<()> {
    let (n, m) = (4, 2);
    let f = GaussianMixtureField::gaussian(n, m, 0.8);
    let w = SpectralWavelet::default_band(n, m);
    let schedule = TruncationSchedule::geometric(10, 4.0, 64)?;
    let outer = 48;
    let params = OrderParams::real(n, m, 1, 0.0)?;

    let runs = [
        ("calderon", calderon_spectral(&f, &w, &schedule, outer)?),
        ("riesz a=2", riesz_invert_spectral(&f, Complex64::new(2.0, 0.0), &w, &schedule, outer)?),
        ("radon m1", radon_invert_spectral(&f, &w, &params, RadonMethod::Backprojection, &schedule, outer)?),
        ("radon m2", radon_invert_spectral(&f, &w.with_rows(n - 1)?, &params, RadonMethod::DualRidgelet, &schedule, outer)?),
    ];
    for (name, report) in runs {
        let errs: Vec<String> = report.errors().iter().map(|e| format!("{e:.2e}")).collect();
        println!("{name:<10} {} {}", errs.join(" "), report.verdict);
    }
    Ok(())
}
