//! Radon transform of a 3×1 phantom over planes of codimension one, then both
//! inversions: backprojection followed by a Riesz-type filter, and the
//! slice-wise dual ridgelet route.

use matwave::field::{Field, GaussianMixtureField, GridSpec};
use matwave::inversion::{radon_invert_method1, radon_invert_method2, TruncationSchedule};
use matwave::transforms::radon::{radon_transform, FrameSet};
use matwave::linalg::OrderParams;
use matwave::wavelet::SpectralWavelet;

fn main() -> matwave::Result<()> {
    let (n, m, k) = (3, 1, 1);
    let spec = GridSpec::new(n, m, 24, 4.0)?;
    let slice_spec = GridSpec::new(n - k, m, 48, 4.0)?;
    let phantom = GaussianMixtureField::dog(n, m, 0.6);
    let f = phantom.to_grid(spec)?;

    let params = OrderParams::real(n, m, k, 0.0)?;
    let frames = FrameSet::quadrature(n, 512)?;
    let data = radon_transform(&Field::Mixture(phantom), &params, &frames)?;
    println!("{} plane directions, slices on {}^{} points", frames.len(), slice_spec.points, slice_spec.dims());

    let w = SpectralWavelet::default_band(n, m);
    let r1 = radon_invert_method1(&data, &w, spec, &TruncationSchedule::geometric(10, 4.0, 128)?, Some(&f), false)?;
    let r2 = radon_invert_method2(&data, &w.with_rows(n - k)?, slice_spec, spec, &TruncationSchedule::geometric(4, 16.0, 128)?, Some(&f))?;
    for (name, r) in [("backprojection", &r1), ("dual ridgelet", &r2)] {
        println!("{name:<15} constant {:.6} errors {:?} {}", r.constant.re, r.report.errors(), r.report.verdict);
    }
    if let (Some(a), Some(b)) = (&r1.normalized, &r2.normalized) {
        println!("gap between the two reconstructions {:.2e}", a.sub(b)?.l2_norm() / b.l2_norm());
    }
    Ok(())
}
