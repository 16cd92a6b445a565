//! Ridgelet reproducing formula with a pair of band wavelets on M_{2,1}, and a
//! partner with disjoint support, which must reproduce nothing.

use matwave::field::{Field, GaussianMixtureField, GridSpec};
use matwave::inversion::{ridgelet_identity_gap, ridgelet_reproduce, TruncationSchedule};
use matwave::linalg::SpdMatrix;
use matwave::transforms::radon::FrameSet;
use matwave::linalg::OrderParams;
use matwave::wavelet::SpectralWavelet;

fn main() -> matwave::Result<()> {
    let (n, m, k) = (3, 1, 1);
    let spec = GridSpec::new(n, m, 24, 4.0)?;
    let slice_spec = GridSpec::new(n - k, m, 48, 4.0)?;
    let phantom = Field::Mixture(GaussianMixtureField::dog(n, m, 0.6));
    let Field::Mixture(mix) = &phantom else { unreachable!() };
    let f = mix.to_grid(spec)?;
    let params = OrderParams::real(n, m, k, 0.0)?;
    let frames = FrameSet::quadrature(n, 512)?;
    let schedule = TruncationSchedule::geometric(4, 16.0, 128)?;

    let u = SpectralWavelet::default_band(n - k, m);
    let v = u.dilated(1.5)?;
    for c in [0.5, 1.0, 2.0] {
        let gap = ridgelet_identity_gap(&phantom, &u, &v, &SpdMatrix::scalar(m, c)?, &params, &frames, slice_spec, spec)?;
        println!("a = {c}: two transforms vs product wavelet {gap:.1e}");
    }

    let r = ridgelet_reproduce(&phantom, &u, &v, &params, &frames, slice_spec, spec, &schedule, Some(&f))?;
    println!("c_uv = {:.6}, errors {:?} {}", r.constant.re, r.report.errors(), r.report.verdict);

    let far = u.dilated(16.0)?;
    let r = ridgelet_reproduce(&phantom, &u, &far, &params, &frames, slice_spec, spec, &schedule, None)?;
    println!("disjoint partner: c_uv = {}, max |raw| = {:e}", r.constant.re, r.raw.max_abs());
    Ok(())
}
