//! Intertwining operators (Wf)(ξ,t) = ∫ f(x) w(t - ξ'x) dx, their dual, and the
//! ridgelet pair obtained with the scaled profile w_a(z) = |a|^{(k-n)/2} w(z a^{-1/2}).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, GaussianMixtureField, GridField, GridSpec};
use crate::linalg::{trace_inner, OrderParams, SpdMatrix, StiefelFrame};
use crate::sampling::{gaussian_ln_density, gaussian_matrix, mc_estimate, sample_stiefel, Estimate, RngStream};
use crate::transforms::cwt::{convolve, scaled_mixture};
use crate::transforms::radon::{dual_radon, dual_radon_grid, radon_transform, FrameSet, RadonField, Slice};

fn check_slice_wavelet(w: &Field, params: &OrderParams) -> Result<()> {
    params.check_radon()?;
    let want = (params.n - params.k, params.m);
    if w.shape() != want {
        return Err(Error::IncompatibleParams(format!("ridgelet wavelet must live on M_{{{},{}}}, got {:?}", want.0, want.1, w.shape())));
    }
    Ok(())
}

/// w_a on M_{n-k,m}. Mixtures need a scalar a; grids are resampled by
/// multilinear interpolation at z a^{-1/2}.
pub fn scaled_slice_wavelet(w: &Field, a: &SpdMatrix) -> Result<Field> {
    let (rows, m) = w.shape();
    if a.size() != m {
        return Err(Error::Dimension(format!("scale must be {m}×{m}")));
    }
    if a.is_identity() {
        return Ok(w.clone());
    }
    match w {
        Field::Mixture(mx) => {
            let c = a.as_scalar().ok_or_else(|| Error::Unsupported("closed-form scaling of a mixture needs a scalar a".into()))?;
            Ok(Field::Mixture(scaled_mixture(mx, c, rows)))
        }
        Field::Grid(g) => {
            let inv_root = a.power(-0.5);
            let amp = a.det().powf(-(rows as f64) / 2.0);
            Ok(Field::Grid(GridField::sample(g.spec, |z| g.evaluate(&(z * inv_root.matrix())).unwrap_or_default() * amp)))
        }
    }
}

fn convolve_slices(phi: &RadonField, w: &Field) -> Result<RadonField> {
    phi.map_slices(|s| {
        let f = match s {
            Slice::Mixture(mx) => Field::Mixture(mx.clone()),
            Slice::Grid(g) => Field::Grid(g.clone()),
        };
        Ok(match convolve(&f, w)? {
            Field::Mixture(mx) => Slice::Mixture(mx),
            Field::Grid(g) => Slice::Grid(g),
        })
    })
}

/// (W f)(ξ, t) through the factorization W f = W_0 f̂: Radon transform, then
/// t-convolution with w on every slice.
pub fn intertwining_w(f: &Field, w: &Field, params: &OrderParams, frames: &FrameSet) -> Result<RadonField> {
    check_slice_wavelet(w, params)?;
    let phi = radon_transform(f, params, frames)?;
    convolve_slices(&phi, w)
}

/// (R_a f)(ξ, t) = ∫ f(x) w_a(t - ξ'x) dx.
pub fn ridgelet_transform(f: &Field, w: &Field, a: &SpdMatrix, params: &OrderParams, frames: &FrameSet) -> Result<RadonField> {
    check_slice_wavelet(w, params)?;
    intertwining_w(f, &scaled_slice_wavelet(w, a)?, params, frames)
}

fn dual_params(phi: &RadonField) -> Result<OrderParams> {
    OrderParams::real(phi.n, phi.m, phi.k, 0.0)
}

/// Slices of W_0 φ with w_a: the t-convolution half of the dual ridgelet transform.
pub fn slice_convolution(phi: &RadonField, w: &Field, a: &SpdMatrix) -> Result<RadonField> {
    check_slice_wavelet(w, &dual_params(phi)?)?;
    convolve_slices(phi, &scaled_slice_wavelet(w, a)?)
}

/// (W_a* φ)(x) = ∫ d_*ξ ∫ φ(ξ,t) w_a(ξ'x - t) dt at points.
pub fn dual_ridgelet(phi: &RadonField, w: &Field, a: &SpdMatrix, points: &[DMatrix<f64>]) -> Result<Vec<Estimate>> {
    dual_radon(&slice_convolution(phi, w, a)?, points)
}

/// W_a* φ sampled on a lattice.
pub fn dual_ridgelet_grid(phi: &RadonField, w: &Field, a: &SpdMatrix, spec: GridSpec) -> Result<GridField> {
    dual_radon_grid(&slice_convolution(phi, w, a)?, spec)
}

/// Direct definition ∫ f(x) w(t - ξ'x) dx by Monte Carlo over x.
pub fn intertwining_direct_at(f: &GaussianMixtureField, w: &GaussianMixtureField, xi: &StiefelFrame, t: &DMatrix<f64>, stream: &RngStream, samples: usize) -> Result<Estimate> {
    if xi.ambient() != f.n || (w.n, w.m) != (xi.size(), f.m) || t.shape() != (xi.size(), f.m) {
        return Err(Error::Dimension("frame, wavelet and offset shapes disagree".into()));
    }
    let spread = f.terms.iter().map(|tm| tm.center.norm()).fold(0.0, f64::max);
    let s = f.widest() + spread;
    let (n, m) = (f.n, f.m);
    mc_estimate(stream, samples, |rng| {
        let x = gaussian_matrix(n, m, rng) * s;
        f.evaluate(&x) * w.evaluate(&(t - xi.matrix().transpose() * &x)) * (-gaussian_ln_density(&x, s)).exp()
    })
}

/// Fourier representation of the dual ridgelet transform of φ = f̂:
/// (2π)^{(k-n)m} ∫ d_*ξ ∫ exp(-i tr(x'ξz)) (F̃w_a)(z) (Ff)(ξz) dz, with ξ uniform
/// and z from a normal proposal.
pub fn dual_ridgelet_fourier_at(
    f: &GaussianMixtureField,
    w: &GaussianMixtureField,
    a: f64,
    k: usize,
    points: &[DMatrix<f64>],
    stream: &RngStream,
    samples: usize,
) -> Result<Vec<Estimate>> {
    let (n, m) = (f.n, f.m);
    crate::linalg::check_plane_codim(n, m, k)?;
    let q = n - k;
    if (w.n, w.m) != (q, m) {
        return Err(Error::IncompatibleParams(format!("wavelet must live on M_{{{q},{m}}}")));
    }
    let fw = scaled_mixture(w, a, q).fourier();
    let ff = f.fourier();
    let s = 1.0 / f.narrowest().min(w.narrowest() * a.sqrt());
    let pref = (2.0 * PI).powi((k as i32 - n as i32) * m as i32);
    let mut out = Vec::with_capacity(points.len());
    for (p, x) in points.iter().enumerate() {
        let est = mc_estimate(&stream.child(p as u64), samples, |rng| {
            let xi = sample_stiefel(n, q, rng);
            let z = gaussian_matrix(q, m, rng) * s;
            let y = xi.matrix() * &z;
            Complex64::from_polar(1.0, -trace_inner(x, &y)) * fw.evaluate(&z) * ff.evaluate(&y) * (-gaussian_ln_density(&z, s)).exp()
        })?;
        out.push(est.scale(pref));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rect;

    fn setup() -> (GaussianMixtureField, OrderParams, FrameSet) {
        let f = GaussianMixtureField::shifted_gaussian(rect(3, 1, &[0.3, -0.2, 0.4]), 0.9);
        let params = OrderParams::real(3, 1, 1, 0.0).unwrap();
        let frames = FrameSet::monte_carlo(3, 2, 64, &RngStream::new(11, 0));
        (f, params, frames)
    }

    #[test]
    fn narrow_wavelet_approaches_radon() {
        let (f, params, frames) = setup();
        let phi = radon_transform(&Field::Mixture(f.clone()), &params, &frames).unwrap();
        let mut last = f64::INFINITY;
        for width in [0.5, 0.25, 0.125] {
            // unit-mass narrow Gaussian on M_{2,1}
            let w = GaussianMixtureField::gaussian(2, 1, width).scale(Complex64::new(1.0 / (2.0 * PI * width * width), 0.0));
            let wf = intertwining_w(&Field::Mixture(f.clone()), &Field::Mixture(w), &params, &frames).unwrap();
            let mut err = 0.0;
            let mut norm = 0.0;
            for (a, b) in wf.slices.iter().zip(&phi.slices) {
                let (Slice::Mixture(a), Slice::Mixture(b)) = (a, b) else { panic!() };
                err += a.sub(b).unwrap().l2_norm().powi(2);
                norm += b.l2_norm().powi(2);
            }
            let rel = (err / norm).sqrt();
            assert!(rel < last, "{rel} {last}");
            last = rel;
        }
        assert!(last < 0.02);
    }

    #[test]
    fn factorized_matches_direct_definition() {
        let (f, params, frames) = setup();
        let w = GaussianMixtureField::dog(2, 1, 0.7);
        let wf = intertwining_w(&Field::Mixture(f.clone()), &Field::Mixture(w.clone()), &params, &frames).unwrap();
        let t = rect(2, 1, &[0.2, -0.1]);
        for i in 0..3 {
            let direct = intertwining_direct_at(&f, &w, &wf.frames.frames[i], &t, &RngStream::new(12, i as u64), 40_000).unwrap();
            assert!(direct.covers(wf.evaluate(i, &t), 3.0), "{direct:?} {}", wf.evaluate(i, &t));
        }
    }

    #[test]
    fn dual_ridgelet_matches_fourier_representation() {
        let (f, params, _) = setup();
        let frames = FrameSet::quadrature(3, 400).unwrap();
        let w = GaussianMixtureField::dog(2, 1, 0.6);
        let a = 1.5;
        let phi = radon_transform(&Field::Mixture(f.clone()), &params, &frames).unwrap();
        let pts = vec![rect(3, 1, &[0.0, 0.1, 0.2]), rect(3, 1, &[0.8, -0.5, 0.3])];
        let direct = dual_ridgelet(&phi, &Field::Mixture(w.clone()), &SpdMatrix::scalar(1, a).unwrap(), &pts).unwrap();
        let fourier = dual_ridgelet_fourier_at(&f, &w, a, 1, &pts, &RngStream::new(13, 0), 80_000).unwrap();
        for (d, e) in direct.iter().zip(&fourier) {
            assert!(e.covers(d.mean, 3.0), "{d:?} {e:?}");
        }
    }

    #[test]
    fn identity_scale_is_intertwining() {
        let (f, params, frames) = setup();
        let w = Field::Mixture(GaussianMixtureField::dog(2, 1, 0.7));
        let a = ridgelet_transform(&Field::Mixture(f.clone()), &w, &SpdMatrix::identity(1), &params, &frames).unwrap();
        let b = intertwining_w(&Field::Mixture(f), &w, &params, &frames).unwrap();
        assert_eq!(a, b);
    }
}
