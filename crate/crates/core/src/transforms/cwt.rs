//! Wavelet transform with a matrix-valued scale: (W_a f)(x) = ∫ f(x - y a^{1/2}) w(y) dy.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{fft_continuous, Field, GaussianMixtureField, GaussianTerm, GridField};
use crate::linalg::{sqrt_spd, SpdMatrix};
use crate::sampling::{gaussian_matrix, sample_stiefel, RngStream};
use crate::wavelet::{lattice_radial_deviation, SpectralWavelet};

/// Tolerance of the radiality spot-check, relative to the peak of w.
pub const RADIAL_TOL: f64 = 1e-8;

const SPOT_SEED: u64 = 0x5eed_0001;

/// Rejects wavelets that are not functions of y'y. Mixtures are spot-checked at
/// random rotations γ ∈ O(n); grids are compared with their images under the
/// lattice-preserving rotations (row swaps and sign flips).
pub fn check_radial(w: &Field) -> Result<()> {
    let dev = match w {
        Field::Grid(g) => lattice_radial_deviation(g),
        Field::Mixture(mx) => mixture_radial_deviation(mx),
    };
    if dev > RADIAL_TOL {
        return Err(Error::NotRadial(dev));
    }
    Ok(())
}

fn mixture_radial_deviation(w: &GaussianMixtureField) -> f64 {
    let mut rng = RngStream::new(SPOT_SEED, 0).rng();
    let scale = w.widest();
    let peak = w.terms.iter().map(|t| t.amplitude.norm()).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for _ in 0..8 {
        let x = gaussian_matrix(w.n, w.m, &mut rng) * scale;
        let g = sample_stiefel(w.n, w.n, &mut rng);
        let gx = g.matrix() * &x;
        worst = worst.max((w.evaluate(&gx) - w.evaluate(&x)).norm() / peak);
    }
    worst
}

/// w_a(y) = |a|^{-n/2} w(y a^{-1/2}) for a mixture and a scalar a = c·I.
pub fn scaled_mixture(w: &GaussianMixtureField, c: f64, exponent_rows: usize) -> GaussianMixtureField {
    let amp = c.powf(-((exponent_rows * w.m) as f64) / 2.0);
    let terms = w
        .terms
        .iter()
        .map(|t| GaussianTerm::modulated(t.amplitude * amp, &t.center * c.sqrt(), t.width * c.sqrt(), &t.modulation / c.sqrt()))
        .collect();
    GaussianMixtureField { n: w.n, m: w.m, terms }
}

fn check_scale(a: &SpdMatrix, m: usize) -> Result<()> {
    if a.size() != m {
        return Err(Error::Dimension(format!("scale must be {m}×{m}, got {}×{}", a.size(), a.size())));
    }
    Ok(())
}

/// (W_a f)(x) = (f ∗ w_a)(x). Mixture pairs are convolved in closed form (scalar
/// a only, since isotropic terms stay isotropic only then); otherwise the grid
/// path multiplies Ff(y) by (Fw)(y a^{1/2}).
pub fn wavelet_transform(f: &Field, w: &Field, a: &SpdMatrix) -> Result<Field> {
    if f.shape() != w.shape() {
        return Err(Error::IncompatibleParams(format!("f on {:?}, w on {:?}", f.shape(), w.shape())));
    }
    let (n, m) = f.shape();
    check_scale(a, m)?;
    check_radial(w)?;
    match (f, w) {
        (Field::Mixture(fm), Field::Mixture(wm)) => {
            let c = a.as_scalar().ok_or_else(|| Error::Unsupported("closed-form mixture transform needs a scalar scale".into()))?;
            Ok(Field::Mixture(fm.convolve(&scaled_mixture(wm, c, n))?))
        }
        (Field::Grid(fg), Field::Mixture(wm)) => {
            let fw = wm.fourier();
            let root = sqrt_spd(a)?;
            let identity = a.is_identity();
            Ok(Field::Grid(fg.apply_multiplier(|y| if identity { fw.evaluate(y) } else { fw.evaluate(&(y * root.matrix())) })))
        }
        (Field::Grid(fg), Field::Grid(wg)) => grid_pair(fg, wg, a).map(Field::Grid),
        (Field::Mixture(fm), Field::Grid(wg)) => grid_pair(&fm.to_grid(wg.spec)?, wg, a).map(Field::Grid),
    }
}

fn grid_pair(f: &GridField, w: &GridField, a: &SpdMatrix) -> Result<GridField> {
    if f.spec != w.spec {
        return Err(Error::IncompatibleParams("f and w sampled on different lattices".into()));
    }
    let fw = fft_continuous(w, false);
    let mut ff = fft_continuous(f, false);
    if a.is_identity() {
        for (v, s) in ff.values.iter_mut().zip(&fw.values) {
            *v *= s;
        }
    } else {
        // (Fw)(y a^{1/2}) off the lattice: multilinear interpolation of the spectrum
        let root = sqrt_spd(a)?;
        let dual = ff.spec;
        for (i, v) in ff.values.iter_mut().enumerate() {
            let z = dual.point(i) * root.matrix();
            *v *= fw.evaluate(&z).unwrap_or(Complex64::new(0.0, 0.0));
        }
    }
    Ok(fft_continuous(&ff, true))
}

/// f ∗ w, the a = I case without the radiality requirement.
pub fn convolve(f: &Field, w: &Field) -> Result<Field> {
    if f.shape() != w.shape() {
        return Err(Error::IncompatibleParams(format!("f on {:?}, w on {:?}", f.shape(), w.shape())));
    }
    let id = SpdMatrix::identity(f.shape().1);
    match (f, w) {
        (Field::Mixture(fm), Field::Mixture(wm)) => Ok(Field::Mixture(fm.convolve(wm)?)),
        (Field::Grid(fg), Field::Mixture(wm)) => {
            let fw = wm.fourier();
            Ok(Field::Grid(fg.apply_multiplier(|y| fw.evaluate(y))))
        }
        (Field::Grid(fg), Field::Grid(wg)) => grid_pair(fg, wg, &id).map(Field::Grid),
        (Field::Mixture(fm), Field::Grid(wg)) => grid_pair(&fm.to_grid(wg.spec)?, wg, &id).map(Field::Grid),
    }
}

/// W_a f on a grid for a Fourier-side wavelet: multiplier u_0(a^{1/2} y'y a^{1/2}).
pub fn wavelet_transform_spectral(f: &GridField, w: &SpectralWavelet, a: &SpdMatrix) -> Result<GridField> {
    if (f.spec.n, f.spec.m) != (w.rows, w.m) {
        return Err(Error::IncompatibleParams("wavelet and field live on different spaces".into()));
    }
    check_scale(a, w.m)?;
    let root = sqrt_spd(a)?;
    let r = root.matrix().clone();
    Ok(f.apply_multiplier(|y| Complex64::new(w.fourier(&(y * &r)), 0.0)))
}

/// Multiplier of W_a at frequency y, for callers that assemble their own sums.
pub fn spectral_scale_multiplier(w: &SpectralWavelet, root: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    w.fourier(&(y * root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use crate::linalg::rect;
    use std::f64::consts::PI;

    #[test]
    fn scalar_scale_widens_gaussians() {
        let f = GaussianMixtureField::gaussian(2, 1, 0.7);
        let w = GaussianMixtureField::gaussian(2, 1, 0.4);
        let c = 2.5;
        let out = wavelet_transform(&Field::Mixture(f), &Field::Mixture(w), &SpdMatrix::scalar(1, c).unwrap()).unwrap();
        let Field::Mixture(g) = out else { panic!() };
        // ∫ N(σ_f) N(σ_w √c) gives (2π σ_w² c)^{nm/2} c^{-nm/2} scaled Gaussian of width sqrt(σ_f² + c σ_w²)
        let s2 = 0.49 + c * 0.16;
        let x = rect(2, 1, &[0.3, -0.8]);
        let amp = (2.0 * PI * 0.16).powf(1.0) * (0.49 / s2);
        let expect = amp * (-x.norm_squared() / (2.0 * s2)).exp();
        assert!((g.evaluate(&x).re - expect).abs() < 1e-12);
    }

    #[test]
    fn grid_path_matches_fourier_product() {
        let spec = GridSpec::new(2, 1, 64, 8.0).unwrap();
        let f = GaussianMixtureField::shifted_gaussian(rect(2, 1, &[0.5, -0.2]), 0.8);
        let w = GaussianMixtureField::dog(2, 1, 0.5);
        let a = SpdMatrix::scalar(1, 1.7).unwrap();
        let out = wavelet_transform(&Field::Grid(f.to_grid(spec).unwrap()), &Field::Mixture(w.clone()), &a).unwrap();
        let Field::Grid(g) = out else { panic!() };
        let spectrum = fft_continuous(&g, false);
        let ff = f.fourier();
        let fw = w.fourier();
        let mut worst: f64 = 0.0;
        let peak = spectrum.max_abs();
        for i in 0..spectrum.values.len() {
            let y = spectrum.spec.point(i);
            let expect = ff.evaluate(&y) * fw.evaluate(&(&y * 1.7f64.sqrt()));
            worst = worst.max((spectrum.values[i] - expect).norm() / peak);
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn off_center_wavelet_is_rejected() {
        let w = GaussianMixtureField::shifted_gaussian(rect(2, 1, &[1.0, 0.0]), 1.0);
        let f = GaussianMixtureField::gaussian(2, 1, 1.0);
        let err = wavelet_transform(&Field::Mixture(f), &Field::Mixture(w), &SpdMatrix::identity(1)).unwrap_err();
        assert!(matches!(err, Error::NotRadial(_)));
    }

    #[test]
    fn identity_scale_is_plain_convolution() {
        let spec = GridSpec::new(2, 1, 32, 8.0).unwrap();
        let f = Field::Grid(GaussianMixtureField::gaussian(2, 1, 1.0).to_grid(spec).unwrap());
        let w = Field::Mixture(GaussianMixtureField::gaussian(2, 1, 0.5));
        let a = wavelet_transform(&f, &w, &SpdMatrix::identity(1)).unwrap();
        let b = convolve(&f, &w).unwrap();
        assert_eq!(a, b);
    }
}
