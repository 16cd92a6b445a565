//! Semyanistyi integrals P^α f = Ĩ^α f̂: the Riesz potential on M_{n-k,m} applied
//! to every Radon slice in the offset variable.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, GaussianMixtureField, GridSpec};
use crate::linalg::{complete_frame, wallach_contains, OrderParams, StiefelFrame};
use crate::sampling::{gaussian_ln_density, gaussian_matrix, mc_estimate, sample_stiefel, sample_wishart, spd_sqrt, Estimate, RngStream};
use crate::special::{ln_wishart_normalizer, riesz_normalizer, stiefel_volume};
use crate::transforms::radon::{radon_transform, FrameSet, RadonField, Slice};
use crate::transforms::riesz::riesz_potential_grid;

/// Slice-multiplier path: f̂ slices sampled on `slice_spec`, then |z|_m^{-α} in the
/// slice frequency. α = 0 returns the Radon transform itself.
pub fn semyanistyi(f: &Field, alpha: Complex64, params: &OrderParams, frames: &FrameSet, slice_spec: GridSpec) -> Result<RadonField> {
    params.check_radon()?;
    let q = params.n - params.k;
    let phi = radon_transform(f, params, frames)?;
    if alpha == Complex64::new(0.0, 0.0) {
        return Ok(phi);
    }
    if !wallach_contains(q, params.m, alpha) {
        return Err(Error::WallachViolation(format!("{alpha} on M_{{{q},{}}}", params.m)));
    }
    if (slice_spec.n, slice_spec.m) != (q, params.m) {
        return Err(Error::IncompatibleParams(format!("slice grid must be {q}×{}", params.m)));
    }
    phi.map_slices(|s| Ok(Slice::Grid(riesz_potential_grid(&s.to_grid(slice_spec)?, alpha)?)))
}

/// Kernel path γ_{n-k,m}(α)^{-1} ∫ f(x) |ξ'x - t|_m^{α+k-n} dx at offsets t.
/// Writing x = ξ⊥ω + ξ(t + y), ω is drawn from a normal proposal and y in polar
/// form with r ~ W_m(Re α, s·I).
pub fn semyanistyi_kernel_at(
    f: &GaussianMixtureField,
    alpha: Complex64,
    params: &OrderParams,
    xi: &StiefelFrame,
    ts: &[DMatrix<f64>],
    stream: &RngStream,
    samples: usize,
) -> Result<Vec<Estimate>> {
    params.check_radon()?;
    let (n, m, k) = (params.n, params.m, params.k);
    let q = n - k;
    if xi.ambient() != n || xi.size() != q {
        return Err(Error::FrameDimension { n: xi.ambient(), q: xi.size() });
    }
    if alpha.re <= m as f64 - 1.0 {
        return Err(Error::ConvergenceRegion(format!("{alpha}: need Re α > {}", m - 1)));
    }
    let gamma = riesz_normalizer(q, m, alpha)?;
    let perp = complete_frame(xi.matrix()).columns(0, k).into_owned();
    let sigma = f.widest();
    let spread = f.terms.iter().map(|t| (perp.transpose() * &t.center).norm()).fold(0.0, f64::max);
    let s_omega = sigma + spread;
    let df = alpha.re;
    let mut out = Vec::with_capacity(ts.len());
    for (p, t) in ts.iter().enumerate() {
        let reach = f.terms.iter().map(|tm| (xi.matrix().transpose() * &tm.center - t).norm_squared()).fold(0.0, f64::max);
        let s = 2.0 * sigma * sigma + reach;
        let ln_pref = -(m as f64) * 2f64.ln() + stiefel_volume(q, m).ln() + ln_wishart_normalizer(m, df, s);
        let est = mc_estimate(&stream.child(p as u64), samples, |rng| {
            let omega = gaussian_matrix(k, m, rng) * s_omega;
            let v = sample_stiefel(q, m, rng);
            let r = sample_wishart(m, df, s, rng);
            let y = v.matrix() * spd_sqrt(&r);
            let x = &perp * &omega + xi.matrix() * (t + &y);
            let fx = f.evaluate(&x);
            if fx == Complex64::new(0.0, 0.0) {
                return fx;
            }
            let twist = if alpha.im != 0.0 { Complex64::from_polar(1.0, alpha.im / 2.0 * r.determinant().ln()) } else { Complex64::new(1.0, 0.0) };
            fx * twist * (r.trace() / (2.0 * s) - gaussian_ln_density(&omega, s_omega)).exp()
        })?;
        out.push(est.scale_complex(Complex64::new(ln_pref.exp(), 0.0) / gamma));
    }
    Ok(out)
}
