//! Riesz potentials I^α on M_{n,m} in multiplier, kernel and integer-order forms.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{fft_continuous, Field, GaussianMixtureField, GridField, GridSpec};
use crate::linalg::{check_plane_codim, gram, trace_inner, wallach_contains, OrderParams};
use crate::sampling::{gaussian_ln_density, gaussian_matrix, mc_estimate, sample_stiefel, sample_wishart, spd_sqrt, Estimate, RngStream};
use crate::special::{ln_wishart_normalizer, measure_constant, riesz_normalizer, stiefel_volume};

/// Lattice frequencies with det(y'y) below this are treated as rank deficient.
pub const RANK_FLOOR: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// |y|_m^{-α} on a frequency lattice, with the indices that needed regularizing.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszMultiplier {
    pub alpha: Complex64,
    pub values: Vec<Complex64>,
    pub flagged: Vec<usize>,
}

fn det_gram(y: &DMatrix<f64>) -> f64 {
    gram(y).determinant()
}

fn power_of_det(det: f64, alpha: Complex64) -> Complex64 {
    (-alpha / 2.0 * det.ln()).exp()
}

/// |y|_m^{-α} at every lattice point. At rank-deficient points the value is 0 when
/// Re α < 0 and otherwise copied from the nearest full-rank lattice point.
pub fn riesz_multiplier_array(dual: &GridSpec, alpha: Complex64) -> RieszMultiplier {
    let len = dual.len();
    if alpha == ZERO {
        return RieszMultiplier { alpha, values: vec![Complex64::new(1.0, 0.0); len], flagged: Vec::new() };
    }
    let dets: Vec<f64> = (0..len).map(|i| det_gram(&dual.point(i))).collect();
    let mut values = vec![ZERO; len];
    let mut flagged = Vec::new();
    for i in 0..len {
        if dets[i] >= RANK_FLOOR {
            values[i] = power_of_det(dets[i], alpha);
        } else {
            flagged.push(i);
        }
    }
    if alpha.re >= 0.0 {
        for &i in &flagged {
            if let Some(j) = nearest_full_rank(dual, &dets, i) {
                values[i] = values[j];
            }
        }
    }
    RieszMultiplier { alpha, values, flagged }
}

fn nearest_full_rank(dual: &GridSpec, dets: &[f64], flat: usize) -> Option<usize> {
    let d = dual.dims();
    let np = dual.points as i64;
    let base: Vec<i64> = dual.multi_index(flat).iter().map(|&v| v as i64).collect();
    for radius in 1..np {
        let side = (2 * radius + 1) as usize;
        let mut best: Option<(i64, usize)> = None;
        for code in 0..side.pow(d as u32) {
            let mut c = code;
            let mut idx = 0usize;
            let mut dist = 0i64;
            let mut on_shell = false;
            let mut inside = true;
            for a in 0..d {
                let off = (c % side) as i64 - radius;
                c /= side;
                on_shell |= off.abs() == radius;
                dist += off * off;
                let v = base[a] + off;
                if v < 0 || v >= np {
                    inside = false;
                    break;
                }
                idx = idx * np as usize + v as usize;
            }
            if !inside || !on_shell || dets[idx] < RANK_FLOOR {
                continue;
            }
            if best.is_none_or(|(bd, bi)| (dist, idx) < (bd, bi)) {
                best = Some((dist, idx));
            }
        }
        if let Some((_, j)) = best {
            return Some(j);
        }
    }
    None
}

fn check_shape(shape: (usize, usize), params: &OrderParams) -> Result<()> {
    if shape != (params.n, params.m) {
        return Err(Error::IncompatibleParams(format!("field on {shape:?}, params for ({}, {})", params.n, params.m)));
    }
    Ok(())
}

fn check_order(n: usize, m: usize, alpha: Complex64) -> Result<()> {
    if !wallach_contains(n, m, alpha) {
        return Err(Error::WallachViolation(format!("{alpha}")));
    }
    Ok(())
}

/// F⁻¹[|y|_m^{-α} Ff] on a grid. α = 0 returns the input unchanged.
pub fn riesz_potential_grid(f: &GridField, alpha: Complex64) -> Result<GridField> {
    let (n, m) = (f.spec.n, f.spec.m);
    check_order(n, m, alpha)?;
    if alpha == ZERO {
        return Ok(f.clone());
    }
    let mut ft = fft_continuous(f, false);
    let mult = riesz_multiplier_array(&ft.spec, alpha);
    for (v, w) in ft.values.iter_mut().zip(&mult.values) {
        *v *= w;
    }
    Ok(fft_continuous(&ft, true))
}

/// Multiplier form I^α f = F⁻¹[|y|_m^{-α} Ff]. Grids only; mixtures are evaluated
/// pointwise by [`riesz_multiplier_at`].
pub fn riesz_potential_multiplier(f: &Field, alpha: Complex64, params: &OrderParams) -> Result<Field> {
    check_shape(f.shape(), params)?;
    check_order(params.n, params.m, alpha)?;
    match f {
        Field::Grid(g) => riesz_potential_grid(g, alpha).map(Field::Grid),
        Field::Mixture(mx) if alpha == ZERO => Ok(Field::Mixture(mx.clone())),
        Field::Mixture(_) => Err(Error::Unsupported("the multiplier form of a mixture has no closed form; use riesz_multiplier_at".into())),
    }
}

/// Multiplier form at points for an unmodulated mixture:
/// (2π)^{-nm} ∫ exp(-i tr(y'x)) |y|_m^{-α} (Ff)(y) dy, sampling y = v r^{1/2} with
/// v uniform on V_{n,m} and r ~ W_m(n - Re α, σ_min^{-2} I).
pub fn riesz_multiplier_at(f: &GaussianMixtureField, alpha: Complex64, params: &OrderParams, points: &[DMatrix<f64>], stream: &RngStream, samples: usize) -> Result<Vec<Estimate>> {
    let (n, m) = (params.n, params.m);
    check_shape((f.n, f.m), params)?;
    check_order(n, m, alpha)?;
    if alpha == ZERO {
        return Ok(points.iter().map(|x| Estimate::exact(f.evaluate(x))).collect());
    }
    let df = n as f64 - alpha.re;
    if df <= m as f64 - 1.0 {
        return Err(Error::ConvergenceRegion(format!("{alpha}: |y|^(-α) is not locally integrable")));
    }
    if f.terms.iter().any(|t| t.modulation.iter().any(|&p| p != 0.0)) {
        return Err(Error::Unsupported("modulated mixture terms".into()));
    }
    let sp = f.narrowest();
    let scale = 1.0 / (sp * sp);
    let dim = (n * m) as f64;
    let ln_pref = -dim * (2.0 * PI).ln() - m as f64 * 2f64.ln() + stiefel_volume(n, m).ln() + ln_wishart_normalizer(m, df, scale);
    let terms: Vec<(Complex64, DMatrix<f64>, f64)> =
        f.terms.iter().map(|t| (t.amplitude * (2.0 * PI * t.width * t.width).powf(dim / 2.0), t.center.clone(), t.width * t.width)).collect();
    let pref = ln_pref.exp();
    let mut out = Vec::with_capacity(points.len());
    for (p, x) in points.iter().enumerate() {
        let est = mc_estimate(&stream.child(p as u64), samples, |rng| {
            let v = sample_stiefel(n, m, rng);
            let r = sample_wishart(m, df, scale, rng);
            let y = v.matrix() * spd_sqrt(&r);
            let tr = r.trace();
            let twist = if alpha.im != 0.0 { Complex64::from_polar(1.0, -alpha.im / 2.0 * r.determinant().ln()) } else { Complex64::new(1.0, 0.0) };
            let mut acc = ZERO;
            for (amp, c, s2) in &terms {
                acc += amp * Complex64::from_polar((-(s2 - sp * sp) * tr / 2.0).exp(), trace_inner(&y, &(c - x)));
            }
            acc * twist
        })?;
        out.push(est.scale(pref));
    }
    Ok(out)
}

/// Length scale and center spread used to shape proposals for a field.
fn proposal_shape(f: &Field) -> (f64, Vec<DMatrix<f64>>) {
    match f {
        Field::Mixture(mx) => (mx.widest(), mx.terms.iter().map(|t| t.center.clone()).collect()),
        Field::Grid(g) => (g.spec.extent / 8.0, vec![DMatrix::zeros(g.spec.n, g.spec.m)]),
    }
}

fn far_reach(centers: &[DMatrix<f64>], x: &DMatrix<f64>) -> f64 {
    centers.iter().map(|c| (x - c).norm_squared()).fold(0.0, f64::max)
}

/// Field value with zero outside a grid's extent.
fn value_or_zero(f: &Field, x: &DMatrix<f64>) -> Complex64 {
    match f.evaluate(x) {
        Ok(v) => v,
        Err(_) => ZERO,
    }
}

/// Kernel form γ_{n,m}(α)^{-1} ∫ f(x - y) |y|_m^{α-n} dy at points. In polar
/// coordinates |y|^{α-n} dy = 2^{-m} |r|^{(α-m-1)/2} dr dv, so r is drawn from
/// W_m(Re α, s·I) and v uniformly.
pub fn riesz_potential_kernel(f: &Field, alpha: Complex64, params: &OrderParams, points: &[DMatrix<f64>], stream: &RngStream, samples: usize) -> Result<Vec<Estimate>> {
    let (n, m) = (params.n, params.m);
    check_shape(f.shape(), params)?;
    if alpha.re <= m as f64 - 1.0 {
        return Err(Error::ConvergenceRegion(format!("{alpha}: need Re α > {}", m - 1)));
    }
    check_order(n, m, alpha)?;
    let gamma = riesz_normalizer(n, m, alpha)?;
    let (sigma, centers) = proposal_shape(f);
    let df = alpha.re;
    let mut out = Vec::with_capacity(points.len());
    for (p, x) in points.iter().enumerate() {
        let s = 2.0 * sigma * sigma + far_reach(&centers, x);
        let ln_pref = -(m as f64) * 2f64.ln() + stiefel_volume(n, m).ln() + ln_wishart_normalizer(m, df, s);
        let est = mc_estimate(&stream.child(p as u64), samples, |rng| {
            let v = sample_stiefel(n, m, rng);
            let r = sample_wishart(m, df, s, rng);
            let y = v.matrix() * spd_sqrt(&r);
            let fx = value_or_zero(f, &(x - &y));
            if fx == ZERO {
                return ZERO;
            }
            let twist = if alpha.im != 0.0 { Complex64::from_polar(1.0, alpha.im / 2.0 * r.determinant().ln()) } else { Complex64::new(1.0, 0.0) };
            fx * twist * (r.trace() / (2.0 * s)).exp()
        })?;
        out.push(est.scale_complex(Complex64::new(ln_pref.exp(), 0.0) / gamma));
    }
    Ok(out)
}

/// Integer order as a measure: I^k f(x) = c_k ∫_{M_{k,m}} dy ∫_{O(n)} f(x - γ[y; 0]) dγ.
/// Only the first k columns of γ enter, so γ is replaced by a uniform V ∈ V_{n,k}
/// and y is drawn from an isotropic normal.
pub fn riesz_potential_integer(f: &Field, k: usize, params: &OrderParams, points: &[DMatrix<f64>], stream: &RngStream, samples: usize) -> Result<Vec<Estimate>> {
    let (n, m) = (params.n, params.m);
    check_shape(f.shape(), params)?;
    check_plane_codim(n, m, k)?;
    let ck = measure_constant(n, k, m)?;
    let (sigma, centers) = proposal_shape(f);
    let mut out = Vec::with_capacity(points.len());
    for (p, x) in points.iter().enumerate() {
        let s = (sigma * sigma + far_reach(&centers, x)).sqrt();
        let est = mc_estimate(&stream.child(p as u64), samples, |rng| {
            let v = sample_stiefel(n, k, rng);
            let y = gaussian_matrix(k, m, rng) * s;
            let fx = value_or_zero(f, &(x - v.matrix() * &y));
            if fx == ZERO {
                return ZERO;
            }
            fx * (-gaussian_ln_density(&y, s)).exp()
        })?;
        out.push(est.scale(ck));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rect;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn zero_order_is_identity() {
        let spec = GridSpec::new(2, 1, 32, 8.0).unwrap();
        let g = GaussianMixtureField::gaussian(2, 1, 1.0).to_grid(spec).unwrap();
        let params = OrderParams::real(2, 1, 1, 0.0).unwrap();
        let out = riesz_potential_multiplier(&Field::Grid(g.clone()), c(0.0), &params).unwrap();
        assert_eq!(out, Field::Grid(g));
    }

    #[test]
    fn multiplier_semigroup_on_full_rank_lattice() {
        let dual = GridSpec::new(3, 2, 8, 4.0).unwrap().dual();
        let a = riesz_multiplier_array(&dual, c(1.3));
        let b = riesz_multiplier_array(&dual, c(0.4));
        let ab = riesz_multiplier_array(&dual, c(1.7));
        let mut checked = 0;
        for i in 0..dual.len() {
            if a.flagged.contains(&i) {
                continue;
            }
            let p = a.values[i] * b.values[i];
            assert!((p - ab.values[i]).norm() <= 1e-12 * ab.values[i].norm());
            checked += 1;
        }
        assert!(checked > 0 && !a.flagged.is_empty());
    }

    #[test]
    fn rank_deficient_frequencies_are_regularized() {
        let dual = GridSpec::new(2, 1, 8, 4.0).unwrap().dual();
        let neg = riesz_multiplier_array(&dual, c(-1.0));
        let pos = riesz_multiplier_array(&dual, c(1.0));
        let origin = dual.len() / 2 + dual.points / 2;
        assert_eq!(neg.flagged, vec![origin]);
        assert_eq!(neg.values[origin], ZERO);
        let h = dual.spacing();
        assert!((pos.values[origin].re - 1.0 / h).abs() < 1e-12);
    }

    #[test]
    fn outside_wallach_is_rejected() {
        let params = OrderParams::real(4, 2, 1, 0.5).unwrap();
        let f = Field::Mixture(GaussianMixtureField::gaussian(4, 2, 1.0));
        let err = riesz_multiplier_at(&GaussianMixtureField::gaussian(4, 2, 1.0), c(0.5), &params, &[], &RngStream::new(1, 0), 10).unwrap_err();
        assert!(matches!(err, Error::WallachViolation(_)));
        let err = riesz_potential_kernel(&f, c(1.0), &params, &[], &RngStream::new(1, 0), 10).unwrap_err();
        assert!(matches!(err, Error::ConvergenceRegion(_)));
    }

    #[test]
    fn three_forms_agree_at_overlap() {
        // (n, m) = (3, 1), α = k = 1 lies in both branches of the Wallach set
        let params = OrderParams::real(3, 1, 1, 1.0).unwrap();
        let f = GaussianMixtureField::shifted_gaussian(rect(3, 1, &[0.2, 0.0, -0.3]), 0.9);
        let pts = vec![rect(3, 1, &[0.0, 0.0, 0.0]), rect(3, 1, &[0.5, -0.5, 1.0])];
        let st = RngStream::new(7, 0);
        let mult = riesz_multiplier_at(&f, c(1.0), &params, &pts, &st.child(0), 50_000).unwrap();
        let kern = riesz_potential_kernel(&Field::Mixture(f.clone()), c(1.0), &params, &pts, &st.child(1), 50_000).unwrap();
        let int = riesz_potential_integer(&Field::Mixture(f), 1, &params, &pts, &st.child(2), 50_000).unwrap();
        for i in 0..pts.len() {
            assert!(mult[i].agrees_with(&kern[i], 3.0), "{:?} {:?}", mult[i], kern[i]);
            assert!(mult[i].agrees_with(&int[i], 3.0), "{:?} {:?}", mult[i], int[i]);
        }
    }

    #[test]
    fn zero_field_gives_zero() {
        let params = OrderParams::real(3, 1, 1, 1.0).unwrap();
        let f = Field::Mixture(GaussianMixtureField::zero(3, 1));
        let pts = vec![rect(3, 1, &[0.1, 0.2, 0.3])];
        let k = riesz_potential_kernel(&f, c(1.5), &params, &pts, &RngStream::new(3, 0), 1000).unwrap();
        let i = riesz_potential_integer(&f, 1, &params, &pts, &RngStream::new(3, 0), 1000).unwrap();
        assert_eq!(k[0].mean, ZERO);
        assert_eq!(i[0].mean, ZERO);
    }
}
