//! Fourier multipliers of the truncated cone integrals. Every one of them is
//! |r|^{-β} ∫_{(εr, ρr)} u_0(s)|s|^β d_*s at r = y'y for some β.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cone::{cone_quadrature_with, ConeOptions, LowerBound};
use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::linalg::{sqrt_spd, sym_eigenvalues, SpdMatrix};
use crate::wavelet::{interval_integral, ridgelet_prefactor, SpectralWavelet};

/// Smallest eigenvalue ratio of y'y treated as full rank.
pub const GRAM_FLOOR: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigenvalues of a Gram matrix, ascending; RankDeficient below [`GRAM_FLOOR`].
pub fn gram_eigenvalues(y_gram: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !y_gram.is_square() {
        return Err(Error::Dimension("Gram matrix must be square".into()));
    }
    let l = sym_eigenvalues(y_gram);
    let (lo, hi) = (l[0], l[l.len() - 1]);
    if !(hi > 0.0) || lo <= GRAM_FLOOR * hi {
        return Err(Error::RankDeficient { ratio: if hi > 0.0 { lo / hi } else { 0.0 } });
    }
    Ok(l)
}

fn ln_det(mu: &[f64]) -> f64 {
    mu.iter().map(|x| x.ln()).sum()
}

/// ∫_{(ε, ρ)} u_0(a^{1/2} r a^{1/2}) |a|^β d_*a for r with eigenvalues `mu`,
/// through s = r^{1/2} a r^{1/2}.
pub fn scale_multiplier(w: &SpectralWavelet, mu: &[f64], beta: Complex64, eps: f64, rho: f64, resolution: usize) -> Complex64 {
    let v = interval_integral(w, mu, eps, rho, beta, resolution);
    if v == ZERO {
        return v;
    }
    v * (-beta * ln_det(mu)).exp()
}

/// The same integral by a full cone rule over a, with no change of variables.
/// The rule only spans δ/λ_max(r) < a < Λ/λ_min(r), outside of which the
/// integrand vanishes.
pub fn scale_multiplier_cone(w: &SpectralWavelet, r: &SpdMatrix, beta: Complex64, eps: f64, rho: f64, opts: &ConeOptions) -> Result<Complex64> {
    let m = w.m;
    if r.size() != m {
        return Err(Error::Dimension(format!("r must be {m}×{m}")));
    }
    let Some((blo, bhi)) = w.support() else {
        return Ok(ZERO);
    };
    let mu = r.eigenvalues();
    let (lo, hi) = (eps.max(blo / mu[mu.len() - 1]), rho.min(bhi / mu[0]));
    if !(hi > lo) {
        return Ok(ZERO);
    }
    let rule = cone_quadrature_with(&LowerBound::scalar(m, lo)?, &SpdMatrix::scalar(m, hi)?, m, opts, false)?;
    let root = sqrt_spd(r)?;
    let rr = root.matrix();
    let mut acc = ZERO;
    for (a, wt) in rule.nodes.iter().zip(&rule.weights) {
        let s = rr * a.matrix() * rr;
        let u = w.profile(&(0.5 * (&s + s.transpose())));
        if u != 0.0 {
            acc += (beta * a.det().ln()).exp() * (wt * u);
        }
    }
    Ok(acc)
}

/// k_{ε,ρ}(y) = ∫_{(εr, ρr)} u_0(s) d_*s with r = y'y.
pub fn calderon_multiplier(w: &SpectralWavelet, y_gram: &DMatrix<f64>, eps: f64, rho: f64, resolution: usize) -> Result<f64> {
    let mu = gram_eigenvalues(y_gram)?;
    Ok(scale_multiplier(w, &mu, ZERO, eps, rho, resolution).re)
}

/// ψ^α_{ε,ρ}(y) = ∫_{(εr, ρr)} u_0(s)|s|^{-α/2} d_*s, the multiplier taking f to
/// the truncated inversion of I^α f.
pub fn riesz_inversion_multiplier(w: &SpectralWavelet, y_gram: &DMatrix<f64>, alpha: Complex64, eps: f64, rho: f64, resolution: usize) -> Result<Complex64> {
    let mu = gram_eigenvalues(y_gram)?;
    Ok(interval_integral(w, &mu, eps, rho, -alpha / 2.0, resolution))
}

/// m̃_{ε,ρ}(r): the ridgelet prefactor times ∫_{(εr, ρr)} u_0(s)|s|^{-k/2} d_*s, for
/// w on M_{n-k,m}.
pub fn radon_inversion_multiplier(w: &SpectralWavelet, n: usize, k: usize, y_gram: &DMatrix<f64>, eps: f64, rho: f64, resolution: usize) -> Result<f64> {
    let mu = gram_eigenvalues(y_gram)?;
    let c = ridgelet_prefactor(n, w.m, k)?;
    Ok(c * interval_integral(w, &mu, eps, rho, Complex64::new(-(k as f64) / 2.0, 0.0), resolution).re)
}

/// Ascending Gram eigenvalues at every lattice point, None where rank deficient.
pub fn lattice_eigenvalues(spec: &GridSpec) -> Vec<Option<Vec<f64>>> {
    (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let y = spec.point(i);
            gram_eigenvalues(&(y.transpose() * &y)).ok()
        })
        .collect()
}

/// g(eigenvalues) at every lattice point, the default (zero) where y is rank
/// deficient. Points sharing a spectrum share one evaluation.
pub fn lattice_multiplier<T: Copy + Default + Send, G: Fn(&[f64]) -> T + Sync>(eigs: &[Option<Vec<f64>>], g: G) -> Vec<T> {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut unique: Vec<&[f64]> = Vec::new();
    let slot: Vec<Option<usize>> = eigs
        .iter()
        .map(|e| {
            e.as_ref().map(|mu| {
                let key: Vec<u64> = mu.iter().map(|x| x.to_bits()).collect();
                *index.entry(key).or_insert_with(|| {
                    unique.push(mu);
                    unique.len() - 1
                })
            })
        })
        .collect();
    let values: Vec<T> = unique.par_iter().map(|mu| g(mu)).collect();
    slot.iter().map(|s| s.map_or(T::default(), |j| values[j])).collect()
}

/// Eigenvalue range [min λ_min, max λ_max] over the full-rank lattice points.
pub fn lattice_range(eigs: &[Option<Vec<f64>>]) -> Option<(f64, f64)> {
    let lo = eigs.iter().flatten().map(|mu| mu[0]).fold(f64::INFINITY, f64::min);
    let hi = eigs.iter().flatten().map(|mu| mu[mu.len() - 1]).fold(0.0, f64::max);
    (hi > 0.0).then_some((lo, hi))
}

/// Scale range (ε, ρ) ∩ [δ/λ_max, Λ/λ_min] outside of which u_0(a^{1/2} r a^{1/2})
/// vanishes for every lattice r. m = 1 only: for m ≥ 2 the full interval is kept.
pub(crate) fn effective_scales(w: &SpectralWavelet, eigs: &[Option<Vec<f64>>], eps: f64, rho: f64) -> Option<(f64, f64)> {
    let (blo, bhi) = w.support()?;
    if w.m > 1 {
        return Some((eps, rho));
    }
    let (lo, hi) = lattice_range(eigs)?;
    let (a, b) = (eps.max(blo / hi), rho.min(bhi / lo));
    (b > a).then_some((a, b))
}
