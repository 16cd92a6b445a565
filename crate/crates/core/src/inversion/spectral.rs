//! Reconstruction errors on the Fourier side, for phantoms whose power spectrum
//! depends on y only through tr(y'y). For a multiplier M that is a function of
//! the spectrum of y'y,
//!     ‖F⁻¹[M Ff]/C - f‖² / ‖f‖² = ∫ |M/C - 1|² |Ff|² dy / ∫ |Ff|² dy,
//! and polar coordinates turn both integrals into eigenvalue integrals. This is
//! the path used where a lattice on M_{n,m} is out of reach.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cone::for_each_spectral_node;
use crate::error::{Error, Result};
use crate::field::GaussianMixtureField;
use crate::linalg::OrderParams;
use crate::special::stiefel_volume;
use crate::wavelet::{calderon_constant_full, interval_integral, ridgelet_constant, ridgelet_prefactor, riesz_inversion_constant, SpectralWavelet};

use super::schedule::{ConvergenceReport, ReportBuilder, TruncationSchedule};

/// Which Radon inversion formula a multiplier belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadonMethod {
    /// Backprojection followed by the Riesz-inversion integral of order k.
    Backprojection,
    /// Dual ridgelet integral.
    DualRidgelet,
}

/// Nodes of ∫_{M_{n,m}} g(λ(y'y)) |Ff(y)|² dy, weights including |Ff|².
#[derive(Debug, Clone)]
pub struct PowerNodes {
    pub n: usize,
    pub m: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// ∫ |Ff|² dy = (2π)^{nm} ‖f‖².
    pub total: f64,
}

fn check_radial_power(f: &GaussianMixtureField) -> Result<()> {
    let Some(first) = f.terms.first() else {
        return Ok(());
    };
    let c0 = &first.center;
    let ok = f.terms.iter().all(|t| &t.center == c0 && t.modulation.iter().all(|&p| p == 0.0));
    if !ok {
        return Err(Error::NotRadial(f64::NAN));
    }
    Ok(())
}

impl PowerNodes {
    /// `breakpoints` are eigenvalues where the multipliers have kinks.
    pub fn new(f: &GaussianMixtureField, breakpoints: &[f64], resolution: usize) -> Result<Self> {
        check_radial_power(f)?;
        let (n, m) = (f.n, f.m);
        let ff = f.fourier();
        // |Ff|² ≤ e^{-σ_min² tr r}: stop where it is below e^{-40}; below
        // 1e-9·hi the polar density leaves no measurable mass
        let hi = 40.0 / (f.narrowest() * f.narrowest());
        let lo = hi * 1e-9;
        let c = stiefel_volume(n, m) * 2f64.powi(-(m as i32));
        let half_n = n as f64 / 2.0;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let br: Vec<f64> = breakpoints.iter().copied().filter(|b| *b > lo && *b < hi).collect();
        for_each_spectral_node(m, lo, hi, &br, resolution, |l, w| {
            let mut y = nalgebra::DMatrix::zeros(n, m);
            for (i, li) in l.iter().enumerate() {
                y[(i, i)] = li.sqrt();
            }
            let p = ff.evaluate(&y).norm_sqr();
            nodes.push(l.to_vec());
            weights.push(c * w * l.iter().product::<f64>().powf(half_n) * p);
        });
        let total = weights.iter().sum();
        Ok(PowerNodes { n, m, nodes, weights, total })
    }

    /// sqrt(∫ |M - 1|² |Ff|² / ∫ |Ff|²) for a normalized multiplier M.
    /// A vanishing phantom has zero error.
    pub fn relative_error(&self, normalized: &[Complex64]) -> f64 {
        if self.total == 0.0 {
            return 0.0;
        }
        let s: f64 = normalized.iter().zip(&self.weights).map(|(v, w)| w * (v - 1.0).norm_sqr()).sum();
        (s / self.total).sqrt()
    }

    /// sqrt(∫ |M1 - M2|² |Ff|² / ∫ |Ff|²).
    pub fn relative_distance(&self, a: &[Complex64], b: &[Complex64]) -> f64 {
        if self.total == 0.0 {
            return 0.0;
        }
        let s: f64 = a.iter().zip(b).zip(&self.weights).map(|((x, y), w)| w * (x - y).norm_sqr()).sum();
        (s / self.total).sqrt()
    }

    pub fn evaluate<G: Fn(&[f64]) -> Complex64 + Sync>(&self, g: G) -> Vec<Complex64> {
        self.nodes.par_iter().map(|l| g(l)).collect()
    }
}

/// Eigenvalues b/ε, b/ρ of the last step at which its multiplier has kinks.
/// Earlier steps are integrated without breakpoints; each extra breakpoint
/// multiplies the node count at every eigenvalue level.
fn schedule_breakpoints(w: &SpectralWavelet, schedule: &TruncationSchedule) -> Vec<f64> {
    let (e, r) = schedule.last();
    w.breakpoints().iter().flat_map(|b| [b / e, b / r]).collect()
}

/// Normalized multiplier M(λ, ε, ρ)/C over the schedule, with errors against f.
fn spectral_schedule<M>(f: &GaussianMixtureField, w: &SpectralWavelet, schedule: &TruncationSchedule, resolution: usize, constant: Complex64, mult: M) -> Result<ConvergenceReport>
where
    M: Fn(&[f64], f64, f64) -> Complex64 + Sync,
{
    if constant == Complex64::new(0.0, 0.0) {
        return Err(Error::NoConvergence("vanishing admissibility constant".into()));
    }
    let nodes = PowerNodes::new(f, &schedule_breakpoints(w, schedule), resolution)?;
    let mut builder = ReportBuilder::default();
    let mut prev: Option<Vec<Complex64>> = None;
    for &(eps, rho) in &schedule.pairs {
        let started = Instant::now();
        let raw = nodes.evaluate(|l| mult(l, eps, rho));
        let sup = raw.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let normalized: Vec<Complex64> = raw.iter().map(|v| v / constant).collect();
        let err = nodes.relative_error(&normalized);
        let inc = prev.as_ref().map(|p| {
            let norm = nodes.relative_distance(&normalized, &vec![Complex64::new(0.0, 0.0); normalized.len()]);
            let d = nodes.relative_distance(&normalized, p);
            if norm > 0.0 {
                d / norm
            } else {
                d
            }
        });
        let stop = builder.push(eps, rho, Some(err), sup, inc, started);
        prev = Some(normalized);
        if stop {
            break;
        }
    }
    Ok(builder.finish(false))
}

fn check_wavelet(w: &SpectralWavelet, f: &GaussianMixtureField, rows: usize) -> Result<SpectralWavelet> {
    if w.m != f.m {
        return Err(Error::IncompatibleParams("wavelet and phantom disagree on m".into()));
    }
    if w.rows == rows {
        Ok(w.clone())
    } else {
        w.with_rows(rows)
    }
}

/// Calderón formula: error of k_{ε,ρ}/c_ν against 1 weighted by |Ff|².
pub fn calderon_spectral(f: &GaussianMixtureField, w: &SpectralWavelet, schedule: &TruncationSchedule, resolution: usize) -> Result<ConvergenceReport> {
    let w = check_wavelet(w, f, f.n)?;
    let c = Complex64::new(calderon_constant_full(&w), 0.0);
    let res = schedule.resolution;
    spectral_schedule(f, &w, schedule, resolution, c, |l, e, r| interval_integral(&w, l, e, r, Complex64::new(0.0, 0.0), res))
}

/// Riesz inversion of g = I^α f: the composition T^α_{ε,ρ} I^α has multiplier
/// ψ^α_{ε,ρ}, compared with d_w(α).
pub fn riesz_invert_spectral(f: &GaussianMixtureField, alpha: Complex64, w: &SpectralWavelet, schedule: &TruncationSchedule, resolution: usize) -> Result<ConvergenceReport> {
    OrderParams::new(f.n, f.m, 0, alpha)?.check_wallach()?;
    if alpha.re + f.m as f64 - 1.0 >= f.n as f64 {
        return Err(Error::Precondition(format!("no p ≥ 1 with p < n/(Re α + m − 1) for α={alpha}")));
    }
    let w = check_wavelet(w, f, f.n)?;
    let d = riesz_inversion_constant(&w, f.n, f.m, alpha)?;
    let res = schedule.resolution;
    spectral_schedule(f, &w, schedule, resolution, d, |l, e, r| interval_integral(&w, l, e, r, -alpha / 2.0, res))
}

/// Normalized multiplier of a Radon inversion formula at one truncation.
pub fn radon_multiplier_normalized(w: &SpectralWavelet, params: &OrderParams, method: RadonMethod, mu: &[f64], eps: f64, rho: f64, resolution: usize) -> Result<Complex64> {
    let (n, m, k) = (params.n, params.m, params.k);
    let beta = Complex64::new(-(k as f64) / 2.0, 0.0);
    Ok(match method {
        RadonMethod::Backprojection => interval_integral(w, mu, eps, rho, beta, resolution) / riesz_inversion_constant(w, n, m, Complex64::new(k as f64, 0.0))?,
        RadonMethod::DualRidgelet => interval_integral(w, mu, eps, rho, beta, resolution) * ridgelet_prefactor(n, m, k)? / ridgelet_constant(w, n, m, k)?,
    })
}

/// Radon inversion by either method, with the wavelet read on M_{n,m} for the
/// backprojection method and on M_{n-k,m} for the dual ridgelet method.
pub fn radon_invert_spectral(
    f: &GaussianMixtureField,
    w: &SpectralWavelet,
    params: &OrderParams,
    method: RadonMethod,
    schedule: &TruncationSchedule,
    resolution: usize,
) -> Result<ConvergenceReport> {
    params.check_radon()?;
    let (n, m, k) = (params.n, params.m, params.k);
    let rows = match method {
        RadonMethod::Backprojection => n,
        RadonMethod::DualRidgelet => n - k,
    };
    let w = check_wavelet(w, f, rows)?;
    let beta = Complex64::new(-(k as f64) / 2.0, 0.0);
    let res = schedule.resolution;
    match method {
        RadonMethod::Backprojection => {
            if k as f64 + m as f64 - 1.0 >= n as f64 {
                return Err(Error::Precondition(format!("no p ≥ 1 with p < n/(k + m − 1) for n={n}, m={m}, k={k}")));
            }
            let d = riesz_inversion_constant(&w, n, m, Complex64::new(k as f64, 0.0))?;
            spectral_schedule(f, &w, schedule, resolution, d, |l, e, r| interval_integral(&w, l, e, r, beta, res))
        }
        RadonMethod::DualRidgelet => {
            let pref = ridgelet_prefactor(n, m, k)?;
            let cw = Complex64::new(ridgelet_constant(&w, n, m, k)?, 0.0);
            spectral_schedule(f, &w, schedule, resolution, cw, |l, e, r| interval_integral(&w, l, e, r, beta, res) * pref)
        }
    }
}

/// ‖method 1 - method 2‖/‖f‖ at one truncation, each normalized by its constant.
#[allow(clippy::too_many_arguments)]
pub fn radon_methods_gap(
    f: &GaussianMixtureField,
    w_full: &SpectralWavelet,
    w_slice: &SpectralWavelet,
    params: &OrderParams,
    eps: f64,
    rho: f64,
    quad_resolution: usize,
    resolution: usize,
) -> Result<f64> {
    params.check_radon()?;
    let w1 = check_wavelet(w_full, f, params.n)?;
    let w2 = check_wavelet(w_slice, f, params.n - params.k)?;
    let mut br = w1.breakpoints();
    br.extend(w2.breakpoints());
    let br: Vec<f64> = br.iter().flat_map(|b| [b / eps, b / rho]).collect();
    let nodes = PowerNodes::new(f, &br, resolution)?;
    let a = nodes.nodes.par_iter().map(|l| radon_multiplier_normalized(&w1, params, RadonMethod::Backprojection, l, eps, rho, quad_resolution)).collect::<Result<Vec<_>>>()?;
    let b = nodes.nodes.par_iter().map(|l| radon_multiplier_normalized(&w2, params, RadonMethod::DualRidgelet, l, eps, rho, quad_resolution)).collect::<Result<Vec<_>>>()?;
    Ok(nodes.relative_distance(&a, &b))
}
