//! Reconstructions of sampled fields. Every step applies the truncated cone
//! integral through its Fourier multiplier; the definition (a sum of transforms
//! over cone quadrature nodes) is evaluated at the final step for validation.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cone::{cone_quadrature_with, ConeOptions, LowerBound};
use crate::error::{Error, Result};
use crate::field::{fft_continuous, Field, GridField, GridSpec};
use crate::linalg::{gram, sqrt_spd, OrderParams, SpdMatrix};
use crate::special::fuglede_constant;
use crate::transforms::cwt::wavelet_transform_spectral;
use crate::transforms::radon::{dual_radon_grid, radon_transform, FrameSet, RadonField, Slice};
use crate::wavelet::{calderon_constant_full, pair_constant, ridgelet_constant, ridgelet_prefactor, riesz_inversion_constant, SpectralWavelet};

use super::multiplier::{effective_scales, lattice_eigenvalues, lattice_multiplier, scale_multiplier};
use super::schedule::{relative, ConvergenceReport, ReportBuilder, TruncationSchedule};
use crate::wavelet::interval_integral;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Nodes per unit of log-scale in the definition-path cone rules.
pub const DEFINITION_RESOLUTION: usize = 1024;

/// Relative tolerance for "the multiplier already equals the constant".
const CAPTURE_TOL: f64 = 1e-9;

/// Output of a reconstruction over a schedule.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// I_{ε,ρ} at the last step, an approximation of `constant · f`.
    pub raw: GridField,
    /// raw / constant; None when the constant vanishes.
    pub normalized: Option<GridField>,
    pub constant: Complex64,
    pub report: ConvergenceReport,
    /// Relative L² gap between the two evaluation paths at the last step.
    pub cross_check: Option<f64>,
}

fn normalize(raw: &GridField, c: Complex64) -> Option<GridField> {
    (c != ZERO).then(|| raw.scale(1.0 / c))
}

fn rel_gap(a: &GridField, b: &GridField) -> Result<f64> {
    Ok(relative(a.sub(b)?.l2_norm(), b.l2_norm()))
}

/// Error of `out` against constant · reference.
fn reference_error(out: &GridField, reference: Option<&GridField>, c: Complex64) -> Result<Option<f64>> {
    reference.map(|f| rel_gap(out, &f.scale(c))).transpose()
}

fn check_reference(reference: Option<&GridField>, spec: &GridSpec) -> Result<()> {
    if let Some(f) = reference {
        if f.spec != *spec {
            return Err(Error::IncompatibleParams("reference lives on a different lattice".into()));
        }
    }
    Ok(())
}

/// Runs a multiplier family over the schedule. `mult(μ, ε, ρ)` returns the
/// multiplier applied to the input and the theorem's multiplier, whose sup is
/// reported and which equals `constant` once the band is captured.
fn run_schedule<M>(input: &GridField, schedule: &TruncationSchedule, constant: Complex64, reference: Option<&GridField>, mult: M) -> Result<(GridField, ConvergenceReport)>
where
    M: Fn(&[f64], f64, f64) -> (Complex64, Complex64) + Sync,
{
    check_reference(reference, &input.spec)?;
    let spectrum = fft_continuous(input, false);
    let eigs = lattice_eigenvalues(&spectrum.spec);
    let mut builder = ReportBuilder::default();
    let mut prev: Option<GridField> = None;
    let mut captured = false;
    for &(eps, rho) in &schedule.pairs {
        let started = Instant::now();
        let pairs: Vec<(Complex64, Complex64)> = lattice_multiplier(&eigs, |mu| mult(mu, eps, rho));
        let mult: Vec<Complex64> = pairs.iter().map(|p| p.1).collect();
        let sup = mult.iter().map(|v| v.norm()).fold(0.0, f64::max);
        captured = eigs.iter().zip(&mult).filter(|(e, _)| e.is_some()).all(|(_, v)| (v - constant).norm() <= CAPTURE_TOL * constant.norm().max(f64::MIN_POSITIVE));
        let mut ft = spectrum.clone();
        for (v, (m, _)) in ft.values.iter_mut().zip(&pairs) {
            *v *= m;
        }
        let out = fft_continuous(&ft, true);
        let err = reference_error(&out, reference, constant)?;
        let inc = prev.as_ref().map(|p| rel_gap(&out, p)).transpose()?;
        let stop = builder.push(eps, rho, err, sup, inc, started);
        prev = Some(out);
        if stop {
            break;
        }
    }
    Ok((prev.expect("schedule is non-empty"), builder.finish(captured)))
}

/// Σ_nodes w(a)|a|^β (W_a g) over a cone rule on (ε, ρ), restricted to the scales
/// at which u_0(a^{1/2} y'y a^{1/2}) can be non-zero on the lattice.
pub fn definition_sum(g: &GridField, w: &SpectralWavelet, beta: Complex64, eps: f64, rho: f64, resolution: usize) -> Result<GridField> {
    let dual = g.spec.dual();
    let eigs = lattice_eigenvalues(&dual);
    let Some((lo, hi)) = effective_scales(w, &eigs, eps, rho) else {
        return Ok(GridField::zeros(g.spec));
    };
    let m = w.m;
    let opts = ConeOptions { resolution, angles: 16, breakpoints: Vec::new() };
    let rule = cone_quadrature_with(&LowerBound::scalar(m, lo)?, &SpdMatrix::scalar(m, hi)?, m, &opts, false)?;
    let mut acc = GridField::zeros(g.spec);
    for (a, wt) in rule.nodes.iter().zip(&rule.weights) {
        let c = (beta * a.det().ln()).exp() * *wt;
        let wa = wavelet_transform_spectral(g, w, a)?;
        for (s, v) in acc.values.iter_mut().zip(&wa.values) {
            *s += c * v;
        }
    }
    Ok(acc)
}

fn wavelet_on(w: &SpectralWavelet, rows: usize, m: usize) -> Result<SpectralWavelet> {
    if w.m != m {
        return Err(Error::IncompatibleParams(format!("wavelet has m = {}, field has m = {m}", w.m)));
    }
    if w.rows == rows {
        Ok(w.clone())
    } else {
        w.with_rows(rows)
    }
}

/// Calderón reproducing formula: I_{ε,ρ} f = F⁻¹[k_{ε,ρ} Ff] → c_ν f.
pub fn calderon_reconstruct(f: &GridField, w: &SpectralWavelet, schedule: &TruncationSchedule, validate: bool) -> Result<Reconstruction> {
    let (n, m) = (f.spec.n, f.spec.m);
    let w = wavelet_on(w, n, m)?;
    let c = Complex64::new(calderon_constant_full(&w), 0.0);
    let res = schedule.resolution;
    let (raw, report) = run_schedule(f, schedule, c, Some(f), |mu, e, r| {
        let k = scale_multiplier(&w, mu, ZERO, e, r, res);
        (k, k)
    })?;
    let cross_check = if validate {
        let (e, r) = schedule.pairs[report.steps.len() - 1];
        Some(rel_gap(&definition_sum(f, &w, ZERO, e, r, DEFINITION_RESOLUTION)?, &raw)?)
    } else {
        None
    };
    Ok(Reconstruction { normalized: normalize(&raw, c), raw, constant: c, report, cross_check })
}

/// Sufficient condition of the inversion theorem: some p ≥ 1 with
/// p < n/(Re α + m - 1) must exist.
fn check_lp_window(n: usize, m: usize, alpha: Complex64) -> Result<()> {
    if alpha.re + m as f64 - 1.0 >= n as f64 {
        return Err(Error::Precondition(format!("no p ≥ 1 with p < n/(Re α + m − 1) for n={n}, m={m}, α={alpha}")));
    }
    Ok(())
}

/// Riesz inversion: T^α_{ε,ρ} g = ∫_{(ε,ρ)} W_a g |a|^{-α/2} d_*a → d_w(α) f for
/// g = I^α f. `reference` is f.
pub fn riesz_invert(
    g: &GridField,
    alpha: Complex64,
    w: &SpectralWavelet,
    schedule: &TruncationSchedule,
    reference: Option<&GridField>,
    validate: bool,
) -> Result<Reconstruction> {
    let (n, m) = (g.spec.n, g.spec.m);
    OrderParams::new(n, m, 0, alpha)?.check_wallach()?;
    check_lp_window(n, m, alpha)?;
    let w = wavelet_on(w, n, m)?;
    let d = riesz_inversion_constant(&w, n, m, alpha)?;
    let beta = -alpha / 2.0;
    let res = schedule.resolution;
    let (raw, report) = run_schedule(g, schedule, d, reference, |mu, e, r| {
        let psi = interval_integral(&w, mu, e, r, beta, res);
        let ln_det: f64 = mu.iter().map(|x| x.ln()).sum();
        (psi * (alpha / 2.0 * ln_det).exp(), psi)
    })?;
    let cross_check = if validate {
        let (e, r) = schedule.pairs[report.steps.len() - 1];
        Some(rel_gap(&definition_sum(g, &w, beta, e, r, DEFINITION_RESOLUTION)?, &raw)?)
    } else {
        None
    };
    Ok(Reconstruction { normalized: normalize(&raw, d), raw, constant: d, report, cross_check })
}

/// Radon inversion through the Fuglede formula: the backprojection (f̂)^∨ equals
/// c_{n,k,m} I^k f, so c_{n,k,m}^{-1} T^k (f̂)^∨ → d_w(k) f. `w` is read on M_{n,m}.
pub fn radon_invert_method1(
    data: &RadonField,
    w: &SpectralWavelet,
    spec: GridSpec,
    schedule: &TruncationSchedule,
    reference: Option<&GridField>,
    validate: bool,
) -> Result<Reconstruction> {
    let (n, m, k) = (data.n, data.m, data.k);
    OrderParams::real(n, m, k, k as f64)?.check_radon()?;
    check_lp_window(n, m, Complex64::new(k as f64, 0.0))?;
    let w = wavelet_on(w, n, m)?;
    let back = dual_radon_grid(data, spec)?;
    let cnkm = fuglede_constant(n, k, m)?;
    let alpha = Complex64::new(k as f64, 0.0);
    let d = riesz_inversion_constant(&w, n, m, alpha)?;
    let res = schedule.resolution;
    let (raw, report) = run_schedule(&back, schedule, d, reference, |mu, e, r| {
        let psi = interval_integral(&w, mu, e, r, -alpha / 2.0, res);
        let ln_det: f64 = mu.iter().map(|x| x.ln()).sum();
        (psi * (alpha / 2.0 * ln_det).exp() / cnkm, psi)
    })?;
    let cross_check = if validate {
        let (e, r) = schedule.pairs[report.steps.len() - 1];
        let def = definition_sum(&back, &w, -alpha / 2.0, e, r, DEFINITION_RESOLUTION)?.scale(Complex64::new(1.0 / cnkm, 0.0));
        Some(rel_gap(&def, &raw)?)
    } else {
        None
    };
    Ok(Reconstruction { normalized: normalize(&raw, d), raw, constant: d, report, cross_check })
}

/// Slice filter Σ_a w(a)|a|^{-k/2} p(a^{1/2} ζ'ζ a^{1/2}) on the slice frequency
/// lattice for a symmetric profile p, from a cone rule on (ε, ρ).
fn slice_filter<P: Fn(&DMatrix<f64>) -> f64 + Sync>(dual: &GridSpec, m: usize, k: usize, support: (f64, f64), eps: f64, rho: f64, resolution: usize, profile: P) -> Result<Vec<Complex64>> {
    let eigs = lattice_eigenvalues(dual);
    let (blo, bhi) = support;
    let range = if m == 1 {
        super::multiplier::lattice_range(&eigs).and_then(|(lo, hi)| {
            let (a, b) = (eps.max(blo / hi), rho.min(bhi / lo));
            (b > a).then_some((a, b))
        })
    } else {
        Some((eps, rho))
    };
    let Some((lo, hi)) = range else {
        return Ok(vec![ZERO; dual.len()]);
    };
    let opts = ConeOptions { resolution, angles: 16, breakpoints: Vec::new() };
    let rule = cone_quadrature_with(&LowerBound::scalar(m, lo)?, &SpdMatrix::scalar(m, hi)?, m, &opts, false)?;
    let roots: Vec<(DMatrix<f64>, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(a, wt)| Ok((sqrt_spd(a)?.into_matrix(), wt * a.det().powf(-(k as f64) / 2.0))))
        .collect::<Result<_>>()?;
    let eval = |z: &DMatrix<f64>| -> f64 {
        let r = gram(z);
        roots.iter().map(|(root, c)| c * profile(&(root * &r * root))).sum()
    };
    if m == 1 {
        // the filter depends on ζ only through ζ'ζ
        Ok(lattice_multiplier(&eigs, |mu| Complex64::new(eval(&DMatrix::from_element(1, 1, mu[0].sqrt())), 0.0)))
    } else {
        use rayon::prelude::*;
        Ok((0..dual.len()).into_par_iter().map(|i| Complex64::new(eval(&dual.point(i)), 0.0)).collect())
    }
}

/// Filters every slice on `slice_spec` by a frequency-lattice multiplier.
fn filter_slices(data: &RadonField, slice_spec: GridSpec, filter: &[Complex64]) -> Result<RadonField> {
    data.map_slices(|s| {
        let mut ft = fft_continuous(&s.to_grid(slice_spec)?, false);
        for (v, h) in ft.values.iter_mut().zip(filter) {
            *v *= h;
        }
        Ok(Slice::Grid(fft_continuous(&ft, true)))
    })
}

fn check_slice_spec(data: &RadonField, slice_spec: &GridSpec) -> Result<()> {
    if (slice_spec.n, slice_spec.m) != (data.n - data.k, data.m) {
        return Err(Error::IncompatibleParams(format!("slice lattice must be {}×{}", data.n - data.k, data.m)));
    }
    Ok(())
}

/// Shared driver of the dual-ridgelet reconstructions: per step, slices filtered
/// by the cone sum of `profile`, then backprojected. The multiplier path
/// F⁻¹[m̃ Ff] of `mtilde_wavelet` is the reference when f is known.
#[allow(clippy::too_many_arguments)]
fn ridgelet_schedule<P: Fn(&DMatrix<f64>) -> f64 + Sync>(
    data: &RadonField,
    support: Option<(f64, f64)>,
    profile: P,
    mtilde_wavelet: &SpectralWavelet,
    constant: f64,
    slice_spec: GridSpec,
    spec: GridSpec,
    schedule: &TruncationSchedule,
    reference: Option<&GridField>,
) -> Result<Reconstruction> {
    let (n, m, k) = (data.n, data.m, data.k);
    check_slice_spec(data, &slice_spec)?;
    check_reference(reference, &spec)?;
    let c = Complex64::new(constant, 0.0);
    let pref = ridgelet_prefactor(n, m, k)?;
    let beta = Complex64::new(-(k as f64) / 2.0, 0.0);
    let out_eigs = lattice_eigenvalues(&spec.dual());
    let ref_spectrum = reference.map(|f| fft_continuous(f, false));
    let slice_dual = slice_spec.dual();
    let mut builder = ReportBuilder::default();
    let mut prev: Option<GridField> = None;
    let mut captured = false;
    let mut cross = None;
    for &(eps, rho) in &schedule.pairs {
        let started = Instant::now();
        let raw = match support {
            Some(sup) => {
                let h = slice_filter(&slice_dual, m, k, sup, eps, rho, DEFINITION_RESOLUTION, &profile)?;
                dual_radon_grid(&filter_slices(data, slice_spec, &h)?, spec)?
            }
            None => GridField::zeros(spec),
        };
        let mt = lattice_multiplier(&out_eigs, |mu| interval_integral(mtilde_wavelet, mu, eps, rho, beta, schedule.resolution) * pref);
        let sup = mt.iter().map(|v| v.norm()).fold(0.0, f64::max);
        captured = out_eigs.iter().zip(&mt).filter(|(e, _)| e.is_some()).all(|(_, v)| (v - c).norm() <= CAPTURE_TOL * c.norm().max(f64::MIN_POSITIVE));
        let err = reference_error(&raw, reference, c)?;
        if let Some(ff) = &ref_spectrum {
            let mut ft = ff.clone();
            for (v, h) in ft.values.iter_mut().zip(&mt) {
                *v *= h;
            }
            cross = Some(rel_gap(&raw, &fft_continuous(&ft, true))?);
        }
        let inc = prev.as_ref().map(|p| rel_gap(&raw, p)).transpose()?;
        let stop = builder.push(eps, rho, err, sup, inc, started);
        prev = Some(raw);
        if stop {
            break;
        }
    }
    let raw = prev.expect("schedule is non-empty");
    Ok(Reconstruction { normalized: normalize(&raw, c), raw, constant: c, report: builder.finish(captured), cross_check: cross })
}

/// Radon inversion by dual ridgelet transforms: ∫_{(ε,ρ)} W_a^* f̂ |a|^{-k/2} d_*a
/// → c_w f, for w on M_{n-k,m}. The cone integral is taken slice-wise before the
/// single backprojection, which is the same linear sum reordered.
pub fn radon_invert_method2(
    data: &RadonField,
    w: &SpectralWavelet,
    slice_spec: GridSpec,
    spec: GridSpec,
    schedule: &TruncationSchedule,
    reference: Option<&GridField>,
) -> Result<Reconstruction> {
    let (n, m, k) = (data.n, data.m, data.k);
    OrderParams::real(n, m, k, 0.0)?.check_radon()?;
    let w = wavelet_on(w, n - k, m)?;
    let cw = ridgelet_constant(&w, n, m, k)?;
    ridgelet_schedule(data, w.support(), |r| w.profile(r), &w, cw, slice_spec, spec, schedule, reference)
}

/// Ridgelet reproducing formula ∫ V_a^* U_a f |a|^{-k/2} d_*a → c_{u,v} f. The
/// slice filter multiplies the two profiles node by node; the product wavelet
/// u∗v drives the multiplier path.
#[allow(clippy::too_many_arguments)]
pub fn ridgelet_reproduce(
    f: &Field,
    u: &SpectralWavelet,
    v: &SpectralWavelet,
    params: &OrderParams,
    frames: &FrameSet,
    slice_spec: GridSpec,
    spec: GridSpec,
    schedule: &TruncationSchedule,
    reference: Option<&GridField>,
) -> Result<Reconstruction> {
    params.check_radon()?;
    let (n, m, k) = (params.n, params.m, params.k);
    let u = wavelet_on(u, n - k, m)?;
    let v = wavelet_on(v, n - k, m)?;
    let uv = u.product(&v)?;
    let cuv = pair_constant(&u, &v, n, m, k)?;
    let data = radon_transform(f, params, frames)?;
    ridgelet_schedule(&data, uv.support(), |r| u.profile(r) * v.profile(r), &uv, cuv, slice_spec, spec, schedule, reference)
}

/// Per-scale identity V_a^* U_a f = W_a^*(f̂) with w = u∗v: the left side runs two
/// slice wavelet transforms in sequence, the right side one with the product
/// profile. Returns the relative L² gap on `spec`.
#[allow(clippy::too_many_arguments)]
pub fn ridgelet_identity_gap(
    f: &Field,
    u: &SpectralWavelet,
    v: &SpectralWavelet,
    a: &SpdMatrix,
    params: &OrderParams,
    frames: &FrameSet,
    slice_spec: GridSpec,
    spec: GridSpec,
) -> Result<f64> {
    params.check_radon()?;
    let (n, m, k) = (params.n, params.m, params.k);
    let u = wavelet_on(u, n - k, m)?;
    let v = wavelet_on(v, n - k, m)?;
    let uv = u.product(&v)?;
    let data = radon_transform(f, params, frames)?;
    check_slice_spec(&data, &slice_spec)?;
    let ua = data.map_slices(|s| Ok(Slice::Grid(wavelet_transform_spectral(&s.to_grid(slice_spec)?, &u, a)?)))?;
    let vua = ua.map_slices(|s| Ok(Slice::Grid(wavelet_transform_spectral(&s.to_grid(slice_spec)?, &v, a)?)))?;
    let wa = data.map_slices(|s| Ok(Slice::Grid(wavelet_transform_spectral(&s.to_grid(slice_spec)?, &uv, a)?)))?;
    rel_gap(&dual_radon_grid(&vua, spec)?, &dual_radon_grid(&wa, spec)?)
}
