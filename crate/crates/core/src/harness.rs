//! Command implementations behind the `matwave` binary: constants table,
//! identity-verification suites, forward transforms and inversions.
//!
//! Suites run at the configured dimensions. Reconstructions use the lattice
//! path when n·m ≤ 3 and the Fourier-side error integrals otherwise.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::field::{fft_continuous, fourier_transform, Field, GaussianMixtureField, GridField, GridSpec};
use crate::inversion::{
    calderon_reconstruct, calderon_spectral, radon_invert_method1, radon_invert_method2, radon_invert_spectral, radon_methods_gap, ridgelet_identity_gap, ridgelet_reproduce, riesz_invert,
    riesz_invert_spectral, ConvergenceReport, RadonMethod, Reconstruction, CAUCHY_TOL,
};
use crate::linalg::{OrderParams, SpdMatrix};
use crate::sampling::{gaussian_matrix, integrate_matrix_space, integrate_polar, sample_stiefel, verify_smith_solmon, Estimate, RngStream, ROUNDING};
use crate::special::{fuglede_constant, measure_constant, riesz_normalizer, siegel_gamma, stiefel_volume};
use crate::transforms::radon::{dual_radon_grid, duality_check, fuglede_check, projection_slice_check, projection_slice_check_grid, radon_transform, FrameSet, RadonField};
use crate::transforms::ridgelet::{dual_ridgelet_grid, ridgelet_transform};
use crate::transforms::riesz::{riesz_multiplier_at, riesz_potential_grid, riesz_potential_integer, riesz_potential_kernel, riesz_potential_multiplier};
use crate::transforms::semyanistyi::semyanistyi;
use crate::transforms::{convolve, wavelet_transform};
use crate::wavelet::{calderon_constant_full, pair_constant, ridgelet_constant, riesz_inversion_constant, WaveletSpec};

/// Names accepted by `verify --suite`.
pub const SUITES: [&str; 12] = ["parseval", "polar", "smith_solmon", "projection_slice", "duality", "fuglede", "riesz_overlap", "calderon", "riesz_inversion", "radon_m1", "radon_m2", "ridgelet"];

pub const TRANSFORMS: [&str; 8] = ["fourier", "wavelet", "riesz", "radon", "dual_radon", "ridgelet", "dual_ridgelet", "semyanistyi"];

pub const METHODS: [&str; 5] = ["calderon", "riesz", "radon1", "radon2", "ridgelet"];

const DUALITY_PAIRS: usize = 5;

/// One checked statement of a suite. Comparisons pass when
/// |value - reference| ≤ tolerance; rows named `*_bound` pass when
/// value ≤ reference + tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub suite: String,
    pub assertion: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

struct Rows {
    suite: &'static str,
    rows: Vec<Assertion>,
}

impl Rows {
    fn new(suite: &'static str) -> Self {
        Rows { suite, rows: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, value: f64, reference: f64, tolerance: f64, pass: bool) {
        self.rows.push(Assertion { suite: self.suite.into(), assertion: name.into(), value, reference, tolerance, pass: pass && value.is_finite() });
    }

    /// |a - b| ≤ tol for complex values; the real parts are reported.
    fn close(&mut self, name: impl Into<String>, a: Complex64, b: Complex64, tol: f64) {
        self.push(name, a.re, b.re, tol, (a - b).norm() <= tol);
    }

    fn error(&mut self, name: impl Into<String>, err: f64, tol: f64) {
        self.push(name, err, 0.0, tol, err <= tol);
    }

    fn bound(&mut self, name: impl Into<String>, value: f64, limit: f64, tol: f64) {
        self.push(name, value, limit, tol, value <= limit + tol);
    }

    /// Two Monte Carlo estimates within `k` combined standard errors.
    fn agree(&mut self, name: impl Into<String>, a: &Estimate, b: &Estimate, k: f64) {
        let tol = (k * a.se.hypot(b.se)).max(ROUNDING * a.mean.norm().max(b.mean.norm()));
        self.push(name, a.mean.re, b.mean.re, tol, a.agrees_with(b, k));
    }

    /// Estimate within `k` standard errors of an exact value.
    fn covers(&mut self, name: impl Into<String>, a: &Estimate, exact: Complex64, k: f64) {
        let tol = (k * a.se).max(ROUNDING * a.mean.norm().max(exact.norm()));
        self.push(name, a.mean.re, exact.re, tol, a.covers(exact, k));
    }
}

pub fn all_pass(rows: &[Assertion]) -> bool {
    rows.iter().all(|r| r.pass)
}

/// CSV with columns suite, assertion, value, reference, tolerance, pass.
pub fn write_assertions_csv<W: Write>(rows: &[Assertion], mut out: W) -> Result<()> {
    writeln!(out, "suite,assertion,value,reference,tolerance,pass")?;
    for r in rows {
        writeln!(out, "{},{},{:.17e},{:.17e},{:.17e},{}", r.suite, r.assertion, r.value, r.reference, r.tolerance, r.pass)?;
    }
    Ok(())
}

fn suite_stream(cfg: &ExperimentConfig, suite: &str) -> RngStream {
    let id = SUITES.iter().position(|s| *s == suite).unwrap_or(SUITES.len()) as u64;
    RngStream::new(cfg.seed, id)
}

/// Runs one suite, or all of them for `None`.
pub fn verify(cfg: &ExperimentConfig, suite: Option<&str>) -> Result<Vec<Assertion>> {
    match suite {
        Some(name) => run_suite(cfg, name),
        None => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(cfg, s)?);
            }
            Ok(out)
        }
    }
}

pub fn run_suite(cfg: &ExperimentConfig, suite: &str) -> Result<Vec<Assertion>> {
    let stream = suite_stream(cfg, suite);
    let rows = match suite {
        "parseval" => parseval(cfg, &stream)?,
        "polar" => polar(cfg, &stream)?,
        "smith_solmon" => smith_solmon(cfg, &stream)?,
        "projection_slice" => projection_slice(cfg, &stream)?,
        "duality" => duality(cfg, &stream)?,
        "fuglede" => fuglede(cfg, &stream)?,
        "riesz_overlap" => riesz_overlap(cfg, &stream)?,
        "calderon" => calderon(cfg)?,
        "riesz_inversion" => riesz_inversion(cfg)?,
        "radon_m1" => radon_m1(cfg)?,
        "radon_m2" => radon_m2(cfg)?,
        "ridgelet" => ridgelet(cfg)?,
        other => return Err(Error::UnknownSuite(other.into())),
    };
    Ok(rows.rows)
}

fn parseval(cfg: &ExperimentConfig, stream: &RngStream) -> Result<Rows> {
    let mut out = Rows::new("parseval");
    let (n, m) = (cfg.n, cfg.m);
    let tol = cfg.tolerances.parseval;
    let f = cfg.phantom_field()?;
    let g = GaussianMixtureField::shifted_gaussian(gaussian_matrix(n, m, &mut stream.rng()) * 0.3, 1.2);
    let scale = (2.0 * PI).powi((n * m) as i32);
    let lhs = f.fourier().inner(&g.fourier())?;
    let rhs = f.inner(&g)? * scale;
    out.close("analytic_inner", lhs, rhs, tol * rhs.norm());
    let (a, b) = (f.fourier().l2_norm().powi(2), scale * f.l2_norm().powi(2));
    out.close("analytic_norm", Complex64::new(a, 0.0), Complex64::new(b, 0.0), tol * b);
    if cfg.on_lattice() {
        let fg = f.to_grid(cfg.grid()?)?;
        let (a, b) = (fft_continuous(&fg, false).l2_norm().powi(2), scale * fg.l2_norm().powi(2));
        out.close("grid_norm", Complex64::new(a, 0.0), Complex64::new(b, 0.0), tol * b);
    }
    Ok(out)
}

fn polar(cfg: &ExperimentConfig, stream: &RngStream) -> Result<Rows> {
    // ∫ exp(-tr x'x) dx = π^{nm/2}; the Wishart proposal shares the power of |r|
    let mut out = Rows::new("polar");
    let (n, m) = (cfg.n, cfg.m);
    let f = |x: &DMatrix<f64>| Complex64::new((-x.norm_squared()).exp(), 0.0);
    let exact = Complex64::new(PI.powf((n * m) as f64 / 2.0), 0.0);
    let polar = integrate_polar(f, n, m, n as f64, 0.7, &stream.child(0), cfg.samples)?;
    let cart = integrate_matrix_space(f, n, m, 0.8, &stream.child(1), cfg.samples)?;
    out.close("polar_vs_closed_form", polar.mean, exact, cfg.tolerances.polar * exact.re);
    out.covers("polar_within_se", &polar, exact, cfg.tolerances.se_factor);
    out.agree("polar_vs_cartesian", &polar, &cart, cfg.tolerances.se_factor);
    Ok(out)
}

fn smith_solmon(cfg: &ExperimentConfig, stream: &RngStream) -> Result<Rows> {
    let mut out = Rows::new("smith_solmon");
    let f = cfg.phantom_field()?;
    let k = cfg.tolerances.se_factor;
    let s = verify_smith_solmon(|x| f.evaluate(x), cfg.n, cfg.m, cfg.k, f.widest(), stream, cfg.samples)?;
    out.agree(format!("sides_{}_{}_{}", cfg.n, cfg.m, cfg.k), &s.lhs, &s.rhs, k);
    out.covers("lhs_vs_integral", &s.lhs, f.integral(), k);
    Ok(out)
}

fn projection_slice(cfg: &ExperimentConfig, stream: &RngStream) -> Result<Rows> {
    let mut out = Rows::new("projection_slice");
    let (n, m, k) = (cfg.n, cfg.m, cfg.k);
    cfg.params()?.check_radon()?;
    let f = cfg.phantom_field()?;
    let mut rng = stream.rng();
    for i in 0..cfg.pairs {
        let xi = sample_stiefel(n, n - k, &mut rng);
        let b = gaussian_matrix(n - k, m, &mut rng);
        let ps = projection_slice_check(&f, &xi, &b)?;
        out.error(format!("analytic_{i}"), ps.rel_err, cfg.tolerances.projection_slice);
    }
    if cfg.on_lattice() {
        let fg = f.to_grid(cfg.grid()?)?;
        for i in 0..3 {
            let xi = sample_stiefel(n, n - k, &mut rng);
            let b = gaussian_matrix(n - k, m, &mut rng);
            let ps = projection_slice_check_grid(&fg, &xi, &b)?;
            out.error(format!("grid_{i}"), ps.rel_err, cfg.tolerances.projection_slice_grid);
        }
    }
    Ok(out)
}

fn duality(cfg: &ExperimentConfig, stream: &RngStream) -> Result<Rows> {
    let mut out = Rows::new("duality");
    let (n, m) = (cfg.n, cfg.m);
    let mut rng = stream.rng();
    for i in 0..DUALITY_PAIRS {
        let f = GaussianMixtureField::shifted_gaussian(gaussian_matrix(n, m, &mut rng) * 0.3, 0.8 + 0.1 * i as f64);
        let g = GaussianMixtureField::gaussian(n, m, 0.6 + 0.1 * i as f64);
        let d = duality_check(&f, &g, cfg.k, &stream.child(i as u64 + 1), cfg.samples)?;
        out.agree(format!("pair_{i}"), &d.lhs, &d.rhs, cfg.tolerances.se_factor);
    }
    Ok(out)
}

fn sample_points(n: usize, m: usize, count: usize, stream: &RngStream) -> Vec<DMatrix<f64>> {
    let mut rng = stream.rng();
    std::iter::once(DMatrix::zeros(n, m)).chain((1..count).map(|_| gaussian_matrix(n, m, &mut rng) * 0.5)).collect()
}

fn fuglede(cfg: &ExperimentConfig, stream: &RngStream) -> Result<Rows> {
    let mut out = Rows::new("fuglede");
    let f = cfg.phantom_field()?;
    let pts = sample_points(cfg.n, cfg.m, 3, &stream.child(0));
    let res = fuglede_check(&f, cfg.k, &pts, cfg.frames, &stream.child(1), cfg.samples)?;
    for (i, p) in res.iter().enumerate() {
        out.agree(format!("point_{i}"), &p.lhs, &p.rhs, cfg.tolerances.se_factor);
    }
    Ok(out)
}

fn riesz_overlap(cfg: &ExperimentConfig, stream: &RngStream) -> Result<Rows> {
    // α = k lies in the integer part of the Wallach set, where the measure form exists
    let mut out = Rows::new("riesz_overlap");
    let (n, m, k) = (cfg.n, cfg.m, cfg.k);
    let alpha = Complex64::new(k as f64, 0.0);
    let params = OrderParams::new(n, m, k, alpha)?;
    let f = cfg.phantom_field()?;
    let pts = sample_points(n, m, 2, &stream.child(0));
    let mult = riesz_multiplier_at(&f, alpha, &params, &pts, &stream.child(1), cfg.samples)?;
    let int = riesz_potential_integer(&Field::Mixture(f.clone()), k, &params, &pts, &stream.child(2), cfg.samples)?;
    let kern = match riesz_potential_kernel(&Field::Mixture(f), alpha, &params, &pts, &stream.child(3), cfg.samples) {
        Ok(v) => Some(v),
        Err(Error::ConvergenceRegion(_)) => None,
        Err(e) => return Err(e),
    };
    let sk = cfg.tolerances.se_factor;
    for i in 0..pts.len() {
        out.agree(format!("measure_vs_multiplier_{i}"), &int[i], &mult[i], sk);
        if let Some(kern) = &kern {
            out.agree(format!("kernel_vs_multiplier_{i}"), &kern[i], &mult[i], sk);
            out.agree(format!("kernel_vs_measure_{i}"), &kern[i], &int[i], sk);
        }
    }
    Ok(out)
}

/// Report-level rows shared by the reconstructions.
fn report_rows(out: &mut Rows, cfg: &ExperimentConfig, report: &ConvergenceReport, tol: f64, sup_limit: Option<f64>, lattice: bool) {
    out.error("final_l2_error", report.final_error().unwrap_or(f64::NAN), tol);
    if let Some(limit) = sup_limit {
        let sup = report.multiplier_sups().into_iter().fold(0.0, f64::max);
        out.bound("multiplier_sup_bound", sup, limit, 1e-9 * limit);
    }
    let e = report.errors();
    // at the discretization floor successive errors may tie up to lattice noise
    let growth = e.windows(2).skip(1).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    out.error("error_growth_after_capture", growth, cfg.tolerances.monotone_slack);
    if lattice {
        let inc = report.steps.last().and_then(|s| s.increment).unwrap_or(0.0);
        out.push("converged", inc, 0.0, CAUCHY_TOL, report.verdict.is_converged());
    }
}

fn lattice_phantom(cfg: &ExperimentConfig) -> Result<(GaussianMixtureField, GridField)> {
    let f = cfg.phantom_field()?;
    let fg = f.to_grid(cfg.grid()?)?;
    Ok((f, fg))
}

fn calderon(cfg: &ExperimentConfig) -> Result<Rows> {
    let mut out = Rows::new("calderon");
    let w = cfg.wavelet(cfg.n)?;
    let s = cfg.schedule()?;
    // the profile is non-negative, so sup_y k_{ε,ρ} ≤ ∫ u_0 d_*s over the whole cone
    let bound = calderon_constant_full(&w);
    if cfg.on_lattice() {
        let (_, fg) = lattice_phantom(cfg)?;
        let r = calderon_reconstruct(&fg, &w, &s, true)?;
        report_rows(&mut out, cfg, &r.report, cfg.tolerances.calderon, Some(bound), true);
        out.error("definition_vs_multiplier", r.cross_check.unwrap_or(f64::NAN), cfg.tolerances.cross_check);
    } else {
        let r = calderon_spectral(&cfg.phantom_field()?, &w, &s, cfg.spectral_resolution)?;
        report_rows(&mut out, cfg, &r, cfg.tolerances.calderon_spectral, Some(bound), false);
    }
    Ok(out)
}

fn riesz_inversion(cfg: &ExperimentConfig) -> Result<Rows> {
    let mut out = Rows::new("riesz_inversion");
    let w = cfg.wavelet(cfg.n)?;
    let s = cfg.schedule()?;
    let alpha = cfg.alpha_c();
    if cfg.on_lattice() {
        let (_, fg) = lattice_phantom(cfg)?;
        let g = riesz_potential_grid(&fg, alpha)?;
        let r = riesz_invert(&g, alpha, &w, &s, Some(&fg), true)?;
        report_rows(&mut out, cfg, &r.report, cfg.tolerances.riesz_inversion, None, true);
        out.error("definition_vs_multiplier", r.cross_check.unwrap_or(f64::NAN), cfg.tolerances.cross_check);
    } else {
        let r = riesz_invert_spectral(&cfg.phantom_field()?, alpha, &w, &s, cfg.spectral_resolution)?;
        report_rows(&mut out, cfg, &r, cfg.tolerances.riesz_inversion_spectral, None, false);
    }
    Ok(out)
}

fn radon_data(cfg: &ExperimentConfig, f: &GaussianMixtureField) -> Result<RadonField> {
    let params = OrderParams::real(cfg.n, cfg.m, cfg.k, 0.0)?;
    let frames = FrameSet::default_for(cfg.n, cfg.k, cfg.radon_frames, &RngStream::new(cfg.seed, 1000));
    radon_transform(&Field::Mixture(f.clone()), &params, &frames)
}

fn slice_grid(cfg: &ExperimentConfig) -> Result<GridSpec> {
    GridSpec::new(cfg.n - cfg.k, cfg.m, cfg.slice_points, cfg.grid_extent)
}

fn method1(cfg: &ExperimentConfig) -> Result<(Reconstruction, GridField)> {
    let (f, fg) = lattice_phantom(cfg)?;
    let data = radon_data(cfg, &f)?;
    Ok((radon_invert_method1(&data, &cfg.wavelet(cfg.n)?, cfg.grid()?, &cfg.schedule()?, Some(&fg), true)?, fg))
}

fn method2(cfg: &ExperimentConfig) -> Result<(Reconstruction, GridField)> {
    let (f, fg) = lattice_phantom(cfg)?;
    let data = radon_data(cfg, &f)?;
    Ok((radon_invert_method2(&data, &cfg.wavelet(cfg.n - cfg.k)?, slice_grid(cfg)?, cfg.grid()?, &cfg.schedule()?, Some(&fg))?, fg))
}

fn radon_m1(cfg: &ExperimentConfig) -> Result<Rows> {
    let mut out = Rows::new("radon_m1");
    cfg.params()?.check_radon()?;
    if cfg.on_lattice() {
        let (r, _) = method1(cfg)?;
        report_rows(&mut out, cfg, &r.report, cfg.tolerances.radon, None, true);
        out.error("definition_vs_multiplier", r.cross_check.unwrap_or(f64::NAN), cfg.tolerances.cross_check);
    } else {
        let params = OrderParams::real(cfg.n, cfg.m, cfg.k, 0.0)?;
        let r = radon_invert_spectral(&cfg.phantom_field()?, &cfg.wavelet(cfg.n)?, &params, RadonMethod::Backprojection, &cfg.schedule()?, cfg.spectral_resolution)?;
        report_rows(&mut out, cfg, &r, cfg.tolerances.radon_spectral, None, false);
    }
    Ok(out)
}

fn radon_m2(cfg: &ExperimentConfig) -> Result<Rows> {
    let mut out = Rows::new("radon_m2");
    cfg.params()?.check_radon()?;
    if cfg.on_lattice() {
        let (r2, _) = method2(cfg)?;
        report_rows(&mut out, cfg, &r2.report, cfg.tolerances.radon, None, true);
        // slice-lattice filter against the multiplier on the output lattice
        out.error("definition_vs_multiplier", r2.cross_check.unwrap_or(f64::NAN), cfg.tolerances.radon);
        let (r1, _) = method1(cfg)?;
        let tol = cfg.tolerances.radon;
        let gap = match (&r1.normalized, &r2.normalized) {
            (Some(a), Some(b)) => crate::inversion::schedule::relative(a.sub(b)?.l2_norm(), b.l2_norm()),
            _ => f64::NAN,
        };
        out.error("method1_vs_method2", gap, tol);
    } else {
        let params = OrderParams::real(cfg.n, cfg.m, cfg.k, 0.0)?;
        let f = cfg.phantom_field()?;
        let s = cfg.schedule()?;
        let (w_full, w_slice) = (cfg.wavelet(cfg.n)?, cfg.wavelet(cfg.n - cfg.k)?);
        let r = radon_invert_spectral(&f, &w_slice, &params, RadonMethod::DualRidgelet, &s, cfg.spectral_resolution)?;
        report_rows(&mut out, cfg, &r, cfg.tolerances.radon_spectral, None, false);
        let (e, rho) = s.pairs[r.steps.len() - 1];
        let gap = radon_methods_gap(&f, &w_full, &w_slice, &params, e, rho, s.resolution, cfg.spectral_resolution)?;
        out.error("method1_vs_method2", gap, cfg.tolerances.radon_spectral);
    }
    Ok(out)
}

fn ridgelet(cfg: &ExperimentConfig) -> Result<Rows> {
    let mut out = Rows::new("ridgelet");
    let params = OrderParams::real(cfg.n, cfg.m, cfg.k, 0.0)?;
    params.check_radon()?;
    if !cfg.on_lattice() {
        return Err(Error::Unsupported("the ridgelet suite needs n·m ≤ 3".into()));
    }
    let (f, fg) = lattice_phantom(cfg)?;
    let field = Field::Mixture(f);
    let frames = FrameSet::default_for(cfg.n, cfg.k, cfg.radon_frames, &RngStream::new(cfg.seed, 1000));
    let (spec, slices) = (cfg.grid()?, slice_grid(cfg)?);
    let u = cfg.wavelet(cfg.n - cfg.k)?;
    let v = u.dilated(cfg.partner_dilation)?;
    for c in [0.5, 1.0, 2.0] {
        let a = SpdMatrix::scalar(cfg.m, c)?;
        let gap = ridgelet_identity_gap(&field, &u, &v, &a, &params, &frames, slices, spec)?;
        out.error(format!("identity_at_{c}"), gap, cfg.tolerances.ridgelet_identity);
    }
    let s = cfg.schedule()?;
    let r = ridgelet_reproduce(&field, &u, &v, &params, &frames, slices, spec, &s, Some(&fg))?;
    report_rows(&mut out, cfg, &r.report, cfg.tolerances.ridgelet, None, true);
    // a partner band starting beyond Λ leaves u·v ≡ 0
    let z = u.dilated(4.0 * cfg.lambda / cfg.delta)?;
    let cuv = pair_constant(&u, &z, cfg.n, cfg.m, cfg.k)?;
    out.close("disjoint_constant", Complex64::new(cuv, 0.0), Complex64::new(0.0, 0.0), 0.0);
    let null = ridgelet_reproduce(&field, &u, &z, &params, &frames, slices, spec, &s, None)?;
    out.close("disjoint_reconstruction", Complex64::new(null.raw.max_abs(), 0.0), Complex64::new(0.0, 0.0), 0.0);
    Ok(out)
}

/// `(name, value or reason)` rows of the constants table.
pub fn constants(cfg: &ExperimentConfig) -> Vec<(String, std::result::Result<f64, String>)> {
    let (n, m, k) = (cfg.n, cfg.m, cfg.k);
    let alpha = cfg.alpha_c();
    let re = |r: Result<Complex64>| r.map(|c| c.re).map_err(|e| e.to_string());
    let plain = |r: Result<f64>| r.map_err(|e| e.to_string());
    let mut rows = vec![
        (format!("Gamma_{m}({})", cfg.alpha), re(siegel_gamma(m, alpha))),
        (format!("sigma_{{{n},{m}}}"), Ok(stiefel_volume(n, m))),
        (format!("gamma_{{{n},{m}}}({})", cfg.alpha), re(riesz_normalizer(n, m, alpha))),
        (format!("c_{{{n},{k},{m}}}"), plain(fuglede_constant(n, k, m))),
        (format!("c_{k}"), plain(measure_constant(n, k, m))),
    ];
    let full = cfg.wavelet(n).map_err(|e| e.to_string());
    let slice = cfg.wavelet(n.saturating_sub(k).max(m)).map_err(|e| e.to_string());
    rows.push(("c_nu".into(), full.clone().map(|w| calderon_constant_full(&w))));
    rows.push((format!("d_w({})", cfg.alpha), full.and_then(|w| re(riesz_inversion_constant(&w, n, m, alpha)))));
    rows.push(("c_w".into(), slice.clone().and_then(|w| plain(ridgelet_constant(&w, n, m, k)))));
    rows.push((
        "c_{u,v}".into(),
        slice.and_then(|u| {
            let v = u.dilated(cfg.partner_dilation).map_err(|e| e.to_string())?;
            plain(pair_constant(&u, &v, n, m, k))
        }),
    ));
    rows
}

/// Merge the wavelet-dependent constants of this setup into the `[constants]`
/// block of the configured wavelet file. Keys carry the dimensions, so one file
/// can serve several setups. Returns the file written, if any.
pub fn store_wavelet_constants(cfg: &ExperimentConfig) -> Result<Option<PathBuf>> {
    let Some(path) = &cfg.wavelet_file else { return Ok(None) };
    let (n, m, k) = (cfg.n, cfg.m, cfg.k);
    let mut spec = WaveletSpec::load(path)?;
    let mut merged = spec.constants.clone();
    for (name, v) in constants(cfg) {
        let key = if name == "c_nu" {
            format!("c_nu@{n}x{m}")
        } else if name.starts_with("d_w") {
            format!("d_w@{n}x{m}({})", cfg.alpha)
        } else if name == "c_w" {
            format!("c_w@{n}x{m}x{k}")
        } else if name == "c_{u,v}" {
            format!("c_uv@{n}x{m}x{k}/{}", cfg.partner_dilation)
        } else {
            continue;
        };
        let Ok(v) = v else { continue };
        match merged.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = v,
            None => merged.push((key, v)),
        }
    }
    spec.store_constants(path, merged)?;
    Ok(Some(path.clone()))
}

pub fn render_constants(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    for (name, v) in constants(cfg) {
        let _ = match v {
            Ok(x) => writeln!(s, "{name:<20} {x}"),
            Err(reason) => writeln!(s, "{name:<20} undefined ({reason})"),
        };
    }
    s
}

/// L² norm and max magnitude of a written output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub l2_norm: f64,
    pub max_abs: f64,
}

impl Summary {
    fn grid(g: &GridField) -> Self {
        Summary { l2_norm: g.l2_norm(), max_abs: g.max_abs() }
    }

    /// sqrt(Σ_i w_i ‖φ(ξ_i, ·)‖²) with slices sampled on `spec`.
    fn radon(phi: &RadonField, spec: GridSpec) -> Result<Self> {
        let mut ss = 0.0;
        let mut max_abs: f64 = 0.0;
        for (s, w) in phi.slices.iter().zip(&phi.frames.weights) {
            let g = s.to_grid(spec)?;
            ss += w * g.l2_norm().powi(2);
            max_abs = max_abs.max(g.max_abs());
        }
        Ok(Summary { l2_norm: ss.sqrt(), max_abs })
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_grid(dir: &Path, name: &str, g: &GridField) -> Result<Vec<PathBuf>> {
    let bin = dir.join(format!("{name}.bin"));
    let csv = dir.join(format!("{name}.csv"));
    g.write_binary(&bin)?;
    g.write_csv(std::io::BufWriter::new(std::fs::File::create(&csv)?))?;
    Ok(vec![bin, csv])
}

/// Slices of φ on `spec`, with a `closed_form` column for mixture phantoms:
/// Σ A (2πσ²)^{km/2} exp(-|t - ξ'c|²/(2σ²)) term by term.
fn write_radon(dir: &Path, name: &str, phi: &RadonField, spec: GridSpec, phantom: Option<&GaussianMixtureField>) -> Result<(Vec<PathBuf>, Option<f64>)> {
    let path = dir.join(format!("{name}.csv"));
    let frames_path = dir.join(format!("{name}_frames.csv"));
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    let q = phi.n - phi.k;
    let mut header = vec!["frame_index".to_string()];
    header.extend((0..q).flat_map(|i| (0..phi.m).map(move |j| format!("t_{}_{}", i + 1, j + 1))));
    header.extend(["re".into(), "im".into()]);
    if phantom.is_some() {
        header.push("closed_form".into());
    }
    writeln!(out, "{}", header.join(","))?;
    let mut worst: f64 = 0.0;
    for (fi, (s, frame)) in phi.slices.iter().zip(&phi.frames.frames).enumerate() {
        let g = s.to_grid(spec)?;
        // slices are stored against the canonical frame
        let xi = crate::transforms::radon::canonical_frame(frame.matrix()).0;
        for (p, v) in g.values.iter().enumerate() {
            let t = spec.point(p);
            let mut line = format!("{fi}");
            for x in crate::linalg::row_major(&t) {
                let _ = write!(line, ",{x:.17e}");
            }
            let _ = write!(line, ",{:.17e},{:.17e}", v.re, v.im);
            if let Some(f) = phantom {
                let exact: f64 = f
                    .terms
                    .iter()
                    .map(|term| {
                        let s2 = term.width * term.width;
                        let d = (&t - xi.transpose() * &term.center).norm_squared();
                        term.amplitude.re * (2.0 * PI * s2).powf((phi.k * phi.m) as f64 / 2.0) * (-d / (2.0 * s2)).exp()
                    })
                    .sum();
                worst = worst.max((v.re - exact).abs().max(v.im.abs()));
                let _ = write!(line, ",{exact:.17e}");
            }
            writeln!(out, "{line}")?;
        }
    }
    phi.write_frames_csv(std::io::BufWriter::new(std::fs::File::create(&frames_path)?))?;
    Ok((vec![path, frames_path], phantom.map(|_| worst)))
}

/// What a transform run produced.
#[derive(Debug, Clone)]
pub struct TransformOutput {
    pub files: Vec<PathBuf>,
    pub summary: Summary,
    /// Max deviation of the Radon slices from their closed form.
    pub closed_form_deviation: Option<f64>,
}

/// Radial zero-mean analysing wavelet for the transform command.
fn analysing_wavelet(rows: usize, m: usize) -> GaussianMixtureField {
    GaussianMixtureField::dog(rows, m, 0.5)
}

pub fn transform(cfg: &ExperimentConfig, name: &str, dir: &Path) -> Result<TransformOutput> {
    if !TRANSFORMS.contains(&name) {
        return Err(Error::UnknownTransform(name.into()));
    }
    ensure_dir(dir)?;
    let f = cfg.phantom_field()?;
    let params = cfg.params()?;
    let a = SpdMatrix::scalar(cfg.m, cfg.scale)?;
    let frames = || FrameSet::default_for(cfg.n, cfg.k, cfg.radon_frames, &RngStream::new(cfg.seed, 1000));
    let grid_out = |g: GridField| -> Result<TransformOutput> { Ok(TransformOutput { files: write_grid(dir, name, &g)?, summary: Summary::grid(&g), closed_form_deviation: None }) };
    match name {
        "fourier" => {
            let Field::Grid(g) = fourier_transform(&Field::Grid(f.to_grid(cfg.grid()?)?))? else { unreachable!("grid in, grid out") };
            grid_out(g)
        }
        "wavelet" => {
            let Field::Grid(g) = wavelet_transform(&Field::Grid(f.to_grid(cfg.grid()?)?), &Field::Mixture(analysing_wavelet(cfg.n, cfg.m)), &a)? else { unreachable!("grid in, grid out") };
            grid_out(g)
        }
        "riesz" => {
            let Field::Grid(g) = riesz_potential_multiplier(&Field::Grid(f.to_grid(cfg.grid()?)?), cfg.alpha_c(), &params)? else { unreachable!("grid in, grid out") };
            grid_out(g)
        }
        "dual_radon" => {
            params.check_radon()?;
            grid_out(dual_radon_grid(&radon_transform(&Field::Mixture(f), &params, &frames())?, cfg.grid()?)?)
        }
        "dual_ridgelet" => {
            params.check_radon()?;
            let w = Field::Mixture(analysing_wavelet(cfg.n - cfg.k, cfg.m));
            let phi = ridgelet_transform(&Field::Mixture(f), &w, &a, &params, &frames())?;
            grid_out(dual_ridgelet_grid(&phi, &w, &a, cfg.grid()?)?)
        }
        _ => {
            params.check_radon()?;
            let spec = slice_grid(cfg)?;
            let field = Field::Mixture(f.clone());
            let (phi, phantom) = match name {
                "radon" => (radon_transform(&field, &params, &frames())?, Some(&f)),
                "ridgelet" => (ridgelet_transform(&field, &Field::Mixture(analysing_wavelet(cfg.n - cfg.k, cfg.m)), &a, &params, &frames())?, None),
                _ => (semyanistyi(&field, cfg.alpha_c(), &params, &frames(), spec)?, if cfg.alpha == 0.0 { Some(&f) } else { None }),
            };
            let (files, dev) = write_radon(dir, name, &phi, spec, phantom)?;
            Ok(TransformOutput { files, summary: Summary::radon(&phi, spec)?, closed_form_deviation: dev })
        }
    }
}

/// Plain convolution with the analysing wavelet, the a = I reference of `transform wavelet`.
pub fn plain_convolution(cfg: &ExperimentConfig) -> Result<GridField> {
    let f = cfg.phantom_field()?.to_grid(cfg.grid()?)?;
    match convolve(&Field::Grid(f), &Field::Mixture(analysing_wavelet(cfg.n, cfg.m)))? {
        Field::Grid(g) => Ok(g),
        Field::Mixture(_) => unreachable!("grid in, grid out"),
    }
}

/// What an inversion run produced.
#[derive(Debug, Clone)]
pub struct InversionOutput {
    pub report: ConvergenceReport,
    pub files: Vec<PathBuf>,
    /// None on the Fourier-side path, which has no reconstruction lattice.
    pub reconstruction: Option<GridField>,
}

impl InversionOutput {
    pub fn summary_line(&self, method: &str) -> String {
        let err = self.report.final_error().map_or("n/a".to_string(), |e| format!("{e:.6e}"));
        format!("{method}: final l2_error {err} after {} steps, {}", self.report.steps.len(), self.report.verdict)
    }
}

pub fn invert(cfg: &ExperimentConfig, method: &str, dir: &Path) -> Result<InversionOutput> {
    if !METHODS.contains(&method) {
        return Err(Error::UnknownMethod(method.into()));
    }
    ensure_dir(dir)?;
    let s = cfg.schedule()?;
    let (report, recon) = if cfg.on_lattice() {
        let (f, fg) = lattice_phantom(cfg)?;
        let r = match method {
            "calderon" => calderon_reconstruct(&fg, &cfg.wavelet(cfg.n)?, &s, false)?,
            "riesz" => riesz_invert(&riesz_potential_grid(&fg, cfg.alpha_c())?, cfg.alpha_c(), &cfg.wavelet(cfg.n)?, &s, Some(&fg), false)?,
            "radon1" => method1(cfg)?.0,
            "radon2" => method2(cfg)?.0,
            _ => {
                let params = OrderParams::real(cfg.n, cfg.m, cfg.k, 0.0)?;
                let frames = FrameSet::default_for(cfg.n, cfg.k, cfg.radon_frames, &RngStream::new(cfg.seed, 1000));
                let u = cfg.wavelet(cfg.n - cfg.k)?;
                let v = u.dilated(cfg.partner_dilation)?;
                ridgelet_reproduce(&Field::Mixture(f), &u, &v, &params, &frames, slice_grid(cfg)?, cfg.grid()?, &s, Some(&fg))?
            }
        };
        let out = r.normalized.unwrap_or_else(|| GridField::zeros(r.raw.spec));
        (r.report, Some(out))
    } else {
        let f = cfg.phantom_field()?;
        let res = cfg.spectral_resolution;
        let params = OrderParams::real(cfg.n, cfg.m, cfg.k, 0.0)?;
        let report = match method {
            "calderon" => calderon_spectral(&f, &cfg.wavelet(cfg.n)?, &s, res)?,
            "riesz" => riesz_invert_spectral(&f, cfg.alpha_c(), &cfg.wavelet(cfg.n)?, &s, res)?,
            "radon1" => radon_invert_spectral(&f, &cfg.wavelet(cfg.n)?, &params, RadonMethod::Backprojection, &s, res)?,
            "radon2" => radon_invert_spectral(&f, &cfg.wavelet(cfg.n - cfg.k)?, &params, RadonMethod::DualRidgelet, &s, res)?,
            _ => return Err(Error::Unsupported("ridgelet reconstruction needs n·m ≤ 3".into())),
        };
        (report, None)
    };
    let mut files = Vec::new();
    if let Some(g) = &recon {
        files.extend(write_grid(dir, &format!("{method}_reconstruction"), g)?);
    }
    let report_path = dir.join(format!("{method}_report.csv"));
    report.write_csv(std::io::BufWriter::new(std::fs::File::create(&report_path)?))?;
    files.push(report_path);
    Ok(InversionOutput { report, files, reconstruction: recon })
}
