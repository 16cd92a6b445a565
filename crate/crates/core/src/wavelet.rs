//! Fourier-side wavelets with symmetric spectral profiles and their
//! admissibility constants.
//!
//! Every constant reduces by polar coordinates to
//! J(β) = ∫_{P_m} u_0(s) |s|^β d_*s, and every truncated multiplier to the same
//! integral over a matrix interval (εr, ρr).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::cone::{for_each_spectral_node, rotation_rule, DEFAULT_RESOLUTION};
use crate::error::{Error, Result};
use crate::field::{GridField, GridSpec};
use crate::linalg::{cone_interval_contains, gram, sym_eigenvalues};
use crate::special::{stiefel_volume, ConstantTable};

/// One log-scale bump: zero outside [δ, Λ], one on the middle third, smoothstep
/// transitions on the outer thirds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub delta: f64,
    pub lambda: f64,
    pub degree: u8,
}

impl Band {
    pub fn new(delta: f64, lambda: f64, degree: u8) -> Result<Self> {
        if !(delta > 0.0 && lambda > delta && lambda.is_finite()) {
            return Err(Error::BadBand { delta, lambda });
        }
        if degree != 3 && degree != 5 {
            return Err(Error::IncompatibleParams(format!("bump degree must be 3 or 5, got {degree}")));
        }
        Ok(Band { delta, lambda, degree })
    }

    fn step(&self, t: f64) -> f64 {
        match self.degree {
            3 => t * t * (3.0 - 2.0 * t),
            _ => t * t * t * (t * (6.0 * t - 15.0) + 10.0),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        if !(x > self.delta && x < self.lambda) {
            return 0.0;
        }
        let t = (x / self.delta).ln() / (self.lambda / self.delta).ln();
        if t < 1.0 / 3.0 {
            self.step(3.0 * t)
        } else if t > 2.0 / 3.0 {
            self.step(3.0 * (1.0 - t))
        } else {
            1.0
        }
    }

    /// Edges and third points, where the bump is not analytic.
    pub fn breakpoints(&self) -> [f64; 4] {
        let r = (self.lambda / self.delta).ln();
        [self.delta, self.delta * (r / 3.0).exp(), self.delta * (2.0 * r / 3.0).exp(), self.lambda]
    }
}

/// Wavelet on M_{rows,m} given by its Fourier profile
/// (F w)(y) = u_0(y'y) = scale · ∏_bands ∏_i b(λ_i(y'y)).
#[derive(Debug, Clone)]
pub struct SpectralWavelet {
    pub rows: usize,
    pub m: usize,
    pub bands: Vec<Band>,
    pub scale: f64,
    cache: Arc<ConstantTable>,
}

impl PartialEq for SpectralWavelet {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.m == other.m && self.bands == other.bands && self.scale == other.scale
    }
}

/// Band wavelet with the default quintic smoothstep.
pub fn make_band_wavelet(rows: usize, m: usize, delta: f64, lambda: f64) -> Result<SpectralWavelet> {
    SpectralWavelet::new(rows, m, vec![Band::new(delta, lambda, 5)?], 1.0)
}

impl SpectralWavelet {
    pub fn new(rows: usize, m: usize, bands: Vec<Band>, scale: f64) -> Result<Self> {
        if m == 0 || rows < m {
            return Err(Error::Dimension(format!("wavelet on M_{{{rows},{m}}} needs rows >= m >= 1")));
        }
        if bands.is_empty() {
            return Err(Error::IncompatibleParams("a wavelet needs at least one band".into()));
        }
        Ok(SpectralWavelet { rows, m, bands, scale, cache: Arc::new(ConstantTable::new()) })
    }

    /// Default band [0.25, 4].
    pub fn default_band(rows: usize, m: usize) -> Self {
        make_band_wavelet(rows, m, 0.25, 4.0).expect("default band is valid")
    }

    pub fn scaled(&self, c: f64) -> Self {
        SpectralWavelet::new(self.rows, self.m, self.bands.clone(), self.scale * c).expect("same shape")
    }

    /// Same profile viewed on M_{rows,m} for another row count.
    pub fn with_rows(&self, rows: usize) -> Result<Self> {
        SpectralWavelet::new(rows, self.m, self.bands.clone(), self.scale)
    }

    /// Profile with every eigenvalue argument multiplied by 1/c: u_0(r/c).
    pub fn dilated(&self, c: f64) -> Result<Self> {
        let bands = self.bands.iter().map(|b| Band::new(b.delta * c, b.lambda * c, b.degree)).collect::<Result<_>>()?;
        SpectralWavelet::new(self.rows, self.m, bands, self.scale)
    }

    /// Product profile u_0·v_0, the profile of u ∗ v.
    pub fn product(&self, other: &SpectralWavelet) -> Result<Self> {
        if (self.rows, self.m) != (other.rows, other.m) {
            return Err(Error::IncompatibleParams("wavelets live on different spaces".into()));
        }
        let bands = self.bands.iter().chain(&other.bands).copied().collect();
        SpectralWavelet::new(self.rows, self.m, bands, self.scale * other.scale)
    }

    /// Eigenvalue range outside of which the profile vanishes; None when empty.
    pub fn support(&self) -> Option<(f64, f64)> {
        let lo = self.bands.iter().map(|b| b.delta).fold(0.0, f64::max);
        let hi = self.bands.iter().map(|b| b.lambda).fold(f64::INFINITY, f64::min);
        (hi > lo && self.scale != 0.0).then_some((lo, hi))
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.bands.iter().flat_map(|b| b.breakpoints()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    /// One-variable factor ∏_bands b(λ).
    pub fn factor(&self, lambda: f64) -> f64 {
        self.bands.iter().map(|b| b.value(lambda)).product()
    }

    /// u_0 as a symmetric function of the eigenvalues.
    pub fn profile_eigs(&self, eigs: &[f64]) -> f64 {
        self.scale * eigs.iter().map(|&l| self.factor(l)).product::<f64>()
    }

    /// u_0(r) for a symmetric m×m matrix.
    pub fn profile(&self, r: &DMatrix<f64>) -> f64 {
        self.profile_eigs(&sym_eigenvalues(r))
    }

    /// (F w)(y) = u_0(y'y).
    pub fn fourier(&self, y: &DMatrix<f64>) -> f64 {
        self.profile(&gram(y))
    }

    /// max |u_0(s^{1/2} r s^{1/2}) - u_0(r^{1/2} s r^{1/2})| over random SPD pairs.
    pub fn symmetry_deviation<R: Rng + ?Sized>(&self, pairs: usize, rng: &mut R) -> f64 {
        let m = self.m;
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let r = random_spd(m, rng);
            let s = random_spd(m, rng);
            let rh = crate::sampling::spd_sqrt(&r);
            let sh = crate::sampling::spd_sqrt(&s);
            let a = self.profile(&(&sh * &r * &sh));
            let b = self.profile(&(&rh * &s * &rh));
            worst = worst.max((a - b).abs());
        }
        worst
    }

    /// J(β) = ∫_{P_m} u_0(s) |s|^β d_*s.
    pub fn moment(&self, beta: Complex64) -> Complex64 {
        let Some((lo, hi)) = self.support() else {
            return Complex64::new(0.0, 0.0);
        };
        self.cache
            .get_or_compute("moment", self.rows, self.m, 0, beta, || Ok(truncated_moment(self, lo, hi, beta, DEFAULT_RESOLUTION)))
            .expect("moment never fails")
    }

    fn cached<F: FnOnce() -> Result<Complex64>>(&self, name: &'static str, n: usize, k: usize, alpha: Complex64, f: F) -> Result<Complex64> {
        self.cache.get_or_compute(name, n, self.m, k, alpha, f)
    }
}

fn random_spd<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    let g = crate::sampling::gaussian_matrix(m, m, rng);
    &g * g.transpose() + DMatrix::identity(m, m) * 0.1
}

/// ∫_{(lo·I, hi·I)} u_0(s) |s|^β d_*s.
pub fn truncated_moment(w: &SpectralWavelet, lo: f64, hi: f64, beta: Complex64, resolution: usize) -> Complex64 {
    let Some((blo, bhi)) = w.support() else {
        return Complex64::new(0.0, 0.0);
    };
    let (a, b) = (lo.max(blo), hi.min(bhi));
    if !(b > a) {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_spectral_node(w.m, a, b, &w.breakpoints(), resolution, |l, wt| {
        let u = w.profile_eigs(l);
        if u != 0.0 {
            let ln_det: f64 = l.iter().map(|x| x.ln()).sum();
            acc += (beta * ln_det).exp() * (wt * u);
        }
    });
    acc
}

/// One step of a constant evaluated over a truncation schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantStep {
    pub eps: f64,
    pub rho: f64,
    pub value: f64,
    pub increment: f64,
}

/// Constant with the partial values that led to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantReport {
    pub value: f64,
    pub steps: Vec<ConstantStep>,
}

/// Relative Cauchy increment below which a constant counts as stabilized.
pub const CONSTANT_TOL: f64 = 1e-6;

/// c_ν = lim (2^m/σ_{n,m}) ∫_{A<y'y<B} (Fν)(z)|z|_m^{-n} dz over the schedule
/// A = ε_j I, B = ρ_j I. The limit is exact once the band is captured.
pub fn calderon_constant(w: &SpectralWavelet, n: usize, m: usize, schedule: &[(f64, f64)]) -> Result<ConstantReport> {
    if w.m != m || w.rows != n {
        return Err(Error::IncompatibleParams(format!("wavelet on M_{{{},{}}} used on M_{{{n},{m}}}", w.rows, w.m)));
    }
    if schedule.is_empty() {
        return Err(Error::NoConvergence("empty truncation schedule".into()));
    }
    let mut steps = Vec::with_capacity(schedule.len());
    let mut prev: Option<f64> = None;
    for &(eps, rho) in schedule {
        let value = truncated_moment(w, eps, rho, Complex64::new(0.0, 0.0), DEFAULT_RESOLUTION).re;
        let increment = prev.map_or(f64::INFINITY, |p| (value - p).abs());
        steps.push(ConstantStep { eps, rho, value, increment });
        prev = Some(value);
    }
    let last = steps.last().expect("non-empty");
    let full = w.moment(Complex64::new(0.0, 0.0)).re;
    // a single step is conclusive when it already holds the whole band
    let captured = w.support().is_none_or(|(lo, hi)| last.eps <= lo && last.rho >= hi);
    let stable = last.increment <= CONSTANT_TOL * last.value.abs().max(f64::MIN_POSITIVE);
    if !(captured || stable) {
        return Err(Error::NoConvergence(format!("last increment {:e} at ({}, {})", last.increment, last.eps, last.rho)));
    }
    let value = if captured { full } else { last.value };
    Ok(ConstantReport { value, steps })
}

/// c_ν of the whole profile.
pub fn calderon_constant_full(w: &SpectralWavelet) -> f64 {
    w.moment(Complex64::new(0.0, 0.0)).re
}

/// d_w(α) = (2^m/σ_{n,m}) ∫ (Fw)(z) |z|_m^{-n-α} dz = J(-α/2).
pub fn riesz_inversion_constant(w: &SpectralWavelet, n: usize, m: usize, alpha: Complex64) -> Result<Complex64> {
    if w.m != m {
        return Err(Error::IncompatibleParams("wavelet and space disagree on m".into()));
    }
    let v = w.cached("d_w", n, 0, alpha, || Ok(w.moment(-alpha / 2.0)))?;
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::NoConvergence(format!("d_w({alpha}) is not finite")));
    }
    Ok(v)
}

/// (2^{m(k+1)} π^{km} / σ_{n,m}) · 2^{-m} σ_{n-k,m}: the factor turning
/// J(-k/2) into the ridgelet constant.
pub fn ridgelet_prefactor(n: usize, m: usize, k: usize) -> Result<f64> {
    crate::linalg::check_plane_codim(n, m, k)?;
    let (mf, kf) = (m as f64, k as f64);
    let ln = mf * (kf + 1.0) * 2f64.ln() + kf * mf * PI.ln() - stiefel_volume(n, m).ln() - mf * 2f64.ln() + stiefel_volume(n - k, m).ln();
    Ok(ln.exp())
}

/// c_w = (2^{m(k+1)} π^{km}/σ_{n,m}) ∫_{M_{n-k,m}} (F̃w)(ζ)|ζ|_m^{-n} dζ.
pub fn ridgelet_constant(w: &SpectralWavelet, n: usize, m: usize, k: usize) -> Result<f64> {
    if w.m != m || w.rows != n - k.min(n) {
        return Err(Error::IncompatibleParams(format!("ridgelet wavelet must live on M_{{{},{m}}}", n.saturating_sub(k))));
    }
    let c = ridgelet_prefactor(n, m, k)?;
    let v = w.cached("c_w", n, k, Complex64::new(0.0, 0.0), || Ok(w.moment(Complex64::new(-(k as f64) / 2.0, 0.0)) * c))?;
    Ok(v.re)
}

/// c_{u,v}: the ridgelet constant of the product profile.
pub fn pair_constant(u: &SpectralWavelet, v: &SpectralWavelet, n: usize, m: usize, k: usize) -> Result<f64> {
    ridgelet_constant(&u.product(v)?, n, m, k)
}

/// ∫_{(εr, ρr)} u_0(s) |s|^β d_*s for r with eigenvalues `mu`; ρ may be infinite
/// and ε zero. m = 1 is a 1-d integral, m = 2 integrates the rotation angle in
/// closed form, m ≥ 3 averages over an SO(m) rule.
pub fn interval_integral(w: &SpectralWavelet, mu: &[f64], eps: f64, rho: f64, beta: Complex64, resolution: usize) -> Complex64 {
    match w.m {
        1 => interval_integral_1d(w, mu[0], eps, rho, beta, resolution),
        2 => interval_integral_arc(w, mu, eps, rho, beta, resolution),
        _ => interval_integral_rotations(w, mu, eps, rho, beta, resolution, 6),
    }
}

fn interval_integral_1d(w: &SpectralWavelet, mu: f64, eps: f64, rho: f64, beta: Complex64, resolution: usize) -> Complex64 {
    let Some((blo, bhi)) = w.support() else {
        return Complex64::new(0.0, 0.0);
    };
    let (a, b) = ((eps * mu).max(blo), (rho * mu).min(bhi));
    if !(b > a) {
        return Complex64::new(0.0, 0.0);
    }
    truncated_moment(w, a, b, beta, resolution)
}

/// Admissible range of C = cos 2φ for a + b·C > 0, intersected into [lo, hi].
fn restrict(a: f64, b: f64, lo: &mut f64, hi: &mut f64) {
    if b > 0.0 {
        *lo = lo.max(-a / b);
    } else if b < 0.0 {
        *hi = hi.min(-a / b);
    } else if a <= 0.0 {
        *lo = 2.0;
    }
}

/// Fraction of rotation angles φ for which s = R(φ) diag(σ1, σ2) R(φ)' lies in
/// (ε·diag(μ1, μ2), ρ·diag(μ1, μ2)).
pub fn arc_fraction(sigma: (f64, f64), mu: (f64, f64), eps: f64, rho: f64) -> f64 {
    let (s1, s2) = sigma;
    let (m1, m2) = mu;
    let c = 0.5 * (s1 + s2);
    let e = 0.5 * (s1 - s2);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    if eps > 0.0 {
        if 2.0 * c - eps * (m1 + m2) <= 0.0 {
            return 0.0;
        }
        restrict((c - eps * m1) * (c - eps * m2) - e * e, e * eps * (m1 - m2), &mut lo, &mut hi);
    }
    if rho.is_finite() {
        if rho * (m1 + m2) - 2.0 * c <= 0.0 {
            return 0.0;
        }
        restrict((rho * m1 - c) * (rho * m2 - c) - e * e, e * rho * (m1 - m2), &mut lo, &mut hi);
    }
    if hi <= lo {
        return 0.0;
    }
    (lo.clamp(-1.0, 1.0).acos() - hi.clamp(-1.0, 1.0).acos()) / PI
}

fn interval_integral_arc(w: &SpectralWavelet, mu: &[f64], eps: f64, rho: f64, beta: Complex64, resolution: usize) -> Complex64 {
    let Some((blo, bhi)) = w.support() else {
        return Complex64::new(0.0, 0.0);
    };
    let (mmin, mmax) = (mu[0].min(mu[1]), mu[0].max(mu[1]));
    // eigenvalues of s in (εr, ρr) lie in (ε μ_min, ρ μ_max)
    let (a, b) = ((eps * mmin).max(blo), (rho * mmax).min(bhi));
    if !(b > a) {
        return Complex64::new(0.0, 0.0);
    }
    let mut breaks = w.breakpoints();
    breaks.extend([eps * mu[0], eps * mu[1], rho * mu[0], rho * mu[1]].iter().filter(|v| v.is_finite() && **v > 0.0));
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_spectral_node(2, a, b, &breaks, resolution, |l, wt| {
        let u = w.profile_eigs(l);
        if u == 0.0 {
            return;
        }
        let frac = arc_fraction((l[0], l[1]), (mu[0], mu[1]), eps, rho);
        if frac > 0.0 {
            acc += (beta * (l[0] * l[1]).ln()).exp() * (wt * u * frac);
        }
    });
    acc
}

/// Independent route: spectral nodes × an SO(m) rule with a membership test.
pub fn interval_integral_rotations(w: &SpectralWavelet, mu: &[f64], eps: f64, rho: f64, beta: Complex64, resolution: usize, angles: usize) -> Complex64 {
    let Some((blo, bhi)) = w.support() else {
        return Complex64::new(0.0, 0.0);
    };
    let m = w.m;
    let mmin = mu.iter().copied().fold(f64::INFINITY, f64::min);
    let mmax = mu.iter().copied().fold(0.0, f64::max);
    let (a, b) = ((eps * mmin).max(blo), (rho * mmax).min(bhi));
    if !(b > a) {
        return Complex64::new(0.0, 0.0);
    }
    let rots = rotation_rule(m, angles).expect("m <= 3");
    let r = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(mu));
    let lo = &r * eps;
    let hi = if rho.is_finite() { &r * rho } else { DMatrix::identity(m, m) * f64::MAX.sqrt() };
    let mut breaks = w.breakpoints();
    breaks.extend(mu.iter().flat_map(|&x| [eps * x, rho * x]).filter(|v| v.is_finite() && *v > 0.0));
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_spectral_node(m, a, b, &breaks, resolution, |l, wt| {
        let u = w.profile_eigs(l);
        if u == 0.0 {
            return;
        }
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(l));
        let frac: f64 = rots.iter().filter(|(q, _)| cone_interval_contains(&(q * &d * q.transpose()), &lo, &hi)).map(|(_, wq)| wq).sum();
        if frac > 0.0 {
            let ln_det: f64 = l.iter().map(|x| x.ln()).sum();
            acc += (beta * ln_det).exp() * (wt * u * frac);
        }
    });
    acc
}

/// Spatial wavelet w = F⁻¹[u_0(y'y)] on a lattice whose dual resolves the band.
pub fn spatial_wavelet(w: &SpectralWavelet, spec: GridSpec) -> Result<GridField> {
    if (spec.n, spec.m) != (w.rows, w.m) {
        return Err(Error::IncompatibleParams("grid shape differs from the wavelet space".into()));
    }
    let dual = spec.dual();
    if let Some((lo, hi)) = w.support() {
        let reach = dual.extent - dual.spacing();
        if reach < hi.sqrt() {
            return Err(Error::Resolution(format!("frequency extent {reach:.4} below sqrt(Λ) = {:.4}", hi.sqrt())));
        }
        if dual.spacing() > 0.5 * lo.sqrt() {
            return Err(Error::Resolution(format!("frequency spacing {:.4} too coarse for sqrt(δ) = {:.4}", dual.spacing(), lo.sqrt())));
        }
    }
    let spectrum = GridField::sample(dual, |y| Complex64::new(w.fourier(y), 0.0));
    Ok(crate::field::fft_continuous(&spectrum, true))
}

/// Lattice radiality check: max |w(γx) - w(x)| over row permutations and row sign
/// flips γ, which map the lattice to itself. Relative to max |w|.
pub fn lattice_radial_deviation(g: &GridField) -> f64 {
    let spec = g.spec;
    let (n, m, np) = (spec.n, spec.m, spec.points);
    let peak = g.max_abs().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for flat in 0..spec.len() {
        let idx = spec.multi_index(flat);
        let row = |i: usize, j: usize| idx[i * m + j];
        // row swap 0 <-> n-1 and sign flip of row 0 (index j -> N - j, skipping j = 0)
        let mut targets = Vec::with_capacity(2);
        if n > 1 {
            let mut t = idx.clone();
            for j in 0..m {
                t[j] = row(n - 1, j);
                t[(n - 1) * m + j] = row(0, j);
            }
            targets.push(t);
        }
        if (0..m).all(|j| row(0, j) != 0) {
            let mut t = idx.clone();
            for j in 0..m {
                t[j] = np - row(0, j);
            }
            targets.push(t);
        }
        for t in targets {
            let f2 = t.iter().fold(0, |acc, &j| acc * np + j);
            worst = worst.max((g.values[flat] - g.values[f2]).norm());
        }
    }
    worst / peak
}

/// Text spec of a band wavelet: `key = value` lines; the `[constants]` block is
/// rewritten by the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec {
    pub m: usize,
    pub rows: Option<usize>,
    pub delta: f64,
    pub lambda: f64,
    pub bump_degree: u8,
    pub constants: Vec<(String, f64)>,
}

impl WaveletSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = None;
        let mut rows = None;
        let mut delta = 0.25;
        let mut lambda = 4.0;
        let mut bump_degree = 5u8;
        let mut constants = Vec::new();
        let mut in_constants = false;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line == "[constants]" {
                in_constants = true;
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config { line: ln + 1, key: line.into(), message: "expected key = value".into() })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |msg: &str| Error::Config { line: ln + 1, key: key.into(), message: msg.into() };
            if in_constants {
                constants.push((key.to_string(), value.parse().map_err(|_| bad("not a number"))?));
                continue;
            }
            match key {
                "m" => m = Some(value.parse().map_err(|_| bad("expected a positive integer"))?),
                "rows" => rows = Some(value.parse().map_err(|_| bad("expected a positive integer"))?),
                "delta" => delta = value.parse().map_err(|_| bad("expected a number"))?,
                "lambda" => lambda = value.parse().map_err(|_| bad("expected a number"))?,
                "bump_degree" => bump_degree = value.parse().map_err(|_| bad("expected 3 or 5"))?,
                _ => return Err(bad("unknown key")),
            }
        }
        let m = m.ok_or(Error::Config { line: 0, key: "m".into(), message: "missing".into() })?;
        Band::new(delta, lambda, bump_degree)?;
        Ok(WaveletSpec { m, rows, delta, lambda, bump_degree, constants })
    }

    pub fn load(path: &Path) -> Result<Self> {
        WaveletSpec::parse(&std::fs::read_to_string(path)?)
    }

    pub fn wavelet(&self, rows: usize) -> Result<SpectralWavelet> {
        SpectralWavelet::new(self.rows.unwrap_or(rows), self.m, vec![Band::new(self.delta, self.lambda, self.bump_degree)?], 1.0)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "m = {}", self.m);
        if let Some(r) = self.rows {
            let _ = writeln!(s, "rows = {r}");
        }
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "lambda = {}", self.lambda);
        let _ = writeln!(s, "bump_degree = {}", self.bump_degree);
        if !self.constants.is_empty() {
            let _ = writeln!(s, "\n[constants]");
            for (k, v) in &self.constants {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }

    /// Replace the constants block and write the file back.
    pub fn store_constants(&mut self, path: &Path, constants: Vec<(String, f64)>) -> Result<()> {
        self.constants = constants;
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngStream;
    use crate::special::fuglede_constant;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn band_shape() {
        let b = Band::new(0.25, 4.0, 5).unwrap();
        assert_eq!(b.value(0.125), 0.0);
        assert_eq!(b.value(1.0), 1.0);
        assert_eq!(b.value(4.0), 0.0);
        assert!(b.value(0.3) > 0.0 && b.value(0.3) < 1.0);
        assert!(Band::new(1.0, 0.5, 5).is_err());
        let w = make_band_wavelet(2, 2, 0.25, 4.0).unwrap();
        assert_eq!(w.profile(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.125, 1.0]))), 0.0);
    }

    #[test]
    fn profile_is_symmetric() {
        let mut rng = RngStream::new(1, 0).rng();
        for m in 1..=3 {
            let w = make_band_wavelet(m + 1, m, 0.25, 4.0).unwrap();
            assert!(w.symmetry_deviation(100, &mut rng) < 1e-10);
        }
    }

    #[test]
    fn scalar_constants_match_log_integral() {
        // m = 1: c_ν = ∫ b(λ) dλ/λ = log(Λ/δ)·(1/3 + 2·∫_0^{1/3} s(3t)dt) = log(16)·(2/3)
        let w = make_band_wavelet(2, 1, 0.25, 4.0).unwrap();
        assert_relative_eq!(calderon_constant_full(&w), 16f64.ln() * 2.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn d_w_at_zero_is_calderon() {
        for m in 1..=2 {
            let w = make_band_wavelet(m + 2, m, 0.25, 4.0).unwrap();
            let d = riesz_inversion_constant(&w, m + 2, m, c(0.0)).unwrap();
            assert_relative_eq!(d.re, calderon_constant_full(&w), max_relative = 1e-8);
        }
    }

    #[test]
    fn band_shift_homogeneity() {
        let w = make_band_wavelet(4, 2, 0.25, 4.0).unwrap();
        let w2 = w.dilated(2.0).unwrap();
        let alpha = 1.3;
        let a = riesz_inversion_constant(&w, 4, 2, c(alpha)).unwrap().re;
        let b = riesz_inversion_constant(&w2, 4, 2, c(alpha)).unwrap().re;
        assert_relative_eq!(b, a * 2f64.powf(-(2.0 * alpha) / 2.0), max_relative = 1e-9);
    }

    #[test]
    fn ridgelet_prefactor_is_fuglede() {
        for (n, m, k) in [(3, 1, 1), (4, 2, 1), (4, 2, 2), (6, 3, 2)] {
            assert_relative_eq!(ridgelet_prefactor(n, m, k).unwrap(), fuglede_constant(n, k, m).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn pair_constants() {
        let u = make_band_wavelet(2, 1, 0.25, 4.0).unwrap();
        let v = make_band_wavelet(2, 1, 8.0, 64.0).unwrap();
        assert_eq!(pair_constant(&u, &v, 3, 1, 1).unwrap(), 0.0);
        let uu = pair_constant(&u, &u, 3, 1, 1).unwrap();
        let sq = ridgelet_constant(&u.product(&u).unwrap(), 3, 1, 1).unwrap();
        assert_eq!(uu, sq);
        let v2 = make_band_wavelet(2, 1, 0.5, 6.0).unwrap();
        assert_relative_eq!(pair_constant(&u, &v2, 3, 1, 1).unwrap(), pair_constant(&v2, &u, 3, 1, 1).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn calderon_schedule_stabilizes() {
        let w = make_band_wavelet(4, 2, 0.25, 4.0).unwrap();
        let sched: Vec<(f64, f64)> = (1..=4).map(|j| (10f64.powi(-j), 10f64.powi(j))).collect();
        let rep = calderon_constant(&w, 4, 2, &sched).unwrap();
        assert_relative_eq!(rep.value, calderon_constant_full(&w), max_relative = 1e-6);
        assert!(rep.steps.windows(2).all(|s| s[1].value >= s[0].value - 1e-12));
        assert!(calderon_constant(&w, 4, 2, &[(0.5, 1.0), (0.45, 1.1)]).is_err());
    }

    #[test]
    fn arc_route_matches_rotation_route() {
        let w = make_band_wavelet(4, 2, 0.25, 4.0).unwrap();
        for (mu, eps, rho) in [([1.0, 0.3], 0.5, 3.0), ([2.0, 1.9], 0.2, 1.5), ([0.7, 0.1], 0.05, 20.0)] {
            let a = interval_integral(&w, &mu, eps, rho, c(-0.5), 128);
            let b = interval_integral_rotations(&w, &mu, eps, rho, c(-0.5), 64, 512);
            assert!((a - b).norm() < 2e-4 * a.norm().max(1e-3), "{mu:?}: {a} vs {b}");
        }
        // full capture gives the whole moment
        let full = interval_integral(&w, &[1.0, 1.0], 1e-3, 1e3, c(0.0), 128);
        assert_relative_eq!(full.re, calderon_constant_full(&w), max_relative = 1e-8);
    }

    #[test]
    fn spatial_wavelet_round_trip_and_radiality() {
        let w = make_band_wavelet(2, 1, 0.25, 4.0).unwrap();
        let spec = GridSpec::new(2, 1, 64, 16.0).unwrap();
        let g = spatial_wavelet(&w, spec).unwrap();
        let back = crate::field::fft_continuous(&g, false);
        let err = back.values.iter().enumerate().map(|(i, v)| (v.re - w.fourier(&back.spec.point(i))).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6);
        assert!(lattice_radial_deviation(&g) < 1e-8);
        assert!(g.integral().norm() < 1e-10);
        assert!(matches!(spatial_wavelet(&w, GridSpec::new(2, 1, 8, 16.0).unwrap()), Err(Error::Resolution(_))));
    }

    #[test]
    fn spec_file_round_trip() {
        let text = "m = 2\ndelta = 0.25\nlambda = 4\nbump_degree = 5\n";
        let mut s = WaveletSpec::parse(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.spec");
        s.store_constants(&p, vec![("c_nu".into(), 1.5)]).unwrap();
        s.store_constants(&p, vec![("c_nu".into(), 2.5)]).unwrap();
        let back = WaveletSpec::load(&p).unwrap();
        assert_eq!(back.constants, vec![("c_nu".to_string(), 2.5)]);
        assert!(WaveletSpec::parse("m = 2\nfoo = 1\n").is_err());
    }
}
