//! Functions on M_{n,m}: sampled uniform grids and analytic Gaussian mixtures.
//!
//! Fourier convention: (Ff)(y) = ∫ exp(i tr(y'x)) f(x) dx, so Parseval reads
//! (Ff, Fg) = (2π)^{nm} (f, g) and F⁻¹g(x) = (2π)^{-nm} (Fg)(-x).

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::{complete_frame, trace_inner};

/// Largest lattice the grid path accepts.
pub const MAX_GRID_VALUES: usize = 1 << 26;
/// Relative L² mass allowed on the boundary faces before a transform.
pub const TAIL_TOLERANCE: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Uniform lattice x_j = (j - N/2)·h, h = 2L/N, on each of the nm axes.
/// Axis `i·m + j` carries entry x_{i,j}; the last axis varies fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub m: usize,
    pub points: usize,
    pub extent: f64,
}

impl GridSpec {
    pub fn new(n: usize, m: usize, points: usize, extent: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Dimension("grid needs n, m >= 1".into()));
        }
        if points < 2 || points % 2 != 0 {
            return Err(Error::Dimension(format!("grid points per axis must be even, got {points}")));
        }
        if !(extent > 0.0) {
            return Err(Error::Dimension(format!("grid extent must be positive, got {extent}")));
        }
        let total = (points as f64).powi((n * m) as i32);
        if total > MAX_GRID_VALUES as f64 {
            return Err(Error::Dimension(format!("{points}^{} lattice exceeds 2^26 values", n * m)));
        }
        Ok(GridSpec { n, m, points, extent })
    }

    /// Default resolution: N = 32 for nm ≤ 4, N = 16 for nm ≤ 6, L = 8 widths.
    pub fn default_for(n: usize, m: usize, widest: f64) -> Result<Self> {
        let points = if n * m <= 4 { 32 } else { 16 };
        GridSpec::new(n, m, points, 8.0 * widest)
    }

    pub fn dims(&self) -> usize {
        self.n * self.m
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dims() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    pub fn coord(&self, j: usize) -> f64 {
        (j as f64 - (self.points / 2) as f64) * self.spacing()
    }

    /// Lattice of the discrete Fourier transform: spacing π/L.
    pub fn dual(&self) -> GridSpec {
        GridSpec { extent: self.points as f64 * PI / (2.0 * self.extent), ..*self }
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dims() as i32)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let d = self.dims();
        let mut idx = vec![0; d];
        for a in (0..d).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn point(&self, flat: usize) -> DMatrix<f64> {
        let idx = self.multi_index(flat);
        DMatrix::from_fn(self.n, self.m, |i, j| self.coord(idx[i * self.m + j]))
    }

    fn compatible(&self, other: &GridSpec) -> bool {
        self.n == other.n && self.m == other.m && self.points == other.points && (self.extent - other.extent).abs() <= 1e-12 * self.extent
    }
}

/// Sampled field on a [`GridSpec`] lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub spec: GridSpec,
    pub values: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(spec: GridSpec) -> Self {
        GridField { spec, values: vec![ZERO; spec.len()] }
    }

    pub fn from_values(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Dimension(format!("expected {} values, got {}", spec.len(), values.len())));
        }
        Ok(GridField { spec, values })
    }

    pub fn sample<F: Fn(&DMatrix<f64>) -> Complex64 + Sync>(spec: GridSpec, f: F) -> Self {
        let values = (0..spec.len()).into_par_iter().map(|i| f(&spec.point(i))).collect();
        GridField { spec, values }
    }

    pub fn map<F: Fn(Complex64) -> Complex64 + Sync>(&self, f: F) -> Self {
        GridField { spec: self.spec, values: self.values.par_iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &GridField) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridField) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip<F: Fn(Complex64, Complex64) -> Complex64 + Sync>(&self, other: &GridField, f: F) -> Result<Self> {
        if !self.spec.compatible(&other.spec) {
            return Err(Error::IncompatibleParams(format!("{:?} vs {:?}", self.spec, other.spec)));
        }
        Ok(GridField { spec: self.spec, values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect() })
    }

    /// ∫ f ḡ dx by lattice summation.
    pub fn inner(&self, other: &GridField) -> Result<Complex64> {
        if !self.spec.compatible(&other.spec) {
            return Err(Error::IncompatibleParams(format!("{:?} vs {:?}", self.spec, other.spec)));
        }
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.spec.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.spec.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// ∫ f dx by lattice summation.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.spec.cell_volume()
    }

    /// Fraction of the L² mass sitting on the boundary faces of the lattice.
    pub fn tail_mass(&self) -> f64 {
        let n = self.spec.points;
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let edge: f64 = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.spec.multi_index(*i).iter().any(|&j| j == 0 || j == n - 1))
            .map(|(_, v)| v.norm_sqr())
            .sum();
        edge / total
    }

    /// Multilinear interpolation inside [-L, L - h] on every axis.
    pub fn evaluate(&self, x: &DMatrix<f64>) -> Result<Complex64> {
        let spec = &self.spec;
        if x.shape() != (spec.n, spec.m) {
            return Err(Error::Dimension(format!("point must be {}×{}", spec.n, spec.m)));
        }
        let d = spec.dims();
        let h = spec.spacing();
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for i in 0..spec.n {
            for j in 0..spec.m {
                let a = i * spec.m + j;
                let u = x[(i, j)] / h + (spec.points / 2) as f64;
                if !(u >= 0.0 && u <= (spec.points - 1) as f64) {
                    return Err(Error::OutOfExtent);
                }
                let b = (u.floor() as usize).min(spec.points - 2);
                base[a] = b;
                frac[a] = u - b as f64;
            }
        }
        let mut acc = ZERO;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0;
            for a in 0..d {
                let bit = (corner >> (d - 1 - a)) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                flat = flat * spec.points + base[a] + bit;
            }
            if w != 0.0 {
                acc += self.values[flat] * w;
            }
        }
        Ok(acc)
    }

    /// Band-limited (trigonometric) interpolant at an arbitrary point, by direct
    /// summation of the discrete spectrum.
    pub fn evaluate_spectral(&self, x: &DMatrix<f64>) -> Result<Complex64> {
        SpectralInterpolant::new(self).evaluate(x)
    }

    /// (Ff)(y) at an arbitrary frequency by direct Riemann summation.
    pub fn fourier_at(&self, y: &DMatrix<f64>) -> Complex64 {
        let s: Complex64 = (0..self.spec.len())
            .into_par_iter()
            .map(|i| self.values[i] * Complex64::from_polar(1.0, trace_inner(y, &self.spec.point(i))))
            .sum();
        s * self.spec.cell_volume()
    }

    /// F⁻¹[μ · Ff] with μ evaluated on the frequency lattice. No tail check.
    pub fn apply_multiplier<M: Fn(&DMatrix<f64>) -> Complex64 + Sync>(&self, mult: M) -> GridField {
        let mut ft = fft_continuous(self, false);
        let dual = ft.spec;
        ft.values.par_iter_mut().enumerate().for_each(|(i, v)| *v *= mult(&dual.point(i)));
        fft_continuous(&ft, true)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + 16 * self.values.len());
        for v in [self.spec.n as u64, self.spec.m as u64, self.spec.points as u64] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.spec.extent.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let word = |i: usize| -> Result<[u8; 8]> {
            bytes.get(8 * i..8 * i + 8).and_then(|s| s.try_into().ok()).ok_or_else(|| Error::Io("truncated grid file".into()))
        };
        let n = u64::from_le_bytes(word(0)?) as usize;
        let m = u64::from_le_bytes(word(1)?) as usize;
        let points = u64::from_le_bytes(word(2)?) as usize;
        let extent = f64::from_le_bytes(word(3)?);
        let spec = GridSpec::new(n, m, points, extent)?;
        if bytes.len() != 32 + 16 * spec.len() {
            return Err(Error::Io(format!("grid file has {} bytes, expected {}", bytes.len(), 32 + 16 * spec.len())));
        }
        let values = (0..spec.len())
            .map(|i| Ok(Complex64::new(f64::from_le_bytes(word(4 + 2 * i)?), f64::from_le_bytes(word(5 + 2 * i)?))))
            .collect::<Result<Vec<_>>>()?;
        Ok(GridField { spec, values })
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        std::fs::File::create(path)?.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        GridField::from_bytes(&buf)
    }

    /// One row per lattice point: x_1_1 … x_n_m, re, im.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let spec = &self.spec;
        let header: Vec<String> = (1..=spec.n).flat_map(|i| (1..=spec.m).map(move |j| format!("x_{i}_{j}"))).collect();
        writeln!(out, "{},re,im", header.join(","))?;
        for (flat, v) in self.values.iter().enumerate() {
            let coords: Vec<String> = spec.multi_index(flat).iter().map(|&j| spec.coord(j).to_string()).collect();
            writeln!(out, "{},{},{}", coords.join(","), v.re, v.im)?;
        }
        Ok(())
    }
}

/// N-dimensional FFT in place, axes of length `points`, last axis contiguous.
pub fn fft_nd(values: &mut [Complex64], points: usize, dims: usize, direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft(points, direction);
    for a in 0..dims {
        let stride = points.pow((dims - 1 - a) as u32);
        let block = points * stride;
        if stride == 1 {
            values.par_chunks_mut(points).for_each(|line| fft.process(line));
            continue;
        }
        values.par_chunks_mut(block).for_each(|chunk| {
            let mut line = vec![ZERO; points];
            let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
            for inner in 0..stride {
                for j in 0..points {
                    line[j] = chunk[inner + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for j in 0..points {
                    chunk[inner + j * stride] = line[j];
                }
            }
        });
    }
}

fn parity_flip(values: &mut [Complex64], spec: &GridSpec) {
    let np = spec.points;
    let d = spec.dims();
    values.par_iter_mut().enumerate().for_each(|(mut flat, v)| {
        let mut s = 0;
        for _ in 0..d {
            s += flat % np;
            flat /= np;
        }
        if s % 2 == 1 {
            *v = -*v;
        }
    });
}

/// Continuous transform on the lattice: forward maps GridSpec(N, L) to its dual,
/// inverse maps the dual back. Both are exact for lattice-periodic data.
pub fn fft_continuous(f: &GridField, inverse: bool) -> GridField {
    let spec = f.spec;
    let d = spec.dims() as i32;
    let mut values = f.values.clone();
    parity_flip(&mut values, &spec);
    // continuous forward uses exp(+i y x): the unnormalized inverse DFT
    let dir = if inverse { FftDirection::Forward } else { FftDirection::Inverse };
    fft_nd(&mut values, spec.points, spec.dims(), dir);
    parity_flip(&mut values, &spec);
    let half_sign = if (spec.points / 2) % 2 == 1 && d % 2 == 1 { -1.0 } else { 1.0 };
    let out_spec = spec.dual();
    let scale = if inverse { (spec.spacing() / (2.0 * PI)).powi(d) } else { spec.spacing().powi(d) };
    let c = half_sign * scale;
    values.par_iter_mut().for_each(|v| *v *= c);
    GridField { spec: out_spec, values }
}

/// Trigonometric interpolant of a grid field with its spectrum computed once.
#[derive(Debug, Clone)]
pub struct SpectralInterpolant {
    spec: GridSpec,
    spectrum: GridField,
}

impl SpectralInterpolant {
    pub fn new(f: &GridField) -> Self {
        SpectralInterpolant { spec: f.spec, spectrum: fft_continuous(f, false) }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn evaluate(&self, x: &DMatrix<f64>) -> Result<Complex64> {
        let spec = &self.spec;
        if x.shape() != (spec.n, spec.m) {
            return Err(Error::Dimension(format!("point must be {}×{}", spec.n, spec.m)));
        }
        let dual = self.spectrum.spec;
        let np = spec.points;
        let d = spec.dims();
        // per-axis phase tables exp(-i y_k x_a); the Nyquist column is symmetrized
        let tables: Vec<Vec<Complex64>> = (0..d)
            .map(|a| {
                let xa = x[(a / spec.m, a % spec.m)];
                (0..np)
                    .map(|k| {
                        let y = dual.coord(k);
                        if k == 0 {
                            Complex64::new((y * xa).cos(), 0.0)
                        } else {
                            Complex64::from_polar(1.0, -y * xa)
                        }
                    })
                    .collect()
            })
            .collect();
        // contract the last axis first, then fold the remaining axes
        let mut acc: Vec<Complex64> = self
            .spectrum
            .values
            .chunks(np)
            .map(|row| row.iter().zip(&tables[d - 1]).map(|(v, p)| v * p).sum())
            .collect();
        for a in (0..d - 1).rev() {
            acc = acc.chunks(np).map(|row| row.iter().zip(&tables[a]).map(|(v, p)| v * p).sum()).collect();
        }
        Ok(acc[0] * (dual.spacing() / (2.0 * PI)).powi(d as i32))
    }
}

/// One analytic term A·exp(i tr(x'p))·exp(-|x - c|²/(2σ²)).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTerm {
    pub amplitude: Complex64,
    pub center: DMatrix<f64>,
    pub width: f64,
    pub modulation: DMatrix<f64>,
}

impl GaussianTerm {
    pub fn new(amplitude: Complex64, center: DMatrix<f64>, width: f64) -> Self {
        let modulation = DMatrix::zeros(center.nrows(), center.ncols());
        GaussianTerm { amplitude, center, width, modulation }
    }

    pub fn modulated(amplitude: Complex64, center: DMatrix<f64>, width: f64, modulation: DMatrix<f64>) -> Self {
        GaussianTerm { amplitude, center, width, modulation }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.center.shape()
    }

    pub fn evaluate(&self, x: &DMatrix<f64>) -> Complex64 {
        let d2 = (x - &self.center).norm_squared();
        self.amplitude * Complex64::from_polar((-d2 / (2.0 * self.width * self.width)).exp(), trace_inner(x, &self.modulation))
    }

    pub fn integral(&self) -> Complex64 {
        let dim = self.center.len() as f64;
        let s2 = self.width * self.width;
        self.amplitude
            * (2.0 * PI * s2).powf(dim / 2.0)
            * Complex64::from_polar((-s2 * self.modulation.norm_squared() / 2.0).exp(), trace_inner(&self.modulation, &self.center))
    }

    pub fn fourier(&self) -> GaussianTerm {
        let dim = self.center.len() as f64;
        let s2 = self.width * self.width;
        GaussianTerm {
            amplitude: self.amplitude * (2.0 * PI * s2).powf(dim / 2.0) * Complex64::from_polar(1.0, trace_inner(&self.modulation, &self.center)),
            center: -&self.modulation,
            width: 1.0 / self.width,
            modulation: self.center.clone(),
        }
    }

    pub fn reflect(&self) -> GaussianTerm {
        GaussianTerm { amplitude: self.amplitude, center: -&self.center, width: self.width, modulation: -&self.modulation }
    }

    pub fn conj(&self) -> GaussianTerm {
        GaussianTerm { amplitude: self.amplitude.conj(), center: self.center.clone(), width: self.width, modulation: -&self.modulation }
    }

    /// Pointwise product, again a single term.
    pub fn product(&self, other: &GaussianTerm) -> GaussianTerm {
        let (s1, s2) = (self.width * self.width, other.width * other.width);
        let sum = s1 + s2;
        let center = (&self.center * s2 + &other.center * s1) / sum;
        let gap = (&self.center - &other.center).norm_squared();
        GaussianTerm {
            amplitude: self.amplitude * other.amplitude * (-gap / (2.0 * sum)).exp(),
            center,
            width: (s1 * s2 / sum).sqrt(),
            modulation: &self.modulation + &other.modulation,
        }
    }

    /// Slice t ↦ ∫_{M_{k,m}} term(ξ⊥ω + ξt) dω on M_{n-k,m}.
    pub fn radon_slice(&self, xi: &DMatrix<f64>) -> GaussianTerm {
        let (n, m) = self.shape();
        let k = n - xi.ncols();
        let s2 = self.width * self.width;
        let xc = xi.transpose() * &self.center;
        let xp = xi.transpose() * &self.modulation;
        let perp_c = &self.center - xi * &xc;
        let phase = trace_inner(&self.modulation, &perp_c);
        let decay = -s2 * (self.modulation.norm_squared() - xp.norm_squared()) / 2.0;
        GaussianTerm {
            amplitude: self.amplitude * (2.0 * PI * s2).powf((k * m) as f64 / 2.0) * Complex64::from_polar(decay.exp(), phase),
            center: xc,
            width: self.width,
            modulation: xp,
        }
    }

    /// Per-axis factor vectors on a lattice (the term is separable).
    fn axis_factors(&self, spec: &GridSpec) -> Vec<Vec<Complex64>> {
        let s2 = self.width * self.width;
        (0..spec.n)
            .flat_map(|i| (0..spec.m).map(move |j| (i, j)))
            .map(|(i, j)| {
                let (c, p) = (self.center[(i, j)], self.modulation[(i, j)]);
                (0..spec.points)
                    .map(|t| {
                        let x = spec.coord(t);
                        Complex64::from_polar((-(x - c) * (x - c) / (2.0 * s2)).exp(), p * x)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Finite sum of [`GaussianTerm`]s on M_{n,m}.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureField {
    pub n: usize,
    pub m: usize,
    pub terms: Vec<GaussianTerm>,
}

impl GaussianMixtureField {
    pub fn new(n: usize, m: usize, terms: Vec<GaussianTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::IncompatibleParams("a mixture needs at least one term".into()));
        }
        for t in &terms {
            if t.shape() != (n, m) || t.modulation.shape() != (n, m) {
                return Err(Error::Dimension(format!("mixture term is not {n}×{m}")));
            }
            if !(t.width > 0.0) {
                return Err(Error::IncompatibleParams(format!("width must be positive, got {}", t.width)));
            }
        }
        Ok(GaussianMixtureField { n, m, terms })
    }

    /// Unit centered Gaussian exp(-|x|²/(2σ²)).
    pub fn gaussian(n: usize, m: usize, width: f64) -> Self {
        GaussianMixtureField { n, m, terms: vec![GaussianTerm::new(Complex64::new(1.0, 0.0), DMatrix::zeros(n, m), width)] }
    }

    pub fn shifted_gaussian(center: DMatrix<f64>, width: f64) -> Self {
        let (n, m) = center.shape();
        GaussianMixtureField { n, m, terms: vec![GaussianTerm::new(Complex64::new(1.0, 0.0), center, width)] }
    }

    pub fn zero(n: usize, m: usize) -> Self {
        GaussianMixtureField { n, m, terms: vec![GaussianTerm::new(ZERO, DMatrix::zeros(n, m), 1.0)] }
    }

    /// Zero-mean difference of Gaussians: widths σ and σ√2 with equal integrals.
    pub fn dog(n: usize, m: usize, width: f64) -> Self {
        let w2 = width * 2f64.sqrt();
        let a2 = -(width / w2).powi((n * m) as i32);
        GaussianMixtureField {
            n,
            m,
            terms: vec![
                GaussianTerm::new(Complex64::new(1.0, 0.0), DMatrix::zeros(n, m), width),
                GaussianTerm::new(Complex64::new(a2, 0.0), DMatrix::zeros(n, m), w2),
            ],
        }
    }

    pub fn widest(&self) -> f64 {
        self.terms.iter().map(|t| t.width).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == ZERO)
    }

    pub fn evaluate(&self, x: &DMatrix<f64>) -> Complex64 {
        self.terms.iter().map(|t| t.evaluate(x)).sum()
    }

    pub fn integral(&self) -> Complex64 {
        self.terms.iter().map(GaussianTerm::integral).sum()
    }

    fn with_terms(&self, terms: Vec<GaussianTerm>) -> Self {
        GaussianMixtureField { n: self.n, m: self.m, terms }
    }

    /// Merge terms with identical parameters and drop zero amplitudes.
    pub fn simplified(&self) -> Self {
        let mut out: Vec<GaussianTerm> = Vec::new();
        for t in &self.terms {
            match out.iter_mut().find(|o| o.width == t.width && o.center == t.center && o.modulation == t.modulation) {
                Some(o) => o.amplitude += t.amplitude,
                None => out.push(t.clone()),
            }
        }
        out.retain(|t| t.amplitude != ZERO);
        if out.is_empty() {
            return GaussianMixtureField::zero(self.n, self.m);
        }
        self.with_terms(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.with_terms(self.terms.iter().map(|t| GaussianTerm { amplitude: t.amplitude * c, ..t.clone() }).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(self.with_terms(self.terms.iter().chain(&other.terms).cloned().collect()).simplified())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if (self.n, self.m) != (other.n, other.m) {
            return Err(Error::IncompatibleParams(format!("{}×{} vs {}×{}", self.n, self.m, other.n, other.m)));
        }
        Ok(())
    }

    pub fn fourier(&self) -> Self {
        self.with_terms(self.terms.iter().map(GaussianTerm::fourier).collect())
    }

    pub fn inverse_fourier(&self) -> Self {
        let c = (2.0 * PI).powi(-((self.n * self.m) as i32));
        self.with_terms(self.terms.iter().map(|t| t.fourier().reflect()).collect()).scale(Complex64::new(c, 0.0))
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(self.with_terms(self.terms.iter().flat_map(|a| other.terms.iter().map(move |b| a.product(b))).collect()))
    }

    /// f ∗ g, computed as F⁻¹[Ff · Fg].
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        Ok(self.fourier().product(&other.fourier())?.inverse_fourier())
    }

    /// ∫ f ḡ dx in closed form.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_shape(other)?;
        Ok(self.terms.iter().flat_map(|a| other.terms.iter().map(move |b| a.product(&b.conj()).integral())).sum())
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).expect("same shape").re.max(0.0).sqrt()
    }

    /// ∫ f g dx in closed form (no conjugation).
    pub fn bilinear(&self, other: &Self) -> Result<Complex64> {
        self.check_shape(other)?;
        Ok(self.terms.iter().flat_map(|a| other.terms.iter().map(move |b| a.product(b).integral())).sum())
    }

    pub fn conj(&self) -> Self {
        self.with_terms(self.terms.iter().map(GaussianTerm::conj).collect())
    }

    /// True when every term is centered at the origin and unmodulated.
    pub fn is_centered(&self) -> bool {
        self.terms.iter().all(|t| t.center.iter().all(|&c| c == 0.0) && t.modulation.iter().all(|&p| p == 0.0))
    }

    /// Smallest term width.
    pub fn narrowest(&self) -> f64 {
        self.terms.iter().map(|t| t.width).fold(f64::INFINITY, f64::min)
    }

    /// Radon slice over the frame ξ ∈ V_{n,n-k}, a mixture on M_{n-k,m}.
    pub fn radon_slice(&self, xi: &DMatrix<f64>) -> Self {
        GaussianMixtureField { n: xi.ncols(), m: self.m, terms: self.terms.iter().map(|t| t.radon_slice(xi)).collect() }
    }

    /// Samples on a lattice, term by term as tensor products of axis factors.
    pub fn to_grid(&self, spec: GridSpec) -> Result<GridField> {
        if (spec.n, spec.m) != (self.n, self.m) {
            return Err(Error::IncompatibleParams("grid and mixture shapes differ".into()));
        }
        let mut values = vec![ZERO; spec.len()];
        for t in &self.terms {
            let factors = t.axis_factors(&spec);
            let np = spec.points;
            let d = spec.dims();
            values.par_chunks_mut(np).enumerate().for_each(|(row, chunk)| {
                // all axes but the last are fixed within a chunk
                let mut pref = t.amplitude;
                let mut r = row;
                for a in (0..d - 1).rev() {
                    pref *= factors[a][r % np];
                    r /= np;
                }
                for (v, f) in chunk.iter_mut().zip(&factors[d - 1]) {
                    *v += pref * f;
                }
            });
        }
        Ok(GridField { spec, values })
    }
}

/// Either representation behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Grid(GridField),
    Mixture(GaussianMixtureField),
}

impl Field {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Field::Grid(g) => (g.spec.n, g.spec.m),
            Field::Mixture(f) => (f.n, f.m),
        }
    }

    pub fn evaluate(&self, x: &DMatrix<f64>) -> Result<Complex64> {
        match self {
            Field::Grid(g) => g.evaluate(x),
            Field::Mixture(f) => {
                if x.shape() != (f.n, f.m) {
                    return Err(Error::Dimension(format!("point must be {}×{}", f.n, f.m)));
                }
                Ok(f.evaluate(x))
            }
        }
    }

    pub fn l2_norm(&self) -> f64 {
        match self {
            Field::Grid(g) => g.l2_norm(),
            Field::Mixture(f) => f.l2_norm(),
        }
    }
}

/// Continuous Fourier transform; the grid path requires the field to vanish at the
/// lattice boundary.
pub fn fourier_transform(f: &Field) -> Result<Field> {
    match f {
        Field::Grid(g) => {
            let tail = g.tail_mass();
            if tail > TAIL_TOLERANCE {
                return Err(Error::TailMass(tail));
            }
            Ok(Field::Grid(fft_continuous(g, false)))
        }
        Field::Mixture(m) => Ok(Field::Mixture(m.fourier())),
    }
}

/// Inverse of [`fourier_transform`].
pub fn inverse_fourier_transform(f: &Field) -> Result<Field> {
    match f {
        Field::Grid(g) => Ok(Field::Grid(fft_continuous(g, true))),
        Field::Mixture(m) => Ok(Field::Mixture(m.inverse_fourier())),
    }
}

/// ‖f - g‖₂. A mixture compared with a grid is sampled on that grid first.
pub fn l2_distance(f: &Field, g: &Field) -> Result<f64> {
    if f.shape() != g.shape() {
        return Err(Error::IncompatibleParams(format!("{:?} vs {:?}", f.shape(), g.shape())));
    }
    match (f, g) {
        (Field::Grid(a), Field::Grid(b)) => Ok(a.sub(b)?.l2_norm()),
        (Field::Mixture(a), Field::Mixture(b)) => Ok(a.sub(b)?.l2_norm()),
        (Field::Grid(a), Field::Mixture(b)) | (Field::Mixture(b), Field::Grid(a)) => Ok(a.sub(&b.to_grid(a.spec)?)?.l2_norm()),
    }
}

/// Plane coordinates x = g_ξ [ω; t] = ξ⊥ω + ξt.
pub fn plane_point(xi: &DMatrix<f64>, omega: &DMatrix<f64>, t: &DMatrix<f64>) -> DMatrix<f64> {
    let g = complete_frame(xi);
    let k = xi.nrows() - xi.ncols();
    g.columns(0, k) * omega + xi * t
}
