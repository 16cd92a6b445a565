//! Matrix k-plane Radon transform f̂(ξ, t) = ∫_{ξ'x = t} f, its dual, and the
//! projection-slice, duality and Fuglede identities.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Field, GaussianMixtureField, GridField, GridSpec, SpectralInterpolant};
use crate::linalg::{complete_frame, OrderParams, StiefelFrame};
use crate::quadrature::gauss_legendre;
use crate::sampling::{gaussian_ln_density, gaussian_matrix, mc_estimate, sample_frames, sample_stiefel, Estimate, RngStream};
use crate::special::fuglede_constant;
use crate::transforms::riesz::riesz_multiplier_at;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest N^{2nm} for which the grid Radon path uses trigonometric interpolation.
const SPECTRAL_BUDGET: f64 = 3.0e8;

/// Default number of frames for d_*ξ integration.
pub const DEFAULT_FRAMES: usize = 512;

/// Rotation θ ∈ O(q) with ξθ' in canonical form: its top q×q block is lower
/// triangular with a non-negative diagonal. Returns (ξθ', θ).
pub fn canonical_frame(xi: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let q = xi.ncols();
    let top = xi.rows(0, q).transpose();
    let qr = top.qr();
    let mut qm = qr.q();
    let r = qr.r();
    for j in 0..q {
        if r[(j, j)] < 0.0 {
            let col = -qm.column(j).into_owned();
            qm.set_column(j, &col);
        }
    }
    // top' = Q R, so ξ Q has top block R' (lower triangular, diagonal >= 0)
    (xi * &qm, qm.transpose())
}

/// The plane τ(ξ, t) = {x : ξ'x = t}, ξ ∈ V_{n,n-k}, t ∈ M_{n-k,m}.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPlane {
    pub frame: StiefelFrame,
    pub offset: DMatrix<f64>,
}

impl MatrixPlane {
    pub fn new(frame: StiefelFrame, offset: DMatrix<f64>) -> Result<Self> {
        if offset.nrows() != frame.size() {
            return Err(Error::Dimension(format!("offset has {} rows, frame has {} columns", offset.nrows(), frame.size())));
        }
        Ok(MatrixPlane { frame, offset })
    }

    /// Representative with the canonical frame; (ξθ', θt) describes the same plane.
    pub fn canonical(&self) -> MatrixPlane {
        let (c, theta) = canonical_frame(self.frame.matrix());
        MatrixPlane { frame: StiefelFrame::from_trusted(c), offset: theta * &self.offset }
    }

    pub fn contains(&self, x: &DMatrix<f64>, tol: f64) -> bool {
        (self.frame.matrix().transpose() * x - &self.offset).amax() <= tol
    }

    /// Point g_ξ [ω; t] of the plane.
    pub fn point(&self, omega: &DMatrix<f64>) -> DMatrix<f64> {
        crate::field::plane_point(self.frame.matrix(), omega, &self.offset)
    }
}

/// Frames ξ_i ∈ V_{n,q} with weights for the normalized measure d_*ξ.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    pub frames: Vec<StiefelFrame>,
    pub weights: Vec<f64>,
    /// Equal-weight random frames, so a standard error is meaningful.
    pub random: bool,
}

impl FrameSet {
    pub fn monte_carlo(n: usize, q: usize, count: usize, stream: &RngStream) -> Self {
        let frames = sample_frames(n, q, count, stream);
        FrameSet { weights: vec![1.0 / count as f64; count], frames, random: true }
    }

    /// Product rule for hyperplane-complement frames (k = 1, n ∈ {2, 3}). A slice
    /// depends on ξ ∈ V_{n,n-1} only through the unit normal u of ξ's span, so
    /// d_*ξ reduces to the uniform measure on S^{n-1}. For n = 3, `count` is split
    /// into p Gauss–Legendre nodes in cos θ and 2p azimuths.
    pub fn quadrature(n: usize, count: usize) -> Result<Self> {
        let dirs: Vec<(DMatrix<f64>, f64)> = match n {
            2 => (0..count)
                .map(|j| {
                    let t = 2.0 * PI * (j as f64 + 0.5) / count as f64;
                    (DMatrix::from_column_slice(2, 1, &[t.cos(), t.sin()]), 1.0 / count as f64)
                })
                .collect(),
            3 => {
                let p = ((count as f64 / 2.0).sqrt().round() as usize).max(2);
                let (x, w) = gauss_legendre(p);
                let mut out = Vec::with_capacity(2 * p * p);
                for (ci, wi) in x.iter().zip(&w) {
                    let si = (1.0 - ci * ci).sqrt();
                    for j in 0..2 * p {
                        let ph = PI * (j as f64 + 0.5) / p as f64;
                        out.push((DMatrix::from_column_slice(3, 1, &[si * ph.cos(), si * ph.sin(), *ci]), wi / (4.0 * p as f64)));
                    }
                }
                out
            }
            _ => return Err(Error::Unsupported(format!("no frame quadrature for n = {n}"))),
        };
        let frames = dirs
            .into_iter()
            .map(|(u, w)| {
                let g = complete_frame(&u);
                (StiefelFrame::from_trusted(g.columns(0, n - 1).into_owned()), w)
            })
            .collect::<Vec<_>>();
        let (frames, weights) = frames.into_iter().unzip();
        Ok(FrameSet { frames, weights, random: false })
    }

    /// Quadrature when available for (n, k), Monte Carlo otherwise.
    pub fn default_for(n: usize, k: usize, count: usize, stream: &RngStream) -> Self {
        if k == 1 && (n == 2 || n == 3) {
            FrameSet::quadrature(n, count).expect("n is 2 or 3")
        } else {
            FrameSet::monte_carlo(n, n - k, count, stream)
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Σ w_i v_i with a standard error when the frames are random.
    pub fn average(&self, values: &[Complex64]) -> Estimate {
        let mean: Complex64 = values.iter().zip(&self.weights).map(|(v, w)| v * *w).sum();
        if !self.random || values.len() < 2 {
            return Estimate { mean, se: 0.0, samples: values.len() };
        }
        let nf = values.len() as f64;
        let var = values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (nf - 1.0);
        Estimate { mean, se: (var / nf).sqrt(), samples: values.len() }
    }
}

/// One frame's function of t ∈ M_{n-k,m}.
#[derive(Debug, Clone, PartialEq)]
pub enum Slice {
    Mixture(GaussianMixtureField),
    Grid(GridField),
}

impl Slice {
    /// Value at t; grid slices vanish outside their extent.
    pub fn evaluate(&self, t: &DMatrix<f64>) -> Complex64 {
        match self {
            Slice::Mixture(mx) => mx.evaluate(t),
            Slice::Grid(g) => g.evaluate(t).unwrap_or(ZERO),
        }
    }

    pub fn to_grid(&self, spec: GridSpec) -> Result<GridField> {
        match self {
            Slice::Mixture(mx) => mx.to_grid(spec),
            Slice::Grid(g) if g.spec == spec => Ok(g.clone()),
            Slice::Grid(g) => Ok(GridField::sample(spec, |t| g.evaluate(t).unwrap_or(ZERO))),
        }
    }
}

/// Functions on V_{n,n-k} × M_{n-k,m}, one slice per (canonical) frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RadonField {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub frames: FrameSet,
    pub slices: Vec<Slice>,
}

impl RadonField {
    /// φ(ξ_i, t).
    pub fn evaluate(&self, i: usize, t: &DMatrix<f64>) -> Complex64 {
        self.slices[i].evaluate(t)
    }

    pub fn map_slices<F: Fn(&Slice) -> Result<Slice> + Sync + Send>(&self, f: F) -> Result<RadonField> {
        let slices = self.slices.par_iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(RadonField { slices, ..self.clone() })
    }

    /// φ(ξ, t) ≡ c.
    pub fn constant(n: usize, m: usize, k: usize, frames: FrameSet, c: Complex64) -> RadonField {
        // a zero-width-free constant: a Gaussian of infinite width is not
        // representable, so constants are stored as one-point grids
        let spec = GridSpec { n: n - k, m, points: 2, extent: f64::MAX.sqrt() };
        let slice = Slice::Grid(GridField { spec, values: vec![c; spec.len()] });
        RadonField { n, m, k, slices: vec![slice; frames.len()], frames }
    }

    /// CSV with columns frame_index, t_{1,1}.., re, im. Mixture slices are sampled
    /// on `spec`.
    pub fn write_csv<W: Write>(&self, mut out: W, spec: GridSpec) -> Result<()> {
        let q = self.n - self.k;
        let mut header = vec!["frame_index".to_string()];
        for i in 0..q {
            for j in 0..self.m {
                header.push(format!("t_{}_{}", i + 1, j + 1));
            }
        }
        header.extend(["re".into(), "im".into()]);
        writeln!(out, "{}", header.join(","))?;
        for (fi, s) in self.slices.iter().enumerate() {
            let g = s.to_grid(spec)?;
            for (p, v) in g.values.iter().enumerate() {
                let t = spec.point(p);
                let coords: Vec<String> = (0..q).flat_map(|i| (0..self.m).map(move |j| (i, j))).map(|(i, j)| format!("{:.17e}", t[(i, j)])).collect();
                writeln!(out, "{fi},{},{:.17e},{:.17e}", coords.join(","), v.re, v.im)?;
            }
        }
        Ok(())
    }

    /// One row per frame: weight then the n×(n-k) entries in row-major order.
    pub fn write_frames_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let q = self.n - self.k;
        let mut header = vec!["frame_index".to_string(), "weight".to_string()];
        for i in 0..self.n {
            for j in 0..q {
                header.push(format!("xi_{}_{}", i + 1, j + 1));
            }
        }
        writeln!(out, "{}", header.join(","))?;
        for (fi, (f, w)) in self.frames.frames.iter().zip(&self.frames.weights).enumerate() {
            let e: Vec<String> = crate::linalg::row_major(f.matrix()).iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(out, "{fi},{w:.17e},{}", e.join(","))?;
        }
        Ok(())
    }
}

fn check_frames(params: &OrderParams, frames: &FrameSet) -> Result<()> {
    params.check_radon()?;
    let q = params.n - params.k;
    for f in &frames.frames {
        if f.ambient() != params.n || f.size() != q {
            return Err(Error::FrameDimension { n: f.ambient(), q: f.size() });
        }
    }
    if frames.weights.len() != frames.frames.len() {
        return Err(Error::Dimension("one weight per frame".into()));
    }
    Ok(())
}

/// Canonical copy of a frame set (weights unchanged).
pub fn canonical_frames(frames: &FrameSet) -> FrameSet {
    FrameSet { frames: frames.frames.iter().map(|f| StiefelFrame::from_trusted(canonical_frame(f.matrix()).0)).collect(), ..frames.clone() }
}

/// f̂(ξ, t) = ∫_{M_{k,m}} f(g_ξ[ω; t]) dω for every frame. Mixtures map to mixture
/// slices in closed form; grids are integrated along the plane on the lattice
/// spacing, using trigonometric interpolation when affordable and multilinear
/// interpolation otherwise. Grid slices share the input's N and L.
pub fn radon_transform(f: &Field, params: &OrderParams, frames: &FrameSet) -> Result<RadonField> {
    check_frames(params, frames)?;
    if f.shape() != (params.n, params.m) {
        return Err(Error::IncompatibleParams(format!("field on {:?}, params for ({}, {})", f.shape(), params.n, params.m)));
    }
    let frames = canonical_frames(frames);
    let slices = match f {
        Field::Mixture(mx) => frames.frames.par_iter().map(|xi| Slice::Mixture(mx.radon_slice(xi.matrix()))).collect(),
        Field::Grid(g) => grid_radon(g, params.k, &frames)?,
    };
    Ok(RadonField { n: params.n, m: params.m, k: params.k, frames, slices })
}

fn grid_radon(g: &GridField, k: usize, frames: &FrameSet) -> Result<Vec<Slice>> {
    let spec = g.spec;
    let (n, m) = (spec.n, spec.m);
    let slice_spec = GridSpec::new(n - k, m, spec.points, spec.extent)?;
    let omega_spec = GridSpec::new(k, m, spec.points, spec.extent)?;
    let spectral = (spec.points as f64).powi(2 * (n * m) as i32) <= SPECTRAL_BUDGET;
    let interp = spectral.then(|| SpectralInterpolant::new(g));
    let h = spec.spacing();
    let inside = |x: &DMatrix<f64>| x.iter().all(|&v| v >= -spec.extent && v <= spec.extent - h);
    let eval = |x: &DMatrix<f64>| -> Complex64 {
        if !inside(x) {
            return ZERO;
        }
        match &interp {
            Some(s) => s.evaluate(x).unwrap_or(ZERO),
            None => g.evaluate(x).unwrap_or(ZERO),
        }
    };
    let omegas: Vec<DMatrix<f64>> = (0..omega_spec.len()).map(|i| omega_spec.point(i)).collect();
    let dw = omega_spec.cell_volume();
    Ok(frames
        .frames
        .iter()
        .map(|xi| {
            let gx = complete_frame(xi.matrix());
            let perp = gx.columns(0, k).into_owned();
            let values = (0..slice_spec.len())
                .into_par_iter()
                .map(|p| {
                    let base = xi.matrix() * slice_spec.point(p);
                    omegas.iter().map(|w| eval(&(&perp * w + &base))).sum::<Complex64>() * dw
                })
                .collect();
            Slice::Grid(GridField { spec: slice_spec, values })
        })
        .collect())
}

/// φ̌(x) = ∫ φ(ξ, ξ'x) d_*ξ at the given points.
pub fn dual_radon(phi: &RadonField, points: &[DMatrix<f64>]) -> Result<Vec<Estimate>> {
    for x in points {
        if x.shape() != (phi.n, phi.m) {
            return Err(Error::Dimension(format!("point must be {}×{}", phi.n, phi.m)));
        }
    }
    Ok(points
        .par_iter()
        .map(|x| {
            let vals: Vec<Complex64> = phi.frames.frames.iter().zip(&phi.slices).map(|(xi, s)| s.evaluate(&(xi.matrix().transpose() * x))).collect();
            phi.frames.average(&vals)
        })
        .collect())
}

/// φ̌ sampled on a lattice.
pub fn dual_radon_grid(phi: &RadonField, spec: GridSpec) -> Result<GridField> {
    if (spec.n, spec.m) != (phi.n, phi.m) {
        return Err(Error::IncompatibleParams("grid shape differs from the Radon field".into()));
    }
    let values = (0..spec.len())
        .into_par_iter()
        .map(|p| {
            let x = spec.point(p);
            phi.frames.frames.iter().zip(&phi.slices).zip(&phi.frames.weights).map(|((xi, s), w)| s.evaluate(&(xi.matrix().transpose() * &x)) * *w).sum()
        })
        .collect();
    Ok(GridField { spec, values })
}

/// Both sides of (Ff)(ξb) = F̃[f̂(ξ, ·)](b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionSlice {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_err: f64,
}

impl ProjectionSlice {
    fn new(lhs: Complex64, rhs: Complex64) -> Self {
        let scale = lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
        ProjectionSlice { lhs, rhs, rel_err: (lhs - rhs).norm() / scale }
    }
}

fn check_slice_args(n: usize, m: usize, xi: &StiefelFrame, b: &DMatrix<f64>) -> Result<usize> {
    if xi.ambient() != n || xi.size() >= n {
        return Err(Error::FrameDimension { n: xi.ambient(), q: xi.size() });
    }
    let k = n - xi.size();
    crate::linalg::check_plane_codim(n, m, k)?;
    if b.shape() != (n - k, m) {
        return Err(Error::Dimension(format!("b must be {}×{m}", n - k)));
    }
    Ok(k)
}

/// Closed forms on both sides for a mixture.
pub fn projection_slice_check(f: &GaussianMixtureField, xi: &StiefelFrame, b: &DMatrix<f64>) -> Result<ProjectionSlice> {
    check_slice_args(f.n, f.m, xi, b)?;
    let lhs = f.fourier().evaluate(&(xi.matrix() * b));
    let rhs = f.radon_slice(xi.matrix()).fourier().evaluate(b);
    Ok(ProjectionSlice::new(lhs, rhs))
}

/// Grid path: Riemann sums for both Fourier transforms, the slice from
/// [`radon_transform`] on the lattice.
pub fn projection_slice_check_grid(f: &GridField, xi: &StiefelFrame, b: &DMatrix<f64>) -> Result<ProjectionSlice> {
    let k = check_slice_args(f.spec.n, f.spec.m, xi, b)?;
    let lhs = f.fourier_at(&(xi.matrix() * b));
    let frames = FrameSet { frames: vec![xi.clone()], weights: vec![1.0], random: false };
    let params = OrderParams::real(f.spec.n, f.spec.m, k, 0.0)?;
    let phi = radon_transform(&Field::Grid(f.clone()), &params, &frames)?;
    // the slice is stored for the canonical frame ξθ'; evaluate at θb
    let (_, theta) = canonical_frame(xi.matrix());
    let Slice::Grid(s) = &phi.slices[0] else { unreachable!("grid input gives grid slices") };
    let rhs = s.fourier_at(&(theta * b));
    Ok(ProjectionSlice::new(lhs, rhs))
}

/// Both sides of ⟨f, φ̌⟩ = ∫ d_*ξ ∫ φ(ξ,t) f̂(ξ,t) dt for φ = ĝ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Duality {
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub pass: bool,
}

/// The left side samples x from a normal proposal and ξ uniformly; the right side
/// samples ξ and integrates the t-pairing in closed form.
pub fn duality_check(f: &GaussianMixtureField, g: &GaussianMixtureField, k: usize, stream: &RngStream, samples: usize) -> Result<Duality> {
    if (f.n, f.m) != (g.n, g.m) {
        return Err(Error::IncompatibleParams("f and g live on different spaces".into()));
    }
    let (n, m) = (f.n, f.m);
    crate::linalg::check_plane_codim(n, m, k)?;
    let q = n - k;
    let spread = f.terms.iter().map(|t| t.center.norm()).fold(0.0, f64::max);
    let s = f.widest() + spread;
    let lhs = mc_estimate(&stream.child(0), samples, |rng| {
        let x = gaussian_matrix(n, m, rng) * s;
        let xi = sample_stiefel(n, q, rng);
        let phi = g.radon_slice(xi.matrix());
        f.evaluate(&x) * phi.evaluate(&(xi.matrix().transpose() * &x)) * (-gaussian_ln_density(&x, s)).exp()
    })?;
    let rhs = mc_estimate(&stream.child(1), samples, |rng| {
        let xi = sample_stiefel(n, q, rng);
        g.radon_slice(xi.matrix()).bilinear(&f.radon_slice(xi.matrix())).expect("same slice space")
    })?;
    let pass = lhs.agrees_with(&rhs, 3.0);
    Ok(Duality { lhs, rhs, pass })
}

/// (f̂)^∨(x) by random frames against c_{n,k,m} (I^k f)(x) by the multiplier form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FugledePoint {
    pub lhs: Estimate,
    pub rhs: Estimate,
}

pub fn fuglede_check(f: &GaussianMixtureField, k: usize, points: &[DMatrix<f64>], frames: usize, stream: &RngStream, samples: usize) -> Result<Vec<FugledePoint>> {
    let (n, m) = (f.n, f.m);
    let params = OrderParams::real(n, m, k, k as f64)?;
    params.check_radon()?;
    let set = FrameSet::monte_carlo(n, n - k, frames, &stream.child(0));
    let phi = radon_transform(&Field::Mixture(f.clone()), &params, &set)?;
    let lhs = dual_radon(&phi, points)?;
    let c = fuglede_constant(n, k, m)?;
    let rhs = riesz_multiplier_at(f, Complex64::new(k as f64, 0.0), &params, points, &stream.child(1), samples)?;
    Ok(lhs.into_iter().zip(rhs).map(|(lhs, r)| FugledePoint { lhs, rhs: r.scale(c) }).collect())
}
