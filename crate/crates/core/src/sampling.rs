//! Seeded Monte Carlo over M_{n,m}, Stiefel manifolds and the SPD cone.
//!
//! Every estimator splits its samples into fixed blocks of [`BLOCK`] draws. Block
//! `b` owns its own ChaCha stream, blocks run in parallel, and the partial sums
//! are reduced in block order, so results are bit-identical across runs and
//! thread counts.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{check_plane_codim, det_power, StiefelFrame};
use crate::special::{ln_wishart_normalizer, stiefel_volume};

/// Samples per parallel block.
pub const BLOCK: usize = 4096;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A reproducible random stream identified by (seed, stream id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Generator for block `block` of this stream.
    pub fn block_rng(&self, block: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id.wrapping_mul(1 << 32).wrapping_add(block));
        rng
    }

    /// Generator for sequential (non-blocked) use.
    pub fn rng(&self) -> ChaCha8Rng {
        self.block_rng(u64::MAX)
    }

    /// A derived, independent stream.
    pub fn child(&self, i: u64) -> RngStream {
        RngStream { seed: splitmix(self.seed ^ splitmix(self.stream_id.wrapping_add(1)) ^ splitmix(i.wrapping_add(0x51))), stream_id: self.stream_id }
    }
}

/// Relative floor for comparisons of estimates whose standard error vanishes.
pub const ROUNDING: f64 = 1e-12;

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: Complex64,
    /// sqrt of (Var Re + Var Im) / N.
    pub se: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn exact(v: Complex64) -> Self {
        Estimate { mean: v, se: 0.0, samples: 0 }
    }

    pub fn scale(&self, c: f64) -> Estimate {
        Estimate { mean: self.mean * c, se: self.se * c.abs(), samples: self.samples }
    }

    pub fn scale_complex(&self, c: Complex64) -> Estimate {
        Estimate { mean: self.mean * c, se: self.se * c.norm(), samples: self.samples }
    }

    /// |a - b| <= k·sqrt(se_a² + se_b²), or within rounding when both
    /// estimates are exact (zero-variance proposals).
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.mean - other.mean).norm() <= self.tolerance(k * self.se.hypot(other.se), other.mean)
    }

    /// |a - v| <= k·se for an exact value v.
    pub fn covers(&self, v: Complex64, k: f64) -> bool {
        (self.mean - v).norm() <= self.tolerance(k * self.se, v)
    }

    fn tolerance(&self, statistical: f64, reference: Complex64) -> f64 {
        statistical.max(ROUNDING * self.mean.norm().max(reference.norm()))
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    re: f64,
    im: f64,
    re2: f64,
    im2: f64,
}

/// Vector-valued Monte Carlo: `f` writes `outputs` values per draw.
pub fn mc_estimate_many<F>(stream: &RngStream, samples: usize, outputs: usize, f: F) -> Result<Vec<Estimate>>
where
    F: Fn(&mut ChaCha8Rng, &mut [Complex64]) + Sync,
{
    if samples == 0 {
        return Err(Error::Precondition("Monte Carlo needs at least one sample".into()));
    }
    let blocks = samples.div_ceil(BLOCK);
    let partial: Vec<Option<Vec<Moments>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream.block_rng(b as u64);
            let count = BLOCK.min(samples - b * BLOCK);
            let mut acc = vec![Moments::default(); outputs];
            let mut buf = vec![Complex64::new(0.0, 0.0); outputs];
            for _ in 0..count {
                buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                f(&mut rng, &mut buf);
                for (a, v) in acc.iter_mut().zip(&buf) {
                    if !v.re.is_finite() || !v.im.is_finite() {
                        return None;
                    }
                    a.re += v.re;
                    a.im += v.im;
                    a.re2 += v.re * v.re;
                    a.im2 += v.im * v.im;
                }
            }
            Some(acc)
        })
        .collect();
    let mut total = vec![Moments::default(); outputs];
    for p in partial {
        let p = p.ok_or(Error::NonFinite)?;
        for (t, v) in total.iter_mut().zip(&p) {
            t.re += v.re;
            t.im += v.im;
            t.re2 += v.re2;
            t.im2 += v.im2;
        }
    }
    let nf = samples as f64;
    Ok(total
        .iter()
        .map(|t| {
            let mre = t.re / nf;
            let mim = t.im / nf;
            let denom = (nf - 1.0).max(1.0);
            let vre = ((t.re2 - nf * mre * mre) / denom).max(0.0);
            let vim = ((t.im2 - nf * mim * mim) / denom).max(0.0);
            Estimate { mean: Complex64::new(mre, mim), se: ((vre + vim) / nf).sqrt(), samples }
        })
        .collect())
}

/// Scalar Monte Carlo estimate of E[f].
pub fn mc_estimate<F>(stream: &RngStream, samples: usize, f: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha8Rng) -> Complex64 + Sync,
{
    Ok(mc_estimate_many(stream, samples, 1, |rng, out| out[0] = f(rng))?[0])
}

/// n×q matrix of independent standard normals.
pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, q: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(n, q, |_, _| rng.sample(StandardNormal))
}

/// Uniform frame in V_{n,q}: Gaussian matrix, QR, signs fixed so diag(R) > 0.
pub fn sample_stiefel<R: Rng + ?Sized>(n: usize, q: usize, rng: &mut R) -> StiefelFrame {
    assert!(q >= 1 && q <= n, "sample_stiefel needs 1 <= q <= n");
    loop {
        let g = gaussian_matrix(n, q, rng);
        let qr = g.qr();
        let r = qr.r();
        if (0..q).any(|j| r[(j, j)].abs() < 1e-300) {
            continue;
        }
        let mut qm = qr.q();
        for j in 0..q {
            if r[(j, j)] < 0.0 {
                let col = -qm.column(j).into_owned();
                qm.set_column(j, &col);
            }
        }
        return StiefelFrame::from_trusted(qm);
    }
}

/// `count` frames drawn sequentially from a stream.
pub fn sample_frames(n: usize, q: usize, count: usize, stream: &RngStream) -> Vec<StiefelFrame> {
    let mut rng = stream.rng();
    (0..count).map(|_| sample_stiefel(n, q, &mut rng)).collect()
}

/// Wishart draw W_m(df, scale·I) by the Bartlett decomposition.
pub fn sample_wishart<R: Rng + ?Sized>(m: usize, df: f64, scale: f64, rng: &mut R) -> DMatrix<f64> {
    assert!(df > m as f64 - 1.0, "Wishart needs df > m - 1");
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        let chi = ChiSquared::new(df - i as f64).expect("positive degrees of freedom");
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    (&a * a.transpose()) * scale
}

/// log density of W_m(df, scale·I) at r.
pub fn wishart_ln_density(r: &DMatrix<f64>, df: f64, scale: f64) -> f64 {
    let m = r.nrows();
    let det = r.determinant();
    (df - m as f64 - 1.0) / 2.0 * det.ln() - r.trace() / (2.0 * scale) - ln_wishart_normalizer(m, df, scale)
}

/// Symmetric square root of an SPD matrix (closed form for m ≤ 2).
pub fn spd_sqrt(r: &DMatrix<f64>) -> DMatrix<f64> {
    match r.nrows() {
        1 => DMatrix::from_element(1, 1, r[(0, 0)].sqrt()),
        2 => {
            let s = r.determinant().max(0.0).sqrt();
            let t = (r.trace() + 2.0 * s).sqrt();
            (r + DMatrix::identity(2, 2) * s) / t
        }
        _ => {
            let eig = nalgebra::SymmetricEigen::new(r.clone());
            let d = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
            &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
        }
    }
}

/// log density of the isotropic normal N(0, scale²) on the entries of x.
pub fn gaussian_ln_density(x: &DMatrix<f64>, scale: f64) -> f64 {
    let d = x.len() as f64;
    -0.5 * d * (2.0 * PI * scale * scale).ln() - x.norm_squared() / (2.0 * scale * scale)
}

/// ∫_{M_{n,m}} f(x) dx with an isotropic Gaussian proposal of standard deviation `scale`.
pub fn integrate_matrix_space<F>(f: F, n: usize, m: usize, scale: f64, stream: &RngStream, samples: usize) -> Result<Estimate>
where
    F: Fn(&DMatrix<f64>) -> Complex64 + Sync,
{
    mc_estimate(stream, samples, |rng| {
        let x = gaussian_matrix(n, m, rng) * scale;
        f(&x) * (-gaussian_ln_density(&x, scale)).exp()
    })
}

/// ∫_{M_{n,m}} f(x) dx in polar coordinates x = v r^{1/2},
/// dx = 2^{-m} |r|^{(n-m-1)/2} dr dv, with v uniform and r ~ W_m(df, scale·I).
pub fn integrate_polar<F>(f: F, n: usize, m: usize, df: f64, scale: f64, stream: &RngStream, samples: usize) -> Result<Estimate>
where
    F: Fn(&DMatrix<f64>) -> Complex64 + Sync,
{
    let vol = stiefel_volume(n, m) * 2f64.powi(-(m as i32));
    let expo = (n as f64 - m as f64 - 1.0) / 2.0;
    mc_estimate(stream, samples, |rng| {
        let v = sample_stiefel(n, m, rng);
        let r = sample_wishart(m, df, scale, rng);
        let x = v.matrix() * spd_sqrt(&r);
        let w = (expo * r.determinant().ln() - wishart_ln_density(&r, df, scale)).exp();
        f(&x) * (vol * w)
    })
}

/// Both sides of the Smith–Solmon factorization
/// ∫ f dx = (σ_{n,m}/σ_{n-k,m}) ∫_{V_{n,n-k}} d_*ξ ∫_{M_{n-k,m}} f(ξz) |z|_m^k dz.
#[derive(Debug, Clone, Copy)]
pub struct SmithSolmon {
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub pass: bool,
}

pub fn verify_smith_solmon<F>(f: F, n: usize, m: usize, k: usize, scale: f64, stream: &RngStream, samples: usize) -> Result<SmithSolmon>
where
    F: Fn(&DMatrix<f64>) -> Complex64 + Sync,
{
    check_plane_codim(n, m, k)?;
    let lhs = integrate_matrix_space(&f, n, m, scale, &stream.child(0), samples)?;
    let ratio = stiefel_volume(n, m) / stiefel_volume(n - k, m);
    let rhs = mc_estimate(&stream.child(1), samples, |rng| {
        let xi = sample_stiefel(n, n - k, rng);
        let z = gaussian_matrix(n - k, m, rng) * scale;
        let jac = det_power(&z).powi(k as i32);
        f(&(xi.matrix() * &z)) * (ratio * jac * (-gaussian_ln_density(&z, scale)).exp())
    })?;
    let pass = lhs.agrees_with(&rhs, 3.0);
    Ok(SmithSolmon { lhs, rhs, pass })
}
