//! Small dense linear algebra on rectangular matrices and the SPD cone.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point of M_{n,m}. Plain nalgebra matrix; most operations expect rows >= cols.
pub type RectMatrix = DMatrix<f64>;

const SYMMETRY_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-12;
const SQRT_TOL: f64 = 1e-14;
const FRAME_TOL: f64 = 1e-10;
const CONE_FLOOR: f64 = 1e-14;

/// Build an n×m matrix from row-major entries.
pub fn rect(rows: usize, cols: usize, row_major: &[f64]) -> RectMatrix {
    DMatrix::from_row_slice(rows, cols, row_major)
}

/// Row-major entries of a matrix.
pub fn row_major(x: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            out.push(x[(i, j)]);
        }
    }
    out
}

/// Gram matrix x'x.
pub fn gram(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.transpose() * x
}

/// Squared Frobenius norm, i.e. tr(x'x).
pub fn trace_norm_sq(x: &DMatrix<f64>) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// tr(a'b) for equally shaped a, b.
pub fn trace_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(u, v)| u * v).sum()
}

/// An element of the open cone P_m.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    /// Validates symmetry (1e-12 relative) and strict positivity of the spectrum.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("{}x{} is not square", a.nrows(), a.ncols())));
        }
        let scale = a.amax().max(f64::MIN_POSITIVE);
        let asym = (&a - a.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Precondition(format!("matrix not symmetric (deviation {asym:e})")));
        }
        let sym = (&a + a.transpose()) * 0.5;
        let ev = sym_eigenvalues(&sym);
        let (min, max) = (ev[0], ev[ev.len() - 1]);
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite { min, max });
        }
        Ok(SpdMatrix(sym))
    }

    pub(crate) fn from_trusted(a: DMatrix<f64>) -> Self {
        SpdMatrix(a)
    }

    pub fn identity(m: usize) -> Self {
        SpdMatrix(DMatrix::identity(m, m))
    }

    pub fn scalar(m: usize, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::NotPositiveDefinite { min: c, max: c });
        }
        Ok(SpdMatrix(DMatrix::identity(m, m) * c))
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        SpdMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(d)))
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigenvalues(&self.0)
    }

    pub fn det(&self) -> f64 {
        self.eigenvalues().iter().product()
    }

    /// Returns Some(c) when the matrix equals c·I exactly.
    pub fn as_scalar(&self) -> Option<f64> {
        let m = self.size();
        let c = self.0[(0, 0)];
        for i in 0..m {
            for j in 0..m {
                let want = if i == j { c } else { 0.0 };
                if self.0[(i, j)] != want {
                    return None;
                }
            }
        }
        Some(c)
    }

    pub fn is_identity(&self) -> bool {
        self.as_scalar() == Some(1.0)
    }

    /// a^p through the spectral decomposition.
    pub fn power(&self, p: f64) -> SpdMatrix {
        let eig = SymmetricEigen::new(self.0.clone());
        let d = eig.eigenvalues.map(|l| l.powf(p));
        let v = &eig.eigenvectors;
        SpdMatrix(v * DMatrix::from_diagonal(&d) * v.transpose())
    }
}

/// An orthonormal q-frame in R^n, q <= n.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelFrame(DMatrix<f64>);

impl StiefelFrame {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let (n, q) = columns.shape();
        if q > n || q == 0 {
            return Err(Error::FrameDimension { n, q });
        }
        let dev = (columns.transpose() * &columns - DMatrix::identity(q, q)).amax();
        if dev > FRAME_TOL {
            return Err(Error::Precondition(format!("columns not orthonormal (deviation {dev:e})")));
        }
        Ok(StiefelFrame(columns))
    }

    pub(crate) fn from_trusted(columns: DMatrix<f64>) -> Self {
        StiefelFrame(columns)
    }

    pub fn ambient(&self) -> usize {
        self.0.nrows()
    }

    pub fn size(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Dimensions and order shared by the Riesz and Radon machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub alpha: Complex64,
}

impl OrderParams {
    pub fn new(n: usize, m: usize, k: usize, alpha: Complex64) -> Result<Self> {
        if m == 0 || n < m {
            return Err(Error::Precondition(format!("need n >= m >= 1, got n={n}, m={m}")));
        }
        Ok(OrderParams { n, m, k, alpha })
    }

    pub fn real(n: usize, m: usize, k: usize, alpha: f64) -> Result<Self> {
        Self::new(n, m, k, Complex64::new(alpha, 0.0))
    }

    /// d = (m+1)/2.
    pub fn d(&self) -> f64 {
        (self.m as f64 + 1.0) / 2.0
    }

    pub fn check_radon(&self) -> Result<()> {
        check_plane_codim(self.n, self.m, self.k)
    }

    pub fn in_wallach(&self) -> bool {
        wallach_contains(self.n, self.m, self.alpha)
    }

    pub fn check_wallach(&self) -> Result<()> {
        if self.in_wallach() {
            Ok(())
        } else {
            Err(Error::WallachViolation(format!("{}", self.alpha)))
        }
    }
}

/// 1 <= k <= n - m.
pub fn check_plane_codim(n: usize, m: usize, k: usize) -> Result<()> {
    if k >= 1 && k + m <= n {
        Ok(())
    } else {
        Err(Error::Precondition(format!("1 ≤ k ≤ n−m violated: n={n}, m={m}, k={k}")))
    }
}

fn near_integer(x: f64) -> Option<i64> {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * x.abs().max(1.0) {
        Some(r as i64)
    } else {
        None
    }
}

/// Wallach-type set: small integers {0..min(m-1, n-m)} together with the
/// half-plane Re α > m-1 minus the poles n-m+1, n-m+2, ...
pub fn wallach_contains(n: usize, m: usize, alpha: Complex64) -> bool {
    let real_int = if alpha.im == 0.0 { near_integer(alpha.re) } else { None };
    let k0 = (m as i64 - 1).min(n as i64 - m as i64);
    if let Some(j) = real_int {
        if j >= 0 && j <= k0 {
            return true;
        }
        if j >= n as i64 - m as i64 + 1 {
            return false;
        }
    }
    alpha.re > m as f64 - 1.0
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    match a.nrows() {
        1 => vec![a[(0, 0)]],
        2 => {
            let (l0, l1) = eig2(a[(0, 0)], a[(0, 1)], a[(1, 1)]);
            vec![l0, l1]
        }
        _ => {
            let mut ev: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
            ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
            ev
        }
    }
}

/// Ascending eigenvalues of [[a, b], [b, c]].
pub fn eig2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let hi = mean + rad;
    // product form keeps the small root accurate
    let det = a * c - b * b;
    let lo = if hi > 0.0 { det / hi } else { mean - rad };
    (lo, hi)
}

/// Eigenvalues of a 2×2 positive matrix product from its trace and determinant.
pub fn eig_from_trace_det(tr: f64, det: f64) -> (f64, f64) {
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    let hi = 0.5 * tr + disc;
    let lo = if hi > 0.0 { det / hi } else { 0.5 * tr - disc };
    (lo, hi)
}

/// |x|_m = det(x'x)^{1/2}, the product of the singular values.
pub fn det_power(x: &DMatrix<f64>) -> f64 {
    if x.nrows() < x.ncols() {
        return 0.0;
    }
    match x.ncols() {
        1 => x.norm(),
        _ => x.clone().svd(false, false).singular_values.iter().product(),
    }
}

/// Unique SPD square root.
pub fn sqrt_spd(a: &SpdMatrix) -> Result<SpdMatrix> {
    let eig = SymmetricEigen::new(a.matrix().clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > SQRT_TOL * max) {
        return Err(Error::NotPositiveDefinite { min, max });
    }
    let d = eig.eigenvalues.map(f64::sqrt);
    let v = &eig.eigenvectors;
    Ok(SpdMatrix(v * DMatrix::from_diagonal(&d) * v.transpose()))
}

/// x = v r^{1/2} with v in V_{n,m} and r = x'x.
pub fn polar_decompose(x: &DMatrix<f64>) -> Result<(StiefelFrame, SpdMatrix)> {
    let (n, m) = x.shape();
    if n < m {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let svd = x.clone().svd(true, true);
    let s = &svd.singular_values;
    let smax = s.max();
    let smin = s.min();
    if !(smin >= RANK_TOL * smax) || smax == 0.0 {
        return Err(Error::RankDeficient { ratio: if smax > 0.0 { smin / smax } else { 0.0 } });
    }
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let v = &u * &vt;
    let r = gram(x);
    let r = (&r + r.transpose()) * 0.5;
    Ok((StiefelFrame(v), SpdMatrix(r)))
}

/// Strict membership s ∈ (a, b): λ_min(s - a) > 0 and λ_min(b - s) > 0.
pub fn cone_interval_contains(s: &DMatrix<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    let lo = sym_eigenvalues(&(s - a));
    let hi = sym_eigenvalues(&(b - s));
    lo[0] > CONE_FLOOR && hi[0] > CONE_FLOOR
}

/// Orthonormal completion g = [ξ⊥ | ξ] with det g = +1; ξ⊥ comes from Gram–Schmidt
/// over the standard basis.
pub fn complete_frame(xi: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, q) = xi.shape();
    let k = n - q;
    let mut basis: Vec<nalgebra::DVector<f64>> = (0..q).map(|j| xi.column(j).into_owned()).collect();
    let mut comp = Vec::with_capacity(k);
    for e in 0..n {
        if comp.len() == k {
            break;
        }
        let mut v = nalgebra::DVector::zeros(n);
        v[e] = 1.0;
        for _ in 0..2 {
            for b in basis.iter() {
                let p = b.dot(&v);
                v -= b * p;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= norm;
            basis.push(v.clone());
            comp.push(v);
        }
    }
    let mut g = DMatrix::zeros(n, n);
    for (j, c) in comp.iter().enumerate() {
        g.set_column(j, c);
    }
    for j in 0..q {
        g.set_column(k + j, &xi.column(j));
    }
    if k > 0 && g.determinant() < 0.0 {
        let c = -g.column(0).into_owned();
        g.set_column(0, &c);
    }
    g
}

/// Orthonormal complement ξ⊥ (first n-q columns of the completion).
pub fn frame_complement(xi: &DMatrix<f64>) -> DMatrix<f64> {
    let g = complete_frame(xi);
    let k = xi.nrows() - xi.ncols();
    g.columns(0, k).into_owned()
}
