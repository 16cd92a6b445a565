//! Quadrature over cone intervals (A, B) ⊂ P_m against d_*a = |a|^{-d} da.
//!
//! Lebesgue measure on symmetric matrices splits as
//! da = c_m ∏_{i<j}(λ_i - λ_j) dλ dq over ordered eigenvalues and normalized
//! Haar measure on O(m). Spectral integrands therefore only need the nested
//! eigenvalue integral; the full rule adds an SO(m) factor.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{cone_interval_contains, sqrt_spd, SpdMatrix};
use crate::quadrature::{composite, gauss_legendre, Rule1d};
use crate::special::{orbit_constant, stiefel_volume};

/// Default eigenvalue points per eigenvalue across the whole interval.
pub const DEFAULT_RESOLUTION: usize = 128;
const ORDER: usize = 8;
const ZERO_FLOOR: f64 = 1e-12;

/// Lower end of a cone interval.
#[derive(Debug, Clone, PartialEq)]
pub enum LowerBound {
    Zero,
    Spd(SpdMatrix),
}

impl LowerBound {
    pub fn scalar(m: usize, eps: f64) -> Result<Self> {
        if eps == 0.0 {
            Ok(LowerBound::Zero)
        } else {
            Ok(LowerBound::Spd(SpdMatrix::scalar(m, eps)?))
        }
    }

    fn as_scalar(&self) -> Option<f64> {
        match self {
            LowerBound::Zero => Some(0.0),
            LowerBound::Spd(a) => a.as_scalar(),
        }
    }

    fn matrix(&self, m: usize) -> DMatrix<f64> {
        match self {
            LowerBound::Zero => DMatrix::zeros(m, m),
            LowerBound::Spd(a) => a.matrix().clone(),
        }
    }
}

/// Tunables of a cone rule beyond the per-call resolution.
#[derive(Debug, Clone)]
pub struct ConeOptions {
    /// Eigenvalue points per eigenvalue over the full interval.
    pub resolution: usize,
    /// Points per angle of the SO(m) factor (full rules only).
    pub angles: usize,
    /// Eigenvalue breakpoints where the integrand is not smooth.
    pub breakpoints: Vec<f64>,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions { resolution: DEFAULT_RESOLUTION, angles: 16, breakpoints: Vec::new() }
    }
}

impl ConeOptions {
    pub fn with_resolution(resolution: usize) -> Self {
        ConeOptions { resolution, ..Default::default() }
    }
}

/// Nodes and weights with Σ w_i g(a_i) ≈ ∫_{(lower, upper)} g(a) d_*a.
/// Spectral rules place diagonal nodes (eigenvalues only) and already include the
/// orbit integral; they are exact only for spectral integrands.
#[derive(Debug, Clone)]
pub struct ConeQuadratureRule {
    pub m: usize,
    pub lower: LowerBound,
    pub upper: SpdMatrix,
    pub spectral: bool,
    pub nodes: Vec<SpdMatrix>,
    pub weights: Vec<f64>,
}

impl ConeQuadratureRule {
    pub fn integrate<F: FnMut(&SpdMatrix) -> f64>(&self, mut g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(a, w)| w * g(a)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Visit ordered eigenvalue tuples λ_1 > … > λ_m in (lo, hi) on a nested
/// composite Gauss–Legendre rule in log λ. The callback receives the tuple and
/// its weight for ∫ g(λ) d_*a with the orbit integral done analytically.
pub fn for_each_spectral_node<F: FnMut(&[f64], f64)>(m: usize, lo: f64, hi: f64, breakpoints: &[f64], resolution: usize, mut visit: F) {
    assert!(m >= 1 && hi > lo && lo >= 0.0);
    let lo = if lo == 0.0 { hi * ZERO_FLOOR } else { lo };
    let (ulo, uhi) = (lo.ln(), hi.ln());
    let density = (resolution as f64 / ORDER as f64).max(1.0) / (uhi - ulo);
    let ubreaks: Vec<f64> = breakpoints.iter().filter(|&&b| b > 0.0).map(|b| b.ln()).collect();
    let cm = orbit_constant(m);
    let d = (m as f64 + 1.0) / 2.0;
    let mut lam = vec![0.0; m];
    // weight of a tuple: c_m ∏_{i<j}(λ_i - λ_j) ∏_i λ_i^{1-d} ∏ du-weights
    fn recurse<F: FnMut(&[f64], f64)>(level: usize, upper: f64, ulo: f64, ctx: &(f64, &[f64], f64, f64), lam: &mut Vec<f64>, wacc: f64, visit: &mut F) {
        let (density, ubreaks, d, cm) = *ctx;
        let m = lam.len();
        let rule = composite(ulo, upper, ubreaks, density, ORDER);
        for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
            let l = u.exp();
            let mut w = wacc * wu * l.powf(1.0 - d);
            for &prev in &lam[..level] {
                w *= prev - l;
            }
            lam[level] = l;
            if level + 1 == m {
                visit(lam, w * cm);
            } else {
                recurse(level + 1, u, ulo, ctx, lam, w, visit);
            }
        }
    }
    let ctx = (density, ubreaks.as_slice(), d, cm);
    recurse(0, uhi, ulo, &ctx, &mut lam, 1.0, &mut visit);
}

/// ∫_{(lo·I, hi·I)} g(λ(a)) d_*a for a symmetric function g of the eigenvalues.
pub fn spectral_integral<G: FnMut(&[f64]) -> f64>(m: usize, lo: f64, hi: f64, breakpoints: &[f64], resolution: usize, mut g: G) -> f64 {
    let mut acc = 0.0;
    for_each_spectral_node(m, lo, hi, breakpoints, resolution, |l, w| acc += w * g(l));
    acc
}

/// ∫_{M_{n,m}} F(x'x) dx restricted to lo < λ(x'x) < hi, by the polar change of
/// variables dx = 2^{-m} |r|^{(n-m-1)/2} dr dv.
pub fn radial_integral<G: FnMut(&[f64]) -> f64>(n: usize, m: usize, lo: f64, hi: f64, breakpoints: &[f64], resolution: usize, mut g: G) -> f64 {
    let c = stiefel_volume(n, m) * 2f64.powi(-(m as i32));
    let half_n = n as f64 / 2.0;
    c * spectral_integral(m, lo, hi, breakpoints, resolution, |l| g(l) * l.iter().product::<f64>().powf(half_n))
}

/// Normalized rule on SO(m) (m ≤ 3) as rotation matrices and weights.
pub fn rotation_rule(m: usize, angles: usize) -> Result<Vec<(DMatrix<f64>, f64)>> {
    let angles = angles.max(2);
    match m {
        1 => Ok(vec![(DMatrix::identity(1, 1), 1.0)]),
        2 => Ok((0..angles)
            .map(|i| {
                let t = PI * i as f64 / angles as f64;
                let (s, c) = t.sin_cos();
                (DMatrix::from_row_slice(2, 2, &[c, -s, s, c]), 1.0 / angles as f64)
            })
            .collect()),
        3 => {
            // ZYZ Euler angles; density sin β / (8π²)
            let (gx, gw) = gauss_legendre(angles);
            let na = 2 * angles;
            let mut out = Vec::with_capacity(na * na * angles);
            for ia in 0..na {
                let a = 2.0 * PI * ia as f64 / na as f64;
                for (x, wx) in gx.iter().zip(&gw) {
                    let b = x.acos();
                    for ic in 0..na {
                        let c = 2.0 * PI * ic as f64 / na as f64;
                        let q = rot_z(a) * rot_y(b) * rot_z(c);
                        out.push((q, wx / 2.0 / (na * na) as f64));
                    }
                }
            }
            Ok(out)
        }
        _ => Err(Error::Unsupported(format!("rotation rule for m = {m}"))),
    }
}

fn rot_z(t: f64) -> DMatrix<f64> {
    let (s, c) = t.sin_cos();
    DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0])
}

fn rot_y(t: f64) -> DMatrix<f64> {
    let (s, c) = t.sin_cos();
    DMatrix::from_row_slice(3, 3, &[c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c])
}

/// Cone quadrature with default options.
pub fn cone_quadrature(lower: &LowerBound, upper: &SpdMatrix, m: usize, resolution: usize, spectral_only: bool) -> Result<ConeQuadratureRule> {
    cone_quadrature_with(lower, upper, m, &ConeOptions { resolution, ..Default::default() }, spectral_only)
}

/// Rule for ∫_{(lower, upper)} g(a) d_*a. Scalar bounds εI, ρI use the log
/// eigenvalue grid; general bounds use a = A + D^{1/2} u D^{1/2}, D = B - A,
/// u ∈ (0, I), with Jacobian |D|^d.
pub fn cone_quadrature_with(lower: &LowerBound, upper: &SpdMatrix, m: usize, opts: &ConeOptions, spectral_only: bool) -> Result<ConeQuadratureRule> {
    if upper.size() != m || matches!(lower, LowerBound::Spd(a) if a.size() != m) {
        return Err(Error::Dimension(format!("cone bounds must be {m}×{m}")));
    }
    let lmat = lower.matrix(m);
    let diff = upper.matrix() - &lmat;
    let dmin = crate::linalg::sym_eigenvalues(&diff)[0];
    if !(dmin > 1e-14) {
        return Err(Error::EmptyInterval);
    }
    let scalar = match (lower.as_scalar(), upper.as_scalar()) {
        (Some(e), Some(r)) => Some((e, r)),
        _ => None,
    };
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let d = (m as f64 + 1.0) / 2.0;
    if let Some((eps, rho)) = scalar {
        let rots = if spectral_only { vec![(DMatrix::identity(m, m), 1.0)] } else { rotation_rule(m, opts.angles)? };
        for_each_spectral_node(m, eps, rho, &opts.breakpoints, opts.resolution, |l, w| {
            let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(l));
            for (q, wq) in &rots {
                let a = q * &diag * q.transpose();
                nodes.push(SpdMatrix::from_trusted((&a + a.transpose()) * 0.5));
                weights.push(w * wq);
            }
        });
    } else {
        let droot = sqrt_spd(&SpdMatrix::from_trusted(diff.clone()))?;
        let jac = diff.determinant().powf(d);
        let cm = orbit_constant(m);
        let rots = rotation_rule(m, opts.angles)?;
        let density = (opts.resolution as f64 / ORDER as f64).max(1.0);
        let mut lam = vec![0.0; m];
        let mut tuples: Vec<(Vec<f64>, f64)> = Vec::new();
        linear_tuples(0, 1.0, density, &mut lam, 1.0, &mut tuples);
        for (l, wl) in tuples {
            let mut vand = 1.0;
            for i in 0..m {
                for j in (i + 1)..m {
                    vand *= l[i] - l[j];
                }
            }
            let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(l));
            for (q, wq) in &rots {
                let u = q * &diag * q.transpose();
                let a = &lmat + droot.matrix() * &u * droot.matrix();
                let a = (&a + a.transpose()) * 0.5;
                let det = a.determinant();
                if det <= 0.0 {
                    continue;
                }
                weights.push(cm * vand * wl * wq * jac * det.powf(-d));
                nodes.push(SpdMatrix::from_trusted(a));
            }
        }
    }
    Ok(ConeQuadratureRule { m, lower: lower.clone(), upper: upper.clone(), spectral: spectral_only && scalar.is_some(), nodes, weights })
}

fn linear_tuples(level: usize, upper: f64, density: f64, lam: &mut Vec<f64>, wacc: f64, out: &mut Vec<(Vec<f64>, f64)>) {
    let rule: Rule1d = composite(0.0, upper, &[], density, ORDER);
    for (&l, &w) in rule.nodes.iter().zip(&rule.weights) {
        lam[level] = l;
        if level + 1 == lam.len() {
            out.push((lam.clone(), wacc * w));
        } else {
            linear_tuples(level + 1, l, density, lam, wacc * w, out);
        }
    }
}

/// True when every node lies strictly inside the rule's interval.
pub fn nodes_inside(rule: &ConeQuadratureRule) -> bool {
    let lo = rule.lower.matrix(rule.m);
    rule.nodes.iter().all(|a| cone_interval_contains(a.matrix(), &lo, rule.upper.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar_rule(m: usize, eps: f64, rho: f64, res: usize, spectral: bool) -> ConeQuadratureRule {
        let lo = LowerBound::scalar(m, eps).unwrap();
        cone_quadrature(&lo, &SpdMatrix::scalar(m, rho).unwrap(), m, res, spectral).unwrap()
    }

    /// Brute-force ∫ g(a) |a|^{-3/2} da over (εI, ρI) in coordinates (a11, a12, a22).
    fn dense_grid_2x2(eps: f64, rho: f64, g: impl Fn(f64) -> f64) -> f64 {
        // a = εI + s with s in (0, (ρ-ε)I); integrate s by nested Gauss in
        // s11 ∈ (0,D), s22 ∈ (0,D), s12 bounded by both positivity conditions
        let dd = rho - eps;
        let (x, w) = gauss_legendre(64);
        let map = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
            x.iter().zip(&w).map(|(t, wt)| (0.5 * (lo + hi) + 0.5 * (hi - lo) * t, 0.5 * (hi - lo) * wt)).collect()
        };
        let mut acc = 0.0;
        for (s11, w11) in map(0.0, dd) {
            for (s22, w22) in map(0.0, dd) {
                let b = (s11 * s22).min((dd - s11) * (dd - s22)).sqrt();
                // integrate s12 ∈ (-b, b) with the sqrt endpoint handled by s12 = b sin θ
                for (th, wth) in map(-PI / 2.0, PI / 2.0) {
                    let s12 = b * th.sin();
                    let jac = b * th.cos();
                    let det = (eps + s11) * (eps + s22) - s12 * s12;
                    acc += w11 * w22 * wth * jac * g(det) * det.powf(-1.5);
                }
            }
        }
        acc
    }

    #[test]
    fn scalar_case_is_log_ratio() {
        let r = scalar_rule(1, 0.1, 7.0, 32, true);
        assert_relative_eq!(r.total_weight(), (70.0f64).ln(), max_relative = 1e-12);
    }

    #[test]
    fn matches_dense_grid_for_two_by_two() {
        let (eps, rho) = (0.5, 2.0);
        let oracle1 = dense_grid_2x2(eps, rho, |_| 1.0);
        let oracle_det = dense_grid_2x2(eps, rho, |d| d);
        let spec = scalar_rule(2, eps, rho, 128, true);
        assert_relative_eq!(spec.total_weight(), oracle1, max_relative = 1e-3);
        assert_relative_eq!(spec.integrate(|a| a.det()), oracle_det, max_relative = 1e-3);
        let full = scalar_rule(2, eps, rho, 48, false);
        assert_relative_eq!(full.total_weight(), oracle1, max_relative = 1e-3);
    }

    #[test]
    fn general_bounds_use_congruence_path() {
        let skew_hi = SpdMatrix::new(DMatrix::from_row_slice(2, 2, &[3.0, 0.5, 0.5, 2.0])).unwrap();
        let skew = cone_quadrature_with(&LowerBound::Zero, &skew_hi, 2, &ConeOptions { resolution: 32, angles: 16, breakpoints: vec![] }, false).unwrap();
        assert!(nodes_inside(&skew));
        // ∫_{(0,B)} |a|^{d} d_*a = |B|^{d} vol((0,I)) with vol((0,I)) = π/6
        assert_relative_eq!(skew.integrate(|a| a.det().powf(1.5)), skew_hi.det().powf(1.5) * PI / 6.0, max_relative = 1e-6);
    }

    #[test]
    fn nodes_lie_inside_interval() {
        for m in 1..=3 {
            let lo = LowerBound::scalar(m, 0.25).unwrap();
            let opts = ConeOptions { resolution: 16, angles: 4, breakpoints: vec![] };
            let r = cone_quadrature_with(&lo, &SpdMatrix::scalar(m, 4.0).unwrap(), m, &opts, false).unwrap();
            assert!(nodes_inside(&r));
            assert!(r.total_weight() > 0.0 && r.total_weight().is_finite());
        }
    }

    #[test]
    fn empty_interval_rejected() {
        let lo = LowerBound::scalar(2, 2.0).unwrap();
        let hi = SpdMatrix::scalar(2, 1.0).unwrap();
        assert_eq!(cone_quadrature(&lo, &hi, 2, 16, true).unwrap_err(), Error::EmptyInterval);
    }

    #[test]
    fn radial_integral_recovers_gaussian() {
        for (n, m) in [(2, 1), (3, 2), (4, 2), (4, 3)] {
            let v = radial_integral(n, m, 0.0, 60.0, &[], 256, |l| (-l.iter().sum::<f64>()).exp());
            assert_relative_eq!(v, PI.powf((n * m) as f64 / 2.0), max_relative = 1e-6);
        }
    }

    #[test]
    fn so3_rule_is_normalized_and_integrates_traces() {
        let rule = rotation_rule(3, 8).unwrap();
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        // E[q_{00}²] = 1/3 under Haar measure
        let e: f64 = rule.iter().map(|(q, w)| w * q[(0, 0)] * q[(0, 0)]).sum();
        assert_relative_eq!(e, 1.0 / 3.0, epsilon = 1e-12);
    }
}
