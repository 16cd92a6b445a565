//! Gamma-type constants: Siegel gamma, Stiefel volumes, Riesz and Fuglede normalizers.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::check_plane_codim;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// True when z is 0, -1, -2, ...
pub fn is_gamma_pole(z: Complex64) -> bool {
    if z.im != 0.0 || z.re > 0.5 {
        return false;
    }
    let r = z.re.round();
    (z.re - r).abs() <= 1e-12 * z.re.abs().max(1.0) && r <= 0.0
}

/// Complex log-gamma (Lanczos, g = 7, with reflection). The imaginary part is
/// only defined modulo 2π.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1-z) = π / sin(πz)
        let s = (z * PI).sin();
        return c(PI.ln()) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = c(LANCZOS[0]);
    for (i, coef) in LANCZOS.iter().enumerate().skip(1) {
        x += *coef / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    c(0.5 * (2.0 * PI).ln()) + (z + 0.5) * t.ln() - t + x.ln()
}

/// Γ(z), failing at the poles.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    if is_gamma_pole(z) {
        return Err(Error::Pole(format!("Γ({z})")));
    }
    Ok(ln_gamma(z).exp())
}

/// Γ(x) for real x off the poles.
pub fn gamma_real(x: f64) -> f64 {
    gamma(c(x)).map(|g| g.re).unwrap_or(f64::INFINITY)
}

/// log Γ_m(α) = (m(m-1)/4) log π + Σ_{j<m} log Γ(α - j/2).
pub fn ln_siegel_gamma(m: usize, alpha: Complex64) -> Result<Complex64> {
    let mut acc = c(m as f64 * (m as f64 - 1.0) / 4.0 * PI.ln());
    for j in 0..m {
        let z = alpha - j as f64 / 2.0;
        if is_gamma_pole(z) {
            return Err(Error::Pole(format!("Γ_{m}({alpha}) at factor Γ({z})")));
        }
        acc += ln_gamma(z);
    }
    Ok(acc)
}

/// Siegel gamma Γ_m(α) = π^{m(m-1)/4} ∏_{j=0}^{m-1} Γ(α - j/2).
pub fn siegel_gamma(m: usize, alpha: Complex64) -> Result<Complex64> {
    Ok(ln_siegel_gamma(m, alpha)?.exp())
}

/// Real Siegel gamma for real arguments.
pub fn siegel_gamma_real(m: usize, alpha: f64) -> Result<f64> {
    Ok(siegel_gamma(m, c(alpha))?.re)
}

/// Volume of V_{n,m}: 2^m π^{nm/2} / Γ_m(n/2).
pub fn stiefel_volume(n: usize, m: usize) -> f64 {
    assert!(n >= m && m >= 1, "stiefel_volume needs n >= m >= 1");
    // Γ((n-j)/2) at half-integers: integer factorials times a power of √π,
    // kept in product form so small cases like 2π come out exact
    let mut denom = 1.0;
    let mut quarter_pi_power = (2 * n * m) as i64 - (m * (m - 1)) as i64;
    for j in 0..m {
        let twice = n - j;
        let (g, half) = half_integer_gamma(twice);
        denom *= g;
        quarter_pi_power -= 2 * half as i64;
    }
    let pi_part = if quarter_pi_power % 4 == 0 { PI.powi((quarter_pi_power / 4) as i32) } else { PI.powf(quarter_pi_power as f64 / 4.0) };
    2f64.powi(m as i32) * pi_part / denom
}

/// Γ(t/2) for a positive integer t, as (rational part, whether a factor √π remains).
fn half_integer_gamma(twice: usize) -> (f64, bool) {
    debug_assert!(twice >= 1);
    if twice % 2 == 0 {
        ((1..twice / 2).map(|i| i as f64).product(), false)
    } else {
        // Γ(1/2 + i) = √π · Π_{j<i} (j + 1/2)
        ((0..twice / 2).map(|j| j as f64 + 0.5).product(), true)
    }
}

/// γ_{n,m}(α) = 2^{αm} π^{nm/2} Γ_m(α/2) / Γ_m((n-α)/2).
pub fn riesz_normalizer(n: usize, m: usize, alpha: Complex64) -> Result<Complex64> {
    let denom = ln_siegel_gamma(m, (c(n as f64) - alpha) / 2.0)
        .map_err(|_| Error::Pole(format!("γ_{{{n},{m}}}({alpha}): Γ_{m}((n-α)/2) has a pole")))?;
    let num = ln_siegel_gamma(m, alpha / 2.0)
        .map_err(|_| Error::Pole(format!("γ_{{{n},{m}}}({alpha}): Γ_{m}(α/2) has a pole")))?;
    let ln = alpha * (m as f64) * 2f64.ln() + c((n * m) as f64 / 2.0 * PI.ln()) + num - denom;
    Ok(ln.exp())
}

/// c_{n,k,m} = 2^{km} π^{km/2} Γ_m(n/2) / Γ_m((n-k)/2).
pub fn fuglede_constant(n: usize, k: usize, m: usize) -> Result<f64> {
    check_plane_codim(n, m, k)?;
    let km = (k * m) as f64;
    let a = ln_siegel_gamma(m, c(n as f64 / 2.0))?.re;
    let b = ln_siegel_gamma(m, c((n - k) as f64 / 2.0))?.re;
    Ok((km * 2f64.ln() + km / 2.0 * PI.ln() + a - b).exp())
}

/// c_k = 1 / c_{n,k,m}.
pub fn measure_constant(n: usize, k: usize, m: usize) -> Result<f64> {
    check_plane_codim(n, m, k)?;
    let km = (k * m) as f64;
    let a = ln_siegel_gamma(m, c(n as f64 / 2.0))?.re;
    let b = ln_siegel_gamma(m, c((n - k) as f64 / 2.0))?.re;
    Ok((-km * 2f64.ln() - km / 2.0 * PI.ln() + b - a).exp())
}

/// Constant of the eigenvalue decomposition of Lebesgue measure on P_m:
/// da = π^{m²/2}/Γ_m(m/2) ∏_{i<j}(λ_i - λ_j) dλ dq over ordered λ and
/// normalized Haar measure dq.
pub fn orbit_constant(m: usize) -> f64 {
    let lg = ln_siegel_gamma(m, c(m as f64 / 2.0)).expect("m/2 is never a pole").re;
    ((m * m) as f64 / 2.0 * PI.ln() - lg).exp()
}

/// Wishart log-normalizer log(2^{df·m/2} s^{df·m/2} Γ_m(df/2)) for Σ = s·I.
pub fn ln_wishart_normalizer(m: usize, df: f64, scale: f64) -> f64 {
    let mm = m as f64;
    df * mm / 2.0 * (2.0 * scale).ln() + ln_siegel_gamma(m, c(df / 2.0)).expect("df > m-1").re
}

type Key = (&'static str, usize, usize, usize, u64, u64);

/// Memo table for constants. Values are deterministic, so concurrent
/// insertion of the same key is harmless.
#[derive(Debug, Default)]
pub struct ConstantTable {
    cache: Mutex<HashMap<Key, Complex64>>,
}

impl ConstantTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compute<F>(&self, name: &'static str, n: usize, m: usize, k: usize, alpha: Complex64, f: F) -> Result<Complex64>
    where
        F: FnOnce() -> Result<Complex64>,
    {
        let key = (name, n, m, k, alpha.re.to_bits(), alpha.im.to_bits());
        if let Some(v) = self.cache.lock().expect("constant cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = f()?;
        self.cache.lock().expect("constant cache poisoned").insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.cache.lock().expect("constant cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
