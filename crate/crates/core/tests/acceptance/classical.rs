//! Classical vector-argument versions of the rank-one transforms, written
//! against plain slices of f64 with rustfft and composite Simpson rules.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Composite Simpson on [a, b] with `panels` (rounded up to even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Simpson over [a, b] split at the given interior points.
pub fn simpson_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cuts: &[f64], panels: usize) -> f64 {
    let mut pts = vec![a];
    pts.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| simpson(&f, w[0], w[1], panels)).sum()
}

/// Square lattice on [-L, L)², x_j = (j - N/2) h, first coordinate slowest.
#[derive(Clone, Copy)]
pub struct Square {
    pub points: usize,
    pub extent: f64,
}

impl Square {
    pub fn h(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    pub fn coord(&self, j: usize) -> f64 {
        (j as f64 - (self.points / 2) as f64) * self.h()
    }

    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        let n = self.points;
        (0..n * n).map(|i| f(self.coord(i / n), self.coord(i % n))).collect()
    }

    /// Angular frequency of DFT index j.
    fn freq(&self, j: usize) -> f64 {
        let n = self.points as isize;
        let s = if (j as isize) < n / 2 { j as isize } else { j as isize - n };
        2.0 * PI * s as f64 / (n as f64 * self.h())
    }

    /// F^{-1}[m(|y|) F f] with the DFT standing in for the continuous transform;
    /// the lattice offset and the spacing factors cancel between the two passes.
    pub fn radial_multiplier<M: Fn(f64) -> f64>(&self, values: &[f64], mult: M) -> Vec<f64> {
        let n = self.points;
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut data, n, false);
        for i in 0..n {
            for j in 0..n {
                let r = self.freq(i).hypot(self.freq(j));
                data[i * n + j] *= mult(r);
            }
        }
        fft2(&mut data, n, true);
        data.iter().map(|c| c.re / (n * n) as f64).collect()
    }
}

fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Line integral ∫ f(tθ + sθ⊥) ds for a unit vector θ.
pub fn line_integral<F: Fn(f64, f64) -> f64>(f: &F, theta: (f64, f64), t: f64, reach: f64) -> f64 {
    let (c, s) = theta;
    simpson(|u| f(t * c - u * s, t * s + u * c), -reach, reach, 400)
}

/// Filtered backprojection for f on the plane: ramp filter |ω| on every
/// projection, then f(x) = (1/2π) ∫_0^π q(θ, θ·x) dθ.
pub struct Fbp {
    pub angles: usize,
    pub offsets: usize,
    pub step: f64,
}

impl Fbp {
    pub fn reconstruct<F: Fn(f64, f64) -> f64>(&self, f: &F, reach: f64, grid: &Square) -> Vec<f64> {
        let m = self.offsets;
        let t0 = -((m / 2) as f64) * self.step;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_inverse(m);
        let back = planner.plan_fft_forward(m);
        let ramp: Vec<f64> = (0..m)
            .map(|k| {
                let s = if k < m / 2 { k as f64 } else { k as f64 - m as f64 };
                (2.0 * PI * s / (m as f64 * self.step)).abs()
            })
            .collect();
        let filtered: Vec<((f64, f64), Vec<f64>)> = (0..self.angles)
            .map(|j| {
                let phi = PI * j as f64 / self.angles as f64;
                let theta = (phi.cos(), phi.sin());
                let mut p: Vec<Complex64> = (0..m).map(|i| Complex64::new(line_integral(f, theta, t0 + i as f64 * self.step, reach), 0.0)).collect();
                fwd.process(&mut p);
                for (v, r) in p.iter_mut().zip(&ramp) {
                    *v *= r;
                }
                back.process(&mut p);
                (theta, p.iter().map(|c| c.re / m as f64).collect())
            })
            .collect();
        let dphi = PI / self.angles as f64;
        let n = grid.points;
        (0..n * n)
            .map(|i| {
                let (x, y) = (grid.coord(i / n), grid.coord(i % n));
                let sum: f64 = filtered
                    .iter()
                    .map(|((c, s), q)| {
                        let u = (x * c + y * s - t0) / self.step;
                        let k = u.floor();
                        let w = u - k;
                        let k = k as isize;
                        let at = |i: isize| if i >= 0 && (i as usize) < m { q[i as usize] } else { 0.0 };
                        at(k) * (1.0 - w) + at(k + 1) * w
                    })
                    .sum();
                sum * dphi / (2.0 * PI)
            })
            .collect()
    }
}

/// γ_n(α) = π^{n/2} 2^α Γ(α/2) / Γ((n-α)/2), with Γ from Lanczos (g = 7).
pub fn riesz_gamma(n: usize, alpha: f64) -> f64 {
    PI.powf(n as f64 / 2.0) * 2f64.powf(alpha) * gamma(alpha / 2.0) / gamma((n as f64 - alpha) / 2.0)
}

pub fn gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
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
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut a = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// One-dimensional Riesz potential (1/γ_1(α)) ∫ p(s)|t-s|^{α-1} ds; the
/// substitution s = t ± u^{1/(α)} removes the endpoint singularity.
pub fn riesz_1d<P: Fn(f64) -> f64>(p: &P, alpha: f64, t: f64, reach: f64) -> f64 {
    // ∫_0^R p(t ± s) s^{α-1} ds = (1/α) ∫_0^{R^α} p(t ± v^{1/α}) dv
    let top = reach.powf(alpha);
    let side = |sign: f64| simpson(|v| p(t + sign * v.powf(1.0 / alpha)), 0.0, top, 4000) / alpha;
    (side(1.0) + side(-1.0)) / riesz_gamma(1, alpha)
}
