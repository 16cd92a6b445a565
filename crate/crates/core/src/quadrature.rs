//! Gauss–Legendre rules and composite panels.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Quadrature rule on an interval: parallel node and weight vectors.
#[derive(Debug, Clone, Default)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Composite Gauss–Legendre rule on [a, b]. The interval is first split at the
/// breakpoints that fall inside it; every piece receives a number of panels
/// proportional to its length, `panel_density` panels per unit length (at least one).
pub fn composite(a: f64, b: f64, breakpoints: &[f64], panel_density: f64, order: usize) -> Rule1d {
    let mut rule = Rule1d::default();
    if !(b > a) {
        return rule;
    }
    let mut cuts: Vec<f64> = vec![a];
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|&t| t > a && t < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.extend(inner);
    cuts.push(b);
    let (gx, gw) = gauss_legendre(order);
    for win in cuts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let panels = ((hi - lo) * panel_density).ceil().max(1.0) as usize;
        let h = (hi - lo) / panels as f64;
        for p in 0..panels {
            let c = lo + (p as f64 + 0.5) * h;
            for (x, w) in gx.iter().zip(&gw) {
                rule.nodes.push(c + 0.5 * h * x);
                rule.weights.push(0.5 * h * w);
            }
        }
    }
    rule
}
