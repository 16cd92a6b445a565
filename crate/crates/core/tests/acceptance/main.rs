//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! table prints under plain `cargo test`; a substring argument filters criteria.

mod classical;

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use matwave::config::{ExperimentConfig, PhantomSpec};
use matwave::field::{fourier_transform, Field, GaussianMixtureField, GridField, GridSpec};
use matwave::harness::{run_suite, verify, write_assertions_csv, Assertion};
use matwave::inversion::{calderon_reconstruct, radon_invert_method1, radon_invert_method2, ridgelet_reproduce, riesz_invert, TruncationSchedule};
use matwave::linalg::{OrderParams, SpdMatrix};
use matwave::sampling::{integrate_polar, RngStream};
use matwave::special::{riesz_normalizer, siegel_gamma_real};
use matwave::transforms::cwt::wavelet_transform;
use matwave::transforms::radon::{dual_radon, radon_transform, FrameSet};
use matwave::transforms::ridgelet::ridgelet_transform;
use matwave::transforms::riesz::riesz_potential_grid;
use matwave::transforms::semyanistyi::semyanistyi;
use matwave::wavelet::{interval_integral, SpectralWavelet};

use classical::{rel_l2, simpson, simpson_split, Fbp, Square};

type Check = std::result::Result<String, String>;

struct Criterion {
    id: usize,
    title: &'static str,
    run: fn() -> matwave::Result<Check>,
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria = [
        Criterion { id: 1, title: "Siegel gamma vs cone quadrature", run: ac1 },
        Criterion { id: 2, title: "polar coordinates on M_3,2", run: ac2 },
        Criterion { id: 3, title: "plane decomposition identity", run: ac3 },
        Criterion { id: 4, title: "projection-slice theorem", run: ac4 },
        Criterion { id: 5, title: "Radon duality", run: ac5 },
        Criterion { id: 6, title: "Riesz potential representations", run: ac6 },
        Criterion { id: 7, title: "Calderon reproducing formula", run: ac7 },
        Criterion { id: 8, title: "Riesz inversion round trip", run: ac8 },
        Criterion { id: 9, title: "Fuglede formula", run: ac9 },
        Criterion { id: 10, title: "Radon inversion, both methods", run: ac10 },
        Criterion { id: 11, title: "ridgelet reproducing formula", run: ac11 },
        Criterion { id: 12, title: "rank-one classical regression", run: ac12 },
        Criterion { id: 13, title: "deterministic verify CSV", run: ac13 },
    ];
    let mut failed = 0;
    let mut ran = 0;
    for c in &criteria {
        let tag = format!("AC{}", c.id);
        if !filter.is_empty() && !filter.iter().any(|f| tag == *f || c.title.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let outcome = (c.run)().unwrap_or_else(|e| Err(format!("error: {e}")));
        let secs = t.elapsed().as_secs_f64();
        let (verdict, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag:<5} {verdict}  {:<36} {detail} [{secs:.1}s]", c.title);
    }
    println!("{} of {ran} criteria pass", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn check(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed<T>(limit: f64, what: &str, f: impl FnOnce() -> matwave::Result<T>) -> matwave::Result<(T, std::result::Result<f64, String>)> {
    let t = Instant::now();
    let v = f()?;
    let s = t.elapsed().as_secs_f64();
    Ok((v, if s < limit { Ok(s) } else { Err(format!("{what} took {s:.1}s, limit {limit}s")) }))
}

/// Runs one suite and reports failing rows, or the named rows when all pass.
fn suite(cfg: &ExperimentConfig, name: &str, show: &[&str]) -> matwave::Result<Check> {
    let rows = run_suite(cfg, name)?;
    Ok(summarize(&format!("{name}@({},{},{})", cfg.n, cfg.m, cfg.k), &rows, show))
}

fn summarize(label: &str, rows: &[Assertion], show: &[&str]) -> Check {
    let bad: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| format!("{}={:.3e} (ref {:.3e}, tol {:.1e})", r.assertion, r.value, r.reference, r.tolerance)).collect();
    if !bad.is_empty() {
        return Err(format!("{label}: {}", bad.join(", ")));
    }
    let shown: Vec<String> = rows.iter().filter(|r| show.iter().any(|s| r.assertion.starts_with(s))).map(|r| format!("{}={:.2e}", r.assertion, r.value)).collect();
    Ok(format!("{label}: {} rows{}{}", rows.len(), if shown.is_empty() { "" } else { "; " }, shown.join(" ")))
}

fn join(parts: Vec<Check>) -> Check {
    let ok = parts.iter().all(|p| p.is_ok());
    let text: Vec<String> = parts.into_iter().map(|p| p.unwrap_or_else(|e| e)).collect();
    check(ok, text.join(" | "))
}

fn cfg(n: usize, m: usize, k: usize, alpha: f64, phantom: PhantomSpec) -> ExperimentConfig {
    ExperimentConfig { phantom, samples: 100_000, ..ExperimentConfig::with_dims(n, m, k, alpha) }
}

fn gaussian(width: f64) -> PhantomSpec {
    PhantomSpec::Gaussian { width }
}

/// Gaussian at width 0.8 with the Fourier-side path at (4,2).
fn spectral_cfg(k: usize, alpha: f64) -> ExperimentConfig {
    ExperimentConfig { steps: 10, ratio: 4.0, resolution: 64, spectral_resolution: 48, ..cfg(4, 2, k, alpha, gaussian(0.8)) }
}

/// The (3,1,1) lattice used by the Radon and ridgelet criteria.
fn radon_lattice_cfg() -> ExperimentConfig {
    ExperimentConfig { grid_points: 24, grid_extent: 4.0, radon_frames: 512, slice_points: 48, ..cfg(3, 1, 1, 0.5, PhantomSpec::Dog { width: 0.6 }) }
}

fn ac1() -> matwave::Result<Check> {
    // r = [[s², b], [b, u²]], b = s u sin φ: the cone integral becomes
    // 4 ∫∫∫ e^{-s²-u²} (su)^{2α-1} cos^{2α-2} φ ds du dφ
    let ((worst, lines), time) = timed(5.0, "quadrature", || {
        let mut worst: f64 = 0.0;
        let mut lines = Vec::new();
        for alpha in [2.0, 2.5, 3.0] {
            let radial = simpson(|s| (-s * s).exp() * s.powf(2.0 * alpha - 1.0), 0.0, 9.0, 2000);
            let angular = simpson(|p: f64| p.cos().max(0.0).powf(2.0 * alpha - 2.0), -PI / 2.0, PI / 2.0, 2000);
            let quad = 4.0 * radial * radial * angular;
            let value = siegel_gamma_real(2, alpha)?;
            let rel = (value - quad).abs() / quad;
            worst = worst.max(rel);
            lines.push(format!("a={alpha}:{rel:.1e}"));
        }
        Ok((worst, lines))
    })?;
    Ok(check(worst < 1e-4 && time.is_ok(), format!("rel {} (tol 1e-4){}", lines.join(" "), time.err().map(|e| format!("; {e}")).unwrap_or_default())))
}

fn ac2() -> matwave::Result<Check> {
    let (n, m) = (3, 2);
    let (est, time) = timed(10.0, "polar integration", || {
        integrate_polar(|x: &DMatrix<f64>| Complex64::new((-x.norm_squared()).exp(), 0.0), n, m, n as f64, 0.7, &RngStream::new(20240611, 1), 100_000)
    })?;
    let exact = PI.powi(3);
    let rel = (est.mean.re - exact).abs() / exact;
    Ok(check(
        rel < 1e-2 && time.is_ok(),
        format!("{:.5} ± {:.1e} vs π³ = {exact:.5}, rel {rel:.2e} (tol 1e-2){}", est.mean.re, est.se, time.err().map(|e| format!("; {e}")).unwrap_or_default()),
    ))
}

fn ac3() -> matwave::Result<Check> {
    let mut parts = Vec::new();
    for (n, m, k) in [(3, 1, 1), (4, 2, 1), (4, 2, 2)] {
        parts.push(suite(&cfg(n, m, k, 0.5, gaussian(1.0)), "smith_solmon", &["sides"])?);
    }
    Ok(join(parts))
}

fn ac4() -> matwave::Result<Check> {
    let center = vec![0.3, -0.2, 0.5, 0.1, 0.0, 0.7, -0.4, 0.2];
    let analytic = ExperimentConfig { pairs: 20, ..cfg(4, 2, 1, 0.5, PhantomSpec::Shifted { center, width: 1.0 }) };
    let rows = run_suite(&analytic, "projection_slice")?;
    let worst = rows.iter().map(|r| r.value).fold(0.0, f64::max);
    let a = summarize(&format!("analytic@(4,2,1) worst {worst:.1e}"), &rows, &[]);
    let grid = ExperimentConfig { pairs: 1, grid_points: 64, grid_extent: 8.0, ..cfg(2, 1, 1, 0.5, gaussian(1.0)) };
    let rows = run_suite(&grid, "projection_slice")?;
    let worst = rows.iter().filter(|r| r.assertion.starts_with("grid")).map(|r| r.value).fold(0.0, f64::max);
    let g = summarize(&format!("grid@(2,1,1) N=64 worst {worst:.1e}"), &rows, &[]);
    Ok(join(vec![a, g]))
}

fn ac5() -> matwave::Result<Check> {
    suite(&cfg(4, 2, 1, 0.5, gaussian(1.0)), "duality", &[])
}

fn ac6() -> matwave::Result<Check> {
    let full = suite(&cfg(3, 1, 1, 0.5, gaussian(1.0)), "riesz_overlap", &[])?;
    // at (4,2,1) the kernel integral diverges for α = 1 and is skipped
    let partial = suite(&cfg(4, 2, 1, 0.5, gaussian(1.0)), "riesz_overlap", &[])?;
    Ok(join(vec![full, partial]))
}

fn ac7() -> matwave::Result<Check> {
    let lattice = ExperimentConfig { grid_points: 64, grid_extent: 8.0, ..cfg(2, 1, 1, 0.5, PhantomSpec::Dog { width: 1.0 }) };
    let a = suite(&lattice, "calderon", &["final", "multiplier_sup"])?;
    let b = suite(&spectral_cfg(1, 0.5), "calderon", &["final", "multiplier_sup"])?;
    Ok(join(vec![a, b]))
}

fn ac8() -> matwave::Result<Check> {
    let lattice = ExperimentConfig { grid_points: 64, grid_extent: 8.0, ..cfg(2, 1, 1, 0.5, PhantomSpec::Dog { width: 1.0 }) };
    let mut parts = Vec::new();
    for c in [lattice, spectral_cfg(1, 2.0)] {
        let (r, time) = timed(60.0, "run", || suite(&c, "riesz_inversion", &["final"]))?;
        parts.push(match (r, time) {
            (Ok(d), Ok(s)) => Ok(format!("{d} in {s:.1}s")),
            (Ok(d), Err(e)) => Err(format!("{d}; {e}")),
            (Err(d), _) => Err(d),
        });
    }
    Ok(join(parts))
}

fn ac9() -> matwave::Result<Check> {
    suite(&ExperimentConfig { frames: 20_000, ..cfg(4, 2, 1, 0.5, gaussian(1.0)) }, "fuglede", &[])
}

fn ac10() -> matwave::Result<Check> {
    let lattice = radon_lattice_cfg();
    let spectral = spectral_cfg(1, 0.5);
    Ok(join(vec![
        suite(&lattice, "radon_m1", &["final"])?,
        suite(&lattice, "radon_m2", &["final", "method1_vs"])?,
        suite(&spectral, "radon_m1", &["final"])?,
        suite(&spectral, "radon_m2", &["final", "method1_vs"])?,
    ]))
}

fn ac11() -> matwave::Result<Check> {
    suite(&radon_lattice_cfg(), "ridgelet", &["identity_at_1", "final", "disjoint"])
}

fn ac12() -> matwave::Result<Check> {
    let mut parts = Vec::new();
    parts.push(rank_one_multiplier_integral()?);
    parts.push(rank_one_riesz()?);
    parts.push(rank_one_wavelet()?);
    parts.push(rank_one_fourier()?);
    parts.push(rank_one_calderon()?);
    parts.push(rank_one_radon()?);
    parts.push(rank_one_semyanistyi()?);
    parts.push(rank_one_ridgelet()?);
    parts.push(rank_one_inversions()?);
    Ok(join(parts))
}

fn ac13() -> matwave::Result<Check> {
    let c = ExperimentConfig { samples: 20_000, frames: 5_000, ..ExperimentConfig::default() };
    let render = || -> matwave::Result<Vec<u8>> {
        let mut out = Vec::new();
        write_assertions_csv(&verify(&c, None)?, &mut out)?;
        Ok(out)
    };
    let (a, b) = (render()?, render()?);
    Ok(check(a == b, format!("{} bytes, {} rows, identical: {}", a.len(), a.iter().filter(|&&c| c == b'\n').count() - 1, a == b)))
}

// ---- rank-one helpers ----------------------------------------------------

const LATTICE: Square = Square { points: 64, extent: 8.0 };

fn lattice_spec() -> GridSpec {
    GridSpec::new(2, 1, LATTICE.points, LATTICE.extent).expect("valid lattice")
}

fn real_parts(g: &GridField) -> Vec<f64> {
    g.values.iter().map(|v| v.re).collect()
}

/// exp(-r²/2σ²) - ½ exp(-r²/4σ²), the zero-mean phantom on R².
fn dog2(width: f64) -> impl Fn(f64, f64) -> f64 + Copy {
    move |x, y| {
        let r2 = x * x + y * y;
        (-r2 / (2.0 * width * width)).exp() - 0.5 * (-r2 / (4.0 * width * width)).exp()
    }
}

/// ∫_{lo}^{hi} u_0(s) s^β ds/s by Simpson, split at the band breakpoints.
fn classical_band_integral(w: &SpectralWavelet, lo: f64, hi: f64, beta: f64) -> f64 {
    let (d, l) = w.support().expect("band wavelet");
    let (a, b) = (lo.max(d), hi.min(l));
    if b <= a {
        return 0.0;
    }
    simpson_split(|s| w.profile_eigs(&[s]) * s.powf(beta - 1.0), a, b, &w.breakpoints(), 400)
}

fn within(label: &str, value: f64, tol: f64) -> Check {
    check(value <= tol, format!("{label} {value:.1e}"))
}

fn rank_one_multiplier_integral() -> matwave::Result<Check> {
    let w = SpectralWavelet::default_band(2, 1);
    let mut worst: f64 = 0.0;
    for &mu in &[0.05, 0.3, 1.0, 7.0] {
        for &(e, r) in &[(0.5, 2.0), (0.1, 4.0), (1e-3, 1e3)] {
            for &beta in &[0.0, -0.25, -0.5] {
                let lib = interval_integral(&w, &[mu], e, r, Complex64::new(beta, 0.0), 128).re;
                let classical = classical_band_integral(&w, e * mu, r * mu, beta);
                worst = worst.max((lib - classical).abs() / classical.abs().max(1e-3));
            }
        }
    }
    Ok(within("band integral", worst, 1e-8))
}

fn rank_one_riesz() -> matwave::Result<Check> {
    let mut worst_gamma: f64 = 0.0;
    for &(n, a) in &[(2usize, 0.5), (2, 1.5), (3, 1.0), (5, 2.5)] {
        let lib = riesz_normalizer(n, 1, Complex64::new(a, 0.0))?.re;
        worst_gamma = worst_gamma.max((lib - classical::riesz_gamma(n, a)).abs() / lib.abs());
    }
    let f = dog2(1.0);
    let fv = LATTICE.sample(f);
    let lib = riesz_potential_grid(&GaussianMixtureField::dog(2, 1, 1.0).to_grid(lattice_spec())?, Complex64::new(0.5, 0.0))?;
    // the singular origin cell takes the value of its nearest lattice neighbour
    let dy = 2.0 * PI / (LATTICE.points as f64 * LATTICE.h());
    let classical = LATTICE.radial_multiplier(&fv, |r| r.max(dy).powf(-0.5));
    let gap = rel_l2(&real_parts(&lib), &classical);
    Ok(join(vec![within("gamma_n", worst_gamma, 1e-12), within("I^0.5", gap, 1e-10)]))
}

fn rank_one_wavelet() -> matwave::Result<Check> {
    // W_a f = f ∗ w_a, w_a(x) = a^{-1} w(x/√a), as a direct lattice sum; only
    // the central quarter is compared since the library's FFT path is periodic
    let f = dog2(1.0);
    let w = dog2(0.5);
    let fv = LATTICE.sample(f);
    let spec = lattice_spec();
    let fg = Field::Grid(GaussianMixtureField::dog(2, 1, 1.0).to_grid(spec)?);
    let n = LATTICE.points;
    let h2 = LATTICE.h() * LATTICE.h();
    let mut worst: f64 = 0.0;
    for c in [0.5, 2.0] {
        let Field::Grid(lib) = wavelet_transform(&fg, &Field::Mixture(GaussianMixtureField::dog(2, 1, 0.5)), &SpdMatrix::scalar(1, c)?)? else { unreachable!() };
        let (mut num, mut den) = (0.0, 0.0);
        for i in (0..n * n).step_by(7) {
            let (x, y) = (LATTICE.coord(i / n), LATTICE.coord(i % n));
            if x.abs().max(y.abs()) > LATTICE.extent / 2.0 {
                continue;
            }
            let direct: f64 = (0..n * n).map(|j| fv[j] * w((x - LATTICE.coord(j / n)) / c.sqrt(), (y - LATTICE.coord(j % n)) / c.sqrt())).sum::<f64>() * h2 / c;
            num += (lib.values[i].re - direct).powi(2);
            den += direct * direct;
        }
        worst = worst.max((num / den).sqrt());
    }
    Ok(within("W_a", worst, 1e-8))
}

fn rank_one_fourier() -> matwave::Result<Check> {
    // (Ff)(y) = ∫ f(x) e^{i x·y} dx as a Riemann sum, shifted phantom so the sign shows
    let center = DMatrix::from_column_slice(2, 1, &[0.7, -0.4]);
    let mix = GaussianMixtureField::shifted_gaussian(center, 1.0);
    let f = |x: f64, y: f64| (-((x - 0.7).powi(2) + (y + 0.4).powi(2)) / 2.0).exp();
    let Field::Mixture(lib) = fourier_transform(&Field::Mixture(mix))? else { unreachable!() };
    let n = LATTICE.points;
    let h2 = LATTICE.h() * LATTICE.h();
    let mut worst: f64 = 0.0;
    for &(a, b) in &[(0.0, 0.0), (0.5, -1.0), (1.3, 0.2), (-2.0, 0.7)] {
        let direct: Complex64 = (0..n * n)
            .map(|j| {
                let (x, y) = (LATTICE.coord(j / n), LATTICE.coord(j % n));
                Complex64::from_polar(f(x, y), a * x + b * y)
            })
            .sum::<Complex64>()
            * h2;
        let v = lib.evaluate(&DMatrix::from_column_slice(2, 1, &[a, b]));
        worst = worst.max((v - direct).norm() / direct.norm().max(1e-300));
    }
    Ok(within("Fourier", worst, 1e-10))
}

fn rank_one_calderon() -> matwave::Result<Check> {
    let w = SpectralWavelet::default_band(2, 1);
    let f = dog2(1.0);
    let fv = LATTICE.sample(f);
    let s = TruncationSchedule::geometric(10, 4.0, 128)?;
    let r = calderon_reconstruct(&GaussianMixtureField::dog(2, 1, 1.0).to_grid(lattice_spec())?, &w, &s, false)?;
    let last = r.report.steps.last().expect("at least one step");
    // c_ν for m = 1 is ∫ u_0(s) ds/s
    let c = classical_band_integral(&w, 0.0, f64::INFINITY, 0.0);
    let classical = LATTICE.radial_multiplier(&fv, |rad| classical_band_integral(&w, last.eps * rad * rad, last.rho * rad * rad, 0.0) / c);
    let lib = real_parts(r.normalized.as_ref().expect("c_nu > 0"));
    Ok(join(vec![within("Calderon vs classical", rel_l2(&lib, &classical), 1e-6), within("classical vs f", rel_l2(&classical, &fv), 1e-3)]))
}

fn radon_setup() -> matwave::Result<(OrderParams, FrameSet)> {
    Ok((OrderParams::real(2, 1, 1, 0.0)?, FrameSet::quadrature(2, 256)?))
}

fn theta_of(frames: &FrameSet, i: usize) -> (f64, f64) {
    let xi = frames.frames[i].matrix();
    (xi[(0, 0)], xi[(1, 0)])
}

fn rank_one_radon() -> matwave::Result<Check> {
    let f = dog2(1.0);
    let (params, frames) = radon_setup()?;
    let data = radon_transform(&Field::Mixture(GaussianMixtureField::dog(2, 1, 1.0)), &params, &frames)?;
    let mut worst: f64 = 0.0;
    for i in (0..frames.len()).step_by(37) {
        let theta = theta_of(&data.frames, i);
        for &t in &[0.0, 0.6, -1.7, 3.1] {
            let lib = data.evaluate(i, &DMatrix::from_element(1, 1, t)).re;
            worst = worst.max((lib - classical::line_integral(&f, theta, t, 12.0)).abs());
        }
    }
    // dual: (1/π) ∫_0^π p(θ, θ·x) dθ
    let points = [(0.0, 0.0), (0.8, -0.3), (-1.5, 2.0)];
    let xs: Vec<DMatrix<f64>> = points.iter().map(|&(a, b)| DMatrix::from_column_slice(2, 1, &[a, b])).collect();
    let lib = dual_radon(&data, &xs)?;
    let mut worst_dual: f64 = 0.0;
    for (est, &(x, y)) in lib.iter().zip(&points) {
        let classical = simpson(|p| classical::line_integral(&f, (p.cos(), p.sin()), x * p.cos() + y * p.sin(), 12.0), 0.0, PI, 720) / PI;
        worst_dual = worst_dual.max((est.mean.re - classical).abs());
    }
    Ok(join(vec![within("Radon", worst, 1e-10), within("dual Radon", worst_dual, 1e-8)]))
}

fn rank_one_semyanistyi() -> matwave::Result<Check> {
    let f = dog2(1.0);
    let (params, frames) = radon_setup()?;
    // the potential of a zero-mean slice decays like |t|^{-3/2}, so the
    // periodic slice lattice has to be long
    let slice_spec = GridSpec::new(1, 1, 2048, 128.0)?;
    let phi = semyanistyi(&Field::Mixture(GaussianMixtureField::dog(2, 1, 1.0)), Complex64::new(0.5, 0.0), &params, &frames, slice_spec)?;
    let mut worst: f64 = 0.0;
    for i in (0..frames.len()).step_by(61) {
        let theta = theta_of(&phi.frames, i);
        let p = |t: f64| classical::line_integral(&f, theta, t, 12.0);
        for &t in &[0.0, 1.0, -2.5] {
            let lib = phi.evaluate(i, &DMatrix::from_element(1, 1, t)).re;
            let classical = classical::riesz_1d(&p, 0.5, t, 14.0);
            worst = worst.max((lib - classical).abs() / classical.abs().max(1e-2));
        }
    }
    Ok(within("Semyanistyi", worst, 1e-2))
}

fn rank_one_ridgelet() -> matwave::Result<Check> {
    // (R_a f)(θ, b) = ∫ p(θ, t) w_a(b - t) dt with w_a(t) = a^{-1/2} w(t/√a)
    let f = dog2(1.0);
    let w = |t: f64| (-t * t / 0.5).exp() - (0.5f64).sqrt() * (-t * t / 1.0).exp();
    let (params, frames) = radon_setup()?;
    let c = 1.7;
    let phi = ridgelet_transform(
        &Field::Mixture(GaussianMixtureField::dog(2, 1, 1.0)),
        &Field::Mixture(GaussianMixtureField::dog(1, 1, 0.5)),
        &SpdMatrix::scalar(1, c)?,
        &params,
        &frames,
    )?;
    let mut worst: f64 = 0.0;
    for i in (0..frames.len()).step_by(53) {
        let theta = theta_of(&phi.frames, i);
        for &b in &[0.0, 0.9, -2.2] {
            let lib = phi.evaluate(i, &DMatrix::from_element(1, 1, b)).re;
            let classical = simpson(|t| classical::line_integral(&f, theta, t, 12.0) * w((b - t) / c.sqrt()), -12.0, 12.0, 600) / c.sqrt();
            worst = worst.max((lib - classical).abs());
        }
    }
    Ok(within("ridgelet", worst, 1e-8))
}

fn rank_one_inversions() -> matwave::Result<Check> {
    let f = dog2(1.0);
    let fv = LATTICE.sample(f);
    let spec = lattice_spec();
    let phantom = GaussianMixtureField::dog(2, 1, 1.0);
    let fg = phantom.to_grid(spec)?;
    let fbp = Fbp { angles: 256, offsets: 512, step: 0.05 }.reconstruct(&f, 12.0, &LATTICE);
    let mut parts = vec![within("FBP vs f", rel_l2(&fbp, &fv), 5e-2)];

    // Riesz inversion: F^{-1}[f̂ ∫_{ε|y|²}^{ρ|y|²} u_0(s) s^{-α/2} ds/s] / d_w(α)
    let w = SpectralWavelet::default_band(2, 1);
    let alpha = 0.5;
    let g = riesz_potential_grid(&fg, Complex64::new(alpha, 0.0))?;
    let s = TruncationSchedule::geometric(10, 4.0, 128)?;
    let r = riesz_invert(&g, Complex64::new(alpha, 0.0), &w, &s, Some(&fg), false)?;
    let last = r.report.steps.last().expect("at least one step");
    let d = classical_band_integral(&w, 0.0, f64::INFINITY, -alpha / 2.0);
    let classical = LATTICE.radial_multiplier(&fv, |rad| classical_band_integral(&w, last.eps * rad * rad, last.rho * rad * rad, -alpha / 2.0) / d);
    parts.push(within("Riesz inversion vs classical", rel_l2(&real_parts(r.normalized.as_ref().expect("d_w > 0")), &classical), 1e-6));

    // Radon and ridgelet reconstructions against filtered backprojection
    let (params, _) = radon_setup()?;
    let frames = FrameSet::quadrature(2, 512)?;
    let data = radon_transform(&Field::Mixture(phantom.clone()), &params, &frames)?;
    let slice_spec = GridSpec::new(1, 1, 64, 8.0)?;
    let m1 = radon_invert_method1(&data, &w, spec, &s, None, false)?;
    let slice_w = w.with_rows(1)?;
    let short = TruncationSchedule::geometric(4, 16.0, 128)?;
    let m2 = radon_invert_method2(&data, &slice_w, slice_spec, spec, &short, None)?;
    let rid = ridgelet_reproduce(&Field::Mixture(phantom), &slice_w, &slice_w.dilated(1.5)?, &params, &frames, slice_spec, spec, &short, None)?;
    for (name, rec) in [("radon1", &m1), ("radon2", &m2), ("ridgelet", &rid)] {
        let v = real_parts(rec.normalized.as_ref().expect("non-zero constant"));
        parts.push(within(&format!("{name} vs FBP"), rel_l2(&v, &fbp), 5e-2));
    }
    Ok(join(parts))
}
