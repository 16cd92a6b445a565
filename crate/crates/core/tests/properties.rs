use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use matwave::config::ExperimentConfig;
use matwave::field::{GaussianMixtureField, GridSpec};
use matwave::harness::{run_suite, write_assertions_csv};
use matwave::inversion::{calderon_multiplier, calderon_reconstruct, TruncationSchedule};
use matwave::sampling::{mc_estimate, RngStream};
use matwave::wavelet::{calderon_constant_full, make_band_wavelet};
use rand::Rng;

fn gram(y: &DMatrix<f64>) -> DMatrix<f64> {
    y.transpose() * y
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // a non-negative profile integrated over nested intervals: the multiplier can
    // only grow with the schedule and never passes the full constant
    #[test]
    fn calderon_multiplier_is_monotone_and_bounded(
        m in 1usize..=2,
        delta in 0.05f64..0.5,
        width in 2.0f64..20.0,
        ratio in 1.5f64..6.0,
        entries in proptest::collection::vec(-3.0f64..3.0, 8),
    ) {
        let n = m + 2;
        let w = make_band_wavelet(n, m, delta, delta * width).unwrap();
        let full = calderon_constant_full(&w);
        let y = DMatrix::from_row_slice(n, m, &entries[..n * m]);
        prop_assume!(gram(&y).determinant() > 1e-6);
        let s = TruncationSchedule::geometric(6, ratio, 64).unwrap();
        let mut prev = 0.0;
        for &(e, r) in &s.pairs {
            let k = calderon_multiplier(&w, &gram(&y), e, r, 64).unwrap();
            prop_assert!(k >= prev - 1e-12 * full, "multiplier fell from {prev} to {k}");
            prop_assert!(k <= full * (1.0 + 1e-9), "multiplier {k} above c_nu {full}");
            prev = k;
        }
    }

    #[test]
    fn reconstruction_error_settles_after_capture(width in 0.6f64..1.6, ratio in 2.0f64..8.0) {
        let spec = GridSpec::new(2, 1, 32, 8.0).unwrap();
        let f = GaussianMixtureField::dog(2, 1, width).to_grid(spec).unwrap();
        let w = make_band_wavelet(2, 1, 0.25, 4.0).unwrap();
        let s = TruncationSchedule::geometric(8, ratio, 64).unwrap();
        let r = calderon_reconstruct(&f, &w, &s, false).unwrap();
        let e = r.report.errors();
        for pair in e.windows(2).skip(1) {
            prop_assert!(pair[1] <= pair[0] + 1e-3, "errors {e:?}");
        }
        prop_assert!(r.report.multiplier_sups().iter().all(|&k| k <= calderon_constant_full(&w) * (1.0 + 1e-9)));
    }

    #[test]
    fn estimates_repeat_bit_for_bit(seed in any::<u64>(), stream in 0u64..64, samples in 1usize..5000) {
        let s = RngStream::new(seed, stream);
        let f = |rng: &mut rand_chacha::ChaCha8Rng| {
            let x: f64 = rng.random();
            Complex64::new(x * x, x.sin())
        };
        let a = mc_estimate(&s, samples, f).unwrap();
        let b = mc_estimate(&s, samples, f).unwrap();
        prop_assert_eq!(a.mean.re.to_bits(), b.mean.re.to_bits());
        prop_assert_eq!(a.mean.im.to_bits(), b.mean.im.to_bits());
        prop_assert_eq!(a.se.to_bits(), b.se.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn verify_csv_is_reproducible(seed in any::<u64>()) {
        let cfg = ExperimentConfig { seed, samples: 5_000, frames: 500, ..ExperimentConfig::default() };
        let render = || {
            let mut out = Vec::new();
            for suite in ["polar", "duality", "fuglede", "riesz_overlap"] {
                write_assertions_csv(&run_suite(&cfg, suite).unwrap(), &mut out).unwrap();
            }
            out
        };
        prop_assert_eq!(render(), render());
    }
}
