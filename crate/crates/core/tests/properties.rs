use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dispwave::analysis::{spectrum_tail, traveling_wave_slopes};
use dispwave::config::RunConfig;
use dispwave::grid::{symmetry_defect, GridSpec, Spectral};
use dispwave::model::{acceleration, omega_squared, ModelParams};

fn engine(l: f64, n: usize) -> Spectral {
    Spectral::new(GridSpec::new(l, n).unwrap())
}

fn direct_dft(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    (0..n)
        .map(|j| {
            samples
                .iter()
                .enumerate()
                .map(|(m, &f)| f * Complex64::from_polar(1.0, -2.0 * PI * (j * m) as f64 / n as f64))
                .sum()
        })
        .collect()
}

#[test]
fn random_field_matches_direct_dft() {
    let mut rng = StdRng::seed_from_u64(7);
    let s = engine(3.0, 64);
    let f: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
    let fast = s.forward(&f).unwrap();
    let slow = direct_dft(&f);
    for (a, b) in fast.iter().zip(&slow) {
        assert!((a - b).norm() < 1e-12);
    }
    assert!(symmetry_defect(&fast) < 1e-15);
    for j in 1..64 {
        assert!((fast[j] - fast[64 - j].conj()).norm() < 1e-12);
    }
}

#[test]
fn white_noise_fills_the_tail() {
    let mut rng = StdRng::seed_from_u64(2024);
    let s = engine(30.0, 1024);
    for _ in 0..5 {
        let f: Vec<f64> = (0..1024).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert!(spectrum_tail(&s, &f).unwrap() >= 0.1);
    }
}

#[test]
fn dealias_zeroes_exactly_the_top_band() {
    let mut rng = StdRng::seed_from_u64(3);
    for n in [8usize, 16, 30, 64, 1024] {
        let s = engine(1.0, n);
        let c: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(0.5..1.0), rng.random_range(0.5..1.0)))
            .collect();
        let d = s.dealias(&c);
        let removed: Vec<usize> = (0..n).filter(|&j| d[j] == Complex64::new(0.0, 0.0)).collect();
        let expected: Vec<usize> = (0..n)
            .filter(|&j| {
                let m = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
                3 * m.unsigned_abs() as usize > n
            })
            .collect();
        assert_eq!(removed, expected, "N = {n}");
        for j in (0..n).filter(|j| !expected.contains(j)) {
            assert_eq!(d[j], c[j]);
        }
    }
}

proptest! {
    #[test]
    fn round_trip(values in prop::collection::vec(-1e3f64..1e3, 32)) {
        let s = engine(2.0, 32);
        let back = s.inverse(&s.forward(&values).unwrap()).unwrap();
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in values.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn transform_is_linear(
        f in prop::collection::vec(-10.0f64..10.0, 16),
        g in prop::collection::vec(-10.0f64..10.0, 16),
        a in -5.0f64..5.0,
    ) {
        let s = engine(1.0, 16);
        let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + y).collect();
        let lhs = s.forward(&combo).unwrap();
        let (ff, gg) = (s.forward(&f).unwrap(), s.forward(&g).unwrap());
        for j in 0..16 {
            prop_assert!((lhs[j] - (ff[j] * a + gg[j])).norm() <= 1e-10);
        }
    }

    #[test]
    fn dealias_is_idempotent(values in prop::collection::vec(-1.0f64..1.0, 24)) {
        let s = engine(1.0, 24);
        let once = s.dealias(&s.forward(&values).unwrap());
        prop_assert_eq!(s.dealias(&once), once);
    }

    #[test]
    fn dispersion_is_even(a1 in -3.0f64..3.0, a2 in -3.0f64..3.0, k in -10.0f64..10.0) {
        let p = ModelParams::new(a1, a2, 0.0, 2).unwrap();
        prop_assert_eq!(omega_squared(&p, k), omega_squared(&p, -k));
    }

    #[test]
    fn slopes_solve_the_reduced_equation(a1 in 0.1f64..3.0, a2 in 0.1f64..3.0, c in -4.0f64..4.0) {
        let p = ModelParams::new(a1, a2, 0.0, 2).unwrap();
        let s = traveling_wave_slopes(&p, c);
        prop_assert!(s.slopes.contains(&0.0));
        for w in s.slopes.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        // c^2 s = a1 s + a2 s^3 / 3
        for &m in &s.slopes {
            let residual = (c * c - a1) * m - a2 * m * m * m / 3.0;
            prop_assert!(residual.abs() <= 1e-9 * (1.0 + m.abs().powi(3)));
        }
    }

    #[test]
    fn acceleration_preserves_parity(a1 in 0.1f64..2.0, a2 in 0.0f64..2.0, a3 in -2.0f64..2.0, amp in 0.1f64..1.0) {
        let p = ModelParams::new(a1, a2, a3, 2).unwrap();
        let s = engine(10.0, 128);
        let psi: Vec<f64> = s.grid().nodes().iter().map(|x| amp * (-x * x).exp()).collect();
        let a = acceleration(&p, &s, &psi, true).unwrap();
        for j in 1..128 {
            prop_assert!((a[j] - a[128 - j]).abs() <= 1e-12);
        }
    }

    #[test]
    fn config_round_trip(
        a1 in -5.0f64..5.0, a2 in -5.0f64..5.0, a3 in -5.0f64..5.0, sigma in 1u32..6,
        points in (4usize..512).prop_map(|n| 2 * n),
        half_length in 0.5f64..100.0,
        dealias: bool,
    ) {
        let mut cfg = RunConfig::with_params(ModelParams::new(a1, a2, a3, sigma).unwrap());
        cfg.grid.points = points;
        cfg.grid.half_length = half_length;
        cfg.dealias = dealias;
        let text = cfg.to_toml();
        prop_assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    }
}
