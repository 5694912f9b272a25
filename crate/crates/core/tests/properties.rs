use std::path::Path;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use landau_lab::collision::landau_collision;
use landau_lab::decayfit::{fit_exponential, Window};
use landau_lab::diagnostics::dissipation;
use landau_lab::evolve::{conserved_moments, project_conservation};
use landau_lab::io::snapshot::{decode_snapshot, encode_snapshot};
use landau_lab::io::Table;
use landau_lab::kernels::{cell_average_power, sample_kernels};
use landau_lab::maxwellian::{MaxwellianMixture, MixtureComponent};
use landau_lab::{build_grid, Field, WeightSpec};

fn mixture_field(n: usize, half_width: f64, comps: &[(f64, f64, f64, f64)]) -> Field {
    let grid = build_grid(n, half_width).unwrap();
    let comps = comps
        .iter()
        .map(|&(w, ux, uy, t)| MixtureComponent {
            weight: w,
            velocity: [ux, uy, 0.0],
            temperature: t,
        })
        .collect();
    MaxwellianMixture::new(comps).unwrap().discretize(&grid).unwrap()
}

fn component() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.2f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 0.4f64..1.2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn collision_conserves_invariants(comps in prop::collection::vec(component(), 1..4), gamma in -1.9f64..-0.1) {
        let f = mixture_field(8, 5.0, &comps);
        let kernels = Arc::new(sample_kernels(f.grid(), gamma).unwrap());
        let q = landau_collision(&kernels, &f, 1e-30).unwrap();
        let m = conserved_moments(&q);
        // A single Maxwellian is stationary, so roundoff is measured against `f`.
        let scale = f.max() * f.grid().cell_volume() * (f.grid().cell_count() as f64) * 50.0;
        for (k, x) in m.iter().enumerate() {
            prop_assert!(x.abs() <= 1e-13 * scale, "moment {} = {:e}", k, x);
        }
        // Entropy production of the discrete operator is nonnegative.
        let d = dissipation(&f, &q, 1e-30).unwrap();
        prop_assert!(d >= -1e-12 * scale, "D = {:e}", d);
    }

    #[test]
    fn projection_hits_targets(comps in prop::collection::vec(component(), 1..3), scale in 0.9f64..1.1, seed in 0u64..1000) {
        let f = mixture_field(8, 5.0, &comps);
        let target = conserved_moments(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = f.map(|x| x * scale);
        for x in g.values_mut() {
            *x *= 1.0 + 1e-3 * rng.random_range(-1.0..1.0);
        }
        project_conservation(&mut g, &target).unwrap();
        let got = conserved_moments(&g);
        for k in 0..5 {
            prop_assert!((got[k] - target[k]).abs() <= 1e-12 * target[0].max(target[4]));
        }
    }
}

proptest! {
    #[test]
    fn snapshot_round_trip(values in prop::collection::vec(any::<f64>(), 64), t in any::<f64>(), gamma in -1.99f64..-0.01) {
        let grid = build_grid(4, 2.0).unwrap();
        let f = Field::from_values(grid, values).unwrap();
        let bytes = encode_snapshot(&f, t, gamma);
        let s = decode_snapshot(&bytes, Path::new("mem")).unwrap();
        prop_assert_eq!(s.t.to_bits(), t.to_bits());
        prop_assert_eq!(s.gamma, gamma);
        for (a, b) in s.field.values().iter().zip(f.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e300f64..1e300, 3), 0..20)) {
        let t = Table::new(vec!["t".into(), "a".into(), "b".into()], rows);
        let back = Table::parse(&t.to_csv_string(), Path::new("mem")).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn fitted_rate_ignores_amplitude(rate in 0.01f64..10.0, amp in 1e-6f64..1e6, noise_seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        let base: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = 0.1 * i as f64;
                (t, (-rate * t).exp() * (1.0 + 1e-3 * rng.random_range(-1.0..1.0)))
            })
            .collect();
        let scaled: Vec<(f64, f64)> = base.iter().map(|&(t, y)| (t, amp * y)).collect();
        let w = Window::new(0.5, 3.5).unwrap();
        let a = fit_exponential(&base, w).unwrap();
        let b = fit_exponential(&scaled, w).unwrap();
        prop_assert!((a.rate - b.rate).abs() <= 1e-9 * (1.0 + rate));
        prop_assert!((a.rate - rate).abs() <= 2e-3);
        prop_assert!((b.amplitude / a.amplitude / amp - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn weight_keys_round_trip(k in 0.0f64..20.0, kappa in 0.01f64..2.0, s in 0.01f64..1.99) {
        for w in [WeightSpec::Polynomial { k }, WeightSpec::StretchedExp { kappa, s }] {
            prop_assert_eq!(WeightSpec::from_key(&w.key()).unwrap(), w);
        }
    }
}

/// Monte Carlo estimate of the mean of `|z|^e` over the cell `[−h/2, h/2]³`.
#[test]
fn cell_average_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let samples = 400_000;
    for &(e, h) in &[(-1.0, 0.5), (-0.5, 1.0), (1.5, 0.75)] {
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..samples {
            let z: [f64; 3] = std::array::from_fn(|_| h * (rng.random::<f64>() - 0.5));
            let x = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt().powf(e);
            sum += x;
            sq += x * x;
        }
        let mean = sum / samples as f64;
        let sigma = ((sq / samples as f64 - mean * mean) / samples as f64).sqrt();
        let exact = cell_average_power(e, h).unwrap();
        assert!((exact - mean).abs() <= 5.0 * sigma, "e = {e}: {exact} vs {mean} ± {sigma}");
    }
}
