use proptest::prelude::*;
use squeeze::dtwa::{classical_energy, collective, sample_initial, FieldEvaluator, FieldMethod, FieldScratch, Rk4};
use squeeze::fit::{fit_nu, fit_ramp, optimal_squeezing_from, SizePoint};
use squeeze::math::derive_seed;
use squeeze::model::LatticeSpec;
use squeeze::observables::{classify_qfi_scaling, CorrelationDecay};
use squeeze::quantum::Sector;

fn spec_strategy() -> impl Strategy<Value = LatticeSpec> {
    (4usize..24, 1.1f64..3.0, -3.0f64..2.0).prop_map(|(l, a, jz)| LatticeSpec::power_law(1, l, a, jz))
}

fn norm(s: &[f64; 3]) -> f64 {
    (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_components_are_half_integers(spec in spec_strategy(), p in 0.0f64..=1.0, seed: u64) {
        let e = sample_initial(&spec, p, 4, seed, false).unwrap();
        for k in 0..4 {
            for s in e.trajectory(k) {
                prop_assert!(s.iter().all(|c| c.abs() == 0.5));
            }
        }
    }

    #[test]
    fn constrained_sampling_has_zero_z(l in 1usize..20, seed: u64) {
        let spec = LatticeSpec::power_law(1, 2 * l, 1.5, 0.0);
        let e = sample_initial(&spec, 1.0, 3, seed, true).unwrap();
        for k in 0..3 {
            prop_assert_eq!(e.collective(k)[2], 0.0);
        }
    }

    #[test]
    fn rk4_conserves_norms_energy_and_z(spec in spec_strategy(), seed: u64) {
        let field = FieldEvaluator::new(&spec, FieldMethod::Dense).unwrap();
        let e = sample_initial(&spec, 1.0, 1, seed, false).unwrap();
        let mut s = e.trajectory(0).to_vec();
        let (z0, e0) = (collective(&s)[2], classical_energy(&field, &s));
        let mut rk = Rk4::new(s.len());
        let dt = 2e-3;
        let steps = 500;
        for _ in 0..steps {
            rk.step(&field, &mut s, dt);
        }
        let t = dt * steps as f64;
        let r0 = 3f64.sqrt() / 2.0;
        for v in &s {
            prop_assert!((norm(v) - r0).abs() < 1e-6 * t);
        }
        prop_assert!((collective(&s)[2] - z0).abs() < 1e-9);
        prop_assert!((classical_energy(&field, &s) - e0).abs() < 1e-6 * (1.0 + e0.abs()));
    }

    #[test]
    fn heisenberg_point_conserves_the_collective_spin(l in 4usize..20, alpha in 1.1f64..3.0, seed: u64) {
        let spec = LatticeSpec::power_law(1, l, alpha, 1.0);
        let field = FieldEvaluator::new(&spec, FieldMethod::Dense).unwrap();
        let mut s = sample_initial(&spec, 1.0, 1, seed, false).unwrap().trajectory(0).to_vec();
        let c0 = collective(&s);
        let mut rk = Rk4::new(s.len());
        for _ in 0..400 {
            rk.step(&field, &mut s, 2e-3);
        }
        let c1 = collective(&s);
        for a in 0..3 {
            prop_assert!((c1[a] - c0[a]).abs() < 1e-8, "component {a}: {} → {}", c0[a], c1[a]);
        }
    }

    #[test]
    fn dense_and_convolution_fields_agree(l in 4usize..40, alpha in 1.1f64..4.0, jz in -2.0f64..2.0, seed: u64) {
        let spec = LatticeSpec::power_law(1, l, alpha, jz);
        let dense = FieldEvaluator::new(&spec, FieldMethod::Dense).unwrap();
        let fft = FieldEvaluator::new(&spec, FieldMethod::Convolution).unwrap();
        let s = sample_initial(&spec, 0.5, 1, seed, false).unwrap().trajectory(0).to_vec();
        let (mut a, mut b) = (vec![[0.0; 3]; l], vec![[0.0; 3]; l]);
        let mut scratch = FieldScratch::default();
        dense.apply(&s, &mut a, &mut scratch);
        let mut scratch = FieldScratch::default();
        fft.apply(&s, &mut b, &mut scratch);
        for (x, y) in a.iter().zip(&b) {
            for c in 0..3 {
                prop_assert!((x[c] - y[c]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn planted_exponents_are_recovered(nu in 0.0f64..1.2, c in 0.01f64..10.0) {
        let pts: Vec<SizePoint> = [100.0, 300.0, 1000.0, 3000.0]
            .iter()
            .map(|&n: &f64| SizePoint { n, xi2_opt: c * n.powf(-nu), err: 0.0 })
            .collect();
        let f = fit_nu(&pts).unwrap();
        prop_assert!((f.nu - nu).abs() < 1e-3);
    }

    #[test]
    fn optimum_is_invariant_under_time_rescaling(scale in 0.1f64..10.0, depth in 0.05f64..0.5, t_min in 1.0f64..3.0) {
        let t: Vec<f64> = (0..200).map(|i| 0.02 * i as f64).collect();
        let xi2: Vec<f64> = t.iter().map(|&x| 1.0 - (1.0 - depth) * (-(x - t_min).powi(2)).exp() * (1.0 - (-(x * x)).exp())).collect();
        let err = vec![0.01; t.len()];
        let a = optimal_squeezing_from(&t, &xi2, &err, 0.3, 7).unwrap();
        let ts: Vec<f64> = t.iter().map(|x| x * scale).collect();
        let b = optimal_squeezing_from(&ts, &xi2, &err, 0.3 * scale, 7).unwrap();
        prop_assert!((a.xi2_opt - b.xi2_opt).abs() < 1e-9);
        prop_assert!((a.t_opt * scale - b.t_opt).abs() < 1e-9 * scale);
    }

    #[test]
    fn ramp_fit_beats_a_line_on_two_phase_data(jc in -3.5f64..-0.5, width in 0.1f64..1.0, top in 0.2f64..0.8) {
        let pts: Vec<(f64, f64)> = (0..9)
            .map(|i| {
                let x = -4.0 + 0.5 * i as f64;
                (x, top * ((x - jc + width / 2.0) / width).clamp(0.0, 1.0))
            })
            .collect();
        let r = fit_ramp(&pts).unwrap();
        prop_assert!(r.ramp_start <= r.ramp_end);
        prop_assert!(r.residual <= r.line_residual + 1e-12);
    }

    #[test]
    fn sector_rank_inverts_state(n in 1usize..16, frac in 0.0f64..=1.0) {
        let k = (frac * n as f64).round() as usize;
        let s = Sector::new(n, k).unwrap();
        for idx in 0..s.dim().min(500) {
            let st = s.state(idx);
            prop_assert_eq!(st.count_ones() as usize, k);
            prop_assert_eq!(s.rank(st), idx);
        }
    }

    #[test]
    fn qfi_classification_is_bounded(p in 0.0f64..6.0, d in 1u32..=3) {
        let d_f = d as f64;
        if let Ok(c) = classify_qfi_scaling(CorrelationDecay::Power { p }, d) {
            prop_assert!((0.0..=2.0).contains(&c.qfi));
            prop_assert_eq!(c.sensitivity, c.qfi / 2.0);
            if p > d_f {
                prop_assert_eq!(c.qfi, 1.0);
            } else if p < d_f - 1.0 {
                prop_assert_eq!(c.qfi, 2.0);
            } else {
                prop_assert!((c.qfi - (1.0 + p - d_f)).abs() < 1e-12);
            }
        } else {
            prop_assert!(p == d_f || p == d_f - 1.0);
        }
    }

    #[test]
    fn derived_seeds_differ(master: u64, i in 0u64..1000, j in 0u64..1000) {
        prop_assume!(i != j);
        prop_assert_ne!(derive_seed(master, i), derive_seed(master, j));
    }
}
