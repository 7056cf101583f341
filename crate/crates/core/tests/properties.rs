mod common;

use common::*;
use num::traits::ToPrimitive;
use proptest::prelude::*;
use qnd_core::inference::*;
use qnd_core::io;
use qnd_core::motion::*;
use qnd_core::specfit::synthetic::spectroscopy_catalog;
use qnd_core::specfit::*;
use qnd_core::stark::*;

/// (2j1, 2j2, 2j3, 2m1, 2m2, 2m3) with every column parity-consistent and
/// the triangle rule satisfied; m3 is fixed by m1 + m2 + m3 = 0.
fn three_j_args(max_twice_j: i32) -> impl Strategy<Value = (i32, i32, i32, i32, i32, i32)> {
    (0..=max_twice_j, 0..=max_twice_j, any::<u32>(), any::<u32>(), any::<u32>())
        .prop_map(|(tj1, tj2, u3, u1, u2)| {
            let steps = tj1.min(tj2) as u32 + 1;
            let tj3 = (tj1 - tj2).abs() + 2 * (u3 % steps) as i32;
            let tm1 = -tj1 + 2 * (u1 % (tj1 as u32 + 1)) as i32;
            let tm2 = -tj2 + 2 * (u2 % (tj2 as u32 + 1)) as i32;
            (tj1, tj2, tj3, tm1, tm2, -tm1 - tm2)
        })
        .prop_filter("|m3| <= j3", |a| a.5.abs() <= a.2)
}

fn phase(exponent_twice: i32) -> f64 {
    if (exponent_twice / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn three_j_matches_exact_oracle((tj1, tj2, tj3, tm1, tm2, tm3) in three_j_args(40)) {
        let got = wigner3j(tj1, tj2, tj3, tm1, tm2, tm3).unwrap();
        let exact = wigner3j_exact(tj1, tj2, tj3, tm1, tm2, tm3);
        if exact.sign == 0 {
            prop_assert!(got.abs() < 1e-14, "{got}");
        } else {
            prop_assert!(close(got, exact.value(), 1e-12), "{got} vs {}", exact.value());
        }
    }

    #[test]
    fn three_j_permutation_and_reflection((tj1, tj2, tj3, tm1, tm2, tm3) in three_j_args(30)) {
        let w = wigner3j(tj1, tj2, tj3, tm1, tm2, tm3).unwrap();
        let cyclic = wigner3j(tj2, tj3, tj1, tm2, tm3, tm1).unwrap();
        let sign = phase(tj1 + tj2 + tj3);
        let swapped = wigner3j(tj2, tj1, tj3, tm2, tm1, tm3).unwrap();
        let reflected = wigner3j(tj1, tj2, tj3, -tm1, -tm2, -tm3).unwrap();
        prop_assert!((w - cyclic).abs() <= 1e-14);
        prop_assert!((w - sign * swapped).abs() <= 1e-14);
        prop_assert!((w - sign * reflected).abs() <= 1e-14);
    }

    #[test]
    fn three_j_orthogonality(tj1 in 0i32..=16, tj2 in 0i32..=16, u in any::<u32>(), v in any::<u32>(), w in any::<u32>()) {
        let steps = tj1.min(tj2) as u32 + 1;
        let tj3 = (tj1 - tj2).abs() + 2 * (u % steps) as i32;
        let tj3p = (tj1 - tj2).abs() + 2 * (v % steps) as i32;
        let lim = tj3.min(tj3p);
        let tm3 = -lim + 2 * (w % (lim as u32 + 1)) as i32;
        let mut sum = 0.0;
        for tm1 in (-tj1..=tj1).step_by(2) {
            let tm2 = -tm1 - tm3;
            if tm2.abs() > tj2 {
                continue;
            }
            sum += wigner3j(tj1, tj2, tj3, tm1, tm2, tm3).unwrap() * wigner3j(tj1, tj2, tj3p, tm1, tm2, tm3).unwrap();
        }
        let expected = if tj3 == tj3p { 1.0 } else { 0.0 };
        prop_assert!(((tj3 + 1) as f64 * sum - expected).abs() <= 1e-12);
    }
}

fn ground() -> Level {
    Level::new(N2_GROUND_LABEL, 1).unwrap()
}

fn line(freq: f64, a: f64, upper_twice_j: i32, branch: &str) -> TransitionLine {
    TransitionLine::new(ground(), Level::new(format!("u{branch}"), upper_twice_j).unwrap(), freq, a, 0.5, branch).unwrap()
}

fn catalog(lines: Vec<TransitionLine>) -> LineCatalog {
    LineCatalog::new("test", "", lines).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn stark_shift_is_additive_over_lines(
        f1 in 350e12f64..420e12,
        f2 in 350e12f64..420e12,
        a1 in 1e3f64..1e6,
        a2 in 1e3f64..1e6,
        laser in 360e12f64..400e12,
        tj in prop::sample::select(vec![1, 3]),
    ) {
        let l1 = line(f1, a1, tj, "a");
        let l2 = line(f2, a2, 1, "b");
        prop_assume!((laser - f1).abs() > 1e9 && (laser - f2).abs() > 1e9);
        let state = n2_bright_state();
        let field = LaserField::pi(2e6, laser).unwrap();
        let both = ac_stark_shift(&state, &field, &catalog(vec![l1.clone(), l2.clone()])).unwrap();
        let s1 = ac_stark_shift(&state, &field, &catalog(vec![l1])).unwrap();
        let s2 = ac_stark_shift(&state, &field, &catalog(vec![l2])).unwrap();
        prop_assert!((both - (s1 + s2)).abs() <= 4.0 * f64::EPSILON * (s1.abs() + s2.abs()));
    }

    #[test]
    fn stark_shift_is_linear_in_intensity(detuning in -150e9f64..150e9, scale in 0.01f64..100.0) {
        prop_assume!(detuning.abs() > 1e9);
        let cat = LineCatalog::n2_plus();
        let state = n2_bright_state();
        let f = cat.find_branch(R11_HALF).unwrap().frequency + detuning;
        let base = ac_stark_shift(&state, &LaserField::pi(1e6, f).unwrap(), &cat).unwrap();
        let scaled = ac_stark_shift(&state, &LaserField::pi(1e6 * scale, f).unwrap(), &cat).unwrap();
        prop_assert!(close(scaled, scale * base, 1e-13), "{scaled} vs {}", scale * base);
    }

    #[test]
    fn single_line_matches_two_term_oracle(
        f0 in 300e12f64..450e12,
        offset in prop_oneof![-1e13f64..-1e6, 1e6f64..1e13],
        a in 1e2f64..1e7,
        tj in prop::sample::select(vec![1, 3]),
    ) {
        let l = line(f0, a, tj, "x");
        let state = n2_bright_state();
        let field = LaserField::pi(3e5, f0 + offset).unwrap();
        let got = ac_stark_shift(&state, &field, &catalog(vec![l.clone()])).unwrap();
        let gamma = a * l.s_rot * angular_weight(&l, &state).unwrap();
        let want = single_line_shift(f0, f0 + offset, 3e5, gamma);
        prop_assert!(close(got, want, 1e-9), "{got} vs {want}");
    }

    #[test]
    fn avib_round_trip_and_linearity(detuning_ghz in -60.0f64..-2.0, scale in 0.2f64..5.0) {
        let cat = spectroscopy_catalog();
        let target = cat.find_branch(R11_HALF).unwrap().clone();
        let state = n2_bright_state();
        let f = target.frequency + detuning_ghz * 1e9;
        let point_for = |catalog: &LineCatalog| {
            let per_i = ac_stark_shift(&state, &LaserField::pi(1.0, f).unwrap(), catalog).unwrap();
            StarkDataPoint::new(f, f - target.frequency, 1e6, per_i, 0.05 * per_i.abs()).unwrap()
        };
        let a = extract_avib(&point_for(&cat), &target, &state, &cat, 1.0).unwrap();
        prop_assert!(close(a, target.a_vib, 1e-10), "{a} vs {}", target.a_vib);

        let scaled_lines = cat
            .lines
            .iter()
            .map(|l| if l.branch == R11_HALF { l.with_a_vib(scale * l.a_vib) } else { l.clone() })
            .collect();
        let scaled = catalog_named(scaled_lines);
        let a_scaled = extract_avib(&point_for(&scaled), &target, &state, &cat, 1.0).unwrap();
        prop_assert!(close(a_scaled, scale * target.a_vib, 1e-9), "{a_scaled}");
    }

    #[test]
    fn budget_scales_with_detuning_over_shift(d in 1e8f64..1e12, s in 1e2f64..1e5, k in 0.1f64..10.0) {
        let b = scattering_budget(d, s).unwrap();
        prop_assert!(close(scattering_budget(k * d, s).unwrap().cycles, k * b.cycles, 1e-13));
        prop_assert!(close(scattering_budget(d, k * s).unwrap().cycles, b.cycles / k, 1e-13));
        prop_assert!(close(scattering_budget(-d, s).unwrap().cycles, b.cycles, 0.0));
        prop_assert!(close(b.bsb_pulses, 20.0 * b.cycles, 1e-15));
    }
}

fn catalog_named(lines: Vec<TransitionLine>) -> LineCatalog {
    LineCatalog::new("scaled", "", lines).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sideband_signal_is_a_probability(
        alpha in 0.0f64..3.0,
        t in 0.0f64..300e-6,
        delta in 0.0f64..50e3,
        t2 in prop_oneof![Just(f64::INFINITY), 5e-6f64..1e-3],
    ) {
        let params = SidebandParams::operating_point().with_delta_t2(delta, t2);
        let dist = fock_distribution_coherent(alpha, coherent_cutoff(alpha * alpha)).unwrap();
        let p = sideband_signal(&dist, t, &params);
        prop_assert!((0.0..=1.0).contains(&p), "{p}");
        let coherent_ground = SidebandParams::operating_point().with_delta_t2(delta, f64::INFINITY);
        prop_assert_eq!(sideband_signal(&FockDistribution::number_state(0), t, &coherent_ground), 0.0);
    }

    #[test]
    fn contrast_grows_with_displacement(frac in 0.02f64..0.98) {
        let params = SidebandParams::operating_point();
        let t = frac * 0.5 / (params.eta * params.omega0);
        let mut prev = -1.0;
        for i in 0..=50 {
            let alpha = i as f64 / 50.0;
            let dist = fock_distribution_coherent(alpha, coherent_cutoff(alpha * alpha)).unwrap();
            let p = sideband_signal(&dist, t, &params);
            prop_assert!(p > prev || (i == 0 && p == 0.0), "alpha={alpha}: {p} <= {prev}");
            prev = p;
        }
    }

    #[test]
    fn generalized_reduces_to_simple_at_small_eta(alpha in 0.1f64..2.5, t in 1e-3f64..0.2) {
        let params = SidebandParams::new(1e-4, 90e3, 0.0, f64::INFINITY, 620e3).unwrap();
        let dist = fock_distribution_coherent(alpha, coherent_cutoff(alpha * alpha)).unwrap();
        let general = sideband_signal_with(&dist, t, &params, RabiModel::Generalized);
        let closed: f64 = dist
            .probabilities()
            .iter()
            .enumerate()
            .map(|(n, p)| {
                let s = (std::f64::consts::PI * 1e-4 * 90e3 * (n as f64).sqrt() * t).sin();
                p * s * s
            })
            .sum();
        prop_assert!(close(general, closed, 1e-6) || (general - closed).abs() < 1e-12, "{general} vs {closed}");
    }

    #[test]
    fn stark_points_survive_csv(
        rows in prop::collection::vec((300e12f64..450e12, 1e3f64..1e8, -1e-2f64..1e-2, 1e-9f64..1e-3), 1..20),
    ) {
        let points: Vec<StarkDataPoint> = rows
            .iter()
            .map(|&(f, i, s, sig)| StarkDataPoint::new(f, f - 380e12, i, s, sig).unwrap())
            .collect();
        let back = io::parse_stark_points(&io::stark_points_to_csv(&points), "mem", Some(380e12)).unwrap();
        prop_assert_eq!(back, points);
    }

    #[test]
    fn timetraces_survive_csv(seed in any::<u64>(), prep in 0.0f64..=1.0, jump in 0.0f64..0.1) {
        let model = QndModel::operating_point();
        let cfg = TimeTraceConfig::new(40, jump, prep, seed).unwrap();
        let records = simulate_timetrace_serial(&model, &SuccessSource::Analytic, &cfg);
        let back = io::parse_timetrace(&io::timetrace_to_csv(&records), "mem").unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in back.iter().zip(&records) {
            prop_assert_eq!((a.attempt_index, a.k_successes, a.n_used, a.classification, a.true_state),
                (b.attempt_index, b.k_successes, b.n_used, b.classification, b.true_state));
            prop_assert!(a.p_hat == b.p_hat || (a.p_hat.is_nan() && b.p_hat.is_nan()));
        }
    }

    #[test]
    fn parallel_and_serial_traces_agree(seed in any::<u64>(), jump in 0.0f64..0.05, prep in 0.5f64..=1.0, n in 1usize..300) {
        let model = QndModel::operating_point();
        let cfg = TimeTraceConfig::new(n, jump, prep, seed).unwrap();
        let par = simulate_timetrace(&model, &SuccessSource::Analytic, &cfg);
        let ser = simulate_timetrace_serial(&model, &SuccessSource::Analytic, &cfg);
        prop_assert_eq!(io::timetrace_to_csv(&par), io::timetrace_to_csv(&ser));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn threshold_matches_brute_force(a in 2i64..100, b in 1i64..99, n in 1u32..80) {
        prop_assume!(b < a);
        let k = discrimination_threshold(a as f64 / 100.0, b as f64 / 100.0, n as usize).unwrap();
        prop_assert_eq!(k, brute_force_threshold(a, b, 100, n));
    }

    #[test]
    fn detection_errors_match_exact_sums(a in 2i64..50, b in 1i64..49, n in 1usize..40) {
        prop_assume!(b < a);
        let model = QndModel::new(a as f64 / 50.0, b as f64 / 50.0, n).unwrap();
        let e = detection_errors(&model);
        let (e_d, e_b) = detection_errors_exact(&rational(a, 50), &rational(b, 50), n as u64, model.threshold_k as u64);
        prop_assert!((e.error_dark - e_d).abs() <= 1e-13 && (e.error_bright - e_b).abs() <= 1e-13);
    }

    #[test]
    fn likelihood_matches_exact(num in 1i64..200, n in 0u64..160, k_frac in 0.0f64..=1.0) {
        let k = (k_frac * n as f64).round() as u64;
        let got = binomial_likelihood(num as f64 / 200.0, k, n).unwrap();
        let want = binomial_pmf_exact(&rational(num, 200), k, n).to_f64().unwrap();
        prop_assert!((got - want).abs() <= 1e-10 * want + 1e-300, "{got} vs {want}");
    }

    #[test]
    fn total_error_never_grows_with_repetitions(a in 2i64..20, b in 1i64..19) {
        prop_assume!(b < a);
        let total = |n: usize| {
            let e = detection_errors(&QndModel::new(a as f64 / 20.0, b as f64 / 20.0, n).unwrap());
            e.error_dark + e.error_bright
        };
        let mut prev = total(1);
        for n in 2..=60 {
            let cur = total(n);
            prop_assert!(cur <= prev * (1.0 + 1e-12), "n={n}: {cur} > {prev}");
            prev = cur;
        }
    }

    #[test]
    fn bayes_fidelity_is_a_beta_posterior(s in 0u64..1000, f in 0u64..50) {
        let b = bayes_fidelity(s, f);
        let (alpha, beta) = ((f + 1) as f64, (s + 1) as f64);
        let n = alpha + beta;
        prop_assert!(close(b.mean, beta / n, 1e-14));
        prop_assert!(close(b.std * b.std, alpha * beta / (n * n * (n + 1.0)), 1e-12));
    }
}

#[test]
fn calibration_model_survives_json() {
    let model = CalibrationModel::new(vec![0.0, 0.0, 1.5e-8], vec![10.0, 1e-3], vec![4e-4, 1e-9], (2e3, 12e3), 0.1, 90e3).unwrap();
    let text = serde_json::to_string(&model).unwrap();
    let back: CalibrationModel = serde_json::from_str(&text).unwrap();
    assert_eq!(back, model);
}
