//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

mod common;

use std::process::ExitCode;

use common::*;
use qnd_core::constants::*;
use qnd_core::inference::*;
use qnd_core::motion::*;
use qnd_core::specfit::synthetic::*;
use qnd_core::specfit::*;
use qnd_core::stark::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn threshold_math() -> Outcome {
    let k = discrimination_threshold(0.52, 0.06, 22).unwrap();
    let model = QndModel::new(0.52, 0.06, 22).unwrap();
    let e = detection_errors(&model);
    let report = fidelity_report(&model);
    let (e_d_exact, e_b_exact) = detection_errors_exact(&rational(52, 100), &rational(6, 100), 22, k as u64);
    let oracle_ok = (e.error_dark - e_d_exact).abs() < 1e-15 && (e.error_bright - e_b_exact).abs() < 1e-15;
    let k_ok = k == 5;
    let e_d_ok = (e.error_dark - 1.5e-3).abs() <= 0.05e-3;
    let e_b_ok = (e.error_bright - 4.7e-3).abs() <= 0.05e-3;
    let f_ok = (report.fidelity_overall * 100.0 - 99.5).abs() <= 0.05;
    outcome(
        k_ok && e_d_ok && e_b_ok && f_ok && oracle_ok,
        format!(
            "k_t={k} [{}], E_d={:.4e} [{}], E_b={:.4e} [{}] (target 4.7e-3 +/- 0.05e-3), overall={:.3}% [{}], exact-rational oracle [{}]",
            ok(k_ok),
            e.error_dark,
            ok(e_d_ok),
            e.error_bright,
            ok(e_b_ok),
            report.fidelity_overall * 100.0,
            ok(f_ok),
            ok(oracle_ok)
        ),
    )
}

fn threshold_grid() -> Outcome {
    let mut cases = 0;
    let mut mismatches = 0;
    for a in 1..=19i64 {
        for b in 1..a {
            for n in 1..=50u32 {
                cases += 1;
                let analytic = discrimination_threshold(a as f64 / 20.0, b as f64 / 20.0, n as usize).unwrap();
                if analytic != brute_force_threshold(a, b, 20, n) {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches over {cases} (p_alpha > p_beta) grid cases"))
}

fn bayes() -> Outcome {
    let check = |s: u64, mean_pct: f64, std_pct: f64| {
        let b = bayes_fidelity(s, 0);
        let mean_round = (b.mean * 1000.0).round() / 10.0;
        let std_round = round_sig(b.std * 100.0);
        let pass = (mean_round - mean_pct).abs() < 1e-9 && (std_round - std_pct).abs() < 1e-9;
        (pass, format!("({s},0): {:.3}% +/- {:.3}%", b.mean * 100.0, b.std * 100.0))
    };
    let (p1, d1) = check(105, 99.1, 0.9);
    let (p2, d2) = check(163, 99.4, 0.6);
    outcome(p1 && p2, format!("{d1}; {d2}"))
}

fn round_sig(x: f64) -> f64 {
    let scale = 10f64.powf(x.abs().log10().floor());
    (x / scale).round() * scale
}

fn monte_carlo() -> Outcome {
    let model = QndModel::operating_point();
    let e = detection_errors(&model);
    let n = 100_000;
    let run = |start: StateLabel, seed: u64| {
        let cfg = TimeTraceConfig::new(n, 0.0, 1.0, seed).unwrap().starting(start);
        let records = simulate_timetrace(&model, &SuccessSource::Analytic, &cfg);
        let (total, wrong) = misclassification(&records, start);
        wrong as f64 / total as f64
    };
    let within = |rate: f64, p: f64| (rate - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt();
    let bright = run(StateLabel::Bright, 2024);
    let dark = run(StateLabel::Dark, 2025);
    outcome(
        within(bright, e.error_bright) && within(dark, e.error_dark),
        format!(
            "bright {bright:.4e} vs E_b {:.4e}; dark {dark:.4e} vs E_d {:.4e}; 3 SE = {:.2e} / {:.2e}",
            e.error_bright,
            e.error_dark,
            3.0 * (e.error_bright * (1.0 - e.error_bright) / n as f64).sqrt(),
            3.0 * (e.error_dark * (1.0 - e.error_dark) / n as f64).sqrt()
        ),
    )
}

fn jump_trace() -> Outcome {
    let model = QndModel::operating_point();
    let seeds = 100;
    let clean = (0..seeds)
        .filter(|&seed| {
            let cfg = TimeTraceConfig::new(268, 0.0, 1.0, seed).unwrap().with_forced_jump(105);
            let records = simulate_timetrace(&model, &SuccessSource::Analytic, &cfg);
            records.iter().all(|r| {
                let expected = if r.attempt_index < 105 { StateLabel::Bright } else { StateLabel::Dark };
                r.true_state == expected && r.classification == Some(expected)
            })
        })
        .count();
    let e = detection_errors(&model);
    let expected = (1.0 - e.error_bright).powi(105) * (1.0 - e.error_dark).powi(163);
    outcome(
        clean * 100 >= 98 * seeds as usize,
        format!(
            "{clean}/{seeds} seeds with zero misclassifications (need >= 98); binomial expectation {:.1}%",
            expected * 100.0
        ),
    )
}

fn sideband_anchor() -> Outcome {
    let params = SidebandParams::operating_point();
    let cal = operating_point_coupling(&LineCatalog::n2_plus()).unwrap();
    let shift = operating_point_shift(&LineCatalog::n2_plus()).unwrap();
    let odf = OdfConfig::new(shift, OPERATING_T_ODF, cal.coupling_constant, DEFAULT_MASS_CORRECTION).unwrap();
    let alpha = odf_displacement(&odf, params.eta);
    let dist = fock_distribution_coherent(alpha, coherent_cutoff(alpha * alpha)).unwrap();
    let p = sideband_signal(&dist, OPERATING_T_729, &params);
    let ground = FockDistribution::number_state(0);
    let max_ground = (0..=2000)
        .map(|i| sideband_signal(&ground, i as f64 * 0.5e-6, &params))
        .fold(0.0f64, |m, v| m.max(v.abs()));
    outcome(
        (p - 0.52).abs() <= 0.01 && max_ground == 0.0,
        format!("|alpha|={alpha:.4}, kappa={:.4}, P(20 us)={p:.5}, max n=0 signal over 0..1 ms = {max_ground}", cal.coupling_constant),
    )
}

fn stark_physics() -> Outcome {
    let cat = LineCatalog::n2_plus();
    let state = n2_bright_state();
    let mut worst_add = 0.0f64;
    let mut worst_lin = 0.0f64;
    for i in 0..200 {
        let f = cat.find_branch(R11_HALF).unwrap().frequency + (-100.0 + i as f64) * 1e9 + 0.37e9;
        let laser = LaserField::pi(OPERATING_INTENSITY, f).unwrap();
        let total = ac_stark_shift(&state, &laser, &cat).unwrap();
        let parts: f64 = cat
            .lines_from(&state)
            .map(|l| {
                let single = LineCatalog::new("one", "", vec![l.clone()]).unwrap();
                ac_stark_shift(&state, &laser, &single).unwrap()
            })
            .sum();
        let scale: f64 = cat
            .lines_from(&state)
            .map(|l| (line_kernel(l, &state, &laser, DEFAULT_POLE_GUARD).unwrap() * l.a_vib).abs())
            .sum();
        worst_add = worst_add.max((total - parts).abs() / scale);
        let tripled = ac_stark_shift(&state, &LaserField::pi(3.0 * OPERATING_INTENSITY, f).unwrap(), &cat).unwrap();
        worst_lin = worst_lin.max((tripled - 3.0 * total).abs() / (3.0 * total).abs());
    }

    let mut worst_orth = 0.0f64;
    for tj1 in 0..=12i32 {
        for tj2 in 0..=12 {
            let triangle: Vec<i32> = ((tj1 - tj2).abs()..=tj1 + tj2).step_by(2).collect();
            for &tj3 in &triangle {
                for &tj3p in &triangle {
                    let lim = tj3.min(tj3p);
                    for tm3 in (-lim..=lim).step_by(2) {
                        let mut sum = 0.0;
                        for tm1 in (-tj1..=tj1).step_by(2) {
                            let tm2 = -tm1 - tm3;
                            if tm2.abs() <= tj2 {
                                sum += wigner3j(tj1, tj2, tj3, tm1, tm2, tm3).unwrap()
                                    * wigner3j(tj1, tj2, tj3p, tm1, tm2, tm3).unwrap();
                            }
                        }
                        let expected = if tj3 == tj3p { 1.0 } else { 0.0 };
                        worst_orth = worst_orth.max(((tj3 + 1) as f64 * sum - expected).abs());
                    }
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_3j = 0.0f64;
    let mut checked = 0;
    while checked < 1000 {
        let tj1: i32 = rng.random_range(0..=60);
        let tj2: i32 = rng.random_range(0..=60);
        let tj3 = (tj1 - tj2).abs() + 2 * rng.random_range(0..=tj1.min(tj2));
        let tm1 = -tj1 + 2 * rng.random_range(0..=tj1);
        let tm2 = -tj2 + 2 * rng.random_range(0..=tj2);
        let tm3 = -tm1 - tm2;
        if tm3.abs() > tj3 {
            continue;
        }
        checked += 1;
        let got = wigner3j(tj1, tj2, tj3, tm1, tm2, tm3).unwrap();
        let exact = wigner3j_exact(tj1, tj2, tj3, tm1, tm2, tm3);
        let err = if exact.sign == 0 {
            got.abs()
        } else {
            (got - exact.value()).abs() / exact.value().abs()
        };
        worst_3j = worst_3j.max(err);
    }

    let round_off = 8.0 * f64::EPSILON;
    outcome(
        worst_add <= round_off && worst_lin <= round_off && worst_orth <= 1e-12 && worst_3j <= 1e-12,
        format!(
            "additivity {worst_add:.1e}, linearity {worst_lin:.1e} (round-off bound {round_off:.1e}); orthogonality {worst_orth:.1e}; 3j vs exact rational on {checked} arguments {worst_3j:.1e}"
        ),
    )
}

fn spectroscopy() -> Outcome {
    let cat = spectroscopy_catalog();
    let line = cat.find_branch(R11_HALF).unwrap().clone();
    let state = n2_bright_state();

    let mut worst_trip = 0.0f64;
    for i in 0..400 {
        let f = line.frequency - 60e9 + i as f64 * 0.3e9 + 0.011e9;
        let Ok(laser) = LaserField::pi(1e6, f) else { continue };
        let Ok(shift) = ac_stark_shift(&state, &laser, &cat) else { continue };
        let point = StarkDataPoint::new(f, f - line.frequency, 1e6, shift / 1e6, 1e-3).unwrap();
        match extract_avib(&point, &line, &state, &cat, 1.0) {
            Ok(a) => worst_trip = worst_trip.max((a - line.a_vib).abs() / line.a_vib),
            Err(qnd_core::Error::DegenerateModel(_)) => {}
            Err(e) => return outcome(false, format!("extract_avib failed at {f}: {e}")),
        }
    }

    let c = line_amplitude(&line, &state).unwrap();
    let clean = synthetic_line_points::<ChaCha8Rng>(SPECTROSCOPY_LINE_CENTER, c, &force_spectrum_detunings(), 0.05, None).unwrap();
    let fit = fit_line_center(&clean).unwrap();
    let f0_err = (fit.f0 - SPECTROSCOPY_LINE_CENTER).abs();

    let replicates = 500;
    let inside = (0..replicates)
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
            let pts = synthetic_stark_points(
                &cat,
                &line,
                &state,
                &force_spectrum_detunings(),
                0.05,
                DEFAULT_MASS_CORRECTION,
                Some(&mut rng),
            )
            .unwrap();
            let mean = pts
                .iter()
                .map(|p| extract_avib(p, &line, &state, &cat, DEFAULT_MASS_CORRECTION).unwrap())
                .sum::<f64>()
                / pts.len() as f64;
            (mean - 4.03e4).abs() <= 0.11e4
        })
        .count();
    outcome(
        worst_trip <= 1e-10 && f0_err <= 1e8 && inside * 100 >= 95 * replicates as usize,
        format!(
            "round trip {worst_trip:.1e} rel; f0 error {f0_err:.2e} Hz; A_vib inside 4.03(11)e4 in {inside}/{replicates} replicates"
        ),
    )
}

fn mass_correction() -> Outcome {
    let lambda = mass_corrected_wavelength(787.47e-9, MASS_CA40, MASS_N2).unwrap();
    outcome((938e-9..=944e-9).contains(&lambda), format!("{:.2} nm", lambda * 1e9))
}

fn budget() -> Outcome {
    let far = scattering_budget(10e9, 10e3).unwrap();
    let near = scattering_budget(100e6, 10e3).unwrap();
    outcome(
        far.cycles == 1000.0 && far.bsb_pulses == 20000.0 && near.cycles == 10.0,
        format!(
            "(10 GHz, 10 kHz) -> {} cycles / {} pulses; (100 MHz, 10 kHz) -> {} cycles",
            far.cycles, far.bsb_pulses, near.cycles
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "off"
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("threshold math", threshold_math),
        ("analytic vs brute-force threshold grid", threshold_grid),
        ("Bayesian fidelity", bayes),
        ("Monte Carlo error rates", monte_carlo),
        ("jump trace, 105 bright then 163 dark", jump_trace),
        ("sideband model anchor", sideband_anchor),
        ("Stark engine physics", stark_physics),
        ("spectroscopy round trips", spectroscopy),
        ("mass-corrected wavelength", mass_correction),
        ("scattering budget anchors", budget),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let o = run();
        if !o.pass {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {} ({:.2} s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("SKIP 11 absolute non-bright (red) spectrum values and absolute experimental contrast: excluded, covered by criteria 6-8");
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
