//! Independent reference implementations in exact arithmetic.

#![allow(dead_code)]

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

fn factorial(n: i64) -> BigInt {
    assert!(n >= 0, "factorial of {n}");
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Squared 3j symbol as an exact rational together with the symbol's sign.
/// Arguments are twice the angular momenta, as in the library.
pub struct ExactThreeJ {
    pub sign: i32,
    pub square: BigRational,
}

impl ExactThreeJ {
    pub fn value(&self) -> f64 {
        self.sign as f64 * self.square.to_f64().expect("finite").sqrt()
    }
}

/// Racah's single-sum formula evaluated with big rationals.
pub fn wigner3j_exact(tj1: i32, tj2: i32, tj3: i32, tm1: i32, tm2: i32, tm3: i32) -> ExactThreeJ {
    let zero = ExactThreeJ {
        sign: 0,
        square: BigRational::zero(),
    };
    if tm1 + tm2 + tm3 != 0 {
        return zero;
    }
    if tj3 < (tj1 - tj2).abs() || tj3 > tj1 + tj2 || (tj1 + tj2 + tj3) % 2 != 0 {
        return zero;
    }
    let h = |x: i32| -> i64 {
        assert!(x % 2 == 0, "half-integer combination {x}");
        (x / 2) as i64
    };
    let (a, b, c) = (h(tj1 + tj2 - tj3), h(tj1 - tj2 + tj3), h(-tj1 + tj2 + tj3));
    let big = h(tj1 + tj2 + tj3) + 1;
    let triangle = BigRational::new(factorial(a) * factorial(b) * factorial(c), factorial(big));
    let moments = [
        h(tj1 + tm1),
        h(tj1 - tm1),
        h(tj2 + tm2),
        h(tj2 - tm2),
        h(tj3 + tm3),
        h(tj3 - tm3),
    ]
    .iter()
    .fold(BigInt::one(), |acc, &n| acc * factorial(n));

    let d1 = h(tj1 + tj2 - tj3);
    let d2 = h(tj1 - tm1);
    let d3 = h(tj2 + tm2);
    let d4 = h(tj3 - tj2 + tm1);
    let d5 = h(tj3 - tj1 - tm2);
    let k_min = 0.max(-d4).max(-d5);
    let k_max = d1.min(d2).min(d3);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = factorial(k) * factorial(d1 - k) * factorial(d2 - k) * factorial(d3 - k) * factorial(d4 + k) * factorial(d5 + k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return zero;
    }
    let phase = h(tj1 - tj2 - tm3);
    let phase_sign = if phase.rem_euclid(2) == 0 { 1 } else { -1 };
    let sum_sign = if sum.is_negative() { -1 } else { 1 };
    ExactThreeJ {
        sign: phase_sign * sum_sign,
        square: triangle * BigRational::from_integer(moments) * &sum * &sum,
    }
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn binomial_coefficient(n: u64, k: u64) -> BigInt {
    factorial(n as i64) / (factorial(k as i64) * factorial((n - k) as i64))
}

/// Exact `C(n,k) p^k (1-p)^(n-k)`.
pub fn binomial_pmf_exact(p: &BigRational, k: u64, n: u64) -> BigRational {
    let q = BigRational::one() - p;
    BigRational::from_integer(binomial_coefficient(n, k)) * num::pow(p.clone(), k as usize) * num::pow(q, (n - k) as usize)
}

/// Exact (E_d, E_b) for threshold `k_t`: dark counted above `k_t`, bright at or below.
pub fn detection_errors_exact(p_alpha: &BigRational, p_beta: &BigRational, n: u64, k_t: u64) -> (f64, f64) {
    let e_d: BigRational = (k_t + 1..=n).map(|k| binomial_pmf_exact(p_beta, k, n)).fold(BigRational::zero(), |a, b| a + b);
    let e_b: BigRational = (0..=k_t).map(|k| binomial_pmf_exact(p_alpha, k, n)).fold(BigRational::zero(), |a, b| a + b);
    (e_d.to_f64().expect("finite"), e_b.to_f64().expect("finite"))
}

/// Largest `k` at which the dark likelihood strictly exceeds the bright one,
/// for probabilities `a/den` (bright) and `b/den` (dark), by exhaustive
/// integer comparison. The binomial coefficient cancels.
pub fn brute_force_threshold(a: i64, b: i64, den: i64, n: u32) -> usize {
    let mut last = None;
    for k in 0..=n {
        let dark = BigInt::from(b).pow(k) * BigInt::from(den - b).pow(n - k);
        let bright = BigInt::from(a).pow(k) * BigInt::from(den - a).pow(n - k);
        if dark > bright {
            last = Some(k as usize);
        }
    }
    last.unwrap_or(0)
}

/// Single-line shift in Hz from the rotating and counter-rotating terms kept
/// separately, `-(3πc²/2ω₀³)·(Γ/(ω₀-ω) + Γ/(ω₀+ω))·I / h`.
pub fn single_line_shift(line_hz: f64, laser_hz: f64, intensity: f64, gamma_eff: f64) -> f64 {
    use qnd_core::constants::{PLANCK, SPEED_OF_LIGHT, TWO_PI};
    let w0 = TWO_PI * line_hz;
    let w = TWO_PI * laser_hz;
    let pre = 3.0 * std::f64::consts::PI * SPEED_OF_LIGHT * SPEED_OF_LIGHT / (2.0 * w0 * w0 * w0);
    -pre * gamma_eff * (1.0 / (w0 - w) + 1.0 / (w0 + w)) * intensity / PLANCK
}
