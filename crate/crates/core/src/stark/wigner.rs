//! Wigner 3j symbols from the Racah formula.
//!
//! Angular momenta are passed as twice their value so half-integers stay exact.

use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// Largest supported `2j` for any of the three angular momenta.
pub const MAX_TWICE_J: i32 = 200;

fn ln_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // j1+j2+j3+1 bounds every factorial argument in the Racah sum.
        let len = (3 * MAX_TWICE_J / 2 + 2) as usize;
        let mut t = Vec::with_capacity(len);
        let mut acc = 0.0f64;
        t.push(0.0);
        for n in 1..len {
            acc += (n as f64).ln();
            t.push(acc);
        }
        t
    })
}

#[inline]
fn lnf(n: i32) -> f64 {
    ln_factorials()[n as usize]
}

fn binomial(n: i32, k: i32) -> BigInt {
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `(ln|x|, sign(x))` for a non-zero big integer.
fn ln_abs(x: &BigInt) -> (f64, f64) {
    let sign = if x.sign() == Sign::Minus { -1.0 } else { 1.0 };
    let mag = x.magnitude();
    let bits = mag.bits();
    let ln = if bits < 1000 {
        mag.to_f64().expect("finite").ln()
    } else {
        let shift = bits - 64;
        (mag >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
    };
    (ln, sign)
}

fn triangle_ok(tj1: i32, tj2: i32, tj3: i32) -> bool {
    tj3 >= (tj1 - tj2).abs() && tj3 <= tj1 + tj2 && (tj1 + tj2 + tj3) % 2 == 0
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)` with all arguments given as `2j`, `2m`.
///
/// Returns exactly `0.0` when `m1+m2+m3 != 0` or the triangle rule fails.
/// Errors when an `|m| > j`, a column has mismatched parity, or a `j` is
/// negative or above [`MAX_TWICE_J`].
pub fn wigner3j(tj1: i32, tj2: i32, tj3: i32, tm1: i32, tm2: i32, tm3: i32) -> Result<f64> {
    for (tj, tm) in [(tj1, tm1), (tj2, tm2), (tj3, tm3)] {
        if !(0..=MAX_TWICE_J).contains(&tj) {
            return Err(Error::domain(format!("2j = {tj} outside [0, {MAX_TWICE_J}]")));
        }
        if tm.abs() > tj {
            return Err(Error::domain(format!("|2m| = {} exceeds 2j = {tj}", tm.abs())));
        }
        if (tj + tm) % 2 != 0 {
            return Err(Error::domain(format!("parity mismatch between 2j = {tj} and 2m = {tm}")));
        }
    }
    if tm1 + tm2 + tm3 != 0 || !triangle_ok(tj1, tj2, tj3) {
        return Ok(0.0);
    }

    // Integer arguments of the Racah formula.
    let a = (tj1 + tj2 - tj3) / 2;
    let b = (tj1 - tj2 + tj3) / 2;
    let c = (-tj1 + tj2 + tj3) / 2;
    let big = (tj1 + tj2 + tj3) / 2 + 1;
    let jpm1 = (tj1 + tm1) / 2;
    let jmm1 = (tj1 - tm1) / 2;
    let jpm2 = (tj2 + tm2) / 2;
    let jmm2 = (tj2 - tm2) / 2;
    let jpm3 = (tj3 + tm3) / 2;
    let jmm3 = (tj3 - tm3) / 2;

    // Racah sum rewritten over integer binomials so the alternating sum is exact;
    // only the positive prefactor goes through logarithms.
    let ln_pref = 0.5
        * (lnf(jpm1) + lnf(jmm1) + lnf(jpm2) + lnf(jmm2) + lnf(jpm3) + lnf(jmm3)
            - lnf(big)
            - lnf(a)
            - lnf(b)
            - lnf(c));

    let t1 = (tj3 - tj2 + tm1) / 2;
    let t2 = (tj3 - tj1 - tm2) / 2;
    let kmin = 0.max(-t1).max(-t2);
    let kmax = a.min(jmm1).min(jpm2);

    let mut sum = BigInt::zero();
    for k in kmin..=kmax {
        let term = binomial(a, k) * binomial(b, jmm1 - k) * binomial(c, jpm2 - k);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(0.0);
    }
    let (ln_mag, sign) = ln_abs(&sum);
    let value = sign * (ln_mag + ln_pref).exp();

    // Overall phase (-1)^(j1 - j2 - m3).
    let phase = (tj1 - tj2 - tm3) / 2;
    Ok(if phase.rem_euclid(2) == 0 { value } else { -value })
}
