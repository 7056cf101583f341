use serde::{Deserialize, Serialize};

use super::fock::FockDistribution;
use crate::constants::TWO_PI;
use crate::{Error, Result};

/// Sideband drive parameters. Frequencies are cyclic (Hz); the factor 2π is
/// applied only inside [`sideband_signal_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandParams {
    pub eta: f64,
    /// Bare Rabi frequency Ω₀/2π.
    pub omega0: f64,
    /// Detuning from the sideband resonance δ/2π.
    pub delta: f64,
    /// Phase-decoherence time; `f64::INFINITY` disables decoherence.
    pub t2: f64,
    pub mode_frequency: f64,
}

impl SidebandParams {
    pub fn new(eta: f64, omega0: f64, delta: f64, t2: f64, mode_frequency: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::domain(format!("eta = {eta} must be positive")));
        }
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::domain(format!("omega0 = {omega0} must be positive")));
        }
        if !delta.is_finite() {
            return Err(Error::domain("delta must be finite"));
        }
        if !(t2 > 0.0) {
            return Err(Error::domain(format!("T2 = {t2} must be positive")));
        }
        Ok(SidebandParams {
            eta,
            omega0,
            delta,
            t2,
            mode_frequency,
        })
    }

    /// The detection operating point: η = 0.1, Ω₀/2π = 90 kHz, δ = 0, no decoherence.
    pub fn operating_point() -> Self {
        use crate::constants::*;
        SidebandParams {
            eta: OPERATING_ETA,
            omega0: OPERATING_OMEGA0,
            delta: 0.0,
            t2: f64::INFINITY,
            mode_frequency: OPERATING_MODE_FREQUENCY,
        }
    }

    pub fn with_delta_t2(self, delta: f64, t2: f64) -> Self {
        SidebandParams { delta, t2, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RabiModel {
    /// Lamb-Dicke limit, Ω_n = η√n Ω₀.
    Simple,
    /// Full Debye-Waller and Laguerre dependence.
    #[default]
    Generalized,
}

/// Generalized Laguerre polynomial `L_k^(a)(x)` by the three-term recurrence.
pub fn laguerre_generalized(order_k: u32, superscript: u32, x: f64) -> f64 {
    let a = superscript as f64;
    let mut prev = 1.0;
    if order_k == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..order_k {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Sideband Rabi frequency (Hz) coupling |n⟩ ↔ |n−1⟩; zero for n = 0.
pub fn rabi_frequency(n: usize, params: &SidebandParams, model: RabiModel) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    match model {
        RabiModel::Simple => params.eta * nf.sqrt() * params.omega0,
        RabiModel::Generalized => {
            let eta2 = params.eta * params.eta;
            params.omega0 * params.eta * (-eta2 / 2.0).exp() * laguerre_generalized((n - 1) as u32, 1, eta2) / nf.sqrt()
        }
    }
}

/// Angular Rabi frequencies 2π·Ω_n for n = 0..=n_max, built in one
/// recurrence pass.
pub fn angular_rabi_frequencies(n_max: usize, params: &SidebandParams, model: RabiModel) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0.0);
    let eta2 = params.eta * params.eta;
    let base = TWO_PI * params.omega0 * params.eta;
    match model {
        RabiModel::Simple => out.extend((1..=n_max).map(|n| base * (n as f64).sqrt())),
        RabiModel::Generalized => {
            let dw = base * (-eta2 / 2.0).exp();
            // L_k^(1)(η²) for k = n − 1.
            let (mut prev, mut cur) = (0.0, 1.0);
            for n in 1..=n_max {
                let k = (n - 1) as f64;
                if n > 1 {
                    let next = ((2.0 * (k - 1.0) + 2.0 - eta2) * cur - k * prev) / k;
                    prev = cur;
                    cur = next;
                }
                out.push(dw * cur / (n as f64).sqrt());
            }
        }
    }
    out
}

/// Excitation probability after a sideband pulse of length `t` (generalized model).
pub fn sideband_signal(dist: &FockDistribution, t: f64, params: &SidebandParams) -> f64 {
    sideband_signal_with(dist, t, params, RabiModel::Generalized)
}

pub fn sideband_signal_with(dist: &FockDistribution, t: f64, params: &SidebandParams, model: RabiModel) -> f64 {
    let omegas = angular_rabi_frequencies(dist.n_max(), params, model);
    sideband_signal_from(dist, t, params.delta, params.t2, &omegas)
}

/// Signal with precomputed angular Rabi frequencies covering `dist`.
pub fn sideband_signal_from(dist: &FockDistribution, t: f64, delta_hz: f64, t2: f64, omegas: &[f64]) -> f64 {
    let delta = TWO_PI * delta_hz;
    let delta2 = delta * delta;
    let coherent: f64 = dist
        .probabilities()
        .iter()
        .zip(omegas)
        .skip(1)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, omega)| {
            let omega2 = omega * omega;
            let generalized = (omega2 + delta2).sqrt();
            if generalized == 0.0 {
                return 0.0;
            }
            let s = (generalized * t / 2.0).sin();
            p * omega2 / (omega2 + delta2) * s * s
        })
        .sum();
    let decay = (-t / t2).exp();
    coherent * decay + (1.0 - decay) / 2.0
}
