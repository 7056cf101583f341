use serde::{Deserialize, Serialize};

use super::lm::{covariance, minimize, LmOptions};
use crate::motion::{
    angular_rabi_frequencies, coherent_from_mean, rabi_frequency, sideband_signal_from, RabiModel, SidebandParams,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiSample {
    pub t: f64,
    pub p_excite: f64,
    pub n_shots: u32,
}

/// Binomial standard error of a fraction over `n_shots`, floored at
/// `1/(2·n_shots)` so extreme probabilities keep a finite weight.
pub fn binomial_sigma(p: f64, n_shots: u32) -> f64 {
    let n = n_shots as f64;
    (p * (1.0 - p) / n).max(0.0).sqrt().max(0.5 / n)
}

/// Weighting rounds after the first fit. The first fit weights by the
/// observed fractions; later rounds weight by the model prediction, which
/// removes the pull towards low draws.
pub(crate) const REWEIGHT_PASSES: usize = 2;

impl RabiSample {
    pub fn sigma(&self) -> f64 {
        binomial_sigma(self.p_excite, self.n_shots)
    }
}

/// Weights from the model prediction at each sample.
pub(crate) fn model_sigmas(samples: &[RabiSample], model: &[f64]) -> Vec<f64> {
    samples
        .iter()
        .zip(model)
        .map(|(s, m)| binomial_sigma(m.clamp(0.0, 1.0), s.n_shots))
        .collect()
}

pub(crate) fn weighted_residuals(samples: &[RabiSample], sigmas: &[f64], model: Vec<f64>) -> Vec<f64> {
    samples
        .iter()
        .zip(sigmas)
        .zip(model)
        .map(|((s, sig), m)| (m - s.p_excite) / sig)
        .collect()
}

/// Drive parameters in force when the trace was taken. Only `eta` and
/// `omega0` of `params` enter the fits; δ and T₂ are fit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub params: SidebandParams,
    pub odf_pulse_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiTrace {
    pub samples: Vec<RabiSample>,
    pub meta: TraceMeta,
}

impl RabiTrace {
    pub fn new(samples: Vec<RabiSample>, meta: TraceMeta) -> Result<Self> {
        for w in samples.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::domain(format!("sample times not strictly increasing at t = {}", w[1].t)));
            }
        }
        for s in &samples {
            if !(0.0..=1.0).contains(&s.p_excite) {
                return Err(Error::domain(format!("p_excite {} outside [0, 1]", s.p_excite)));
            }
            if s.n_shots == 0 {
                return Err(Error::domain("n_shots must be at least 1"));
            }
            if !(s.t >= 0.0 && s.t.is_finite()) {
                return Err(Error::domain(format!("sample time {} must be non-negative", s.t)));
            }
        }
        Ok(RabiTrace { samples, meta })
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn span(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }
}

/// Sideband signal for a coherent state of mean occupation `nbar`.
pub fn coherent_signal(nbar: f64, delta: f64, t2: f64, t: f64, params: &SidebandParams) -> Result<f64> {
    Ok(coherent_signals(nbar, delta, t2, &[t], params)?[0])
}

/// [`coherent_signal`] at several pulse times, sharing the distribution.
pub fn coherent_signals(nbar: f64, delta: f64, t2: f64, times: &[f64], params: &SidebandParams) -> Result<Vec<f64>> {
    let dist = coherent_from_mean(nbar)?;
    let omegas = angular_rabi_frequencies(dist.n_max(), params, RabiModel::Generalized);
    Ok(times
        .iter()
        .map(|&t| sideband_signal_from(&dist, t, delta, t2, &omegas))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiFit {
    pub nbar: f64,
    /// Sideband detuning δ/2π in Hz; only |δ| is identifiable.
    pub delta: f64,
    pub t2: f64,
    /// Covariance of (nbar, delta, t2); `None` when the normal matrix is singular.
    pub covariance: Option<[[f64; 3]; 3]>,
    pub chi2: f64,
    pub reduced_chi2: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl RabiFit {
    /// 1σ uncertainties of (nbar, delta, t2); infinite when the covariance is singular.
    pub fn sigmas(&self) -> [f64; 3] {
        match &self.covariance {
            Some(c) => [c[0][0].sqrt(), c[1][1].sqrt(), c[2][2].sqrt()],
            None => [f64::INFINITY; 3],
        }
    }
}

const MULTISTART_NBAR: [f64; 4] = [0.3, 1.0, 2.5, 6.0];
const MIN_SAMPLES: usize = 6;
/// Upper bound on fitted ⟨n⟩; keeps the Fock basis finite on wild steps.
const MAX_NBAR: f64 = 200.0;

/// Three-parameter weighted fit of ⟨n⟩, δ and T₂ to a sideband Rabi trace.
///
/// Internally the decay is fit as the rate 1/T₂ so that the undamped limit
/// stays reachable; the reported covariance is mapped back to T₂.
pub fn fit_rabi_trace(trace: &RabiTrace) -> Result<RabiFit> {
    fit_rabi_trace_with(trace, &LmOptions::default())
}

pub fn fit_rabi_trace_with(trace: &RabiTrace, opts: &LmOptions) -> Result<RabiFit> {
    let n = trace.samples.len();
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!("{n} samples, need at least {MIN_SAMPLES}")));
    }
    let params = trace.meta.params;
    let rabi1 = rabi_frequency(1, &params, RabiModel::Generalized);
    let half_period = 0.5 / rabi1;
    if trace.span() < half_period {
        return Err(Error::InsufficientData(format!(
            "trace spans {:.3e} s, less than half a Rabi period ({half_period:.3e} s)",
            trace.span()
        )));
    }
    let first = trace.samples[0].p_excite;
    if trace.samples.iter().all(|s| s.p_excite == first) {
        return Err(Error::DegenerateTrace(format!("all samples equal {first}")));
    }

    let times = trace.times();
    let signals = |x: &[f64]| -> Result<Vec<f64>> {
        let (nbar, delta, gamma) = (x[0], x[1], x[2]);
        let t2 = if gamma > 0.0 { 1.0 / gamma } else { f64::INFINITY };
        coherent_signals(nbar, delta, t2, &times, &params)
    };
    let project = |x: &mut [f64]| {
        x[0] = x[0].clamp(0.0, MAX_NBAR);
        x[1] = x[1].abs();
        x[2] = x[2].max(0.0);
    };
    let span = trace.span();
    let scale = [1.0, rabi1, 1.0 / span];
    let best_of = |sigmas: &[f64], starts: &[[f64; 3]]| -> Result<super::lm::LmSolution> {
        let residuals = |x: &[f64]| Ok(weighted_residuals(&trace.samples, sigmas, signals(x)?));
        let mut best: Option<super::lm::LmSolution> = None;
        let mut last_err = None;
        for x0 in starts {
            match minimize(residuals, x0, &scale, project, opts) {
                Ok(sol) if sol.converged => {
                    if best.as_ref().is_none_or(|b| sol.chi2 < b.chi2) {
                        best = Some(sol);
                    }
                }
                Ok(_) => {}
                Err(e) => last_err = Some(e),
            }
        }
        best.ok_or_else(|| {
            Error::NonConvergence(format!(
                "no multistart converged within {} iterations{}",
                opts.max_iterations,
                last_err.map(|e| format!(" (last error: {e})")).unwrap_or_default()
            ))
        })
    };

    let mut starts = Vec::with_capacity(8);
    for nbar in MULTISTART_NBAR {
        starts.push([nbar, 0.0, 0.2 / span]);
        starts.push([nbar, 0.2 * rabi1, 2.0 / span]);
    }
    let observed: Vec<f64> = trace.samples.iter().map(RabiSample::sigma).collect();
    let mut sol = best_of(&observed, &starts)?;
    for _ in 0..REWEIGHT_PASSES {
        let sigmas = model_sigmas(&trace.samples, &signals(&sol.params)?);
        let x0 = [sol.params[0], sol.params[1], sol.params[2]];
        match best_of(&sigmas, &[x0]) {
            Ok(next) => sol = next,
            Err(_) => break,
        }
    }

    let (nbar, delta, gamma) = (sol.params[0], sol.params[1], sol.params[2]);
    let t2 = if gamma > 0.0 { 1.0 / gamma } else { f64::INFINITY };
    let covariance = covariance(&sol.jacobian).map(|c| {
        // d t2 / d gamma = -1/gamma²
        let jac = [1.0, 1.0, if gamma > 0.0 { -1.0 / (gamma * gamma) } else { f64::INFINITY }];
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = jac[i] * jac[j] * c[(i, j)];
            }
        }
        out
    });
    let dof = (n - 3).max(1) as f64;
    Ok(RabiFit {
        nbar,
        delta,
        t2,
        covariance,
        chi2: sol.chi2,
        reduced_chi2: sol.chi2 / dof,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}
