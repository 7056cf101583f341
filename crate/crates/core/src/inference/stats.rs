use serde::{Deserialize, Serialize};
use statrs::function::factorial::{binomial, ln_binomial};

use crate::{Error, Result};

/// Above this many trials the likelihood is evaluated in log space.
const LOG_SPACE_ABOVE: u64 = 100;
/// Upper bound on the repetition search in [`min_repetitions`].
const MAX_REPETITIONS: usize = 100_000;

/// Binomial likelihood `C(n,k) p^k (1-p)^(n-k)`.
pub fn binomial_likelihood(p: f64, k: u64, n: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability {p} outside [0, 1]")));
    }
    if k > n {
        return Err(Error::domain(format!("k = {k} exceeds n = {n}")));
    }
    if p == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if p == 1.0 {
        return Ok(if k == n { 1.0 } else { 0.0 });
    }
    if n > LOG_SPACE_ABOVE {
        let ln = ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p();
        Ok(ln.exp())
    } else {
        Ok(binomial(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32))
    }
}

fn check_pair(p_alpha: f64, p_beta: f64) -> Result<()> {
    if p_alpha == p_beta {
        return Err(Error::DegenerateModel(format!("p_alpha = p_beta = {p_alpha}")));
    }
    if !(p_beta > 0.0 && p_beta < p_alpha && p_alpha < 1.0) {
        return Err(Error::domain(format!(
            "need 0 < p_beta < p_alpha < 1, got p_alpha = {p_alpha}, p_beta = {p_beta}"
        )));
    }
    Ok(())
}

/// Largest success count `k` for which the dark hypothesis is strictly more
/// likely, from the closed-form crossing of the two log-likelihoods.
///
/// The crossing sits at `x = n / (ln(pα/pβ)/ln((1-pβ)/(1-pα)) + 1)`; counts
/// below it are dark. When `x` is an integer the likelihoods tie at `k = x`,
/// which is not dark, so the threshold drops to `x - 1`.
pub fn discrimination_threshold(p_alpha: f64, p_beta: f64, n: usize) -> Result<usize> {
    check_pair(p_alpha, p_beta)?;
    let ln_ratio_success = (p_alpha / p_beta).ln();
    let ln_ratio_failure = ((1.0 - p_beta) / (1.0 - p_alpha)).ln();
    let x = n as f64 / (ln_ratio_success / ln_ratio_failure + 1.0);
    let nearest = x.round();
    let k = if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        nearest as i64 - 1
    } else {
        x.floor() as i64
    };
    Ok(k.clamp(0, n as i64) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateLabel {
    Bright,
    Dark,
}

impl StateLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StateLabel::Bright => "bright",
            StateLabel::Dark => "dark",
        }
    }
}

impl std::str::FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bright" => Ok(StateLabel::Bright),
            "dark" => Ok(StateLabel::Dark),
            other => Err(Error::domain(format!("unknown state label {other:?}"))),
        }
    }
}

/// Two-hypothesis QND model: bright and dark single-shot sideband success
/// probabilities and the number of shots averaged per decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QndModel {
    pub p_alpha: f64,
    pub p_beta: f64,
    pub n_rep: usize,
    pub threshold_k: usize,
    /// Threshold on k/n; presentation form of `threshold_k`.
    pub threshold_p: f64,
}

impl QndModel {
    /// Derives `threshold_k` and sets `threshold_p` halfway between
    /// `threshold_k/n` and `(threshold_k+1)/n`.
    pub fn new(p_alpha: f64, p_beta: f64, n_rep: usize) -> Result<Self> {
        if n_rep == 0 {
            return Err(Error::domain("n_rep must be at least 1"));
        }
        let threshold_k = discrimination_threshold(p_alpha, p_beta, n_rep)?;
        Ok(QndModel {
            p_alpha,
            p_beta,
            n_rep,
            threshold_k,
            threshold_p: (threshold_k as f64 + 0.5) / n_rep as f64,
        })
    }

    /// Bright 0.52, dark 0.06, 22 repetitions, presentation threshold 0.25.
    pub fn operating_point() -> Self {
        use crate::constants::*;
        QndModel::new(OPERATING_P_BRIGHT, OPERATING_P_DARK, OPERATING_N_REP)
            .expect("operating point is a valid model")
            .with_threshold_p(OPERATING_THRESHOLD_P)
            .expect("valid threshold")
    }

    pub fn with_threshold_p(self, threshold_p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&threshold_p) {
            return Err(Error::domain(format!("threshold_p {threshold_p} outside [0, 1)")));
        }
        Ok(QndModel { threshold_p, ..self })
    }

    pub fn with_threshold_k(self, threshold_k: usize) -> Result<Self> {
        if threshold_k > self.n_rep {
            return Err(Error::domain(format!("threshold_k {threshold_k} exceeds n_rep {}", self.n_rep)));
        }
        Ok(QndModel { threshold_k, ..self })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionErrors {
    /// Dark molecule reported bright.
    pub error_dark: f64,
    /// Bright molecule reported dark.
    pub error_bright: f64,
}

pub fn detection_errors(model: &QndModel) -> DetectionErrors {
    let n = model.n_rep as u64;
    let kt = model.threshold_k as u64;
    let lik = |p: f64, k: u64| binomial_likelihood(p, k, n).expect("validated model");
    DetectionErrors {
        error_dark: (kt + 1..=n).map(|k| lik(model.p_beta, k)).sum(),
        error_bright: (0..=kt).map(|k| lik(model.p_alpha, k)).sum(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub error_dark: f64,
    pub error_bright: f64,
    pub fidelity_dark: f64,
    pub fidelity_bright: f64,
    /// `1 - max(E_d, E_b)`.
    pub fidelity_overall: f64,
}

pub fn fidelity_report(model: &QndModel) -> FidelityReport {
    let e = detection_errors(model);
    FidelityReport {
        error_dark: e.error_dark,
        error_bright: e.error_bright,
        fidelity_dark: 1.0 - e.error_dark,
        fidelity_bright: 1.0 - e.error_bright,
        fidelity_overall: 1.0 - e.error_dark.max(e.error_bright),
    }
}

/// Smallest repetition count whose own optimal threshold reaches `target`.
pub fn min_repetitions(p_alpha: f64, p_beta: f64, target_fidelity: f64) -> Result<usize> {
    check_pair(p_alpha, p_beta)?;
    if !(target_fidelity < 1.0) {
        return Err(Error::domain(format!("target fidelity {target_fidelity} must be below 1")));
    }
    for n in 1..=MAX_REPETITIONS {
        let model = QndModel::new(p_alpha, p_beta, n)?;
        if fidelity_report(&model).fidelity_overall >= target_fidelity {
            return Ok(n);
        }
    }
    Err(Error::NonConvergence(format!(
        "fidelity {target_fidelity} not reached within {MAX_REPETITIONS} repetitions"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesFidelity {
    pub mean: f64,
    pub std: f64,
}

/// Posterior fidelity from counts of correct and false detections, with a
/// uniform prior on the per-attempt error rate: the error rate is then
/// Beta(failures+1, successes+1).
pub fn bayes_fidelity(successes: u64, failures: u64) -> BayesFidelity {
    let a = failures as f64 + 1.0;
    let b = successes as f64 + 1.0;
    let total = a + b;
    BayesFidelity {
        mean: 1.0 - a / total,
        std: (a * b / (total * total * (total + 1.0))).sqrt(),
    }
}

/// Bright iff `k/n` exceeds the model's `threshold_p`.
pub fn classify(k: usize, n: usize, model: &QndModel) -> Result<StateLabel> {
    if n == 0 {
        return Err(Error::Indeterminate);
    }
    if k > n {
        return Err(Error::domain(format!("k = {k} exceeds n = {n}")));
    }
    Ok(if k as f64 / n as f64 > model.threshold_p {
        StateLabel::Bright
    } else {
        StateLabel::Dark
    })
}
