//! Monte Carlo detection traces with one-way quantum jumps and D-state
//! post-selection.
//!
//! Every attempt draws from its own ChaCha stream keyed by `(seed, attempt)`,
//! so attempts can be generated in any order with identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{classify, QndModel, StateLabel};
use crate::motion::{sideband_signal, FockDistribution, SidebandParams};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTraceConfig {
    pub n_attempts: usize,
    /// Bright→dark transition probability between consecutive attempts.
    pub jump_probability: f64,
    /// Probability that a shot survives D-state post-selection.
    pub prep_success: f64,
    pub rng_seed: u64,
    pub initial_state: StateLabel,
    /// Force a bright→dark jump so that attempts from this index on are dark.
    pub forced_jump_at: Option<usize>,
}

impl TimeTraceConfig {
    pub fn new(n_attempts: usize, jump_probability: f64, prep_success: f64, rng_seed: u64) -> Result<Self> {
        for (name, p) in [("jump probability", jump_probability), ("prep success", prep_success)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("{name} {p} outside [0, 1]")));
            }
        }
        Ok(TimeTraceConfig {
            n_attempts,
            jump_probability,
            prep_success,
            rng_seed,
            initial_state: StateLabel::Bright,
            forced_jump_at: None,
        })
    }

    pub fn starting(self, initial_state: StateLabel) -> Self {
        TimeTraceConfig { initial_state, ..self }
    }

    pub fn with_forced_jump(self, at: usize) -> Self {
        TimeTraceConfig {
            forced_jump_at: Some(at),
            ..self
        }
    }
}

/// Where single-shot success probabilities come from.
#[derive(Debug, Clone)]
pub enum SuccessSource {
    /// Use the model's `p_alpha` and `p_beta`.
    Analytic,
    /// Evaluate the sideband signal for the bright and dark motional states.
    Motion {
        bright: FockDistribution,
        dark: FockDistribution,
        params: SidebandParams,
        pulse_time: f64,
    },
}

impl SuccessSource {
    pub fn probabilities(&self, model: &QndModel) -> (f64, f64) {
        match self {
            SuccessSource::Analytic => (model.p_alpha, model.p_beta),
            SuccessSource::Motion {
                bright,
                dark,
                params,
                pulse_time,
            } => (
                sideband_signal(bright, *pulse_time, params),
                sideband_signal(dark, *pulse_time, params),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub attempt_index: usize,
    pub k_successes: usize,
    pub n_used: usize,
    /// `k/n_used`; NaN when every shot was discarded.
    pub p_hat: f64,
    /// `None` when every shot was discarded.
    pub classification: Option<StateLabel>,
    pub true_state: StateLabel,
}

/// Random outcome of one attempt, independent of the molecular state.
struct AttemptDraws {
    jump_after: bool,
    n_used: usize,
    k_bright: usize,
    k_dark: usize,
}

fn draw_attempt(seed: u64, index: usize, n_rep: usize, prep: f64, jump: f64, p_bright: f64, p_dark: f64) -> AttemptDraws {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let jump_after = rng.random::<f64>() < jump;
    let mut n_used = 0;
    let mut k_bright = 0;
    let mut k_dark = 0;
    for _ in 0..n_rep {
        let kept = rng.random::<f64>() < prep;
        let u = rng.random::<f64>();
        if kept {
            n_used += 1;
            k_bright += usize::from(u < p_bright);
            k_dark += usize::from(u < p_dark);
        }
    }
    AttemptDraws {
        jump_after,
        n_used,
        k_bright,
        k_dark,
    }
}

fn assemble(model: &QndModel, config: &TimeTraceConfig, draws: Vec<AttemptDraws>) -> Vec<DetectionRecord> {
    let mut state = config.initial_state;
    let mut out = Vec::with_capacity(draws.len());
    for (i, d) in draws.into_iter().enumerate() {
        if config.forced_jump_at == Some(i) {
            state = StateLabel::Dark;
        }
        let k = match state {
            StateLabel::Bright => d.k_bright,
            StateLabel::Dark => d.k_dark,
        };
        let classification = classify(k, d.n_used, model).ok();
        out.push(DetectionRecord {
            attempt_index: i,
            k_successes: k,
            n_used: d.n_used,
            p_hat: if d.n_used == 0 { f64::NAN } else { k as f64 / d.n_used as f64 },
            classification,
            true_state: state,
        });
        if d.jump_after && state == StateLabel::Bright {
            state = StateLabel::Dark;
        }
    }
    out
}

/// Simulated detection trace, attempts generated in parallel.
pub fn simulate_timetrace(model: &QndModel, source: &SuccessSource, config: &TimeTraceConfig) -> Vec<DetectionRecord> {
    let (p_bright, p_dark) = source.probabilities(model);
    let draws = (0..config.n_attempts)
        .into_par_iter()
        .map(|i| {
            draw_attempt(
                config.rng_seed,
                i,
                model.n_rep,
                config.prep_success,
                config.jump_probability,
                p_bright,
                p_dark,
            )
        })
        .collect();
    assemble(model, config, draws)
}

/// Same trace as [`simulate_timetrace`], generated on the calling thread.
pub fn simulate_timetrace_serial(model: &QndModel, source: &SuccessSource, config: &TimeTraceConfig) -> Vec<DetectionRecord> {
    let (p_bright, p_dark) = source.probabilities(model);
    let draws = (0..config.n_attempts)
        .map(|i| {
            draw_attempt(
                config.rng_seed,
                i,
                model.n_rep,
                config.prep_success,
                config.jump_probability,
                p_bright,
                p_dark,
            )
        })
        .collect();
    assemble(model, config, draws)
}

/// Counts of (attempts, misclassified attempts) among records whose true state is `state`.
pub fn misclassification(records: &[DetectionRecord], state: StateLabel) -> (usize, usize) {
    let relevant = records.iter().filter(|r| r.true_state == state);
    let total = relevant.clone().count();
    let wrong = relevant.filter(|r| r.classification != Some(state)).count();
    (total, wrong)
}
