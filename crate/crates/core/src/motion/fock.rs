use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_N_MAX: usize = 64;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-9;

/// Populations of motional Fock states `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockDistribution {
    probabilities: Vec<f64>,
}

impl FockDistribution {
    /// Validates non-negativity and a truncation tail below `tolerance`.
    pub fn new(probabilities: Vec<f64>, tolerance: f64) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::domain("distribution needs at least n = 0"));
        }
        if probabilities.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::domain("populations must be finite and non-negative"));
        }
        let sum: f64 = probabilities.iter().sum();
        if sum > 1.0 + 1e-12 {
            return Err(Error::domain(format!("populations sum to {sum} > 1")));
        }
        let tail = 1.0 - sum;
        if tail > tolerance {
            return Err(Error::Truncation {
                n_max: probabilities.len() - 1,
                tail,
                tolerance,
            });
        }
        Ok(FockDistribution { probabilities })
    }

    /// Pure Fock state |n⟩.
    pub fn number_state(n: usize) -> Self {
        let mut probabilities = vec![0.0; n + 1];
        probabilities[n] = 1.0;
        FockDistribution { probabilities }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn n_max(&self) -> usize {
        self.probabilities.len() - 1
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }
}

/// Poissonian populations of a coherent state, `e^{-|α|²}|α|^{2n}/n!`.
pub fn fock_distribution_coherent(alpha_magnitude: f64, n_max: usize) -> Result<FockDistribution> {
    fock_distribution_coherent_with(alpha_magnitude, n_max, DEFAULT_TAIL_TOLERANCE)
}

pub fn fock_distribution_coherent_with(alpha_magnitude: f64, n_max: usize, tolerance: f64) -> Result<FockDistribution> {
    if !(alpha_magnitude >= 0.0 && alpha_magnitude.is_finite()) {
        return Err(Error::domain(format!("|alpha| = {alpha_magnitude} must be non-negative")));
    }
    let mean = alpha_magnitude * alpha_magnitude;
    let mut probabilities = Vec::with_capacity(n_max + 1);
    // Recurrence P(n) = P(n-1)·|α|²/n.
    let mut p = (-mean).exp();
    probabilities.push(p);
    for n in 1..=n_max {
        p *= mean / n as f64;
        probabilities.push(p);
    }
    FockDistribution::new(probabilities, tolerance)
}

/// Thermal (geometric) populations `n̄ⁿ/(1+n̄)ⁿ⁺¹`.
pub fn fock_distribution_thermal(nbar: f64, n_max: usize) -> Result<FockDistribution> {
    fock_distribution_thermal_with(nbar, n_max, DEFAULT_TAIL_TOLERANCE)
}

pub fn fock_distribution_thermal_with(nbar: f64, n_max: usize, tolerance: f64) -> Result<FockDistribution> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::domain(format!("nbar = {nbar} must be non-negative")));
    }
    let ratio = nbar / (1.0 + nbar);
    let mut probabilities = Vec::with_capacity(n_max + 1);
    let mut p = 1.0 / (1.0 + nbar);
    probabilities.push(p);
    for _ in 1..=n_max {
        p *= ratio;
        probabilities.push(p);
    }
    FockDistribution::new(probabilities, tolerance)
}

/// Smallest cutoff that holds a coherent state of mean occupation `nbar`
/// within the default tail tolerance, never below [`DEFAULT_N_MAX`].
pub fn coherent_cutoff(nbar: f64) -> usize {
    let spread = nbar.max(0.0).sqrt();
    let estimate = nbar + 10.0 * spread + 20.0;
    (estimate.ceil() as usize).max(DEFAULT_N_MAX)
}
