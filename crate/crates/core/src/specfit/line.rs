use serde::{Deserialize, Serialize};

use super::avib::StarkDataPoint;
use super::lm::{covariance, minimize, LmOptions};
use crate::constants::WAVEMETER_ACCURACY;
use crate::stark::DEFAULT_POLE_GUARD;
use crate::{Error, Result};

pub const MIN_LINE_POINTS: usize = 3;
const START_OFFSETS: [f64; 4] = [0.1, 0.2, 0.5, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    /// Line center, Hz.
    pub f0: f64,
    /// Profile amplitude C in |ΔE/I| = C/|f−f₀|.
    pub amplitude_c: f64,
    /// Covariance of (f₀, C).
    pub covariance: Option<[[f64; 2]; 2]>,
    pub sigma_f0_stat: f64,
    /// Statistical and wavemeter uncertainty in quadrature.
    pub sigma_f0_total: f64,
    pub chi2: f64,
    pub reduced_chi2: f64,
    pub iterations: usize,
}

/// The fitted profile at laser frequency `f`.
pub fn line_profile(f: f64, f0: f64, amplitude_c: f64) -> f64 {
    amplitude_c / (f - f0).abs()
}

pub fn fit_line_center(points: &[StarkDataPoint]) -> Result<LineFit> {
    fit_line_center_with(points, WAVEMETER_ACCURACY, &LmOptions::default())
}

/// Weighted fit of C/|f−f₀| to |ΔE/I|. Frequencies are handled relative to
/// the point with the largest |ΔE/I| to keep precision at 10¹⁴ Hz.
pub fn fit_line_center_with(points: &[StarkDataPoint], frequency_systematic: f64, opts: &LmOptions) -> Result<LineFit> {
    if points.len() < MIN_LINE_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} points, need at least {MIN_LINE_POINTS}",
            points.len()
        )));
    }
    let peak = points
        .iter()
        .max_by(|a, b| a.stark_over_intensity.abs().total_cmp(&b.stark_over_intensity.abs()))
        .expect("non-empty");
    let f_ref = peak.frequency;
    let offsets: Vec<f64> = points.iter().map(|p| p.frequency - f_ref).collect();
    let lo = offsets.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = offsets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(Error::DegenerateModel("all points at one frequency".into()));
    }

    let residuals = |x: &[f64]| -> Result<Vec<f64>> {
        let (u, c) = (x[0], x[1]);
        points
            .iter()
            .zip(&offsets)
            .map(|(p, df)| {
                let d = df - u;
                if d.abs() <= DEFAULT_POLE_GUARD {
                    return Err(Error::PoleCollision(p.frequency));
                }
                Ok((c / d.abs() - p.stark_over_intensity.abs()) / p.sigma)
            })
            .collect()
    };

    let mut best: Option<super::lm::LmSolution> = None;
    let mut collisions = 0;
    let mut attempts = 0;
    for k in START_OFFSETS {
        for sign in [1.0, -1.0] {
            attempts += 1;
            let u0 = sign * k * span;
            let c0 = peak.stark_over_intensity.abs() * u0.abs();
            let scale = [span, c0];
            match minimize(residuals, &[u0, c0], &scale, |_| {}, opts) {
                Ok(sol) if sol.converged => {
                    if best.as_ref().is_none_or(|b| sol.chi2 < b.chi2) {
                        best = Some(sol);
                    }
                }
                Ok(_) => {}
                Err(Error::PoleCollision(_)) => collisions += 1,
                Err(_) => {}
            }
        }
    }
    let Some(sol) = best else {
        if collisions == attempts {
            return Err(Error::PoleCollision(f_ref));
        }
        return Err(Error::NonConvergence("no line-center multistart converged".into()));
    };

    let cov = covariance(&sol.jacobian).map(|c| [[c[(0, 0)], c[(0, 1)]], [c[(1, 0)], c[(1, 1)]]]);
    let sigma_f0_stat = cov.map_or(f64::INFINITY, |c| c[0][0].sqrt());
    let dof = (points.len() - 2).max(1) as f64;
    Ok(LineFit {
        f0: f_ref + sol.params[0],
        amplitude_c: sol.params[1],
        covariance: cov,
        sigma_f0_stat,
        sigma_f0_total: sigma_f0_stat.hypot(frequency_systematic),
        chi2: sol.chi2,
        reduced_chi2: sol.chi2 / dof,
        iterations: sol.iterations,
    })
}
