use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lm::{minimize, LmOptions};
use super::rabi::{coherent_signals, model_sigmas, weighted_residuals, RabiFit, RabiSample, RabiTrace, REWEIGHT_PASSES};
use crate::motion::SidebandParams;
use crate::{Error, Result};

/// Polynomial degrees of ⟨n⟩(ΔE), δ(ΔE) and T₂(ΔE).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationDegrees {
    pub nbar: usize,
    pub delta: usize,
    pub t2: usize,
}

impl Default for CalibrationDegrees {
    /// ⟨n⟩ ∝ ΔE² for a resonant drive, so it gets the quadratic.
    fn default() -> Self {
        CalibrationDegrees { nbar: 2, delta: 1, t2: 1 }
    }
}

/// Empirical map from a Stark shift to the Rabi-fit parameters it produces.
/// Coefficients are in ascending powers of ΔE (Hz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationModel {
    pub nbar_coeffs: Vec<f64>,
    pub delta_coeffs: Vec<f64>,
    pub t2_coeffs: Vec<f64>,
    pub valid_range: (f64, f64),
    pub eta: f64,
    pub omega0: f64,
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl CalibrationModel {
    pub fn new(
        nbar_coeffs: Vec<f64>,
        delta_coeffs: Vec<f64>,
        t2_coeffs: Vec<f64>,
        valid_range: (f64, f64),
        eta: f64,
        omega0: f64,
    ) -> Result<Self> {
        let (lo, hi) = valid_range;
        if !(lo < hi) {
            return Err(Error::domain(format!("empty calibration range [{lo}, {hi}]")));
        }
        let model = CalibrationModel {
            nbar_coeffs,
            delta_coeffs,
            t2_coeffs,
            valid_range,
            eta,
            omega0,
        };
        for i in 0..=100 {
            let x = lo + (hi - lo) * i as f64 / 100.0;
            if model.nbar(x) < -1e-9 {
                return Err(Error::domain(format!("calibrated <n> negative at {x} Hz")));
            }
            if !(model.t2(x) > 0.0) {
                return Err(Error::domain(format!("calibrated T2 non-positive at {x} Hz")));
            }
        }
        Ok(model)
    }

    pub fn nbar(&self, stark_shift: f64) -> f64 {
        horner(&self.nbar_coeffs, stark_shift)
    }

    pub fn delta(&self, stark_shift: f64) -> f64 {
        horner(&self.delta_coeffs, stark_shift)
    }

    pub fn t2(&self, stark_shift: f64) -> f64 {
        horner(&self.t2_coeffs, stark_shift)
    }

    pub fn params(&self) -> SidebandParams {
        SidebandParams {
            eta: self.eta,
            omega0: self.omega0,
            delta: 0.0,
            t2: f64::INFINITY,
            mode_frequency: 0.0,
        }
    }

    /// Predicted sideband signal at pulse time `t` for a shift `stark_shift`.
    pub fn signal(&self, stark_shift: f64, t: f64) -> Result<f64> {
        Ok(self.signals(stark_shift, &[t])?[0])
    }

    pub fn signals(&self, stark_shift: f64, times: &[f64]) -> Result<Vec<f64>> {
        let t2 = self.t2(stark_shift);
        if !(t2 > 0.0) {
            return Err(Error::domain(format!("calibrated T2 non-positive at {stark_shift} Hz")));
        }
        coherent_signals(self.nbar(stark_shift).max(0.0), self.delta(stark_shift), t2, times, &self.params())
    }

    pub fn contains(&self, stark_shift: f64) -> bool {
        (self.valid_range.0..=self.valid_range.1).contains(&stark_shift)
    }
}

/// Unweighted least-squares polynomial in ascending powers.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    if xs.len() <= degree {
        return Err(Error::InsufficientData(format!(
            "{} points cannot fix a degree-{degree} polynomial",
            xs.len()
        )));
    }
    // Scale the abscissa for conditioning, then undo it on the coefficients.
    let s = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(xs.len(), degree + 1, |i, j| (xs[i] / s).powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let c = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::NonConvergence(format!("polynomial least squares: {e}")))?;
    Ok(c.iter().enumerate().map(|(j, v)| v / s.powi(j as i32)).collect())
}

pub const MIN_CALIBRATION_POINTS: usize = 4;

/// Polynomial calibration from Rabi fits at known Stark shifts.
pub fn build_calibration(points: &[(f64, RabiFit)], params: &SidebandParams) -> Result<CalibrationModel> {
    build_calibration_with(points, params, CalibrationDegrees::default())
}

pub fn build_calibration_with(
    points: &[(f64, RabiFit)],
    params: &SidebandParams,
    degrees: CalibrationDegrees,
) -> Result<CalibrationModel> {
    let mut distinct: Vec<f64> = points.iter().map(|(x, _)| *x).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < MIN_CALIBRATION_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} distinct Stark shifts, need at least {MIN_CALIBRATION_POINTS}",
            distinct.len()
        )));
    }
    if points.iter().any(|(_, f)| !f.t2.is_finite()) {
        return Err(Error::domain("calibration needs finite T2 from every fit"));
    }
    let xs: Vec<f64> = points.iter().map(|(x, _)| *x).collect();
    let column = |f: fn(&RabiFit) -> f64| points.iter().map(|(_, r)| f(r)).collect::<Vec<_>>();
    CalibrationModel::new(
        polyfit(&xs, &column(|r| r.nbar), degrees.nbar)?,
        polyfit(&xs, &column(|r| r.delta), degrees.delta)?,
        polyfit(&xs, &column(|r| r.t2), degrees.t2)?,
        (distinct[0], distinct[distinct.len() - 1]),
        params.eta,
        params.omega0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarkEstimate {
    pub stark_shift: f64,
    pub sigma: f64,
    /// Estimate sits on an edge of the calibration range.
    pub at_boundary: bool,
    pub chi2: f64,
    pub iterations: usize,
}

/// One-parameter fit of the calibrated signal model to a trace, restricted to
/// the calibration range.
pub fn stark_from_trace(trace: &RabiTrace, calib: &CalibrationModel) -> Result<StarkEstimate> {
    stark_from_trace_with(trace, calib, &LmOptions::default())
}

pub fn stark_from_trace_with(trace: &RabiTrace, calib: &CalibrationModel, opts: &LmOptions) -> Result<StarkEstimate> {
    if trace.samples.is_empty() {
        return Err(Error::InsufficientData("empty trace".into()));
    }
    let (lo, hi) = calib.valid_range;
    let width = hi - lo;
    let times = trace.times();
    let project = |x: &mut [f64]| x[0] = x[0].clamp(lo, hi);
    let best_of = |sigmas: &[f64], starts: &[f64]| -> Result<super::lm::LmSolution> {
        let residuals = |x: &[f64]| Ok(weighted_residuals(&trace.samples, sigmas, calib.signals(x[0], &times)?));
        let mut best: Option<super::lm::LmSolution> = None;
        for &x0 in starts {
            if let Ok(sol) = minimize(residuals, &[x0], &[width], project, opts) {
                if sol.converged && best.as_ref().is_none_or(|b| sol.chi2 < b.chi2) {
                    best = Some(sol);
                }
            }
        }
        best.ok_or_else(|| Error::NonConvergence("no Stark-shift multistart converged".into()))
    };

    let starts: Vec<f64> = (0..8).map(|i| lo + width * (i as f64 + 0.5) / 8.0).collect();
    let observed: Vec<f64> = trace.samples.iter().map(RabiSample::sigma).collect();
    let mut sol = best_of(&observed, &starts)?;
    for _ in 0..REWEIGHT_PASSES {
        let sigmas = model_sigmas(&trace.samples, &calib.signals(sol.params[0], &times)?);
        match best_of(&sigmas, &[sol.params[0]]) {
            Ok(next) => sol = next,
            Err(_) => break,
        }
    }
    let x = sol.params[0];
    let curvature: f64 = sol.jacobian.iter().map(|v| v * v).sum();
    let at_boundary = (x - lo).abs() <= 1e-6 * width || (hi - x).abs() <= 1e-6 * width;
    Ok(StarkEstimate {
        stark_shift: x,
        sigma: if curvature > 0.0 { curvature.sqrt().recip() } else { f64::INFINITY },
        at_boundary,
        chi2: sol.chi2,
        iterations: sol.iterations,
    })
}
