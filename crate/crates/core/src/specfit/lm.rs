//! Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when every scaled step component falls below this.
    pub step_tolerance: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            step_tolerance: 1e-10,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmSolution {
    pub params: Vec<f64>,
    /// Sum of squared weighted residuals.
    pub chi2: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Jacobian of the weighted residuals at the solution.
    pub jacobian: DMatrix<f64>,
}

/// Minimizes `Σ r_i(x)²`. `residuals` returns weighted residuals or an error
/// for an infeasible point, which is treated as a rejected step. `scale`
/// gives the typical magnitude of each parameter and `project` maps a trial
/// point back into the feasible set.
pub fn minimize<R, P>(residuals: R, x0: &[f64], scale: &[f64], project: P, opts: &LmOptions) -> Result<LmSolution>
where
    R: Fn(&[f64]) -> Result<Vec<f64>>,
    P: Fn(&mut [f64]),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x);
    let mut r = residuals(&x)?;
    let mut chi2 = sum_sq(&r);
    let mut jac = jacobian(&residuals, &x, &r, scale, opts.fd_step)?;
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * DVector::from_column_slice(&r);

        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for i in 0..n {
                // Marquardt scaling with a floor so zero-sensitivity directions stay solvable.
                let d = jtj[(i, i)].max(1e-12 / (scale[i] * scale[i]));
                a[(i, i)] += lambda * d;
            }
            let Some(step) = a.lu().solve(&(-&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi + si).collect();
            project(&mut trial);
            let taken: Vec<f64> = trial.iter().zip(&x).map(|(t, xi)| t - xi).collect();
            match residuals(&trial) {
                Ok(tr) => {
                    let tchi2 = sum_sq(&tr);
                    if tchi2.is_finite() && tchi2 <= chi2 {
                        let small = taken
                            .iter()
                            .enumerate()
                            .all(|(i, s)| s.abs() <= opts.step_tolerance * x[i].abs().max(scale[i]));
                        x = trial;
                        r = tr;
                        chi2 = tchi2;
                        lambda = (lambda / 10.0).max(1e-12);
                        accepted = true;
                        if small {
                            converged = true;
                        }
                        break;
                    }
                }
                Err(e) if e.is_numerical() || matches!(e, Error::Domain(_) | Error::Truncation { .. }) => {}
                Err(e) => return Err(e),
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No descent direction left at working precision: stationary point.
            converged = true;
        }
        if converged {
            break;
        }
        jac = jacobian(&residuals, &x, &r, scale, opts.fd_step)?;
    }

    let jacobian = jacobian(&residuals, &x, &r, scale, opts.fd_step)?;
    Ok(LmSolution {
        params: x,
        chi2,
        iterations,
        converged,
        jacobian,
    })
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Central differences, falling back to one-sided when a probe is infeasible.
fn jacobian<R>(residuals: &R, x: &[f64], r0: &[f64], scale: &[f64], fd_step: f64) -> Result<DMatrix<f64>>
where
    R: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let m = r0.len();
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    for j in 0..n {
        let h = fd_step * x[j].abs().max(scale[j]);
        let mut xp = x.to_vec();
        xp[j] += h;
        let mut xm = x.to_vec();
        xm[j] -= h;
        let col: Vec<f64> = match (residuals(&xp), residuals(&xm)) {
            (Ok(rp), Ok(rm)) => rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect(),
            (Ok(rp), Err(_)) => rp.iter().zip(r0).map(|(a, b)| (a - b) / h).collect(),
            (Err(_), Ok(rm)) => r0.iter().zip(&rm).map(|(a, b)| (a - b) / h).collect(),
            (Err(e), Err(_)) => return Err(e),
        };
        for (i, v) in col.into_iter().enumerate() {
            jac[(i, j)] = v;
        }
    }
    Ok(jac)
}

/// `(JᵀJ)⁻¹`. Parameters the residuals do not depend on at all (for example a
/// parameter held on a symmetric bound) get NaN rows and columns; `None` when
/// the remaining normal matrix is singular.
pub fn covariance(jacobian: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = jacobian.ncols();
    let active: Vec<usize> = (0..n).filter(|&j| jacobian.column(j).norm() > 0.0).collect();
    let reduced = jacobian.select_columns(&active);
    let normal = reduced.transpose() * &reduced;
    let eig = normal.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    if !(lo > 1e-14 * hi) {
        return None;
    }
    let inv = normal.cholesky()?.inverse();
    let mut out = DMatrix::from_element(n, n, f64::NAN);
    for (a, &i) in active.iter().enumerate() {
        for (b, &j) in active.iter().enumerate() {
            out[(i, j)] = inv[(a, b)];
        }
    }
    Some(out)
}
