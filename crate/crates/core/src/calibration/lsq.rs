//! Damped Gauss-Newton (Levenberg-Marquardt) least squares with
//! finite-difference Jacobians and box bounds.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

type ResidualFn<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + 'a;

/// Engine settings. Defaults follow the documented stopping rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsqOptions {
    pub max_iterations: usize,
    /// Relative residual-norm decrease below which an accepted step stops.
    pub ftol: f64,
    /// Relative (scaled) parameter step below which iteration stops.
    pub xtol: f64,
    pub initial_damping: f64,
    pub max_damping: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        LsqOptions {
            max_iterations: 200,
            ftol: 1e-10,
            xtol: 1e-10,
            initial_damping: 1e-3,
            max_damping: 1e12,
        }
    }
}

/// A bounded nonlinear least-squares problem.
pub struct FitProblem<'a> {
    residuals: Box<ResidualFn<'a>>,
    initial: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    scale: Vec<f64>,
    options: LsqOptions,
}

impl<'a> FitProblem<'a> {
    pub fn new<F>(initial: Vec<f64>, residuals: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + 'a,
    {
        let n = initial.len();
        let scale = initial.iter().map(|v| v.abs().max(1.0)).collect();
        FitProblem {
            residuals: Box::new(residuals),
            initial,
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            scale,
            options: LsqOptions::default(),
        }
    }

    pub fn with_bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    /// Typical magnitude of each parameter; sets the step-size metric.
    pub fn with_scale(mut self, scale: Vec<f64>) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_options(mut self, options: LsqOptions) -> Self {
        self.options = options;
        self
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn residuals(&self, theta: &[f64]) -> Result<Vec<f64>> {
        (self.residuals)(theta)
    }

    fn validate(&self) -> Result<()> {
        let n = self.initial.len();
        if n == 0 {
            return Err(Error::Precondition("no free parameters".into()));
        }
        if self.lower.len() != n || self.upper.len() != n || self.scale.len() != n {
            return Err(Error::Precondition(
                "bounds and scales must match the parameter count".into(),
            ));
        }
        for i in 0..n {
            let v = self.initial[i];
            if !v.is_finite() {
                return Err(Error::Precondition(format!("initial parameter {i} is not finite")));
            }
            if !(self.lower[i] <= v && v <= self.upper[i]) {
                return Err(Error::Precondition(format!(
                    "initial parameter {i} = {v} lies outside its bounds [{}, {}]",
                    self.lower[i], self.upper[i]
                )));
            }
            if !(self.scale[i].is_finite() && self.scale[i] > 0.0) {
                return Err(Error::Precondition(format!("scale {i} must be positive")));
            }
        }
        Ok(())
    }

    fn clamp(&self, theta: &mut [f64]) {
        for (i, v) in theta.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

/// Result of [`least_squares`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub params: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Gauss-Newton covariance `s^2 (J^T J)^+` at the solution.
    pub covariance: DMatrix<f64>,
    /// Residual norm at the start and after every accepted step.
    pub norm_history: Vec<f64>,
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn evaluate(problem: &FitProblem, theta: &[f64], m: Option<usize>) -> Result<Vec<f64>> {
    let r = problem.residuals(theta)?;
    if let Some(m) = m {
        if r.len() != m {
            return Err(Error::Precondition(format!(
                "residual length changed from {m} to {}",
                r.len()
            )));
        }
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("residual function returned a non-finite value".into()));
    }
    Ok(r)
}

/// Central-difference Jacobian (one-sided next to a bound), step
/// `max(1e-6 |theta_j|, 1e-8)`.
pub fn finite_difference_jacobian(
    problem: &FitProblem,
    theta: &[f64],
    m: usize,
) -> Result<DMatrix<f64>> {
    let n = theta.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut probe = theta.to_vec();
    for j in 0..n {
        let h = (1e-6 * theta[j].abs()).max(1e-8);
        let (lo, hi) = (problem.lower[j], problem.upper[j]);
        let (minus, plus) = match (theta[j] - h >= lo, theta[j] + h <= hi) {
            (true, true) => (theta[j] - h, theta[j] + h),
            (false, true) => (theta[j], theta[j] + h),
            (true, false) => (theta[j] - h, theta[j]),
            (false, false) => (theta[j], theta[j]),
        };
        if plus == minus {
            continue;
        }
        probe[j] = plus;
        let rp = evaluate(problem, &probe, Some(m))?;
        probe[j] = minus;
        let rm = evaluate(problem, &probe, Some(m))?;
        probe[j] = theta[j];
        let width = plus - minus;
        for i in 0..m {
            jac[(i, j)] = (rp[i] - rm[i]) / width;
        }
    }
    Ok(jac)
}

fn covariance(jac: &DMatrix<f64>, residual_norm: f64) -> DMatrix<f64> {
    let (m, n) = jac.shape();
    let jtj = jac.transpose() * jac;
    let dof = m.saturating_sub(n);
    let s2 = if dof > 0 {
        residual_norm * residual_norm / dof as f64
    } else {
        1.0
    };
    let eps = 1e-12 * jtj.diagonal().amax().max(f64::MIN_POSITIVE);
    let inv = jtj
        .clone()
        .symmetric_eigen()
        .pseudo_inverse_like(eps);
    let cov = inv * s2;
    (&cov + cov.transpose()) * 0.5
}

trait PseudoInverse {
    fn pseudo_inverse_like(self, eps: f64) -> DMatrix<f64>;
}

impl PseudoInverse for nalgebra::SymmetricEigen<f64, nalgebra::Dyn> {
    fn pseudo_inverse_like(self, eps: f64) -> DMatrix<f64> {
        let inv_vals = self
            .eigenvalues
            .map(|l| if l > eps { 1.0 / l } else { 0.0 });
        &self.eigenvectors * DMatrix::from_diagonal(&inv_vals) * self.eigenvectors.transpose()
    }
}

/// Minimizes `||r(theta)||` within the box bounds.
///
/// Steps solve `(J^T J + lambda S^-2) d = -J^T r` with `S` the parameter
/// scales; lambda starts at `1e-3`, shrinks tenfold on accepted steps and
/// grows tenfold on rejected ones. Hitting the iteration cap yields `converged = false` with the best
/// parameters found; damping beyond `1e12` is reported as singular.
pub fn least_squares(problem: &FitProblem) -> Result<FitReport> {
    problem.validate()?;
    let opts = problem.options;
    let n = problem.initial.len();
    let mut theta = problem.initial.clone();
    let mut r = evaluate(problem, &theta, None)?;
    let m = r.len();
    if m < n {
        return Err(Error::Precondition(format!(
            "{m} residuals cannot determine {n} parameters"
        )));
    }
    let mut cost = norm(&r);
    let mut norm_history = vec![cost];
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;
    let mut converged = cost == 0.0;
    let mut jac = finite_difference_jacobian(problem, &theta, m)?;

    'outer: while !converged && iterations < opts.max_iterations {
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &rv;
        let damping_diag: Vec<f64> = problem.scale.iter().map(|s| 1.0 / (s * s)).collect();
        loop {
            let mut a = jtj.clone();
            for j in 0..n {
                a[(j, j)] += lambda * damping_diag[j];
            }
            let step = a.cholesky().map(|c| c.solve(&(-&grad)));
            let Some(step) = step else {
                iterations += 1;
                lambda *= 10.0;
                if lambda > opts.max_damping {
                    return Err(Error::Singular(
                        "normal equations stayed singular under maximal damping".into(),
                    ));
                }
                if iterations >= opts.max_iterations {
                    break 'outer;
                }
                continue;
            };
            let mut trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, d)| t + d).collect();
            problem.clamp(&mut trial);
            let step_norm = trial
                .iter()
                .zip(&theta)
                .zip(&problem.scale)
                .map(|((a, b), s)| ((a - b) / s).powi(2))
                .sum::<f64>()
                .sqrt();
            let theta_norm = theta
                .iter()
                .zip(&problem.scale)
                .map(|(t, s)| (t / s).powi(2))
                .sum::<f64>()
                .sqrt();
            if step_norm <= opts.xtol * (theta_norm + opts.xtol) {
                converged = true;
                break 'outer;
            }
            iterations += 1;
            let accepted = match evaluate(problem, &trial, Some(m)) {
                Ok(r_new) => {
                    let cost_new = norm(&r_new);
                    if cost_new < cost {
                        let decrease = (cost - cost_new) / cost;
                        theta = trial;
                        r = r_new;
                        cost = cost_new;
                        norm_history.push(cost);
                        lambda = (lambda / 10.0).max(1e-15);
                        if decrease < opts.ftol || cost == 0.0 {
                            converged = true;
                            break 'outer;
                        }
                        true
                    } else {
                        if (cost_new - cost) <= opts.ftol * cost && lambda <= 1.0 {
                            // no further progress at a near Gauss-Newton step
                            converged = true;
                            break 'outer;
                        }
                        false
                    }
                }
                Err(_) => false,
            };
            if accepted {
                jac = finite_difference_jacobian(problem, &theta, m)?;
                break;
            }
            lambda *= 10.0;
            if lambda > opts.max_damping {
                return Err(Error::Singular(
                    "damping exceeded 1e12 without reducing the residual".into(),
                ));
            }
            if iterations >= opts.max_iterations {
                break 'outer;
            }
        }
    }

    let final_jac = if converged {
        finite_difference_jacobian(problem, &theta, m)?
    } else {
        jac
    };
    Ok(FitReport {
        covariance: covariance(&final_jac, cost),
        params: theta,
        residual_norm: cost,
        iterations,
        converged,
        norm_history,
    })
}
