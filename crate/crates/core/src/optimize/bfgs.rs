//! Quasi-Newton minimization with a finite-difference Hessian at the optimum.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A smooth function to be minimized.
pub trait Objective {
    fn dimension(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Gradient of [`Objective::value`]. Defaults to central differences.
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        central_gradient(|y| self.value(y), x, DEFAULT_FD_STEP)
    }
}

pub const DEFAULT_FD_STEP: f64 = 1e-6;

const ARMIJO_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;
const MAX_BACKTRACKS: usize = 60;
const MAX_STEP: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BfgsOptions {
    /// Stop when the largest gradient component falls below this.
    pub gtol: f64,
    /// Stop when the relative change of the objective falls below this.
    pub ftol: f64,
    pub max_iter: usize,
    /// Relative step of the finite-difference Hessian.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            gtol: 1e-8,
            ftol: 1e-10,
            max_iter: 500,
            fd_step: DEFAULT_FD_STEP,
        }
    }
}

/// Result of a minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimumReport {
    pub theta_hat: Vec<f64>,
    /// Objective value at the optimum (a negative log density).
    pub neg_logp: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
    /// Inverse Hessian, when the Hessian is positive definite.
    pub laplace_cov: Option<DMatrix<f64>>,
    pub converged: bool,
    pub iterations: usize,
    pub message: String,
}

/// `(f(x + h e_j) - f(x - h e_j)) / 2h` with `h = step * max(|x_j|, 1)`.
pub fn central_gradient<F>(f: F, x: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut y = x.to_vec();
    (0..x.len())
        .map(|j| {
            let h = step * x[j].abs().max(1.0);
            y[j] = x[j] + h;
            let fp = f(&y)?;
            y[j] = x[j] - h;
            let fm = f(&y)?;
            y[j] = x[j];
            Ok((fp - fm) / (2.0 * h))
        })
        .collect()
}

/// Central differences of the gradient, symmetrized.
pub fn finite_difference_hessian(obj: &dyn Objective, x: &[f64], step: f64) -> Result<DMatrix<f64>> {
    let d = x.len();
    let mut h = DMatrix::zeros(d, d);
    let mut y = x.to_vec();
    for j in 0..d {
        let s = step * x[j].abs().max(1.0);
        y[j] = x[j] + s;
        let gp = obj.gradient(&y)?;
        y[j] = x[j] - s;
        let gm = obj.gradient(&y)?;
        y[j] = x[j];
        for i in 0..d {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * s);
        }
    }
    Ok((&h + h.transpose()) * 0.5)
}

fn finite_or_inf(v: Result<f64>) -> Result<f64> {
    match v {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Ok(f64::INFINITY),
        Err(e @ Error::Singular { .. }) => {
            log::debug!("line search point rejected: {e}");
            Ok(f64::INFINITY)
        }
        Err(e) => Err(e),
    }
}

struct Point {
    x: DVector<f64>,
    f: f64,
    g: DVector<f64>,
}

/// Minimizes `obj` from `theta0` by BFGS with a strong-Wolfe line search. Failure to converge is reported, not raised.
pub fn bfgs_minimize(obj: &dyn Objective, theta0: &[f64], opts: &BfgsOptions) -> Result<OptimumReport> {
    let d = obj.dimension();
    if theta0.len() != d {
        return Err(Error::input(format!("start vector has {} entries, objective {d}", theta0.len())));
    }
    let f0 = obj.value(theta0)?;
    if !f0.is_finite() {
        return Err(Error::input("objective is not finite at the start vector"));
    }
    let mut cur = Point {
        x: DVector::from_column_slice(theta0),
        f: f0,
        g: DVector::from_vec(obj.gradient(theta0)?),
    };
    let mut hinv = DMatrix::<f64>::identity(d, d);
    let mut scaled = false;
    let mut converged = false;
    let mut message = String::from("iteration limit reached");
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if cur.g.amax() < opts.gtol {
            converged = true;
            message = "gradient tolerance reached".into();
            break;
        }
        iterations += 1;
        let mut p = -(&hinv * &cur.g);
        let mut slope = cur.g.dot(&p);
        if !(slope < 0.0) {
            hinv = DMatrix::identity(d, d);
            p = -cur.g.clone();
            slope = cur.g.dot(&p);
        }
        let Some(next) = line_search(obj, &cur, &p, slope)? else {
            message = "line search failed".into();
            break;
        };
        let s = &next.x - &cur.x;
        let y = &next.g - &cur.g;
        let sy = s.dot(&y);
        if sy > 0.0 {
            if !scaled {
                hinv = DMatrix::identity(d, d) * (sy / y.dot(&y));
                scaled = true;
            }
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(d, d);
            let left = &eye - (&s * y.transpose()) * rho;
            let right = &eye - (&y * s.transpose()) * rho;
            hinv = &left * &hinv * &right + (&s * s.transpose()) * rho;
        }
        let df = (cur.f - next.f).abs();
        let scale = cur.f.abs().max(next.f.abs()).max(1.0);
        cur = next;
        if cur.g.amax() < opts.gtol {
            converged = true;
            message = "gradient tolerance reached".into();
            break;
        }
        if df <= opts.ftol * scale {
            converged = true;
            message = "relative objective change below tolerance".into();
            break;
        }
    }

    let theta_hat: Vec<f64> = cur.x.iter().copied().collect();
    let hessian = finite_difference_hessian(obj, &theta_hat, opts.fd_step)?;
    let laplace_cov = hessian.clone().cholesky().map(|c| {
        let inv = c.inverse();
        (&inv + inv.transpose()) * 0.5
    });
    if laplace_cov.is_none() {
        converged = false;
        message.push_str("; Hessian not positive definite");
    }
    Ok(OptimumReport {
        theta_hat,
        neg_logp: cur.f,
        gradient: cur.g.iter().copied().collect(),
        hessian,
        laplace_cov,
        converged,
        iterations,
        message,
    })
}

fn evaluate(obj: &dyn Objective, x: DVector<f64>) -> Result<Option<Point>> {
    let f = finite_or_inf(obj.value(x.as_slice()))?;
    if !f.is_finite() {
        return Ok(None);
    }
    let g = DVector::from_vec(obj.gradient(x.as_slice())?);
    if g.iter().any(|v| !v.is_finite()) {
        return Ok(None);
    }
    Ok(Some(Point { x, f, g }))
}

/// Point along the search direction; `None` where the objective is not finite.
struct Trial {
    alpha: f64,
    f: f64,
    slope: f64,
    point: Option<Point>,
}

fn trial(obj: &dyn Objective, cur: &Point, p: &DVector<f64>, alpha: f64) -> Result<Trial> {
    Ok(match evaluate(obj, &cur.x + p * alpha)? {
        Some(pt) => Trial {
            alpha,
            f: pt.f,
            slope: pt.g.dot(p),
            point: Some(pt),
        },
        None => Trial {
            alpha,
            f: f64::INFINITY,
            slope: f64::NAN,
            point: None,
        },
    })
}

/// Strong-Wolfe line search. The secant root of the directional derivative
/// between 0 and the unit step is tried first, which is exact on quadratics;
/// otherwise the step is bracketed and zoomed.
fn line_search(obj: &dyn Objective, cur: &Point, p: &DVector<f64>, slope0: f64) -> Result<Option<Point>> {
    let sufficient = |t: &Trial| t.f <= cur.f + ARMIJO_C1 * t.alpha * slope0;
    let curvature = |t: &Trial| t.slope.abs() <= -WOLFE_C2 * slope0;

    let unit = trial(obj, cur, p, 1.0)?;
    if unit.point.is_some() && unit.slope > slope0 {
        let alpha = slope0 / (slope0 - unit.slope);
        if alpha.is_finite() && alpha > 0.0 && (alpha - 1.0).abs() > 1e-12 {
            let sec = trial(obj, cur, p, alpha)?;
            if sec.point.is_some() && sufficient(&sec) && curvature(&sec) {
                return Ok(sec.point);
            }
        }
    }

    let mut prev = Trial {
        alpha: 0.0,
        f: cur.f,
        slope: slope0,
        point: None,
    };
    let mut t = unit;
    for i in 0..MAX_BACKTRACKS {
        if t.point.is_none() || !sufficient(&t) || (i > 0 && t.f >= prev.f) {
            return zoom(obj, cur, p, slope0, prev, t);
        }
        if curvature(&t) {
            return Ok(t.point);
        }
        if t.slope >= 0.0 {
            return zoom(obj, cur, p, slope0, t, prev);
        }
        let next = (2.0 * t.alpha).min(MAX_STEP);
        if next <= t.alpha {
            return Ok(t.point);
        }
        prev = t;
        t = trial(obj, cur, p, next)?;
    }
    Ok(None)
}

fn zoom(
    obj: &dyn Objective,
    cur: &Point,
    p: &DVector<f64>,
    slope0: f64,
    mut lo: Trial,
    mut hi: Trial,
) -> Result<Option<Point>> {
    for _ in 0..MAX_BACKTRACKS {
        let (a, b) = (lo.alpha, hi.alpha);
        let width = b - a;
        // quadratic through f(lo), f'(lo), f(hi), safeguarded towards the middle
        let mut alpha = if hi.f.is_finite() {
            let denom = 2.0 * (hi.f - lo.f - lo.slope * width);
            a - lo.slope * width * width / denom
        } else {
            f64::NAN
        };
        let (l, u) = (a.min(b), a.max(b));
        let margin = 0.1 * (u - l);
        if !(alpha.is_finite() && alpha > l + margin && alpha < u - margin) {
            alpha = 0.5 * (a + b);
        }
        let t = trial(obj, cur, p, alpha)?;
        if t.point.is_none() || t.f > cur.f + ARMIJO_C1 * alpha * slope0 || t.f >= lo.f {
            hi = t;
        } else {
            if t.slope.abs() <= -WOLFE_C2 * slope0 {
                return Ok(t.point);
            }
            if t.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = t;
        }
        if (hi.alpha - lo.alpha).abs() < 1e-16 * lo.alpha.abs().max(1.0) {
            break;
        }
    }
    // no Wolfe point; accept sufficient decrease if one was found
    Ok(if lo.alpha > 0.0 { lo.point } else { None })
}
