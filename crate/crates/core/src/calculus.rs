//! Pathwise (Dupire) derivatives and the functional Ito residual.
//!
//! The horizontal derivative moves time forward with the path frozen; the
//! vertical derivatives bump the path by h e_i on [t, T] (node at t
//! included). Cylindrical functionals — core functions of finitely many
//! forward integrals — get their derivatives in closed form through the
//! stacked weight matrix, and double as the smooth test-function class.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forward::{lifted_coordinates, Weight};
use crate::la::{self, Matrix};
use crate::path::{GaugePoint, Path};
use crate::rng::SeqRng;

/// Non-anticipative real functional of (t, path).
pub trait PathFunctional: Send + Sync {
    fn eval(&self, t: f64, path: &Path) -> f64;
}

/// Closure wrapper.
pub struct FnFunctional<F: Fn(f64, &Path) -> f64 + Send + Sync>(pub F);

impl<F: Fn(f64, &Path) -> f64 + Send + Sync> PathFunctional for FnFunctional<F> {
    fn eval(&self, t: f64, path: &Path) -> f64 {
        (self.0)(t, path)
    }
}

/// Finite-dimensional core of a cylindrical functional. Partials default to
/// central finite differences of `eval`; override them when closed forms
/// exist.
pub trait CylCore: Send + Sync {
    fn eval(&self, t: f64, y: &[f64]) -> f64;

    fn dt(&self, t: f64, y: &[f64]) -> f64 {
        let h = 1e-6 * t.abs().max(1.0);
        (self.eval(t + h, y) - self.eval(t - h, y)) / (2.0 * h)
    }

    fn grad_y(&self, t: f64, y: &[f64]) -> Vec<f64> {
        fd_grad(self, t, y)
    }

    fn hess_y(&self, t: f64, y: &[f64]) -> Matrix {
        fd_hess(self, t, y)
    }
}

/// Core built from closures, with optional analytic partials.
pub struct ClosureCore {
    pub f: Box<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>,
    pub df_dt: Option<Box<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>>,
    pub df_dy: Option<Box<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>>,
    pub df_dyy: Option<Box<dyn Fn(f64, &[f64]) -> Matrix + Send + Sync>>,
}

impl ClosureCore {
    pub fn numeric(f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ClosureCore {
            f: Box::new(f),
            df_dt: None,
            df_dy: None,
            df_dyy: None,
        }
    }

    pub fn analytic(
        f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        dt: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        dy: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        dyy: impl Fn(f64, &[f64]) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        ClosureCore {
            f: Box::new(f),
            df_dt: Some(Box::new(dt)),
            df_dy: Some(Box::new(dy)),
            df_dyy: Some(Box::new(dyy)),
        }
    }
}

impl CylCore for ClosureCore {
    fn eval(&self, t: f64, y: &[f64]) -> f64 {
        (self.f)(t, y)
    }

    fn dt(&self, t: f64, y: &[f64]) -> f64 {
        match &self.df_dt {
            Some(g) => g(t, y),
            None => {
                let h = 1e-6 * t.abs().max(1.0);
                (self.eval(t + h, y) - self.eval(t - h, y)) / (2.0 * h)
            }
        }
    }

    fn grad_y(&self, t: f64, y: &[f64]) -> Vec<f64> {
        match &self.df_dy {
            Some(g) => g(t, y),
            None => fd_grad(self, t, y),
        }
    }

    fn hess_y(&self, t: f64, y: &[f64]) -> Matrix {
        match &self.df_dyy {
            Some(g) => g(t, y),
            None => fd_hess(self, t, y),
        }
    }
}

fn fd_grad<C: CylCore + ?Sized>(core: &C, t: f64, y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut work = y.to_vec();
    for j in 0..y.len() {
        let h = 1e-6 * y[j].abs().max(1.0);
        work[j] = y[j] + h;
        let up = core.eval(t, &work);
        work[j] = y[j] - h;
        let dn = core.eval(t, &work);
        work[j] = y[j];
        out.push((up - dn) / (2.0 * h));
    }
    out
}

fn fd_hess<C: CylCore + ?Sized>(core: &C, t: f64, y: &[f64]) -> Matrix {
    let n = y.len();
    let mut out = la::zeros(n, n);
    let mut work = y.to_vec();
    let base = core.eval(t, y);
    let step = |v: f64| 1e-4 * v.abs().max(1.0);
    for i in 0..n {
        let hi = step(y[i]);
        work[i] = y[i] + hi;
        let up = core.eval(t, &work);
        work[i] = y[i] - hi;
        let dn = core.eval(t, &work);
        work[i] = y[i];
        out[i][i] = (up - 2.0 * base + dn) / (hi * hi);
        for j in 0..i {
            let hj = step(y[j]);
            work[i] = y[i] + hi;
            work[j] = y[j] + hj;
            let pp = core.eval(t, &work);
            work[j] = y[j] - hj;
            let pm = core.eval(t, &work);
            work[i] = y[i] - hi;
            let mm = core.eval(t, &work);
            work[j] = y[j] + hj;
            let mp = core.eval(t, &work);
            work[i] = y[i];
            work[j] = y[j];
            let v = (pp - pm - mp + mm) / (4.0 * hi * hj);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// u(t, x) = core(t, (int phi_j d^-x)_j): non-anticipative by construction.
pub struct CylindricalFunctional {
    pub core: Box<dyn CylCore>,
    pub weights: Arc<Vec<Weight>>,
    /// Path dimension d; the core sees y in R^{d * weights.len()}.
    pub dim: usize,
}

impl CylindricalFunctional {
    pub fn new(core: Box<dyn CylCore>, weights: Arc<Vec<Weight>>, dim: usize) -> Self {
        CylindricalFunctional { core, weights, dim }
    }

    pub fn lifted(&self, t: f64, path: &Path) -> Result<Vec<f64>> {
        lifted_coordinates(&self.weights, path, t)
    }

    /// Check the supplied core partials against finite differences at random
    /// points (relative error <= 1e-5).
    pub fn validate_partials(&self, t_span: f64, y_scale: f64, seed: u64) -> Result<()> {
        let mut rng = SeqRng::new(seed);
        let n = self.dim * self.weights.len();
        for _ in 0..24 {
            let t = rng.next_range(0.05 * t_span, 0.95 * t_span);
            let y: Vec<f64> = (0..n).map(|_| rng.next_range(-y_scale, y_scale)).collect();
            let tol = |scale: f64| 1e-5 * scale.max(1.0) * 20.0;
            let dt_fd = {
                let h = 1e-6 * t.abs().max(1.0);
                (self.core.eval(t + h, &y) - self.core.eval(t - h, &y)) / (2.0 * h)
            };
            let dt = self.core.dt(t, &y);
            if (dt - dt_fd).abs() > tol(dt.abs().max(dt_fd.abs())) {
                return Err(Error::validation(format!(
                    "core dt {dt} vs finite difference {dt_fd}"
                )));
            }
            let g = self.core.grad_y(t, &y);
            let g_fd = fd_grad(self.core.as_ref(), t, &y);
            for (a, b) in g.iter().zip(&g_fd) {
                if (a - b).abs() > tol(a.abs().max(b.abs())) {
                    return Err(Error::validation(format!(
                        "core gradient {a} vs finite difference {b}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl PathFunctional for CylindricalFunctional {
    fn eval(&self, t: f64, path: &Path) -> f64 {
        let y = self.lifted(t, path).expect("lift within path span");
        self.core.eval(t, &y)
    }
}

/// Stacked weight matrix: block row j is phi_j(t) * I_d, shape (d*m) x d.
pub fn bold_phi(weights: &[Weight], t: f64, dim: usize) -> Matrix {
    let mut m = la::zeros(weights.len() * dim, dim);
    for (j, w) in weights.iter().enumerate() {
        let v = w.value(t);
        for c in 0..dim {
            m[j * dim + c][c] = v;
        }
    }
    m
}

#[derive(Clone, Debug)]
pub struct HorizontalDerivative {
    pub value: f64,
    pub effective_step: f64,
    pub clamped: bool,
}

/// One-sided forward difference of s -> u(s, x(.^t)) at s = t. Near the
/// terminal time the step is clamped and reported; at t = T the left-limit
/// clause applies (the difference is taken at T - delta).
pub fn horizontal_derivative(
    u: &dyn PathFunctional,
    p: &GaugePoint,
    delta: f64,
) -> Result<HorizontalDerivative> {
    if !(delta > 0.0) {
        return Err(Error::domain("horizontal step must be positive"));
    }
    let span = p.path.span();
    let frozen = p.path.stop(p.t)?;
    let (base_t, step, clamped) = if p.t + delta <= span {
        (p.t, delta, false)
    } else if p.t >= span {
        ((span - delta).max(0.0), delta.min(span), true)
    } else {
        (p.t, span - p.t, true)
    };
    if step <= 0.0 {
        return Err(Error::domain("degenerate horizontal step"));
    }
    let value = (u.eval(base_t + step, &frozen) - u.eval(base_t, &frozen)) / step;
    Ok(HorizontalDerivative {
        value,
        effective_step: step,
        clamped,
    })
}

/// Central-difference first vertical derivative (gradient over bump axes).
pub fn vertical_gradient(u: &dyn PathFunctional, p: &GaugePoint, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::domain("vertical step must be positive"));
    }
    let d = p.path.dim();
    let mut out = Vec::with_capacity(d);
    let mut e = vec![0.0; d];
    for i in 0..d {
        e[i] = h;
        let up = u.eval(p.t, &p.path.bumped(p.t, &e)?);
        e[i] = -h;
        let dn = u.eval(p.t, &p.path.bumped(p.t, &e)?);
        e[i] = 0.0;
        out.push((up - dn) / (2.0 * h));
    }
    Ok(out)
}

/// Central-difference second vertical derivative (d x d matrix).
pub fn vertical_hessian(u: &dyn PathFunctional, p: &GaugePoint, h: f64) -> Result<Matrix> {
    if !(h > 0.0) {
        return Err(Error::domain("vertical step must be positive"));
    }
    let d = p.path.dim();
    let mut out = la::zeros(d, d);
    let base = u.eval(p.t, &p.path);
    let mut e = vec![0.0; d];
    for i in 0..d {
        e[i] = h;
        let up = u.eval(p.t, &p.path.bumped(p.t, &e)?);
        e[i] = -h;
        let dn = u.eval(p.t, &p.path.bumped(p.t, &e)?);
        e[i] = 0.0;
        out[i][i] = (up - 2.0 * base + dn) / (h * h);
        for j in 0..i {
            let eval_pm = |si: f64, sj: f64| -> Result<f64> {
                let mut bump = vec![0.0; d];
                bump[i] = si * h;
                bump[j] = sj * h;
                Ok(u.eval(p.t, &p.path.bumped(p.t, &bump)?))
            };
            let v = (eval_pm(1.0, 1.0)? - eval_pm(1.0, -1.0)? - eval_pm(-1.0, 1.0)?
                + eval_pm(-1.0, -1.0)?)
                / (4.0 * h * h);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct PathwiseDerivatives {
    pub horizontal: f64,
    pub vertical1: Vec<f64>,
    pub vertical2: Matrix,
}

/// Closed-form pathwise derivatives of a cylindrical functional:
/// horizontal = core_t, vertical1 = bold_phi^T grad_y core,
/// vertical2 = bold_phi^T hess_y core bold_phi. The lifted coordinates are
/// invariant under freezing the path, so no y-terms enter the horizontal.
pub fn cylindrical_derivatives(
    u: &CylindricalFunctional,
    p: &GaugePoint,
) -> Result<PathwiseDerivatives> {
    let y = u.lifted(p.t, &p.path)?;
    let phi = bold_phi(&u.weights, p.t, u.dim);
    let grad = u.core.grad_y(p.t, &y);
    let hess = u.core.hess_y(p.t, &y);
    let vertical1 = la::mat_t_vec(&phi, &grad);
    // phi^T H phi.
    let h_phi = la::mat_mul(&hess, &phi);
    let mut vertical2 = la::zeros(u.dim, u.dim);
    for i in 0..u.dim {
        for j in 0..u.dim {
            let mut s = 0.0;
            for (k, row) in h_phi.iter().enumerate() {
                s += phi[k][i] * row[j];
            }
            vertical2[i][j] = s;
        }
    }
    Ok(PathwiseDerivatives {
        horizontal: u.core.dt(p.t, &y),
        vertical1,
        vertical2,
    })
}

/// Discrete semimartingale: a sampled trajectory plus its per-step quadratic
/// variation increments (sigma sigma^T dt, supplied by the simulator so the
/// Ito check carries no estimator noise).
#[derive(Clone, Debug)]
pub struct DiscreteSemimartingale {
    pub path: Path,
    pub qv: Vec<Matrix>,
}

impl DiscreteSemimartingale {
    pub fn deterministic(path: Path) -> Self {
        let d = path.dim();
        let steps = path.len() - 1;
        DiscreteSemimartingale {
            path,
            qv: vec![la::zeros(d, d); steps],
        }
    }
}

/// |u(T, X) - u(t0, X) - sum of the three left-point Ito sums|.
pub fn ito_residual(
    u: &CylindricalFunctional,
    x: &DiscreteSemimartingale,
    t0: f64,
) -> Result<f64> {
    if x.qv.len() + 1 != x.path.len() {
        return Err(Error::domain(
            "need one quadratic-variation increment per path step",
        ));
    }
    let times = x.path.times();
    let span = x.path.span();
    if t0 < 0.0 || t0 >= span {
        return Err(Error::domain(format!("t0 = {t0} outside [0, span)")));
    }
    let lhs = u.eval(span, &x.path) - u.eval(t0, &x.path);
    let mut rhs = 0.0;
    for k in 0..times.len() - 1 {
        let (tk, tk1) = (times[k], times[k + 1]);
        if tk < t0 {
            continue;
        }
        let dt = tk1 - tk;
        let derivs = cylindrical_derivatives(u, &GaugePoint::new(tk, x.path.clone())?)?;
        let xk = x.path.value_at(tk);
        let xk1 = x.path.value_at(tk1);
        let dx: Vec<f64> = xk1.iter().zip(&xk).map(|(a, b)| a - b).collect();
        rhs += derivs.horizontal * dt;
        rhs += la::dot(&derivs.vertical1, &dx);
        rhs += 0.5 * la::trace_prod(&derivs.vertical2, &x.qv[k]);
    }
    Ok((lhs - rhs).abs())
}

/// Largest deviation of u(t,x) from u(t, x(.^t)) over random samples; zero
/// (to rounding) for genuinely non-anticipative functionals.
pub fn non_anticipativity_defect(
    u: &dyn PathFunctional,
    dim: usize,
    horizon: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = SeqRng::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let segs = 3 + rng.next_index(6);
        let times: Vec<f64> = (0..=segs)
            .map(|j| horizon * j as f64 / segs as f64)
            .collect();
        let x = Path::from_fn(times, |_| {
            (0..dim).map(|_| rng.next_range(-1.0, 1.0)).collect()
        })?;
        let t = rng.next_range(0.0, horizon);
        let dev = (u.eval(t, &x) - u.eval(t, &x.stop(t)?)).abs();
        worst = worst.max(dev);
    }
    Ok(worst)
}
