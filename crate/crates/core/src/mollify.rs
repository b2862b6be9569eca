//! Cylindrical mollification of path-dependent coefficients.
//!
//! A coefficient h(t, x, a) that is Lipschitz in the stopped sup-norm gets
//! replaced, at dyadic level n, by a smooth function of the lifted
//! coordinates y = (int phi_{n,j} d^-x)_j: the path is reconstructed as the
//! level-n polygonal through y + z, jittered by a tight Gaussian z and a
//! half-normal time shift, and h is averaged over the jitter:
//!
//! ```text
//! hbar_n(t, y, a) = E_z int_0^inf eta_n(s) h((t+s)^T, pol(y+z), a) ds
//! ```
//!
//! The z-average runs over counter-seeded Monte-Carlo samples (the Gaussian
//! lives in d(2^n+1) dimensions, far beyond quadrature), the s-integral over
//! a normalized half-normal quadrature after the substitution u = n s. All
//! error and regularity constants quoted by `error_bound_rhs` come with the
//! construction.

use std::sync::Arc;

use crate::calculus::{CylCore, CylindricalFunctional};
use crate::coeff::CoefficientSpec;
use crate::error::{Error, Result};
use crate::forward::{lifted_coordinates, Weight};
use crate::path::{oscillation, GaugePoint, Path};
use crate::quad::gauss_legendre_on;
use crate::rng::{CounterRng, SeqRng};

const EXP_CLAMP: f64 = 700.0;
/// Upper truncation of the half-normal in standardized units; the omitted
/// tail mass is ~1e-15 and the node weights are renormalized to 1.
const HALF_NORMAL_CUT: f64 = 8.0;

/// C-infinity bump: 0 for r <= 0, 1 for r >= 1, strictly increasing between.
pub fn chi(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if r >= 1.0 {
        return 1.0;
    }
    let g = 1.0 / r - 1.0 / (1.0 - r);
    let g = g.clamp(-EXP_CLAMP, EXP_CLAMP);
    1.0 / (1.0 + g.exp())
}

/// d chi / dr; identically zero outside (0, 1).
pub fn chi_deriv(r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        return 0.0;
    }
    let g = 1.0 / r - 1.0 / (1.0 - r);
    if g.abs() >= EXP_CLAMP {
        // The sigmoid factor underflows long before the pole terms blow up.
        return 0.0;
    }
    let s = 1.0 / (1.0 + g.exp());
    s * (1.0 - s) * (1.0 / (r * r) + 1.0 / ((1.0 - r) * (1.0 - r)))
}

/// Dyadic mesh t_j = j T / 2^n, j = 0..=2^n.
pub fn dyadic_times(level: u32, t_max: f64) -> Vec<f64> {
    let n = (1usize << level) + 1;
    (0..n)
        .map(|j| t_max * j as f64 / (n - 1) as f64)
        .collect()
}

/// phi_{n,j}(r): 1 up to t_j, then 1 - chi(2^{2n} (r - t_j)). The transition
/// window has absolute width 2^{-2n}.
pub fn cutoff_value(level: u32, j: usize, r: f64, t_max: f64) -> f64 {
    let tj = t_max * j as f64 / (1u64 << level) as f64;
    if r < tj {
        1.0
    } else {
        let scale = 4.0_f64.powi(level as i32);
        1.0 - chi(scale * (r - tj))
    }
}

pub fn cutoff_deriv(level: u32, j: usize, r: f64, t_max: f64) -> f64 {
    let tj = t_max * j as f64 / (1u64 << level) as f64;
    if r < tj {
        0.0
    } else {
        let scale = 4.0_f64.powi(level as i32);
        -scale * chi_deriv(scale * (r - tj))
    }
}

/// The cutoff as a quadrature-aware weight (knots mark the transition).
pub fn cutoff_weight(level: u32, j: usize, t_max: f64) -> Weight {
    let tj = t_max * j as f64 / (1u64 << level) as f64;
    let width = 4.0_f64.powi(-(level as i32));
    let knots = vec![tj, tj + 0.5 * width, tj + width];
    Weight::new(
        move |r| cutoff_value(level, j, r, t_max),
        move |r| cutoff_deriv(level, j, r, t_max),
    )
    .with_knots(knots)
}

/// All 2^n + 1 cutoffs for a level.
pub fn cutoff_weights(level: u32, t_max: f64) -> Vec<Weight> {
    (0..=(1usize << level))
        .map(|j| cutoff_weight(level, j, t_max))
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct MollifierConfig {
    pub level: u32,
    pub mc_samples: usize,
    pub time_quadrature_nodes: usize,
    pub seed: u64,
}

impl MollifierConfig {
    pub fn new(level: u32, mc_samples: usize, seed: u64) -> Result<Self> {
        if mc_samples == 0 {
            return Err(Error::domain("mc_samples must be >= 1"));
        }
        Ok(MollifierConfig {
            level,
            mc_samples,
            time_quadrature_nodes: 32,
            seed,
        })
    }
}

/// The mollified coefficient: evaluates hbar_n on lifted coordinates (per
/// action) with a reported Monte-Carlo standard error, and exposes itself as
/// a cylindrical functional over the level's cutoff weights.
pub struct MollifiedCoefficient {
    h: Arc<CoefficientSpec>,
    pub cfg: MollifierConfig,
    /// Path dimension d; lifted coordinates live in R^{d (2^n + 1)}.
    pub dim: usize,
    pub t_max: f64,
    weights: Arc<Vec<Weight>>,
    node_times: Vec<f64>,
    rng: CounterRng,
    /// Gaussian std-dev per lifted component: 1 / (d (2^n + 1)).
    pub z_sigma: f64,
}

pub fn mollified_coefficient(
    h: Arc<CoefficientSpec>,
    dim: usize,
    t_max: f64,
    cfg: MollifierConfig,
) -> Result<MollifiedCoefficient> {
    if h.output_dim != 1 {
        return Err(Error::domain(format!(
            "mollification applies to scalar coefficients; {} has output dim {}",
            h.name, h.output_dim
        )));
    }
    if !(h.lipschitz_k.is_finite() && h.lipschitz_k >= 0.0) {
        return Err(Error::validation(format!(
            "coefficient {} declares a non-finite Lipschitz constant; mollification rejected",
            h.name
        )));
    }
    if !(h.bound.is_finite() && h.bound >= 0.0) {
        return Err(Error::validation(format!(
            "coefficient {} declares a non-finite bound; mollification rejected",
            h.name
        )));
    }
    let node_count = (1usize << cfg.level) + 1;
    Ok(MollifiedCoefficient {
        weights: Arc::new(cutoff_weights(cfg.level, t_max)),
        node_times: dyadic_times(cfg.level, t_max),
        rng: CounterRng::new(cfg.seed),
        z_sigma: 1.0 / (dim * node_count) as f64,
        h,
        cfg,
        dim,
        t_max,
    })
}

impl MollifiedCoefficient {
    pub fn weights(&self) -> Arc<Vec<Weight>> {
        Arc::clone(&self.weights)
    }

    pub fn state_dim(&self) -> usize {
        self.dim * self.node_times.len()
    }

    /// Normalized half-normal rule in the substituted variable u = n s,
    /// split at the saturation point u* = n (T - t) of the time argument.
    fn time_rule(&self, t: f64) -> Vec<(f64, f64)> {
        let n = self.cfg.level;
        if n == 0 {
            // Degenerate limit: all mass lands on the terminal time.
            return vec![(f64::INFINITY, 1.0)];
        }
        let density = |u: f64| (2.0 / (2.0 * std::f64::consts::PI).sqrt()) * (-0.5 * u * u).exp();
        let u_star = (n as f64 * (self.t_max - t)).min(HALF_NORMAL_CUT);
        let nodes = self.cfg.time_quadrature_nodes;
        let mut rule: Vec<(f64, f64)> = Vec::new();
        if u_star > 1e-14 {
            rule.extend(gauss_legendre_on(nodes, 0.0, u_star));
        }
        if u_star < HALF_NORMAL_CUT {
            rule.extend(gauss_legendre_on(nodes, u_star, HALF_NORMAL_CUT));
        }
        let mut weighted: Vec<(f64, f64)> = rule
            .into_iter()
            .map(|(u, w)| (u, w * density(u)))
            .collect();
        let mass: f64 = weighted.iter().map(|(_, w)| w).sum();
        for w in weighted.iter_mut() {
            w.1 /= mass;
        }
        weighted
    }

    /// (mean, Monte-Carlo standard error) of hbar_n(t, y, a).
    pub fn eval_core(&self, t: f64, y: &[f64], action: &[f64]) -> (f64, f64) {
        assert_eq!(y.len(), self.state_dim(), "lifted coordinate length");
        let rule = self.time_rule(t);
        let n = self.cfg.level as f64;
        let mut scratch = Path::new(
            self.node_times.clone(),
            vec![vec![0.0; self.dim]; self.node_times.len()],
        )
        .expect("dyadic grid is valid");
        let mut mean = 0.0;
        let mut m2 = 0.0;
        let k_samples = self.cfg.mc_samples;
        for k in 0..k_samples {
            {
                let values = scratch.values_mut();
                for (j, row) in values.iter_mut().enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        let z = self.z_sigma
                            * self.rng.normal_at(&[k as u64, j as u64, c as u64]);
                        *v = y[j * self.dim + c] + z;
                    }
                }
            }
            let mut inner = 0.0;
            for &(u, w) in &rule {
                let tau = if u.is_infinite() {
                    self.t_max
                } else {
                    (t + u / n).min(self.t_max)
                };
                inner += w * self.h.eval_scalar(tau, &scratch, action);
            }
            // Welford update: immune to cancellation when the samples agree.
            let delta = inner - mean;
            mean += delta / (k + 1) as f64;
            m2 += delta * (inner - mean);
        }
        let stderr = if k_samples > 1 {
            (m2 / (k_samples as f64 - 1.0) / k_samples as f64).sqrt()
        } else {
            0.0
        };
        (mean, stderr)
    }

    /// h_n(t, x, a) = hbar_n(t, y_n^{t,x}, a) through the forward integrals.
    pub fn eval_path(&self, t: f64, x: &Path, action: &[f64]) -> Result<(f64, f64)> {
        let y = lifted_coordinates(&self.weights, x, t)?;
        Ok(self.eval_core(t, &y, action))
    }

    /// View as a cylindrical functional for one fixed action (partials by
    /// finite differences of the common-random-number core).
    pub fn cylindrical(self: &Arc<Self>, action: Vec<f64>) -> CylindricalFunctional {
        let weights = self.weights();
        let dim = self.dim;
        CylindricalFunctional::new(
            Box::new(MollifiedCore {
                mol: Arc::clone(self),
                action,
            }),
            weights,
            dim,
        )
    }
}

struct MollifiedCore {
    mol: Arc<MollifiedCoefficient>,
    action: Vec<f64>,
}

impl CylCore for MollifiedCore {
    fn eval(&self, t: f64, y: &[f64]) -> f64 {
        self.mol.eval_core(t, y, &self.action).0
    }
}

/// Right-hand side of the pointwise mollification error bound:
///
/// ```text
/// 3 K osc(x, 2^-n) + 2 K / sqrt(d (2^n + 1))
///   + int_0^inf sqrt(2/pi) e^{-r^2/2} w((t + r/n)^T - t) dr
/// ```
pub fn error_bound_rhs(
    h: &CoefficientSpec,
    dim: usize,
    level: u32,
    p: &GaugePoint,
) -> Result<f64> {
    let k = h.lipschitz_k;
    let t_max = p.path.span();
    let osc = oscillation(&p.path, t_max, 2.0_f64.powi(-(level as i32)))?;
    let node_count = (1usize << level) + 1;
    let middle = 2.0 * k / ((dim * node_count) as f64).sqrt();
    let time_term = if level == 0 {
        h.time_modulus(t_max - p.t)
    } else {
        let n = level as f64;
        let density =
            |r: f64| (2.0 / (2.0 * std::f64::consts::PI).sqrt()) * (-0.5 * r * r).exp();
        let r_star = (n * (t_max - p.t)).min(HALF_NORMAL_CUT);
        let mut acc = 0.0;
        if r_star > 1e-14 {
            for (r, w) in gauss_legendre_on(48, 0.0, r_star) {
                acc += w * density(r) * h.time_modulus((p.t + r / n).min(t_max) - p.t);
            }
        }
        if r_star < HALF_NORMAL_CUT {
            let tail_mass: f64 = gauss_legendre_on(48, r_star, HALF_NORMAL_CUT)
                .into_iter()
                .map(|(r, w)| w * density(r))
                .sum();
            acc += tail_mass * h.time_modulus(t_max - p.t);
        }
        acc
    };
    Ok(3.0 * k * osc + middle + time_term)
}

/// Sampled derivative envelope of a mollified core: fits the smallest K_n
/// with |dt| + |dy| + |dyy| <= K_n (1 + |y|)^q for q = 0 and q = 1.
#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub samples: usize,
    pub max_grad_norm: f64,
    pub max_dt: f64,
    pub max_hess_norm: f64,
    /// Fitted constants for growth exponents q = 0 and q = 1.
    pub fitted_k: [f64; 2],
}

pub fn regularity_check(
    mol: &MollifiedCoefficient,
    action: &[f64],
    y_scale: f64,
    samples: usize,
    seed: u64,
) -> RegularityReport {
    let mut rng = SeqRng::new(seed);
    let dim = mol.state_dim();
    let mut max_grad: f64 = 0.0;
    let mut max_dt: f64 = 0.0;
    let mut max_hess: f64 = 0.0;
    let mut fitted = [0.0_f64; 2];
    let dt_step = 1e-4 * mol.t_max;
    let dy_step = 1e-3 * y_scale.max(1e-3);
    for _ in 0..samples {
        let t = rng.next_range(0.05 * mol.t_max, 0.95 * mol.t_max);
        let y: Vec<f64> = (0..dim).map(|_| rng.next_range(-y_scale, y_scale)).collect();
        let base = mol.eval_core(t, &y, action).0;
        let dt = (mol.eval_core(t + dt_step, &y, action).0
            - mol.eval_core(t - dt_step, &y, action).0)
            / (2.0 * dt_step);
        let mut grad_sq = 0.0;
        let mut hess_sq = 0.0;
        let mut work = y.clone();
        for j in 0..dim {
            work[j] = y[j] + dy_step;
            let up = mol.eval_core(t, &work, action).0;
            work[j] = y[j] - dy_step;
            let dn = mol.eval_core(t, &work, action).0;
            work[j] = y[j];
            let g = (up - dn) / (2.0 * dy_step);
            grad_sq += g * g;
            let h2 = (up - 2.0 * base + dn) / (dy_step * dy_step);
            hess_sq += h2 * h2;
        }
        let grad = grad_sq.sqrt();
        let hess = hess_sq.sqrt();
        max_grad = max_grad.max(grad);
        max_dt = max_dt.max(dt.abs());
        max_hess = max_hess.max(hess);
        let total = dt.abs() + grad + hess;
        let y_norm = crate::la::norm2(&y);
        fitted[0] = fitted[0].max(total);
        fitted[1] = fitted[1].max(total / (1.0 + y_norm));
    }
    RegularityReport {
        samples,
        max_grad_norm: max_grad,
        max_dt,
        max_hess_norm: max_hess,
        fitted_k: fitted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::simpson;

    #[test]
    fn chi_boundary_and_symmetry() {
        assert_eq!(chi(0.0), 0.0);
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(-3.0), 0.0);
        assert_eq!(chi(7.0), 1.0);
        assert!((chi(0.5) - 0.5).abs() < 1e-15);
        // chi(r) + chi(1-r) = 1 (numerically verified identity).
        assert!((chi(0.25) + chi(0.75) - 1.0).abs() < 1e-12);
        for k in 1..100 {
            let r = k as f64 / 100.0;
            assert!((chi(r) + chi(1.0 - r) - 1.0).abs() < 1e-12, "r = {r}");
        }
    }

    #[test]
    fn chi_is_monotone_and_deriv_consistent() {
        let mut last = -1.0;
        for k in 0..=10_000 {
            let r = k as f64 / 10_000.0;
            let v = chi(r);
            assert!(v >= last - 1e-15);
            last = v;
        }
        for &r in &[0.1, 0.3, 0.5, 0.7, 0.9, 1e-4, 1.0 - 1e-4] {
            let h = 1e-7;
            let fd = (chi(r + h) - chi(r - h)) / (2.0 * h);
            let an = chi_deriv(r);
            assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0), "r={r} fd={fd} an={an}");
        }
        // No overflow close to the plateaus.
        assert_eq!(chi_deriv(1e-8), 0.0);
        assert_eq!(chi_deriv(1.0 - 1e-8), 0.0);
    }

    #[test]
    fn cutoff_examples() {
        let t_max = 1.0;
        // r <= t_j: exactly 1.
        assert_eq!(cutoff_value(2, 2, 0.3, t_max), 1.0);
        assert_eq!(cutoff_value(2, 2, 0.5, t_max), 1.0);
        // r = t_j + 2^{-2n}: chi(1) = 1, so the cutoff hits 0.
        let level = 2;
        let tj = 0.5;
        let width = 4.0_f64.powi(-(level as i32));
        assert!((cutoff_value(level, 2, tj + width, t_max)).abs() < 1e-15);
        // Total variation of the derivative = 1 - phi(T) <= 1.
        let knots: Vec<f64> = vec![0.0, tj, tj + 0.5 * width, tj + width, 1.0];
        let tv = simpson(&knots, 128, |r| cutoff_deriv(level, 2, r, t_max).abs());
        let expect = 1.0 - cutoff_value(level, 2, t_max, t_max);
        assert!((tv - expect).abs() < 1e-6, "tv {tv} expect {expect}");
        assert!(tv <= 1.0 + 1e-9);
    }

    fn sin_coefficient() -> Arc<CoefficientSpec> {
        Arc::new(CoefficientSpec::scalar(
            "sin(x(t))",
            |t, x: &Path, _: &[f64]| x.value_at(t)[0].sin(),
            1.0,
            1.0,
        ))
    }

    #[test]
    fn constant_coefficient_mollifies_exactly() {
        let c = Arc::new(CoefficientSpec::scalar("const", |_, _, _| 2.5, 0.0, 2.5));
        for level in [0u32, 1, 3] {
            let cfg = MollifierConfig::new(level, 16, 9).unwrap();
            let mol = mollified_coefficient(Arc::clone(&c), 1, 1.0, cfg).unwrap();
            let y = vec![0.3; mol.state_dim()];
            let (mean, stderr) = mol.eval_core(0.4, &y, &[0.0]);
            assert!((mean - 2.5).abs() < 1e-12, "level {level}: {mean}");
            assert!(stderr < 1e-12);
        }
    }

    #[test]
    fn linear_coefficient_matches_value_at_gaussian_mean() {
        // h linear in x(t): E_z h(tau, pol(y+z)) = h(tau, pol(y)); the MC
        // mean must agree with the analytic value at the mean within 3 se.
        let lin = Arc::new(CoefficientSpec::scalar(
            "x(t)",
            |t, x: &Path, _: &[f64]| x.value_at(t)[0],
            1.0,
            10.0,
        ));
        let level = 2;
        let cfg = MollifierConfig::new(level, 256, 4).unwrap();
        let mol = mollified_coefficient(lin, 1, 1.0, cfg).unwrap();
        let y: Vec<f64> = (0..mol.state_dim()).map(|j| 0.1 * j as f64).collect();
        let t = 0.35;
        let (mean, stderr) = mol.eval_core(t, &y, &[0.0]);
        // Oracle: the s-quadrature applied to the polygonal through y itself.
        let pol = Path::new(
            dyadic_times(level, 1.0),
            y.iter().map(|&v| vec![v]).collect(),
        )
        .unwrap();
        let rule = mol.time_rule(t);
        let oracle: f64 = rule
            .iter()
            .map(|&(u, w)| w * pol.value_at((t + u / level as f64).min(1.0))[0])
            .sum();
        assert!(
            (mean - oracle).abs() <= 3.0 * stderr + 1e-12,
            "mean {mean}, oracle {oracle}, stderr {stderr}"
        );
    }

    #[test]
    fn sin_coefficient_matches_high_sample_oracle() {
        let h = sin_coefficient();
        let cfg = MollifierConfig::new(1, 128, 11).unwrap();
        let mol = mollified_coefficient(Arc::clone(&h), 1, 1.0, cfg).unwrap();
        let cfg_big = MollifierConfig::new(1, 8192, 77).unwrap();
        let oracle = mollified_coefficient(h, 1, 1.0, cfg_big).unwrap();
        let y = vec![0.4, -0.2, 0.7];
        let (m1, s1) = mol.eval_core(0.5, &y, &[0.0]);
        let (m2, s2) = oracle.eval_core(0.5, &y, &[0.0]);
        let tol = 3.0 * (s1 * s1 + s2 * s2).sqrt();
        assert!((m1 - m2).abs() <= tol, "m1 {m1} m2 {m2} tol {tol}");
    }

    #[test]
    fn mollification_error_bound_holds_pointwise() {
        let h = sin_coefficient();
        let mut rng = SeqRng::new(21);
        for level in 0..=3u32 {
            let cfg = MollifierConfig::new(level, 96, 13 + level as u64).unwrap();
            let mol = mollified_coefficient(Arc::clone(&h), 1, 1.0, cfg).unwrap();
            for _ in 0..12 {
                let x = Path::from_fn(vec![0.0, 0.3, 0.6, 1.0], |_| {
                    vec![rng.next_range(-1.0, 1.0)]
                })
                .unwrap();
                let t = rng.next_range(0.0, 1.0);
                let (mean, stderr) = mol.eval_path(t, &x, &[0.0]).unwrap();
                let truth = x.value_at(t)[0].sin();
                let rhs =
                    error_bound_rhs(&h, 1, level, &GaugePoint::new(t, x.clone()).unwrap())
                        .unwrap();
                assert!(
                    (mean - truth).abs() <= rhs + 3.0 * stderr,
                    "level {level}: |{mean} - {truth}| > {rhs} + 3*{stderr}"
                );
            }
        }
    }

    #[test]
    fn error_bound_constant_path_examples() {
        let h = sin_coefficient();
        let x = Path::constant(1, 1.0, &[0.3]).unwrap();
        let p = GaugePoint::new(0.5, x).unwrap();
        // w = 0 and zero oscillation leave only the Gaussian-mean term.
        let rhs = error_bound_rhs(&h, 1, 1, &p).unwrap();
        assert!((rhs - 2.0 / 3.0_f64.sqrt()).abs() < 1e-12, "{rhs}");
        // Monotone decreasing in the level.
        let mut last = f64::INFINITY;
        for level in 0..=8 {
            let rhs = error_bound_rhs(&h, 1, level, &p).unwrap();
            assert!(rhs <= last + 1e-12, "level {level}: {rhs} > {last}");
            last = rhs;
        }
    }

    #[test]
    fn error_bound_decreases_in_level_on_rough_paths() {
        let h = Arc::new(
            CoefficientSpec::scalar(
                "sin(x(t))",
                |t, x: &Path, _: &[f64]| x.value_at(t)[0].sin(),
                1.0,
                1.0,
            )
            .with_time_modulus(|d| 0.3 * d.sqrt()),
        );
        let mut rng = SeqRng::new(31);
        let x = Path::from_fn(
            (0..=16).map(|j| j as f64 / 16.0).collect(),
            |_| vec![rng.next_range(-1.0, 1.0)],
        )
        .unwrap();
        let p = GaugePoint::new(0.4, x).unwrap();
        let mut last = f64::INFINITY;
        for level in 0..=8 {
            let rhs = error_bound_rhs(&h, 1, level, &p).unwrap();
            assert!(rhs <= last + 1e-12, "level {level}: {rhs} > {last}");
            last = rhs;
        }
    }

    #[test]
    fn lipschitz_inheritance_factor_two() {
        let h = sin_coefficient();
        let cfg = MollifierConfig::new(2, 128, 5).unwrap();
        let mol = mollified_coefficient(Arc::clone(&h), 1, 1.0, cfg).unwrap();
        let mut rng = SeqRng::new(41);
        for _ in 0..10 {
            let times = vec![0.0, 0.25, 0.5, 0.75, 1.0];
            let x = Path::from_fn(times.clone(), |_| vec![rng.next_range(-1.0, 1.0)]).unwrap();
            let xp = Path::from_fn(times, |_| vec![rng.next_range(-1.0, 1.0)]).unwrap();
            let t = rng.next_range(0.1, 1.0);
            let (vx, sx) = mol.eval_path(t, &x, &[0.0]).unwrap();
            let (vp, sp) = mol.eval_path(t, &xp, &[0.0]).unwrap();
            let dist = crate::path::stopped_distance(
                &GaugePoint::new(t, x.clone()).unwrap(),
                &GaugePoint::new(t, xp.clone()).unwrap(),
            );
            let slack = 3.0 * (sx * sx + sp * sp).sqrt() + 1e-9;
            assert!(
                (vx - vp).abs() <= 2.0 * h.lipschitz_k * dist + slack,
                "|{vx} - {vp}| > 2K {dist} + {slack}"
            );
        }
    }

    #[test]
    fn boundedness_inheritance_same_constant() {
        let h = sin_coefficient();
        let cfg = MollifierConfig::new(1, 64, 3).unwrap();
        let mol = mollified_coefficient(Arc::clone(&h), 1, 1.0, cfg).unwrap();
        let mut rng = SeqRng::new(51);
        for _ in 0..40 {
            let y: Vec<f64> = (0..mol.state_dim()).map(|_| rng.next_range(-3.0, 3.0)).collect();
            let (v, _) = mol.eval_core(rng.next_range(0.0, 1.0), &y, &[0.0]);
            assert!(v.abs() <= h.bound + 1e-12);
        }
    }

    #[test]
    fn regularity_bounded_coefficient_flat_envelope() {
        let h = sin_coefficient();
        let cfg = MollifierConfig::new(1, 64, 19).unwrap();
        let mol = mollified_coefficient(Arc::clone(&h), 1, 1.0, cfg).unwrap();
        let near = regularity_check(&mol, &[0.0], 0.5, 12, 1);
        let far = regularity_check(&mol, &[0.0], 6.0, 12, 2);
        // Bounded coefficient (item c): the q = 0 envelope holds, so the
        // fitted constant cannot grow with |y|; gradients stay below K.
        assert!(near.max_grad_norm <= h.lipschitz_k + 0.05);
        assert!(far.max_grad_norm <= h.lipschitz_k + 0.05);
        assert!(far.fitted_k[0] <= 4.0 * near.fitted_k[0].max(0.5));

        let c = Arc::new(CoefficientSpec::scalar("const", |_, _, _| 1.0, 0.0, 1.0));
        let molc = mollified_coefficient(c, 1, 1.0, MollifierConfig::new(1, 32, 7).unwrap())
            .unwrap();
        let rep = regularity_check(&molc, &[0.0], 2.0, 8, 3);
        assert!(rep.fitted_k[0] < 1e-9, "constant coefficient: {rep:?}");
    }

    #[test]
    fn regularity_linear_growth_coefficient_q1_envelope() {
        // |h| <= 1 + |x(t)| style growth (item b): q = 1 fits with a stable
        // constant while q = 0 grows with the sampling box.
        let h = Arc::new(CoefficientSpec::scalar(
            "x(t)",
            |t, x: &Path, _: &[f64]| x.value_at(t)[0],
            1.0,
            f64::MAX / 2.0,
        ));
        let cfg = MollifierConfig::new(1, 64, 23).unwrap();
        let mol = mollified_coefficient(h, 1, 1.0, cfg).unwrap();
        let near = regularity_check(&mol, &[0.0], 1.0, 10, 4);
        let far = regularity_check(&mol, &[0.0], 8.0, 10, 5);
        assert!(far.fitted_k[1] <= 2.0 * near.fitted_k[1].max(0.1) + 0.5);
    }

    #[test]
    fn rejects_non_finite_declarations() {
        let bad = Arc::new(CoefficientSpec::scalar(
            "wild",
            |t, x: &Path, _: &[f64]| x.value_at(t)[0],
            f64::INFINITY,
            1.0,
        ));
        let cfg = MollifierConfig::new(1, 8, 0).unwrap();
        assert!(mollified_coefficient(bad, 1, 1.0, cfg).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let h = sin_coefficient();
        let cfg = MollifierConfig::new(2, 64, 123).unwrap();
        let a = mollified_coefficient(Arc::clone(&h), 1, 1.0, cfg).unwrap();
        let b = mollified_coefficient(h, 1, 1.0, cfg).unwrap();
        let y = vec![0.1; a.state_dim()];
        assert_eq!(a.eval_core(0.3, &y, &[0.0]), b.eval_core(0.3, &y, &[0.0]));
    }
}
