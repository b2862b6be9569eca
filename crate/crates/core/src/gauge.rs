//! Smooth gauge functions on path space and the Borwein-Preiss variational
//! principle over finite candidate sets.
//!
//! kappa_infinity is the smooth surrogate for the squared stopped sup-norm
//! distance (sandwiched between M^2 and 3 M^2); rho_infinity adds the
//! squared time gap and saturates kappa so its derivatives stay bounded,
//! returning a tagged +infinity for backward time gaps. The variational
//! principle perturbs an upper-semicontinuous score G by a geometric sum of
//! rho-distances to an iteratively built center chain, turning a near-max
//! into a strict max.

use serde::Serialize;

use crate::calculus::{horizontal_derivative, vertical_gradient, vertical_hessian, FnFunctional};
use crate::error::{Error, Result};
use crate::la::Matrix;
use crate::path::{stopped_distance, GaugePoint};

/// M = stopped sup-norm distance, e = endpoint distance.
fn gauge_ingredients(a: &GaugePoint, b: &GaugePoint) -> (f64, f64) {
    let m = stopped_distance(a, b);
    let xa = a.path.value_at(a.t);
    let xb = b.path.value_at(b.t);
    let e: f64 = xa
        .iter()
        .zip(&xb)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    (m, e)
}

/// (M^2 - e^2)^3 / M^4 + 3 e^2 for M != 0, else 0. Satisfies
/// M^2 <= kappa <= 3 M^2.
pub fn kappa_infinity(a: &GaugePoint, b: &GaugePoint) -> f64 {
    let (m, e) = gauge_ingredients(a, b);
    if m == 0.0 {
        return 0.0;
    }
    let m2 = m * m;
    let e2 = (e * e).min(m2); // e <= M analytically; clip rounding overshoot
    let diff = m2 - e2;
    diff * diff * diff / (m2 * m2) + 3.0 * e2
}

/// Saturated gauge: |t - t'|^2 + kappa/(1 + kappa) for t >= t', +infinity
/// otherwise (tagged, never a float NaN/inf in arithmetic).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum GaugeValue {
    Finite(f64),
    Infinite,
}

impl GaugeValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            GaugeValue::Finite(v) => Some(v),
            GaugeValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, GaugeValue::Infinite)
    }
}

pub fn rho_infinity(a: &GaugePoint, b: &GaugePoint) -> GaugeValue {
    if a.t < b.t {
        return GaugeValue::Infinite;
    }
    let kappa = kappa_infinity(a, b);
    let dt = a.t - b.t;
    GaugeValue::Finite(dt * dt + kappa / (1.0 + kappa))
}

/// kappa/(1 + kappa) relative to a fixed anchor.
pub fn chi_infinity(p: &GaugePoint, anchor: &GaugePoint) -> f64 {
    let kappa = kappa_infinity(p, anchor);
    kappa / (1.0 + kappa)
}

/// Phi(t) = (2/pi) arctan(t^13) + 1 with its derivative; the strictly
/// increasing C^1 map with Phi(0) = 1 and Phi'(1) = 13/pi > 4 used to tilt
/// subsolutions in the comparison argument.
pub fn phi_comparison(t: f64) -> (f64, f64) {
    let t13 = t.powi(13);
    let value = std::f64::consts::FRAC_2_PI * t13.atan() + 1.0;
    let deriv = std::f64::consts::FRAC_2_PI * 13.0 * t.powi(12) / (1.0 + t13 * t13);
    (value, deriv)
}

/// Finite-difference pathwise derivatives of p -> kappa(p, center), valid on
/// the smoothness region t >= center.t.
pub fn kappa_derivatives(
    a: &GaugePoint,
    center: &GaugePoint,
    h: f64,
) -> Result<(f64, Vec<f64>, Matrix)> {
    if a.t < center.t {
        return Err(Error::domain(format!(
            "kappa is smooth only for t >= {}, got t = {}",
            center.t, a.t
        )));
    }
    let center = center.clone();
    let u = FnFunctional(move |t: f64, path: &crate::path::Path| {
        let p = GaugePoint::new(t.min(path.span()), path.clone()).expect("in-span gauge point");
        kappa_infinity(&p, &center)
    });
    let horizontal = horizontal_derivative(&u, a, h)?.value;
    let grad = vertical_gradient(&u, a, h)?;
    let hess = vertical_hessian(&u, a, h.sqrt().min(1e-3))?;
    Ok((horizontal, grad, hess))
}

/// Perturbation phi(p) = sum_i 2^{-i} rho(p, z_i); the center list is the
/// finite chain with the final center carrying the collapsed geometric tail.
#[derive(Clone, Debug)]
pub struct PerturbationPhi {
    pub centers: Vec<GaugePoint>,
    pub delta: f64,
}

impl PerturbationPhi {
    /// Weight of rho(., centers[i]) inside phi (tail absorbed by the last).
    pub fn weight(&self, i: usize) -> f64 {
        let last = self.centers.len() - 1;
        if i < last {
            0.5_f64.powi(i as i32)
        } else {
            2.0 * 0.5_f64.powi(last as i32)
        }
    }

    pub fn eval(&self, p: &GaugePoint) -> GaugeValue {
        let mut acc = 0.0;
        for (i, z) in self.centers.iter().enumerate() {
            match rho_infinity(p, z) {
                GaugeValue::Finite(v) => acc += self.weight(i) * v,
                GaugeValue::Infinite => return GaugeValue::Infinite,
            }
        }
        GaugeValue::Finite(acc)
    }

    /// G(p) - delta * phi(p); None encodes -infinity (p behind a center).
    pub fn perturbed(&self, g_value: f64, p: &GaugePoint) -> Option<f64> {
        self.eval(p).finite().map(|phi| g_value - self.delta * phi)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VpIteration {
    pub center_index: usize,
    pub perturbed_value: f64,
    pub surviving: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VpTrace {
    pub start_index: usize,
    pub center_indices: Vec<usize>,
    pub iterations: Vec<VpIteration>,
    pub converged: bool,
    /// rho(final, z_i) per center, for the delta/2^i residual report.
    pub center_residuals: Vec<f64>,
}

pub struct VpOutcome {
    pub maximizer: GaugePoint,
    pub maximizer_index: usize,
    pub phi: PerturbationPhi,
    pub trace: VpTrace,
}

/// Borwein-Preiss principle restricted to a finite candidate set.
///
/// Starts from the lowest-index candidate within delta^2 of the max, then
/// repeatedly picks the lowest-index candidate within a shrinking slack
/// (delta^2 4^{-(k+1)}) of the constrained perturbed max, keeping only
/// candidates whose perturbed value ties-or-beats the chosen center. Stops
/// when the chosen center repeats and attains the exact constrained max,
/// which forces strict maximality of G - delta*phi at the output over the
/// whole candidate set (modulo rho-equivalent duplicates).
pub fn borwein_preiss<G: Fn(&GaugePoint) -> f64>(
    g: G,
    candidates: &[GaugePoint],
    delta: f64,
) -> Result<VpOutcome> {
    if candidates.is_empty() {
        return Err(Error::domain("candidate set must be nonempty"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain("delta must lie in (0, 1)"));
    }
    let values: Vec<f64> = candidates.iter().map(|p| g(p)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("G must be finite on the candidate set"));
    }
    let sup = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let start = values
        .iter()
        .position(|&v| v >= sup - delta * delta)
        .expect("sup attained on finite set");

    let n = candidates.len();
    // rho(p, z) columns cached per chosen center.
    let mut rho_cols: Vec<(usize, Vec<GaugeValue>)> = Vec::new();
    let rho_col = |center: usize, cols: &mut Vec<(usize, Vec<GaugeValue>)>| -> usize {
        if let Some(pos) = cols.iter().position(|(c, _)| *c == center) {
            return pos;
        }
        let col: Vec<GaugeValue> = (0..n)
            .map(|i| rho_infinity(&candidates[i], &candidates[center]))
            .collect();
        cols.push((center, col));
        cols.len() - 1
    };

    let mut centers: Vec<usize> = vec![start];
    // phi_k accumulated per candidate; None = infinite.
    let mut phi_k: Vec<Option<f64>> = {
        let col = rho_col(start, &mut rho_cols);
        (0..n).map(|i| rho_cols[col].1[i].finite()).collect()
    };
    let mut alive: Vec<bool> = {
        // T_0 = {p : (G - delta rho(., z_0))(p) >= G(z_0)}.
        (0..n)
            .map(|i| match phi_k[i] {
                Some(phi) => values[i] - delta * phi >= values[start] - 1e-14,
                None => false,
            })
            .collect()
    };
    let mut iterations = Vec::new();
    let mut converged = false;
    let max_iters = 64;
    let mut current = start;

    for k in 0..max_iters {
        // Constrained perturbed max over the surviving set.
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            if alive[i] {
                if let Some(phi) = phi_k[i] {
                    best = best.max(values[i] - delta * phi);
                }
            }
        }
        let slack = delta * delta * 0.25_f64.powi(k as i32 + 1);
        let mut chosen = None;
        for i in 0..n {
            if alive[i] {
                if let Some(phi) = phi_k[i] {
                    if values[i] - delta * phi >= best - slack {
                        chosen = Some(i);
                        break;
                    }
                }
            }
        }
        let q = chosen.expect("surviving set never empties: the center survives");
        let q_val = values[q] - delta * phi_k[q].expect("chosen center has finite phi");
        let exact_max = q_val >= best - 1e-14;
        iterations.push(VpIteration {
            center_index: q,
            perturbed_value: q_val,
            surviving: alive.iter().filter(|&&a| a).count(),
        });
        if q == current && exact_max && k > 0 {
            converged = true;
            break;
        }
        current = q;
        centers.push(q);
        // phi_{k+1} = phi_k + 2^{-(k+1)} rho(., z_{k+1}); shrink the set to
        // candidates tying-or-beating the center under phi_{k+1}.
        let w = 0.5_f64.powi(k as i32 + 1);
        let col = rho_col(q, &mut rho_cols);
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            phi_k[i] = match (phi_k[i], rho_cols[col].1[i]) {
                (Some(acc), GaugeValue::Finite(r)) => Some(acc + w * r),
                _ => None,
            };
        }
        let center_val = values[q] - delta * phi_k[q].expect("center stays finite");
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            alive[i] = match phi_k[i] {
                Some(phi) => values[i] - delta * phi >= center_val - 1e-14,
                None => false,
            };
        }
    }

    let final_idx = current;
    // Collapse any trailing repeats of the final center.
    while centers.len() >= 2 && centers[centers.len() - 2] == final_idx
        && *centers.last().unwrap() == final_idx
    {
        centers.pop();
    }
    let phi = PerturbationPhi {
        centers: centers.iter().map(|&i| candidates[i].clone()).collect(),
        delta,
    };
    let center_residuals = centers
        .iter()
        .map(|&i| {
            rho_infinity(&candidates[final_idx], &candidates[i])
                .finite()
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    Ok(VpOutcome {
        maximizer: candidates[final_idx].clone(),
        maximizer_index: final_idx,
        phi,
        trace: VpTrace {
            start_index: start,
            center_indices: centers,
            iterations,
            converged,
            center_residuals,
        },
    })
}

/// Exhaustive postcondition check of the four variational-principle claims
/// over the candidate set; returns the list of violated items.
pub fn check_vp_postconditions<G: Fn(&GaugePoint) -> f64>(
    g: G,
    candidates: &[GaugePoint],
    outcome: &VpOutcome,
) -> Vec<String> {
    let mut violations = Vec::new();
    let bar = &outcome.maximizer;
    let delta = outcome.phi.delta;
    let tol = 1e-10;

    // i) rho(bar, z_i) <= delta / 2^i (i = 0 is the delta-start bound).
    for (i, z) in outcome.phi.centers.iter().enumerate() {
        let bound = delta * 0.5_f64.powi(i as i32);
        match rho_infinity(bar, z) {
            GaugeValue::Finite(r) if r <= bound + tol => {}
            other => violations.push(format!("item i: rho to center {i} = {other:?} > {bound}")),
        }
    }
    // ii) G(start) <= G(bar) - delta phi(bar).
    let start = &outcome.phi.centers[0];
    let g_start = g(start);
    let g_bar = g(bar);
    match outcome.phi.perturbed(g_bar, bar) {
        Some(pv) => {
            if g_start > pv + tol {
                violations.push(format!("item ii: G(start) = {g_start} > {pv}"));
            }
        }
        None => violations.push("item ii: phi infinite at the maximizer".into()),
    }
    // iii) strict maximality over the candidate set (rho-duplicates exempt).
    let bar_pv = outcome
        .phi
        .perturbed(g_bar, bar)
        .expect("phi finite at maximizer");
    for (idx, p) in candidates.iter().enumerate() {
        if idx == outcome.maximizer_index {
            continue;
        }
        let dup = matches!(rho_infinity(p, bar), GaugeValue::Finite(r) if r <= 1e-14)
            && matches!(rho_infinity(bar, p), GaugeValue::Finite(r) if r <= 1e-14);
        if dup {
            continue;
        }
        if let Some(pv) = outcome.phi.perturbed(g(p), p) {
            if pv >= bar_pv - 1e-14 {
                violations.push(format!(
                    "item iii: candidate {idx} perturbed value {pv} >= {bar_pv}"
                ));
            }
        }
    }
    // iv) t_start <= t_i <= t_bar for every center.
    let t0 = outcome.phi.centers[0].t;
    for (i, z) in outcome.phi.centers.iter().enumerate() {
        if z.t < t0 - tol || z.t > bar.t + tol {
            violations.push(format!(
                "item iv: center {i} time {} outside [{t0}, {}]",
                z.t, bar.t
            ));
        }
    }
    violations
}
