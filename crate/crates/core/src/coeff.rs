//! Non-anticipative coefficient evaluators `(t, path, action) -> value`
//! carrying their declared constants (Lipschitz bound in the stopped
//! sup-norm, uniform bound, time modulus). The constants are metadata the
//! estimators and error bounds consume; `validate` spot-checks them on
//! random samples.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::path::Path;
use crate::rng::SeqRng;

pub type CoeffFn = Box<dyn Fn(f64, &Path, &[f64]) -> Vec<f64> + Send + Sync>;
pub type ModulusFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Finite action set; each action is a point of the action space, here a
/// small real vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionSet {
    pub actions: Vec<Vec<f64>>,
}

impl ActionSet {
    pub fn new(actions: Vec<Vec<f64>>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::domain("action set must be nonempty"));
        }
        Ok(ActionSet { actions })
    }

    pub fn scalar(values: &[f64]) -> Result<Self> {
        ActionSet::new(values.iter().map(|&a| vec![a]).collect())
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, idx: usize) -> Result<&[f64]> {
        self.actions
            .get(idx)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::domain(format!("action index {idx} out of range")))
    }
}

pub struct CoefficientSpec {
    pub name: String,
    /// Entries in the returned vector (1 for scalars, d for drifts,
    /// d*m row-major for diffusion matrices).
    pub output_dim: usize,
    eval: CoeffFn,
    pub lipschitz_k: f64,
    pub bound: f64,
    time_modulus: ModulusFn,
}

impl CoefficientSpec {
    pub fn new(
        name: impl Into<String>,
        output_dim: usize,
        eval: impl Fn(f64, &Path, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        lipschitz_k: f64,
        bound: f64,
        time_modulus: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CoefficientSpec {
            name: name.into(),
            output_dim,
            eval: Box::new(eval),
            lipschitz_k,
            bound,
            time_modulus: Box::new(time_modulus),
        }
    }

    pub fn scalar(
        name: impl Into<String>,
        eval: impl Fn(f64, &Path, &[f64]) -> f64 + Send + Sync + 'static,
        lipschitz_k: f64,
        bound: f64,
    ) -> Self {
        CoefficientSpec::new(
            name,
            1,
            move |t, x, a| vec![eval(t, x, a)],
            lipschitz_k,
            bound,
            |_| 0.0,
        )
    }

    pub fn constant_vec(name: impl Into<String>, value: Vec<f64>) -> Self {
        let bound = crate::la::norm2(&value);
        let v = value.clone();
        CoefficientSpec::new(
            name,
            value.len(),
            move |_, _, _| v.clone(),
            0.0,
            bound,
            |_| 0.0,
        )
    }

    pub fn with_time_modulus(mut self, w: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.time_modulus = Box::new(w);
        self
    }

    pub fn eval(&self, t: f64, path: &Path, action: &[f64]) -> Vec<f64> {
        (self.eval)(t, path, action)
    }

    pub fn eval_scalar(&self, t: f64, path: &Path, action: &[f64]) -> f64 {
        (self.eval)(t, path, action)[0]
    }

    pub fn time_modulus(&self, delta: f64) -> f64 {
        (self.time_modulus)(delta)
    }

    /// Spot-check non-anticipativity and the declared constants on random
    /// piecewise-linear paths; tolerance 1e-9 per the contract.
    pub fn validate(&self, dim: usize, horizon: f64, actions: &ActionSet, seed: u64) -> Result<()> {
        let mut rng = SeqRng::new(seed);
        let tol = 1e-9;
        for trial in 0..48 {
            let segs = 4 + rng.next_index(5);
            let times: Vec<f64> = (0..=segs)
                .map(|j| horizon * j as f64 / segs as f64)
                .collect();
            let x = Path::from_fn(times.clone(), |_| {
                (0..dim).map(|_| rng.next_range(-1.0, 1.0)).collect()
            })?;
            let y = Path::from_fn(times, |_| {
                (0..dim).map(|_| rng.next_range(-1.0, 1.0)).collect()
            })?;
            let t = rng.next_range(0.0, horizon);
            let a = actions.actions[rng.next_index(actions.len())].clone();

            let fx = self.eval(t, &x, &a);
            if fx.len() != self.output_dim {
                return Err(Error::validation(format!(
                    "coefficient {} returned {} entries, declared {}",
                    self.name,
                    fx.len(),
                    self.output_dim
                )));
            }
            let norm = crate::la::norm2(&fx);
            if norm > self.bound + tol {
                return Err(Error::validation(format!(
                    "coefficient {}: |value| = {norm} exceeds declared bound {}",
                    self.name, self.bound
                )));
            }
            let stopped = x.stop(t)?;
            let f_stop = self.eval(t, &stopped, &a);
            let dev = diff_norm(&fx, &f_stop);
            if dev > tol {
                return Err(Error::validation(format!(
                    "coefficient {} anticipates the future: deviation {dev} at t={t}",
                    self.name
                )));
            }
            let fy = self.eval(t, &y, &a);
            let dist = crate::path::stopped_distance(
                &crate::path::GaugePoint::new(t, x.clone())?,
                &crate::path::GaugePoint::new(t, y.clone())?,
            );
            if diff_norm(&fx, &fy) > self.lipschitz_k * dist + tol {
                return Err(Error::validation(format!(
                    "coefficient {}: Lipschitz violation {} > {} * {dist} (trial {trial})",
                    self.name,
                    diff_norm(&fx, &fy),
                    self.lipschitz_k
                )));
            }
            // The modulus bounds the t-variation along stopped paths (the
            // form the mollification estimate consumes).
            let s = rng.next_range(t, horizon);
            let f_later = self.eval(s, &stopped, &a);
            let w = self.time_modulus(s - t);
            if diff_norm(&f_later, &f_stop) > w + tol {
                return Err(Error::validation(format!(
                    "coefficient {}: time modulus violated ({} > {w})",
                    self.name,
                    diff_norm(&f_later, &f_stop)
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for CoefficientSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "CoefficientSpec({}, dim {}, K={}, bound={})",
            self.name, self.output_dim, self.lipschitz_k, self.bound
        )
    }
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub type SharedCoefficient = Arc<CoefficientSpec>;
