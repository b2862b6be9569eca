//! Euler-Maruyama simulation of controlled path-dependent SDEs
//!
//! ```text
//! dX_s = b(s, X, alpha_s) ds + sigma(s, X, alpha_s) dB_s,   s in (t, T],
//! X_s  = x(s),                                              s in [0, t].
//! ```
//!
//! Coefficients see the trajectory built so far (the path type freezes
//! queries past its last node), so non-anticipativity holds structurally.
//! Brownian increments come from a counter generator keyed by (trajectory,
//! step, component): batches are bit-identical no matter how many workers
//! split them. Each trajectory carries its per-step quadratic-variation
//! increments sigma sigma^T dt for the functional Ito checks.

use std::sync::Arc;

use rayon::prelude::*;

use crate::coeff::{ActionSet, CoefficientSpec};
use crate::error::{Error, Result};
use crate::la::{self, Matrix};
use crate::path::Path;
use crate::rng::CounterRng;

pub struct ControlledSDE {
    /// State dimension d.
    pub dim: usize,
    /// Brownian dimension m.
    pub bm_dim: usize,
    /// Vector drift, output_dim = dim.
    pub drift: CoefficientSpec,
    /// Matrix diffusion, output_dim = dim * bm_dim, row-major.
    pub diffusion: CoefficientSpec,
    pub action_set: Arc<ActionSet>,
}

impl ControlledSDE {
    pub fn new(
        dim: usize,
        bm_dim: usize,
        drift: CoefficientSpec,
        diffusion: CoefficientSpec,
        action_set: Arc<ActionSet>,
    ) -> Result<Self> {
        if drift.output_dim != dim {
            return Err(Error::domain(format!(
                "drift output dim {} != state dim {dim}",
                drift.output_dim
            )));
        }
        if diffusion.output_dim != dim * bm_dim {
            return Err(Error::domain(format!(
                "diffusion output dim {} != {dim} x {bm_dim}",
                diffusion.output_dim
            )));
        }
        Ok(ControlledSDE {
            dim,
            bm_dim,
            drift,
            diffusion,
            action_set,
        })
    }

    fn sigma_matrix(&self, t: f64, path: &Path, action: &[f64]) -> Matrix {
        let flat = self.diffusion.eval(t, path, action);
        (0..self.dim)
            .map(|i| flat[i * self.bm_dim..(i + 1) * self.bm_dim].to_vec())
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    pub steps_per_unit: usize,
    pub trajectories: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(steps_per_unit: usize, trajectories: usize, seed: u64) -> Result<Self> {
        if steps_per_unit == 0 || trajectories == 0 {
            return Err(Error::domain("steps_per_unit and trajectories must be >= 1"));
        }
        Ok(SimConfig {
            steps_per_unit,
            trajectories,
            seed,
        })
    }
}

/// Control that is constant between switching times; the grid covers the
/// control's active window [start, end].
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PiecewiseConstantControl {
    /// Switching grid: strictly increasing, first = start, last = end.
    pub switch_times: Vec<f64>,
    /// One action index per interval (len = switch_times.len() - 1).
    pub action_idx: Vec<usize>,
}

impl PiecewiseConstantControl {
    pub fn new(switch_times: Vec<f64>, action_idx: Vec<usize>) -> Result<Self> {
        if switch_times.len() < 2 || action_idx.len() + 1 != switch_times.len() {
            return Err(Error::domain(
                "control needs k+1 switch times for k interval actions",
            ));
        }
        for w in switch_times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::domain("switching grid must be strictly increasing"));
            }
        }
        Ok(PiecewiseConstantControl {
            switch_times,
            action_idx,
        })
    }

    pub fn constant(start: f64, end: f64, action: usize) -> Result<Self> {
        PiecewiseConstantControl::new(vec![start, end], vec![action])
    }

    /// Uniform switching grid on [start, end] with the given interval actions.
    pub fn uniform(start: f64, end: f64, actions: &[usize]) -> Result<Self> {
        let m = actions.len();
        if m == 0 {
            return Err(Error::domain("need at least one interval"));
        }
        let times = (0..=m)
            .map(|j| start + (end - start) * j as f64 / m as f64)
            .collect();
        PiecewiseConstantControl::new(times, actions.to_vec())
    }

    pub fn start(&self) -> f64 {
        self.switch_times[0]
    }

    pub fn end(&self) -> f64 {
        *self.switch_times.last().unwrap()
    }

    /// Action on the interval containing s (right-open; the last interval is
    /// closed). Outside the active window: domain error.
    pub fn action_at(&self, s: f64) -> Result<usize> {
        let tol = 1e-12 * self.end().abs().max(1.0);
        if s < self.start() - tol || s > self.end() + tol {
            return Err(Error::domain(format!(
                "control undefined at {s}: active on [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        let pos = self
            .switch_times
            .partition_point(|&ti| ti <= s + tol)
            .saturating_sub(1);
        Ok(self.action_idx[pos.min(self.action_idx.len() - 1)])
    }
}

/// One trajectory with its per-step quadratic-variation increments.
#[derive(Clone, Debug)]
pub struct SimTrajectory {
    pub path: Path,
    /// sigma sigma^T dt per Euler step, aligned with the step grid below.
    pub qv: Vec<Matrix>,
    /// Index into the path grid where the simulated segment starts.
    pub first_step_node: usize,
}

#[derive(Clone, Debug)]
pub struct SimBatch {
    pub trajectories: Vec<SimTrajectory>,
    pub t_start: f64,
    pub t_end: f64,
}

impl SimBatch {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Long-format CSV `traj,s,x1..xd`.
    pub fn to_csv(&self) -> String {
        let dim = self.trajectories[0].path.dim();
        let mut out = String::from("traj");
        out.push_str(",s");
        for c in 1..=dim {
            out.push_str(&format!(",x{c}"));
        }
        out.push('\n');
        for (i, traj) in self.trajectories.iter().enumerate() {
            for (t, row) in traj.path.times().iter().zip(traj.path.values()) {
                out.push_str(&format!("{i},{t}"));
                for v in row {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Simulate to the path's own horizon T = x.span().
pub fn simulate(
    sde: &ControlledSDE,
    t: f64,
    x: &Path,
    control: &PiecewiseConstantControl,
    cfg: &SimConfig,
) -> Result<SimBatch> {
    simulate_to(sde, t, x.span(), x, control, cfg)
}

/// Simulate on [t, t_end]; the initial path is copied exactly on [0, t].
pub fn simulate_to(
    sde: &ControlledSDE,
    t: f64,
    t_end: f64,
    x: &Path,
    control: &PiecewiseConstantControl,
    cfg: &SimConfig,
) -> Result<SimBatch> {
    if x.dim() != sde.dim {
        return Err(Error::domain("initial path dimension mismatch"));
    }
    if t < 0.0 || t > x.span() {
        return Err(Error::domain(format!("start time {t} outside the path span")));
    }
    if t_end < t {
        return Err(Error::domain("t_end before start time"));
    }
    let steps = if t_end > t {
        (((t_end - t) * cfg.steps_per_unit as f64).ceil() as usize).max(1)
    } else {
        0
    };
    // Pre-resolve actions so an undefined control fails before any work.
    let dt = if steps > 0 { (t_end - t) / steps as f64 } else { 0.0 };
    let mut step_actions = Vec::with_capacity(steps);
    for k in 0..steps {
        let idx = control.action_at(t + k as f64 * dt)?;
        step_actions.push(sde.action_set.get(idx)?.to_vec());
    }
    if steps == 0 {
        // Nothing to simulate: every trajectory is the stopped initial path.
        let frozen = x.stop(t)?;
        let trajectories = (0..cfg.trajectories)
            .map(|_| SimTrajectory {
                path: frozen.clone(),
                qv: Vec::new(),
                first_step_node: frozen.len() - 1,
            })
            .collect();
        return Ok(SimBatch {
            trajectories,
            t_start: t,
            t_end,
        });
    }
    // Full grid: initial nodes strictly before t, node at t, then the Euler
    // step times. Values past the current step stay frozen at the current
    // value, so evaluators always see the stopped trajectory built so far.
    let tol = 1e-12 * x.span().max(1.0);
    let mut grid_times = Vec::new();
    let mut head_values = Vec::new();
    for (&ti, row) in x.times().iter().zip(x.values()) {
        if ti < t - tol {
            grid_times.push(ti);
            head_values.push(row.clone());
        }
    }
    grid_times.push(t);
    head_values.push(x.value_at(t));
    let first_step_node = grid_times.len() - 1;
    for k in 1..=steps {
        grid_times.push(if k == steps { t_end } else { t + k as f64 * dt });
    }

    let rng = CounterRng::new(cfg.seed);
    let run_one = |traj: usize| -> SimTrajectory {
        let start = head_values.last().unwrap().clone();
        let mut values = head_values.clone();
        values.resize(grid_times.len(), start.clone());
        let mut path = Path::new(grid_times.clone(), values).expect("valid simulation grid");
        let mut qv = Vec::with_capacity(steps);
        let mut current = start;
        for (k, action) in step_actions.iter().enumerate() {
            let tk = t + k as f64 * dt;
            let b = sde.drift.eval(tk, &path, action);
            let sigma = sde.sigma_matrix(tk, &path, action);
            let mut next = current.clone();
            for (i, n) in next.iter_mut().enumerate() {
                *n += b[i] * dt;
            }
            for j in 0..sde.bm_dim {
                let db = dt.sqrt() * rng.normal_at(&[traj as u64, k as u64, j as u64]);
                for (i, n) in next.iter_mut().enumerate() {
                    *n += sigma[i][j] * db;
                }
            }
            let mut q = la::gram(&sigma);
            for row in q.iter_mut() {
                for v in row.iter_mut() {
                    *v *= dt;
                }
            }
            qv.push(q);
            // Write the new node and freeze the tail at it.
            for row in path.values_mut()[first_step_node + k + 1..].iter_mut() {
                row.clone_from(&next);
            }
            current = next;
        }
        SimTrajectory {
            path,
            qv,
            first_step_node,
        }
    };
    let trajectories: Vec<SimTrajectory> = (0..cfg.trajectories)
        .into_par_iter()
        .map(run_one)
        .collect();
    Ok(SimBatch {
        trajectories,
        t_start: t,
        t_end,
    })
}

/// Empirical S_p norm: (mean over the batch of sup_s |X_s|^p)^{1/p}.
pub fn sup_moment(batch: &SimBatch, p: f64) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::domain("empty batch"));
    }
    if !(p >= 1.0) {
        return Err(Error::domain("moment order must be >= 1"));
    }
    let mean = batch
        .trajectories
        .iter()
        .map(|traj| traj.path.sup_norm().powf(p))
        .sum::<f64>()
        / batch.len() as f64;
    Ok(mean.powf(1.0 / p))
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ContinuityRow {
    pub r: f64,
    /// max over constant controls of the MC estimate of
    /// E[sup_s |X_{s^r} - x(s^t)|^2].
    pub worst_estimate: f64,
    pub worst_stderr: f64,
    pub per_action: Vec<f64>,
}

/// Short-horizon continuity of the flow: the estimates must decay to 0 as
/// r drops to t, uniformly over constant controls.
pub fn continuity_diagnostic(
    sde: &ControlledSDE,
    t: f64,
    x: &Path,
    r_values: &[f64],
    cfg: &SimConfig,
) -> Result<Vec<ContinuityRow>> {
    let stopped = x.stop(t)?;
    let mut rows = Vec::with_capacity(r_values.len());
    for &r in r_values {
        if r < t || r > x.span() {
            return Err(Error::domain(format!("r = {r} outside [t, T]")));
        }
        let mut per_action = Vec::with_capacity(sde.action_set.len());
        let mut worst = f64::NEG_INFINITY;
        let mut worst_se = 0.0;
        for a_idx in 0..sde.action_set.len() {
            let control = PiecewiseConstantControl::constant(t, x.span().max(t + 1e-9), a_idx)?;
            let batch = simulate_to(sde, t, r.max(t + f64::EPSILON), x, &control, cfg)?;
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for (k, traj) in batch.trajectories.iter().enumerate() {
                // sup over the merged grids of |X(s^r) - x(s^t)|^2; both
                // curves are piecewise linear so node scan is exact.
                let xr = traj.path.stop(r)?;
                let times = crate::path::merged_times(&xr, &stopped);
                let mut sup: f64 = 0.0;
                for &s in &times {
                    let a = xr.value_at(s);
                    let b = stopped.value_at(s);
                    let d2: f64 = a.iter().zip(&b).map(|(u, v)| (u - v) * (u - v)).sum();
                    sup = sup.max(d2);
                }
                let delta = sup - mean;
                mean += delta / (k + 1) as f64;
                m2 += delta * (sup - mean);
            }
            let n = batch.len() as f64;
            let se = if batch.len() > 1 {
                (m2 / (n - 1.0) / n).sqrt()
            } else {
                0.0
            };
            per_action.push(mean);
            if mean > worst {
                worst = mean;
                worst_se = se;
            }
        }
        rows.push(ContinuityRow {
            r,
            worst_estimate: worst,
            worst_stderr: worst_se,
            per_action,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn action_set() -> Arc<ActionSet> {
        Arc::new(ActionSet::scalar(&[0.0]).unwrap())
    }

    fn zero_sde() -> ControlledSDE {
        ControlledSDE::new(
            1,
            1,
            CoefficientSpec::constant_vec("b=0", vec![0.0]),
            CoefficientSpec::constant_vec("sigma=0", vec![0.0]),
            action_set(),
        )
        .unwrap()
    }

    fn brownian_sde() -> ControlledSDE {
        ControlledSDE::new(
            1,
            1,
            CoefficientSpec::constant_vec("b=0", vec![0.0]),
            CoefficientSpec::constant_vec("sigma=1", vec![1.0]),
            action_set(),
        )
        .unwrap()
    }

    fn line_path() -> Path {
        Path::from_fn(vec![0.0, 0.25, 0.5, 0.75, 1.0], |s| vec![s]).unwrap()
    }

    #[test]
    fn zero_coefficients_freeze_the_path() {
        let sde = zero_sde();
        let x = line_path();
        let control = PiecewiseConstantControl::constant(0.0, 1.0, 0).unwrap();
        let cfg = SimConfig::new(16, 3, 7).unwrap();
        let batch = simulate(&sde, 0.4, &x, &control, &cfg).unwrap();
        let frozen = x.stop(0.4).unwrap();
        for traj in &batch.trajectories {
            for &s in &[0.0, 0.2, 0.4, 0.7, 1.0] {
                assert!((traj.path.value_at(s)[0] - frozen.value_at(s)[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_drift_integrates_exactly() {
        let sde = ControlledSDE::new(
            1,
            1,
            CoefficientSpec::constant_vec("b=1", vec![1.0]),
            CoefficientSpec::constant_vec("sigma=0", vec![0.0]),
            action_set(),
        )
        .unwrap();
        let x = line_path();
        let control = PiecewiseConstantControl::constant(0.25, 1.0, 0).unwrap();
        let cfg = SimConfig::new(32, 1, 0).unwrap();
        let batch = simulate(&sde, 0.25, &x, &control, &cfg).unwrap();
        let traj = &batch.trajectories[0];
        for &s in &[0.3, 0.5, 0.9, 1.0] {
            assert!((traj.path.value_at(s)[0] - (0.25 + (s - 0.25))).abs() < 1e-10, "s={s}");
        }
        // Initial segment is copied exactly.
        assert!((traj.path.value_at(0.1)[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn brownian_moments_match_the_law() {
        let sde = brownian_sde();
        let x = Path::constant(1, 1.0, &[0.0]).unwrap();
        let control = PiecewiseConstantControl::constant(0.0, 1.0, 0).unwrap();
        let cfg = SimConfig::new(64, 4000, 11).unwrap();
        let batch = simulate(&sde, 0.0, &x, &control, &cfg).unwrap();
        let finals: Vec<f64> = batch
            .trajectories
            .iter()
            .map(|tr| tr.path.value_at(1.0)[0])
            .collect();
        let n = finals.len() as f64;
        let mean = finals.iter().sum::<f64>() / n;
        let var = finals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let se_mean = (var / n).sqrt();
        assert!(mean.abs() <= 3.0 * se_mean, "mean {mean} se {se_mean}");
        // Var[X_1] = 1 with stderr ~ sqrt(2/n).
        let se_var = (2.0 / n).sqrt();
        assert!((var - 1.0).abs() <= 3.0 * se_var, "var {var}");
    }

    #[test]
    fn qv_increments_are_sigma_gram_dt() {
        let sde = brownian_sde();
        let x = Path::constant(1, 1.0, &[0.0]).unwrap();
        let control = PiecewiseConstantControl::constant(0.0, 1.0, 0).unwrap();
        let cfg = SimConfig::new(8, 1, 3).unwrap();
        let batch = simulate(&sde, 0.0, &x, &control, &cfg).unwrap();
        for q in &batch.trajectories[0].qv {
            assert!((q[0][0] - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn determinism_across_worker_counts() {
        let sde = brownian_sde();
        let x = Path::constant(1, 1.0, &[0.0]).unwrap();
        let control = PiecewiseConstantControl::constant(0.0, 1.0, 0).unwrap();
        let cfg = SimConfig::new(16, 8, 99).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate(&sde, 0.0, &x, &control, &cfg).unwrap());
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| simulate(&sde, 0.0, &x, &control, &cfg).unwrap());
        for (a, b) in single.trajectories.iter().zip(&multi.trajectories) {
            assert_eq!(a.path.values(), b.path.values());
        }
    }

    #[test]
    fn strong_order_half_on_linear_problem() {
        // dX = -X dt + 0.5 dB with known pathwise solution via the same
        // Brownian increments at the finest resolution.
        let sde = ControlledSDE::new(
            1,
            1,
            CoefficientSpec::new(
                "b=-x",
                1,
                |t, x: &Path, _: &[f64]| vec![-x.value_at(t)[0]],
                1.0,
                10.0,
                |_| 0.0,
            ),
            CoefficientSpec::constant_vec("sigma=0.5", vec![0.5]),
            action_set(),
        )
        .unwrap();
        let x0 = Path::constant(1, 1.0, &[1.0]).unwrap();
        let control = PiecewiseConstantControl::constant(0.0, 1.0, 0).unwrap();
        // Reference: the exact one-step OU recursion driven by the identical
        // Brownian increments; the RMS gap must shrink at order >= 0.5.
        let mut errs = Vec::new();
        for &steps in &[16usize, 64, 256] {
            let cfg = SimConfig::new(steps, 200, 5).unwrap();
            let batch = simulate(&sde, 0.0, &x0, &control, &cfg).unwrap();
            let dt = 1.0 / steps as f64;
            let mut mse = 0.0;
            for (traj_idx, traj) in batch.trajectories.iter().enumerate() {
                let rng = CounterRng::new(5);
                let mut exact = 1.0;
                let decay = (-dt).exp();
                for k in 0..steps {
                    let db = dt.sqrt() * rng.normal_at(&[traj_idx as u64, k as u64, 0]);
                    exact = exact * decay + 0.5 * db * decay.sqrt();
                }
                let got = traj.path.value_at(1.0)[0];
                mse += (got - exact) * (got - exact);
            }
            errs.push((mse / batch.len() as f64).sqrt());
        }
        let slope =
            (errs[0].ln() - errs[2].ln()) / ((1.0_f64 / 16.0).ln() - (1.0_f64 / 256.0).ln());
        assert!(slope >= 0.5, "slope {slope}, errs {errs:?}");
    }

    #[test]
    fn sup_moment_examples() {
        let sde = zero_sde();
        let x = Path::constant(1, 1.0, &[0.0]).unwrap();
        let control = PiecewiseConstantControl::constant(0.0, 1.0, 0).unwrap();
        let cfg = SimConfig::new(4, 5, 0).unwrap();
        let batch = simulate(&sde, 0.0, &x, &control, &cfg).unwrap();
        assert_eq!(sup_moment(&batch, 2.0).unwrap(), 0.0);

        let c = Path::constant(1, 1.0, &[-3.0]).unwrap();
        let batch_c = simulate(&sde, 0.0, &c, &control, &cfg).unwrap();
        assert!((sup_moment(&batch_c, 2.0).unwrap() - 3.0).abs() < 1e-12);
        assert!(sup_moment(&batch_c, 0.5).is_err());
    }

    #[test]
    fn sup_moment_stabilizes_with_batch_growth() {
        let sde = brownian_sde();
        let x = Path::constant(1, 1.0, &[0.0]).unwrap();
        let control = PiecewiseConstantControl::constant(0.0, 1.0, 0).unwrap();
        let mut values = Vec::new();
        for &n in &[500usize, 2000] {
            let cfg = SimConfig::new(32, n, 17).unwrap();
            let batch = simulate(&sde, 0.0, &x, &control, &cfg).unwrap();
            values.push(sup_moment(&batch, 2.0).unwrap());
        }
        assert!((values[0] - values[1]).abs() < 0.1, "{values:?}");
    }

    #[test]
    fn continuity_diagnostic_decays() {
        let sde = brownian_sde();
        let x = Path::constant(1, 1.0, &[0.0]).unwrap();
        let cfg = SimConfig::new(128, 400, 23).unwrap();
        let rows = continuity_diagnostic(&sde, 0.2, &x, &[0.7, 0.45, 0.3, 0.21], &cfg).unwrap();
        for w in rows.windows(2) {
            assert!(
                w[1].worst_estimate <= w[0].worst_estimate + 3.0 * w[0].worst_stderr,
                "{rows:?}"
            );
        }
        // sigma = 1: E sup |X_{s^r}|^2 ~ O(r - t); crude linear-decay check.
        let last = rows.last().unwrap();
        assert!(last.worst_estimate < 0.1, "{last:?}");

        let zero = zero_sde();
        let rows0 = continuity_diagnostic(&zero, 0.2, &x, &[0.5, 0.3], &cfg).unwrap();
        for row in rows0 {
            assert_eq!(row.worst_estimate, 0.0);
        }
    }

    #[test]
    fn deterministic_drift_bound_check() {
        // |b| <= K, sigma = 0: estimate <= K^2 (r-t)^2 exactly.
        let k = 0.8;
        let sde = ControlledSDE::new(
            1,
            1,
            CoefficientSpec::constant_vec("b", vec![k]),
            CoefficientSpec::constant_vec("sigma=0", vec![0.0]),
            action_set(),
        )
        .unwrap();
        let x = Path::constant(1, 1.0, &[0.0]).unwrap();
        let cfg = SimConfig::new(64, 1, 0).unwrap();
        let rows = continuity_diagnostic(&sde, 0.1, &x, &[0.4], &cfg).unwrap();
        assert!(rows[0].worst_estimate <= k * k * 0.3 * 0.3 + 1e-12);
    }

    #[test]
    fn undefined_control_is_a_domain_error() {
        let sde = zero_sde();
        let x = line_path();
        let control = PiecewiseConstantControl::constant(0.0, 0.5, 0).unwrap();
        let cfg = SimConfig::new(8, 1, 0).unwrap();
        assert!(simulate(&sde, 0.0, &x, &control, &cfg).is_err());
    }

    #[test]
    fn control_interval_lookup() {
        let c = PiecewiseConstantControl::uniform(0.0, 1.0, &[0, 1, 0, 1]).unwrap();
        assert_eq!(c.action_at(0.0).unwrap(), 0);
        assert_eq!(c.action_at(0.26).unwrap(), 1);
        assert_eq!(c.action_at(0.5).unwrap(), 0);
        assert_eq!(c.action_at(1.0).unwrap(), 1);
        assert!(c.action_at(1.1).is_err());
        assert!(PiecewiseConstantControl::new(vec![0.0, 0.0], vec![0]).is_err());
    }
}
