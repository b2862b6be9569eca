//! Reward functional, Monte-Carlo value function over piecewise-constant
//! controls, dynamic-programming residuals, the HJB Hamiltonian, and
//! fixed-control values.
//!
//! The sup over progressively measurable controls is approximated on a
//! uniform switching grid, exhaustively by default (capped at 1e5
//! candidates) or by greedy per-interval sweeps. Candidates share Brownian
//! draws (the generator keys on trajectory/step only), so the argmax scan is
//! a common-random-numbers comparison.

use rayon::prelude::*;
use serde::Serialize;

use crate::coeff::CoefficientSpec;
use crate::error::{Error, Result};
use crate::la::{self, Matrix};
use crate::path::Path;
use crate::sde::{simulate_to, ControlledSDE, PiecewiseConstantControl, SimConfig};

pub const EXHAUSTIVE_CAP: u128 = 100_000;

pub struct TerminalCost {
    eval: Box<dyn Fn(&Path) -> f64 + Send + Sync>,
    pub lipschitz_k: f64,
    pub bound: f64,
}

impl TerminalCost {
    pub fn new(
        eval: impl Fn(&Path) -> f64 + Send + Sync + 'static,
        lipschitz_k: f64,
        bound: f64,
    ) -> Self {
        TerminalCost {
            eval: Box::new(eval),
            lipschitz_k,
            bound,
        }
    }

    pub fn eval(&self, path: &Path) -> f64 {
        (self.eval)(path)
    }
}

pub struct ControlProblem {
    pub sde: ControlledSDE,
    /// Scalar running reward f(t, x, a).
    pub running_cost: CoefficientSpec,
    pub terminal_cost: TerminalCost,
    pub horizon: f64,
}

impl ControlProblem {
    pub fn action_count(&self) -> usize {
        self.sde.action_set.len()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValueEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub argmax: Option<PiecewiseConstantControl>,
}

fn mc_stats(samples: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut n = 0usize;
    for v in samples {
        n += 1;
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
    }
    let stderr = if n > 1 {
        (m2 / (n as f64 - 1.0) / n as f64).sqrt()
    } else {
        0.0
    };
    (mean, stderr, n)
}

/// Monte-Carlo estimate of J(t, x, control): the running reward is a
/// left-point sum over the simulation grid, the terminal reward applies at
/// the trajectory's horizon.
pub fn reward(
    problem: &ControlProblem,
    t: f64,
    x: &Path,
    control: &PiecewiseConstantControl,
    cfg: &SimConfig,
) -> Result<ValueEstimate> {
    let batch = simulate_to(&problem.sde, t, problem.horizon, x, control, cfg)?;
    let mut samples = Vec::with_capacity(batch.len());
    for traj in &batch.trajectories {
        let times = traj.path.times();
        let mut running = 0.0;
        for k in traj.first_step_node..times.len() - 1 {
            let tk = times[k];
            let a_idx = control.action_at(tk)?;
            let a = problem.sde.action_set.get(a_idx)?;
            running += problem.running_cost.eval_scalar(tk, &traj.path, a) * (times[k + 1] - tk);
        }
        samples.push(running + problem.terminal_cost.eval(&traj.path));
    }
    let (mean, stderr, _) = mc_stats(samples.into_iter());
    Ok(ValueEstimate {
        mean,
        stderr,
        argmax: Some(control.clone()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Greedy,
}

fn digits(candidate: usize, base: usize, len: usize) -> Vec<usize> {
    let mut c = candidate;
    let mut out = vec![0usize; len];
    for slot in out.iter_mut() {
        *slot = c % base;
        c /= base;
    }
    out
}

/// v(t, x) ~ max over piecewise-constant controls on a uniform switch_count-
/// interval grid of the Monte-Carlo reward. Ties resolve to the lowest
/// candidate index; candidates share random numbers.
pub fn value(
    problem: &ControlProblem,
    t: f64,
    x: &Path,
    switch_count: usize,
    cfg: &SimConfig,
    mode: SearchMode,
) -> Result<ValueEstimate> {
    if switch_count == 0 {
        return Err(Error::domain("switch_count must be >= 1"));
    }
    if t > problem.horizon {
        return Err(Error::domain("start time beyond the horizon"));
    }
    if (problem.horizon - t).abs() < 1e-14 {
        let v = problem.terminal_cost.eval(&x.stop(t)?);
        return Ok(ValueEstimate {
            mean: v,
            stderr: 0.0,
            argmax: None,
        });
    }
    let n_actions = problem.action_count();
    match mode {
        SearchMode::Exhaustive => {
            let total = (n_actions as u128).pow(switch_count as u32);
            if total > EXHAUSTIVE_CAP {
                return Err(Error::CandidateExplosion {
                    candidates: total,
                    cap: EXHAUSTIVE_CAP,
                });
            }
            let estimates: Vec<ValueEstimate> = (0..total as usize)
                .into_par_iter()
                .map(|c| {
                    let control = PiecewiseConstantControl::uniform(
                        t,
                        problem.horizon,
                        &digits(c, n_actions, switch_count),
                    )?;
                    reward(problem, t, x, &control, cfg)
                })
                .collect::<Result<_>>()?;
            let best = estimates
                .into_iter()
                .enumerate()
                .max_by(|(i, a), (j, b)| {
                    a.mean
                        .partial_cmp(&b.mean)
                        .unwrap()
                        .then_with(|| j.cmp(i)) // lowest index wins ties
                })
                .map(|(_, e)| e)
                .expect("at least one candidate");
            Ok(best)
        }
        SearchMode::Greedy => {
            let mut actions = vec![0usize; switch_count];
            let mut best = reward(
                problem,
                t,
                x,
                &PiecewiseConstantControl::uniform(t, problem.horizon, &actions)?,
                cfg,
            )?;
            for _sweep in 0..16 {
                let mut improved = false;
                for slot in 0..switch_count {
                    let incumbent = actions[slot];
                    for a in 0..n_actions {
                        if a == incumbent {
                            continue;
                        }
                        actions[slot] = a;
                        let trial = reward(
                            problem,
                            t,
                            x,
                            &PiecewiseConstantControl::uniform(t, problem.horizon, &actions)?,
                            cfg,
                        )?;
                        if trial.mean > best.mean {
                            best = trial;
                            improved = true;
                        } else {
                            actions[slot] = incumbent;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            Ok(best)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DppResidual {
    pub residual: f64,
    pub stderr: f64,
    pub value_direct: f64,
    pub value_two_leg: f64,
}

/// |v(t,x) - sup over first-leg controls of E[int_t^s f + v(s, X)]| with the
/// inner value re-estimated per simulated endpoint path under a child seed.
pub fn dpp_residual(
    problem: &ControlProblem,
    t: f64,
    s: f64,
    x: &Path,
    switch_count: usize,
    cfg: &SimConfig,
) -> Result<DppResidual> {
    if !(t <= s && s <= problem.horizon) {
        return Err(Error::domain("need t <= s <= horizon"));
    }
    let direct = value(problem, t, x, switch_count, cfg, SearchMode::Exhaustive)?;
    if (s - t).abs() < 1e-14 {
        return Ok(DppResidual {
            residual: 0.0,
            stderr: direct.stderr,
            value_direct: direct.mean,
            value_two_leg: direct.mean,
        });
    }
    let n_actions = problem.action_count();
    let total = (n_actions as u128).pow(switch_count as u32);
    if total > EXHAUSTIVE_CAP {
        return Err(Error::CandidateExplosion {
            candidates: total,
            cap: EXHAUSTIVE_CAP,
        });
    }
    let near_terminal = (problem.horizon - s).abs() < 1e-14;
    let rng = crate::rng::CounterRng::new(cfg.seed);
    let leg_estimates: Vec<(f64, f64)> = (0..total as usize)
        .into_par_iter()
        .map(|c| -> Result<(f64, f64)> {
            let control = PiecewiseConstantControl::uniform(
                t,
                s,
                &digits(c, n_actions, switch_count),
            )?;
            let batch = simulate_to(&problem.sde, t, s, x, &control, cfg)?;
            let mut samples = Vec::with_capacity(batch.len());
            for (traj_idx, traj) in batch.trajectories.iter().enumerate() {
                let times = traj.path.times();
                let mut running = 0.0;
                for k in traj.first_step_node..times.len() - 1 {
                    let tk = times[k];
                    let a = problem.sde.action_set.get(control.action_at(tk)?)?;
                    running +=
                        problem.running_cost.eval_scalar(tk, &traj.path, a) * (times[k + 1] - tk);
                }
                // Endpoint path extended to the horizon so the inner
                // estimator can simulate onward from (s, X).
                let extended = extend_to(&traj.path, problem.horizon)?;
                let tail = if near_terminal {
                    problem.terminal_cost.eval(&extended)
                } else {
                    let child_cfg = SimConfig {
                        seed: rng.child(traj_idx as u64).u64_at(&[c as u64]),
                        ..*cfg
                    };
                    value(
                        problem,
                        s,
                        &extended,
                        switch_count,
                        &child_cfg,
                        SearchMode::Exhaustive,
                    )?
                    .mean
                };
                samples.push(running + tail);
            }
            let (mean, stderr, _) = mc_stats(samples.into_iter());
            Ok((mean, stderr))
        })
        .collect::<Result<_>>()?;
    let (two_leg, leg_stderr) = leg_estimates
        .into_iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .expect("at least one candidate");
    Ok(DppResidual {
        residual: (direct.mean - two_leg).abs(),
        stderr: (direct.stderr * direct.stderr + leg_stderr * leg_stderr).sqrt(),
        value_direct: direct.mean,
        value_two_leg: two_leg,
    })
}

fn extend_to(path: &Path, horizon: f64) -> Result<Path> {
    if path.span() >= horizon {
        return Ok(path.clone());
    }
    let mut times = path.times().to_vec();
    let mut values = path.values().to_vec();
    times.push(horizon);
    values.push(values.last().expect("nonempty path").clone());
    Path::new(times, values)
}

/// F(t, x, r, p, M) = -max_a { <b, p> + 0.5 tr[sigma sigma^T M] + f }.
/// Exact enumeration over the finite action set, first index on ties. The
/// equation has no zero-order term, so `r` is accepted and unused.
pub fn hamiltonian(
    problem: &ControlProblem,
    t: f64,
    x: &Path,
    _r: f64,
    p: &[f64],
    m: &Matrix,
) -> Result<f64> {
    let d = problem.sde.dim;
    if p.len() != d || m.len() != d || m.iter().any(|row| row.len() != d) {
        return Err(Error::domain("gradient/Hessian dimensions must match the state"));
    }
    for i in 0..d {
        for j in 0..i {
            if (m[i][j] - m[j][i]).abs() > 1e-9 * (1.0 + m[i][j].abs()) {
                return Err(Error::domain("Hessian argument must be symmetric"));
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    for action in &problem.sde.action_set.actions {
        let b = problem.sde.drift.eval(t, x, action);
        let sigma_flat = problem.sde.diffusion.eval(t, x, action);
        let sigma: Matrix = (0..d)
            .map(|i| sigma_flat[i * problem.sde.bm_dim..(i + 1) * problem.sde.bm_dim].to_vec())
            .collect();
        let f = problem.running_cost.eval_scalar(t, x, action);
        let val = la::dot(&b, p) + 0.5 * la::trace_prod(&la::gram(&sigma), m) + f;
        if val > best {
            best = val;
        }
    }
    Ok(-best)
}

/// E[int_t^{s0} f(r, X, a0) dr + terminal(X_{.^s0})] under the constant
/// control a0.
pub fn fixed_control_value(
    problem: &ControlProblem,
    s0: f64,
    a0: usize,
    terminal: &(dyn Fn(&Path) -> f64 + Sync),
    t: f64,
    x: &Path,
    cfg: &SimConfig,
) -> Result<ValueEstimate> {
    if t > s0 {
        return Err(Error::domain("need t <= s0"));
    }
    if (s0 - t).abs() < 1e-14 {
        return Ok(ValueEstimate {
            mean: terminal(&x.stop(t)?),
            stderr: 0.0,
            argmax: None,
        });
    }
    let control = PiecewiseConstantControl::constant(t, s0, a0)?;
    let batch = simulate_to(&problem.sde, t, s0, x, &control, cfg)?;
    let action = problem.sde.action_set.get(a0)?.to_vec();
    let mut samples = Vec::with_capacity(batch.len());
    for traj in &batch.trajectories {
        let times = traj.path.times();
        let mut running = 0.0;
        for k in traj.first_step_node..times.len() - 1 {
            let tk = times[k];
            running += problem.running_cost.eval_scalar(tk, &traj.path, &action)
                * (times[k + 1] - tk);
        }
        samples.push(running + terminal(&traj.path));
    }
    let (mean, stderr, _) = mc_stats(samples.into_iter());
    Ok(ValueEstimate {
        mean,
        stderr,
        argmax: Some(control),
    })
}
