//! Bundled test problems with their known closed forms.

use std::sync::Arc;

use serde::Serialize;

use crate::coeff::{ActionSet, CoefficientSpec};
use crate::control::{ControlProblem, TerminalCost};
use crate::sde::ControlledSDE;

/// d = 1, A = {-1, 1}, b = a, sigma = 0, f = 0, g = -min(|x(T)|, 1).
/// Closed form: v(t, x) = -min(max(|x(t)| - (T - t), 0), 1).
pub fn reachability(horizon: f64) -> ControlProblem {
    let action_set = Arc::new(ActionSet::scalar(&[-1.0, 1.0]).expect("nonempty"));
    ControlProblem {
        sde: ControlledSDE::new(
            1,
            1,
            CoefficientSpec::new("b=a", 1, |_, _, a: &[f64]| vec![a[0]], 0.0, 1.0, |_| 0.0),
            CoefficientSpec::constant_vec("sigma=0", vec![0.0]),
            action_set,
        )
        .expect("consistent dims"),
        running_cost: CoefficientSpec::scalar("f=0", |_, _, _| 0.0, 0.0, 0.0),
        terminal_cost: TerminalCost::new(
            |x: &crate::path::Path| -x.value_at(x.span())[0].abs().min(1.0),
            1.0,
            1.0,
        ),
        horizon,
    }
}

pub fn reachability_value(t: f64, xt: f64, horizon: f64) -> f64 {
    -(xt.abs() - (horizon - t)).max(0.0).min(1.0)
}

/// The reachability dynamics restricted to one action (index into {-1, 1}).
pub fn reachability_single_action(horizon: f64, action: usize) -> ControlProblem {
    let a = [-1.0, 1.0][action];
    let action_set = Arc::new(ActionSet::scalar(&[a]).expect("nonempty"));
    ControlProblem {
        sde: ControlledSDE::new(
            1,
            1,
            CoefficientSpec::new("b=a", 1, |_, _, a: &[f64]| vec![a[0]], 0.0, 1.0, |_| 0.0),
            CoefficientSpec::constant_vec("sigma=0", vec![0.0]),
            action_set,
        )
        .expect("consistent dims"),
        running_cost: CoefficientSpec::scalar("f=0", |_, _, _| 0.0, 0.0, 0.0),
        terminal_cost: TerminalCost::new(
            |x: &crate::path::Path| -x.value_at(x.span())[0].abs().min(1.0),
            1.0,
            1.0,
        ),
        horizon,
    }
}

/// d = 1, single action, b = 0, sigma = 1, f = 0, g = x(T):
/// E[X_T] = x(t), Var[X_T] = T - t.
pub fn brownian(horizon: f64) -> ControlProblem {
    let action_set = Arc::new(ActionSet::scalar(&[0.0]).expect("nonempty"));
    ControlProblem {
        sde: ControlledSDE::new(
            1,
            1,
            CoefficientSpec::constant_vec("b=0", vec![0.0]),
            CoefficientSpec::constant_vec("sigma=1", vec![1.0]),
            action_set,
        )
        .expect("consistent dims"),
        running_cost: CoefficientSpec::scalar("f=0", |_, _, _| 0.0, 0.0, 0.0),
        terminal_cost: TerminalCost::new(
            |x: &crate::path::Path| x.value_at(x.span())[0],
            1.0,
            f64::MAX,
        ),
        horizon,
    }
}

/// d = 1, single action, b = 0.5, sigma = 0, f = 0.25, g = x(T):
/// v(t, x) = x(t) + 0.75 (T - t).
pub fn constant_coefficient(horizon: f64) -> ControlProblem {
    let action_set = Arc::new(ActionSet::scalar(&[0.0]).expect("nonempty"));
    ControlProblem {
        sde: ControlledSDE::new(
            1,
            1,
            CoefficientSpec::constant_vec("b=0.5", vec![0.5]),
            CoefficientSpec::constant_vec("sigma=0", vec![0.0]),
            action_set,
        )
        .expect("consistent dims"),
        running_cost: CoefficientSpec::scalar("f=0.25", |_, _, _| 0.25, 0.0, 0.25),
        terminal_cost: TerminalCost::new(
            |x: &crate::path::Path| x.value_at(x.span())[0],
            1.0,
            f64::MAX,
        ),
        horizon,
    }
}

pub fn constant_coefficient_value(t: f64, xt: f64, horizon: f64) -> f64 {
    xt + 0.75 * (horizon - t)
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// closed-form | mc | none
    pub oracle: &'static str,
    pub closed_form: Option<&'static str>,
}

/// Deterministically ordered catalog of the bundled problems.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "brownian",
            description: "d=1, b=0, sigma=1, f=0, g=x(T); standard Brownian motion",
            oracle: "mc",
            closed_form: Some("E[X_T] = x(t), Var[X_T] = T - t"),
        },
        CatalogEntry {
            name: "constant-coefficient",
            description: "d=1, b=0.5, sigma=0, f=0.25, g=x(T); deterministic drift",
            oracle: "closed-form",
            closed_form: Some("v(t,x) = x(t) + 0.75 (T - t)"),
        },
        CatalogEntry {
            name: "markovian-lifted",
            description:
                "lifted reachability: m=1, phi=1, A={-1,1}, bbar=a, sbar=0, gbar=-min(|y|,1)",
            oracle: "closed-form",
            closed_form: Some("v(t,y) = -min(max(|y| - (T - t), 0), 1)"),
        },
        CatalogEntry {
            name: "reachability",
            description: "d=1, A={-1,1}, b=a, sigma=0, f=0, g=-min(|x(T)|,1)",
            oracle: "closed-form",
            closed_form: Some("v(t,x) = -min(max(|x(t)| - (T - t), 0), 1)"),
        },
    ]
}
