//! Overexploitation and persistence scenarios.
//!
//! Each scenario checks its hypotheses on the initial data (in the sup norm),
//! integrates the spatial system with the collocation solver and tests the
//! predicted limit:
//!
//! - total extinction: strong predation on the prey (`w1 > a2 + 1 + w3`), a
//!   predator load above `‖u0‖/α` and a top predator under its Allee
//!   threshold drive all three species to zero;
//! - prey recovery: strong predation on the middle predator
//!   (`w3 > w2 + 1 + w1`) with an abundant top predator removes the middle
//!   predator and lets the prey return to capacity;
//! - persistence: a top predator started above `min(m, c·D3/w4)` stays near
//!   `max(m, c·D3/w4)`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{reaction, Params, StatePoint};
use crate::simulate::{FieldState, RunOutput, SimConfig};
use crate::solver1d::run1d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    TotalExtinction,
    PreyRecovery,
    Persistence,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::TotalExtinction => "total-extinction",
            ScenarioKind::PreyRecovery => "prey-recovery",
            ScenarioKind::Persistence => "persistence",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSetup {
    pub kind: ScenarioKind,
    /// Homogeneous part of the initial data.
    pub initial: [f64; 3],
    /// Simulation settings; `eps`/`wavenumber` add a cos² perturbation.
    pub sim: SimConfig,
    /// Sup-norm level counted as extinct.
    pub extinction_tol: f64,
    /// Distance counted as having reached a nonzero limit.
    pub limit_tol: f64,
}

impl Default for ScenarioSetup {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::TotalExtinction,
            initial: [0.2, 1.0, 0.01],
            sim: SimConfig {
                n: 32,
                t_end: 3000.0,
                snapshot_every: 10.0,
                eps: [0.0; 3],
                dt: 0.05,
                ..SimConfig::default()
            },
            extinction_tol: 1e-6,
            limit_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub statement: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Hypothesis {
    fn greater(statement: &str, lhs: f64, rhs: f64) -> Self {
        Self { statement: statement.into(), lhs, rhs, holds: lhs > rhs }
    }

    fn less(statement: &str, lhs: f64, rhs: f64) -> Self {
        Self { statement: statement.into(), lhs, rhs, holds: lhs < rhs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioOutcome {
    pub kind: ScenarioKind,
    pub hypotheses: Vec<Hypothesis>,
    pub hypotheses_satisfied: bool,
    /// The predicted limit state.
    pub target: [f64; 3],
    /// Sup norms of `u`, `v`, `r` at the final time.
    pub final_sup: [f64; 3],
    /// Spatial minima of `u`, `v`, `r` at the final time.
    pub final_min: [f64; 3],
    /// Spatial means of `u`, `v`, `r` at the final time.
    pub limits: [f64; 3],
    /// First snapshot time at which the predicted limit was met.
    pub time_to_threshold: Option<f64>,
    pub reached: bool,
    pub t_end: f64,
    /// Sup norms and minima at every snapshot.
    pub history: Vec<ScenarioSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioSample {
    pub t: f64,
    pub sup: [f64; 3],
    pub min: [f64; 3],
}

/// `max(m, c·D3/w4)`, the level the top predator settles at once the
/// middle predator is gone.
pub fn top_predator_floor(p: &Params) -> f64 {
    p.m.max(p.top_capacity())
}

/// Checks the scenario hypotheses on sup norms of the initial state.
pub fn check_hypotheses(kind: ScenarioKind, p: &Params, init: &FieldState) -> Vec<Hypothesis> {
    let [u0, v0, r0] = init.sup();
    let k = p.top_capacity();
    match kind {
        ScenarioKind::TotalExtinction => {
            let alpha = p.w1 / (1.0 + p.a2 + p.w3) - 1.0;
            vec![
                Hypothesis::greater("w1 > a2 + 1 + w3", p.w1, p.a2 + 1.0 + p.w3),
                Hypothesis::greater("‖v0‖ > M1 = ‖u0‖/α", v0, u0 / alpha),
                Hypothesis::less("‖r0‖∞ < min(m, c·D3/w4)", r0, p.m.min(k)),
            ]
        }
        ScenarioKind::PreyRecovery => {
            let alpha1 = p.w3 / (1.0 + p.w2 + p.w1) - 1.0;
            let m2 = v0 / alpha1;
            vec![
                Hypothesis::greater("w3 > w2 + 1 + w1", p.w3, p.w2 + 1.0 + p.w1),
                Hypothesis::greater("‖r0‖ > max(M2 = ‖v0‖/α1, m, c·D3/w4)", r0, m2.max(p.m).max(k)),
            ]
        }
        ScenarioKind::Persistence => {
            let r_min = init.r.iter().copied().fold(f64::INFINITY, f64::min);
            vec![Hypothesis::greater("min r0 > min(m, c·D3/w4)", r_min, p.m.min(k))]
        }
    }
}

fn target(kind: ScenarioKind, p: &Params) -> [f64; 3] {
    match kind {
        ScenarioKind::TotalExtinction => [0.0, 0.0, 0.0],
        ScenarioKind::PreyRecovery => [1.0, 0.0, top_predator_floor(p)],
        ScenarioKind::Persistence => [f64::NAN, f64::NAN, top_predator_floor(p)],
    }
}

fn reached(kind: ScenarioKind, p: &Params, s: &FieldState, ext_tol: f64, lim_tol: f64) -> bool {
    let sup = s.sup();
    let floor = top_predator_floor(p);
    let r_dev = s.r.iter().fold(0.0_f64, |a, r| a.max((r - floor).abs()));
    match kind {
        ScenarioKind::TotalExtinction => sup.iter().all(|x| *x < ext_tol),
        ScenarioKind::PreyRecovery => {
            let u_dev = s.u.iter().fold(0.0_f64, |a, u| a.max((u - 1.0).abs()));
            u_dev < lim_tol && sup[1] < ext_tol && r_dev < lim_tol
        }
        ScenarioKind::Persistence => r_dev < lim_tol,
    }
}

fn summarize(kind: ScenarioKind, p: &Params, setup: &ScenarioSetup, hypotheses: Vec<Hypothesis>, run: &RunOutput) -> ScenarioOutcome {
    let last = run.final_state();
    let time_to_threshold = run
        .snapshots
        .iter()
        .find(|s| reached(kind, p, s, setup.extinction_tol, setup.limit_tol))
        .map(|s| s.t);
    let min_of = |f: &[f64]| f.iter().copied().fold(f64::INFINITY, f64::min);
    let history = run
        .snapshots
        .iter()
        .map(|s| ScenarioSample { t: s.t, sup: s.sup(), min: [min_of(&s.u), min_of(&s.v), min_of(&s.r)] })
        .collect();
    ScenarioOutcome {
        kind,
        hypotheses_satisfied: hypotheses.iter().all(|h| h.holds),
        hypotheses,
        target: target(kind, p),
        final_sup: last.sup(),
        final_min: [min_of(&last.u), min_of(&last.v), min_of(&last.r)],
        limits: last.means(),
        time_to_threshold,
        reached: reached(kind, p, last, setup.extinction_tol, setup.limit_tol),
        t_end: last.t,
        history,
    }
}

/// Integrates the scenario. The hypotheses are reported, not enforced: a
/// run with unmet hypotheses still executes and is marked as such.
pub fn overexploitation_scenario(p: &Params, setup: &ScenarioSetup) -> Result<ScenarioOutcome> {
    p.validate()?;
    if setup.initial.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::Config(format!("initial state must be nonnegative, got {:?}", setup.initial)));
    }
    let sim = SimConfig { base: Some(setup.initial), ..setup.sim.clone() };
    let run = run1d(p, &sim)?;
    let hypotheses = check_hypotheses(setup.kind, p, &run.snapshots[0]);
    Ok(summarize(setup.kind, p, setup, hypotheses, &run))
}

/// Homogeneous kinetics integrated with classical RK4; the diffusion-free
/// reference for the scenarios.
pub fn ode_trajectory(p: &Params, init: StatePoint, t_end: f64, dt: f64) -> StatePoint {
    let mut y = init.as_array();
    let steps = (t_end / dt).round() as usize;
    let add = |y: [f64; 3], k: [f64; 3], h: f64| [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]];
    for _ in 0..steps {
        let k1 = reaction(y.into(), p);
        let k2 = reaction(add(y, k1, dt / 2.0).into(), p);
        let k3 = reaction(add(y, k2, dt / 2.0).into(), p);
        let k4 = reaction(add(y, k3, dt).into(), p);
        for i in 0..3 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y.into()
}

/// Parameter sets and initial data satisfying each scenario's hypotheses.
pub fn example_setup(kind: ScenarioKind) -> (Params, ScenarioSetup) {
    let base = Params::preset("spotted", 0.2).expect("built-in preset");
    let setup = ScenarioSetup { kind, ..ScenarioSetup::default() };
    match kind {
        ScenarioKind::TotalExtinction => (
            Params { w1: 2.5, a2: 0.1, w3: 0.5, ..base },
            ScenarioSetup { initial: [0.2, 1.0, 0.01], ..setup },
        ),
        ScenarioKind::PreyRecovery => (
            Params { w1: 0.5, w2: 0.5, w3: 2.5, m: 0.1, ..base },
            ScenarioSetup { initial: [0.5, 0.1, 0.6], ..setup },
        ),
        ScenarioKind::Persistence => (
            // Middle predator cannot sustain itself (a2 > w2), no Allee effect.
            Params { a2: 0.6, c: 0.5, m: 0.0, ..base },
            ScenarioSetup { initial: [0.5, 0.3, 0.05], ..setup },
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(setup: ScenarioSetup, t_end: f64) -> ScenarioSetup {
        ScenarioSetup { sim: SimConfig { n: 16, t_end, ..setup.sim.clone() }, ..setup }
    }

    #[test]
    fn example_hypotheses_hold() {
        for kind in [ScenarioKind::TotalExtinction, ScenarioKind::PreyRecovery, ScenarioKind::Persistence] {
            let (p, setup) = example_setup(kind);
            let out = overexploitation_scenario(&p, &short(setup, 1.0)).unwrap();
            assert!(out.hypotheses_satisfied, "{kind}: {:?}", out.hypotheses);
        }
    }

    #[test]
    fn violated_hypothesis_is_reported() {
        let (p, setup) = example_setup(ScenarioKind::TotalExtinction);
        let weak = Params { w1: 1.0, ..p };
        let out = overexploitation_scenario(&weak, &short(setup, 1.0)).unwrap();
        assert!(!out.hypotheses_satisfied);
        assert!(out.hypotheses.iter().any(|h| !h.holds && h.statement.starts_with("w1")));
    }

    #[test]
    fn classifier_agrees_with_ode() {
        for kind in [ScenarioKind::TotalExtinction, ScenarioKind::PreyRecovery, ScenarioKind::Persistence] {
            let (p, setup) = example_setup(kind);
            let out = overexploitation_scenario(&p, &setup).unwrap();
            let ode = ode_trajectory(&p, setup.initial.into(), setup.sim.t_end, 0.01);
            let homogeneous = FieldState::homogeneous(
                ode,
                crate::simulate::Mesh::Line(std::sync::Arc::new(crate::solver1d::build_grid(8).unwrap())),
                setup.sim.t_end,
            );
            let ode_reached = reached(kind, &p, &homogeneous, setup.extinction_tol, setup.limit_tol);
            assert_eq!(out.reached, ode_reached, "{kind}: pde {:?} vs ode {ode:?}", out.limits);
            assert!(out.reached, "{kind}: {out:?}");
        }
    }
}
