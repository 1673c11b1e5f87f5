//! Sweep of the Allee threshold `m` near zero: how far the fixed pattern at
//! `m` sits from the one at `m = 0`, measured in H¹, and how that distance
//! scales with `m`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{classify_pattern, Classification, ClassifyOptions, PatternClass};
use super::norms::h1_error;
use super::regression::{linear_fit, loglog_fit, FitResult};
use crate::equilibria::interior_equilibrium;
use crate::error::{Error, Result};
use crate::model::Params;
use crate::simulate::{RunOutput, SimConfig, SimulatorRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub m_values: Vec<f64>,
    pub simulator: String,
    pub sim: SimConfig,
    pub classify: ClassifyOptions,
}

/// `count` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

impl DecayConfig {
    /// Reduced sweep: 13 values, N = 128, t = 2000.
    pub fn desk() -> Self {
        Self {
            m_values: linspace(0.0, 0.0035, 13),
            simulator: "collocation1d".into(),
            sim: SimConfig { n: 128, t_end: 2000.0, snapshot_every: 10.0, dt: 0.05, ..SimConfig::default() },
            classify: ClassifyOptions::default(),
        }
    }

    /// Full sweep: 121 values, N = 256, t = 10⁴.
    pub fn full() -> Self {
        Self {
            m_values: linspace(0.0, 0.0035, 121),
            sim: SimConfig { n: 256, t_end: 1e4, ..Self::desk().sim },
            ..Self::desk()
        }
    }
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self::desk()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRecord {
    pub m: f64,
    pub h1_error_u: f64,
    pub h1_error_v: f64,
    pub h1_error_r: f64,
    pub h1_error_combined: f64,
    pub class: PatternClass,
    pub late_change: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayOutcome {
    pub records: Vec<DecayRecord>,
    /// Values of `m` whose run did not settle, with the reason.
    pub excluded: Vec<(f64, String)>,
    /// Combined error against `m`, including `m = 0`.
    pub raw_fit: Option<FitResult>,
    /// `ln(error)` against `ln(m)`, positive `m` only.
    pub loglog_fit: Option<FitResult>,
    /// Per-field log-log fits for `u`, `v`, `r`.
    pub loglog_fit_fields: [Option<FitResult>; 3],
}

/// Runs every `m` from the same initial data (the perturbed interior state
/// of the `m = 0` system) and compares final states with the `m = 0` run.
pub fn decay_experiment(p_base: &Params, cfg: &DecayConfig) -> Result<DecayOutcome> {
    if !cfg.m_values.contains(&0.0) {
        return Err(Error::Config("decay sweep must include m = 0".into()));
    }
    if let Some(bad) = cfg.m_values.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
        return Err(Error::Config(format!("m values must be nonnegative, got {bad}")));
    }
    let registry = SimulatorRegistry::default();
    let sim = registry.get(&cfg.simulator)?;
    let reference_params = p_base.with_m(0.0);
    reference_params.validate()?;
    let mut sim_cfg = cfg.sim.clone();
    if sim_cfg.base.is_none() {
        let e8 = interior_equilibrium(&reference_params);
        if !e8.exists {
            return Err(Error::Domain(format!("no interior state at m = 0: {}", e8.note)));
        }
        sim_cfg.base = Some(e8.point.as_array());
    }
    sim_cfg.validate()?;

    let runs: Vec<(f64, Result<(RunOutput, Classification)>)> = cfg
        .m_values
        .par_iter()
        .map(|&m| {
            let out = sim.run(&p_base.with_m(m), &sim_cfg).and_then(|run| {
                let c = classify_pattern(&run.snapshots, &cfg.classify)?;
                Ok((run, c))
            });
            (m, out)
        })
        .collect();

    let mut reference = None;
    for (m, r) in &runs {
        if *m == 0.0 {
            match r {
                Ok((run, c)) if c.class == PatternClass::FixedPattern => reference = Some(run),
                Ok((_, c)) => {
                    return Err(Error::Domain(format!(
                        "m = 0 run did not reach a fixed pattern ({}, late change {:.3e})",
                        c.class, c.late_change
                    )))
                }
                Err(e) => return Err(e.clone()),
            }
        }
    }
    let reference = reference.expect("m = 0 is present");

    let mut records = Vec::new();
    let mut excluded = Vec::new();
    for (m, r) in &runs {
        match r {
            Ok((run, c)) if c.class == PatternClass::FixedPattern => {
                let e = h1_error(run.final_state(), reference.final_state())?;
                records.push(DecayRecord {
                    m: *m,
                    h1_error_u: e.u,
                    h1_error_v: e.v,
                    h1_error_r: e.r,
                    h1_error_combined: e.combined,
                    class: c.class,
                    late_change: c.late_change,
                });
            }
            Ok((_, c)) => excluded.push((*m, format!("{} (late change {:.3e})", c.class, c.late_change))),
            Err(e) => excluded.push((*m, e.to_string())),
        }
    }
    records.sort_by(|a, b| a.m.total_cmp(&b.m));

    let ms: Vec<f64> = records.iter().map(|r| r.m).collect();
    let combined: Vec<f64> = records.iter().map(|r| r.h1_error_combined).collect();
    let raw_fit = linear_fit(&ms, &combined).ok();
    let log_of = |ys: Vec<f64>| loglog_fit(&ms.iter().copied().zip(ys).collect::<Vec<_>>()).ok();
    let loglog = log_of(combined.clone());
    let fields = [
        log_of(records.iter().map(|r| r.h1_error_u).collect()),
        log_of(records.iter().map(|r| r.h1_error_v).collect()),
        log_of(records.iter().map(|r| r.h1_error_r).collect()),
    ];
    Ok(DecayOutcome { records, excluded, raw_fit, loglog_fit: loglog, loglog_fit_fields: fields })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grids() {
        let desk = DecayConfig::desk();
        assert_eq!(desk.m_values.len(), 13);
        assert_eq!(desk.m_values[0], 0.0);
        assert!((desk.m_values[12] - 0.0035).abs() < 1e-18);
        assert_eq!(desk.sim.n, 128);
        let full = DecayConfig::full();
        assert_eq!(full.m_values.len(), 121);
        assert_eq!(full.sim.t_end, 1e4);
    }

    #[test]
    fn sweep_without_zero_is_rejected() {
        let p = Params::preset("stationary", 0.0).unwrap();
        let cfg = DecayConfig { m_values: vec![0.001, 0.002], ..DecayConfig::desk() };
        assert!(matches!(decay_experiment(&p, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn small_sweep_has_zero_reference_error() {
        let p = Params::preset("stationary", 0.0).unwrap();
        let cfg = DecayConfig {
            m_values: vec![0.0, 0.001, 0.002, 0.003],
            sim: SimConfig { n: 128, t_end: 1500.0, ..DecayConfig::desk().sim },
            ..DecayConfig::desk()
        };
        let out = decay_experiment(&p, &cfg).unwrap();
        assert!(out.excluded.is_empty(), "{:?}", out.excluded);
        assert_eq!(out.records[0].m, 0.0);
        assert_eq!(out.records[0].h1_error_combined, 0.0);
        assert!(out.records.iter().all(|r| r.h1_error_u >= 0.0 && r.h1_error_v >= 0.0 && r.h1_error_r >= 0.0));
        assert!(out.records[1..].iter().all(|r| r.h1_error_combined > 0.0));
    }
}
