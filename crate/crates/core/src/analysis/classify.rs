//! Late-time classification of a run into homogeneous, fixed-pattern or
//! spatio-temporal behaviour.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::norms::{field_norms, spatial_std};
use crate::error::{Error, Result};
use crate::simulate::FieldState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternClass {
    Homogeneous,
    FixedPattern,
    SpatioTemporal,
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternClass::Homogeneous => "homogeneous",
            PatternClass::FixedPattern => "fixed-pattern",
            PatternClass::SpatioTemporal => "spatio-temporal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyOptions {
    /// Spatial std relative to the mean scale below which a state is flat.
    pub homogeneous_tol: f64,
    /// Relative L² change between the last two snapshots below which a
    /// pattern is fixed.
    pub steady_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { homogeneous_tol: 1e-6, steady_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub class: PatternClass,
    /// Largest per-field spatial std divided by the mean scale.
    pub relative_std: f64,
    /// Spatial std of `u` at the final snapshot.
    pub std_u: f64,
    /// Relative L² change between the last two snapshots.
    pub late_change: f64,
}

pub fn classify_pattern(snapshots: &[FieldState], opts: &ClassifyOptions) -> Result<Classification> {
    let [.., prev, last] = snapshots else {
        return Err(Error::InsufficientData(format!(
            "classification needs at least 2 snapshots, got {}",
            snapshots.len()
        )));
    };
    if !last.mesh.same_as(&prev.mesh) {
        return Err(Error::GridMismatch("snapshots on different grids".into()));
    }
    let mesh = &last.mesh;
    let means = last.fields().map(|f| field_norms(f, mesh).l2);
    let scale = means.iter().fold(0.0_f64, |a, m| a.max(*m));
    let stds = last.fields().map(|f| spatial_std(f, mesh));
    let relative_std = if scale > 0.0 { stds.iter().fold(0.0_f64, |a, s| a.max(*s)) / scale } else { 0.0 };

    let (mut diff_sq, mut norm_sq) = (0.0, 0.0);
    for (a, b) in last.fields().iter().zip(prev.fields()) {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        diff_sq += field_norms(&d, mesh).l2.powi(2);
        norm_sq += field_norms(a, mesh).l2.powi(2);
    }
    let late_change = if norm_sq > 0.0 { (diff_sq / norm_sq).sqrt() } else { diff_sq.sqrt() };

    let class = if relative_std < opts.homogeneous_tol {
        PatternClass::Homogeneous
    } else if late_change < opts.steady_tol {
        PatternClass::FixedPattern
    } else {
        PatternClass::SpatioTemporal
    };
    Ok(Classification { class, relative_std, std_u: stds[0], late_change })
}
