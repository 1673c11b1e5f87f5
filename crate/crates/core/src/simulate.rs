//! Common run types and the registry of spatial simulators.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Params, StatePoint};
use crate::solver1d::{Collocation1D, Grid1D};
use crate::solver2d::{FiniteDifference2D, Grid2D};

/// Values below this count as a negativity violation in an accepted run.
pub const NEGATIVITY_TOL: f64 = -1e-12;

/// The discretization a field lives on.
#[derive(Debug, Clone)]
pub enum Mesh {
    Line(Arc<Grid1D>),
    Plane(Arc<Grid2D>),
}

impl Mesh {
    pub fn len(&self) -> usize {
        match self {
            Mesh::Line(g) => g.n,
            Mesh::Plane(g) => g.nx * g.ny,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_as(&self, other: &Mesh) -> bool {
        match (self, other) {
            (Mesh::Line(a), Mesh::Line(b)) => Arc::ptr_eq(a, b) || a.n == b.n,
            (Mesh::Plane(a), Mesh::Plane(b)) => Arc::ptr_eq(a, b) || a.same_geometry(b),
            _ => false,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Mesh::Line(g) => format!("collocation N={}", g.n),
            Mesh::Plane(g) => format!("mesh {}x{} dx={} dy={}", g.nx, g.ny, g.dx, g.dy),
        }
    }
}

/// Discretized `(u, v, r)` at time `t`.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub t: f64,
    pub mesh: Mesh,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub r: Vec<f64>,
}

impl FieldState {
    pub fn homogeneous(point: StatePoint, mesh: Mesh, t: f64) -> Self {
        let n = mesh.len();
        Self { t, mesh, u: vec![point.u; n], v: vec![point.v; n], r: vec![point.r; n] }
    }

    pub fn fields(&self) -> [&[f64]; 3] {
        [&self.u, &self.v, &self.r]
    }

    pub fn fields_mut(&mut self) -> [&mut Vec<f64>; 3] {
        [&mut self.u, &mut self.v, &mut self.r]
    }

    pub fn min_value(&self) -> f64 {
        self.fields().iter().flat_map(|f| f.iter()).copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.iter().all(|x| x.is_finite()))
    }

    /// Spatial means of the three fields (unweighted).
    pub fn means(&self) -> [f64; 3] {
        self.fields().map(|f| f.iter().sum::<f64>() / f.len() as f64)
    }

    pub fn sup(&self) -> [f64; 3] {
        self.fields().map(|f| f.iter().fold(0.0_f64, |a, x| a.max(x.abs())))
    }
}

/// Initial data for two-dimensional runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// Base state plus independent uniform noise in `[−ε, ε]`.
    #[default]
    Random,
    /// Base state plus independent uniform noise in `[0, ε]`.
    RandomPositive,
    /// Base state plus `ε·cos²(n x)·cos²(n y)`.
    Cosine,
}

/// Everything a simulator needs besides the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub t_end: f64,
    pub snapshot_every: f64,
    /// Perturbation amplitudes for `u`, `v`, `r`.
    pub eps: [f64; 3],
    pub wavenumber: u32,
    pub seed: u64,
    /// State the perturbation is centred on; the chosen `E8` when absent.
    pub base: Option<[f64; 3]>,
    /// Switch the kinetics off (pure diffusion).
    pub reaction: bool,
    /// Collocation points in 1D.
    pub n: usize,
    /// Time integrator for 1D runs.
    pub integrator: String,
    pub atol: f64,
    pub rtol: f64,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Fixed step for 2D runs and the 1D IMEX integrator.
    pub dt: f64,
    pub initial: InitialKind,
    pub max_steps: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            t_end: 1000.0,
            snapshot_every: 10.0,
            eps: [0.05; 3],
            wavenumber: 8,
            seed: 0,
            base: None,
            reaction: true,
            n: 256,
            integrator: "sbdf2".into(),
            atol: 1e-8,
            rtol: 1e-6,
            nx: 200,
            ny: 200,
            dx: 0.1,
            dy: 0.1,
            dt: 0.1,
            initial: InitialKind::Random,
            max_steps: 50_000_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t_end", self.t_end),
            ("snapshot_every", self.snapshot_every),
            ("atol", self.atol),
            ("rtol", self.rtol),
            ("dx", self.dx),
            ("dy", self.dy),
            ("dt", self.dt),
        ];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {x}")));
            }
        }
        if self.eps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::Config(format!("eps must be nonnegative, got {:?}", self.eps)));
        }
        if let Some(b) = self.base {
            if b.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::Config(format!("base state must be nonnegative, got {b:?}")));
            }
        }
        Ok(())
    }

    /// The state perturbations are centred on.
    pub fn base_state(&self, p: &Params) -> Result<StatePoint> {
        if let Some(b) = self.base {
            return Ok(b.into());
        }
        let e8 = crate::equilibria::interior_equilibrium(p);
        if e8.exists {
            Ok(e8.point)
        } else {
            Err(Error::Domain(format!("no interior equilibrium to perturb: {}", e8.note)))
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub simulator: String,
    pub snapshots: Vec<FieldState>,
    /// Smallest field value seen at any step.
    pub min_value: f64,
    pub steps: u64,
}

impl RunOutput {
    pub fn final_state(&self) -> &FieldState {
        self.snapshots.last().expect("runs always record the initial snapshot")
    }

    pub fn negativity_flagged(&self) -> bool {
        self.min_value < NEGATIVITY_TOL
    }
}

/// A spatial discretization that can integrate the model.
pub trait Simulator: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, p: &Params, cfg: &SimConfig) -> Result<RunOutput>;
}

/// Simulators keyed by name.
pub struct SimulatorRegistry {
    entries: BTreeMap<&'static str, Box<dyn Simulator>>,
}

impl SimulatorRegistry {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn register(&mut self, sim: Box<dyn Simulator>) {
        self.entries.insert(sim.name(), sim);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Simulator> {
        self.entries.get(name).map(|b| b.as_ref()).ok_or_else(|| {
            Error::Config(format!("unknown simulator '{name}', expected one of {:?}", self.names()))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for SimulatorRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(Collocation1D));
        reg.register(Box::new(FiniteDifference2D));
        reg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_both_discretizations() {
        let reg = SimulatorRegistry::default();
        assert_eq!(reg.names(), vec!["collocation1d", "fd2d"]);
        assert!(reg.get("spectral3d").is_err());
    }

    #[test]
    fn default_config_is_valid() {
        SimConfig::default().validate().unwrap();
        let bad = SimConfig { dt: -1.0, ..SimConfig::default() };
        assert!(bad.validate().is_err());
    }
}
