//! Parameters and pointwise kinetics of the food chain.
//!
//! The nondimensional system reads
//!
//! ```text
//! u_t = d1 Δu + u − u² − w1·uv/(u+v)
//! v_t = d2 Δv − a2 v + w2·uv/(u+v) − w3·vr/(v+r)
//! r_t = d3 Δr + r (r − m) (c − w4 r/(v + D3))
//! ```
//!
//! with homogeneous Neumann conditions. Everything downstream of this module
//! works with [`Params`]; [`DimensionalParams`] only exists to be mapped onto
//! it.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Parameters of the dimensional model before rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalParams {
    /// Prey growth rate.
    pub a1: f64,
    /// Prey intraspecific competition.
    pub b1: f64,
    /// Death rate of the middle predator.
    pub a2: f64,
    /// Residual-loss density of the top predator.
    pub a3: f64,
    /// Self-reproduction rate of the top predator.
    pub c: f64,
    /// Allee threshold (density).
    pub m: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    /// Handling time of the prey by the middle predator.
    pub beta1: f64,
    /// Handling time of the middle predator by the top predator.
    pub beta3: f64,
    pub du: f64,
    pub dv: f64,
    pub dr: f64,
    /// Domain length.
    pub l: f64,
}

impl DimensionalParams {
    fn fields(&self) -> [(&'static str, f64); 16] {
        [
            ("A1", self.a1),
            ("B1", self.b1),
            ("A2", self.a2),
            ("A3", self.a3),
            ("C", self.c),
            ("M", self.m),
            ("W1", self.w1),
            ("W2", self.w2),
            ("W3", self.w3),
            ("W4", self.w4),
            ("beta1", self.beta1),
            ("beta3", self.beta3),
            ("DU", self.du),
            ("DV", self.dv),
            ("DR", self.dr),
            ("L", self.l),
        ]
    }
}

/// Nondimensional model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub a2: f64,
    pub c: f64,
    /// Offset `D3` in the top predator's carrying capacity `c(v + D3)/w4`.
    #[serde(rename = "D3")]
    pub alt_food: f64,
    /// Allee threshold of the top predator.
    pub m: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Params {
    /// Checks that every field is finite, `m ≥ 0` and all other fields are
    /// strictly positive.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.named() {
            if !value.is_finite() {
                return Err(Error::Domain(format!("parameter {name} = {value} is not finite")));
            }
            let ok = if name == "m" { value >= 0.0 } else { value > 0.0 };
            if !ok {
                let rule = if name == "m" { ">= 0" } else { "> 0" };
                return Err(Error::Domain(format!("parameter {name} = {value} must be {rule}")));
            }
        }
        Ok(())
    }

    pub fn named(&self) -> [(&'static str, f64); 11] {
        [
            ("w1", self.w1),
            ("w2", self.w2),
            ("w3", self.w3),
            ("w4", self.w4),
            ("a2", self.a2),
            ("c", self.c),
            ("D3", self.alt_food),
            ("m", self.m),
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
        ]
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    pub fn diffusivities(&self) -> [f64; 3] {
        [self.d1, self.d2, self.d3]
    }

    /// Top-predator level `c·D3/w4` reached when the middle predator is absent.
    pub fn top_capacity(&self) -> f64 {
        self.c * self.alt_food / self.w4
    }

    /// Looks up one of the bundled parameter sets, see [`PRESETS`].
    pub fn preset(name: &str, m: f64) -> Option<Self> {
        let base = match name {
            "spotted" => Self {
                w1: 0.96,
                w2: 0.52,
                w3: 1.06,
                w4: 0.37,
                a2: 0.014,
                c: 0.1,
                alt_food: 0.1,
                m,
                d1: 1e-3,
                d2: 1e-5,
                d3: 1e-5,
            },
            "striped" => Self {
                w1: 0.95,
                w2: 0.3,
                w3: 0.82,
                w4: 0.53,
                a2: 0.01,
                c: 0.1,
                alt_food: 0.1,
                m,
                d1: 1e-3,
                d2: 1e-5,
                d3: 1e-5,
            },
            "stationary" => Self {
                w1: 0.33,
                w2: 0.71,
                w3: 0.88,
                w4: 1.38,
                a2: 0.1,
                c: 0.9,
                alt_food: 0.08,
                m,
                d1: 3e-3,
                d2: 1e-4,
                d3: 8e-3,
            },
            _ => return None,
        };
        Some(base)
    }
}

/// Names accepted by [`Params::preset`].
///
/// * `spotted`: slow prey/predator diffusion; oscillatory Turing instability at
///   small `m`, the coexistence state loses kinetic stability between
///   `m = 0.1` and `m = 0.2`.
/// * `striped`: same diffusivities with a weaker middle predator.
/// * `stationary`: fast top-predator diffusion; only the real-eigenvalue
///   (stationary) Turing band is unstable, giving fixed patterns for small `m`.
pub const PRESETS: [&str; 3] = ["spotted", "striped", "stationary"];

/// Maps the dimensional model onto nondimensional parameters.
pub fn nondimensionalize(p: &DimensionalParams) -> Result<Params> {
    for (name, value) in p.fields() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Domain(format!(
                "dimensional parameter {name} = {value} must be positive"
            )));
        }
    }
    let out = Params {
        w1: p.w1 / (p.beta1 * p.a1),
        a2: p.a2 / p.a1,
        w2: p.w2 / p.a1,
        w3: p.w3 / (p.beta3 * p.a1),
        c: p.c * p.a1 / (p.a1 * p.b1 * p.beta1 * p.beta3),
        m: p.m * p.b1 * p.beta1 * p.beta3 / p.a1,
        alt_food: p.a3 * p.b1 * p.beta1 / p.a1,
        w4: p.w4 * p.b1 / (p.b1 * p.b1 * p.beta1 * p.beta3 * p.beta3),
        d1: p.du * PI * PI / (p.b1 * p.l * p.l),
        d2: p.dv * PI * PI / (p.b1 * p.beta1 * p.l * p.l),
        d3: p.dr * PI * PI / (p.b1 * p.beta1 * p.beta3 * p.l * p.l),
    };
    Ok(out)
}

/// Nondimensional densities at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StatePoint {
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

impl StatePoint {
    pub const fn new(u: f64, v: f64, r: f64) -> Self {
        Self { u, v, r }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.u, self.v, self.r]
    }

    pub fn is_nonnegative(&self) -> bool {
        self.u >= 0.0 && self.v >= 0.0 && self.r >= 0.0
    }
}

impl From<[f64; 3]> for StatePoint {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// Ratio-dependent response `x·y/(x+y)`, extended by zero at the origin.
pub fn ratio_response(x: f64, y: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 || x.is_nan() || y.is_nan() {
        return Err(Error::Domain(format!(
            "ratio response needs nonnegative densities, got ({x}, {y})"
        )));
    }
    Ok(ratio(x, y))
}

/// Unchecked ratio response used inside the solvers, where rounding can
/// leave densities a hair below zero.
#[inline]
pub(crate) fn ratio(x: f64, y: f64) -> f64 {
    let s = x + y;
    if s > 0.0 {
        // Dividing first keeps the product from underflowing near the origin.
        x * (y / s)
    } else {
        0.0
    }
}

/// Reaction terms `(f_u, f_v, f_r)` at a point.
#[inline]
pub fn reaction(s: StatePoint, p: &Params) -> [f64; 3] {
    reaction_uvr(s.u, s.v, s.r, p)
}

#[inline]
pub(crate) fn reaction_uvr(u: f64, v: f64, r: f64, p: &Params) -> [f64; 3] {
    let uv = ratio(u, v);
    let vr = ratio(v, r);
    [
        u - u * u - p.w1 * uv,
        -p.a2 * v + p.w2 * uv - p.w3 * vr,
        r * (r - p.m) * (p.c - p.w4 * r / (v + p.alt_food)),
    ]
}

/// Max-norm of the reaction vector, the residual used to certify equilibria.
pub fn kinetic_residual(s: StatePoint, p: &Params) -> f64 {
    reaction(s, p).iter().fold(0.0_f64, |acc, f| acc.max(f.abs()))
}
