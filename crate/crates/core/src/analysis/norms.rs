//! Norms with the `1/|Ω|` normalization, so a constant `c` has `l2 = |c|`.
//!
//! Integrals use the grid's own quadrature (Clenshaw–Curtis on collocation
//! nodes, trapezoid on the finite-difference mesh) and gradients the
//! scheme's own differentiation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simulate::{FieldState, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldNorms {
    pub l2: f64,
    pub sup: f64,
    pub h1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub u: FieldNorms,
    pub v: FieldNorms,
    pub r: FieldNorms,
}

/// Mean of `f²` and of `|∇f|²` over the domain.
fn mean_squares(f: &[f64], mesh: &Mesh) -> (f64, f64) {
    match mesh {
        Mesh::Line(g) => {
            let sq: Vec<f64> = f.iter().map(|x| x * x).collect();
            let df = g.derivative(f);
            let dsq: Vec<f64> = df.iter().map(|x| x * x).collect();
            (g.integrate(&sq) / g.length(), g.integrate(&dsq) / g.length())
        }
        Mesh::Plane(g) => {
            let sq: Vec<f64> = f.iter().map(|x| x * x).collect();
            let (gx, gy) = g.gradient(f);
            let dsq: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a * a + b * b).collect();
            (g.integrate(&sq) / g.area(), g.integrate(&dsq) / g.area())
        }
    }
}

pub fn field_norms(f: &[f64], mesh: &Mesh) -> FieldNorms {
    let (l2sq, gradsq) = mean_squares(f, mesh);
    FieldNorms {
        l2: l2sq.max(0.0).sqrt(),
        sup: f.iter().fold(0.0_f64, |a, x| a.max(x.abs())),
        h1: (l2sq + gradsq).max(0.0).sqrt(),
    }
}

pub fn norms(state: &FieldState) -> NormReport {
    NormReport {
        u: field_norms(&state.u, &state.mesh),
        v: field_norms(&state.v, &state.mesh),
        r: field_norms(&state.r, &state.mesh),
    }
}

/// Spatial standard deviation, weighted by the grid quadrature.
pub fn spatial_std(f: &[f64], mesh: &Mesh) -> f64 {
    let mean = match mesh {
        Mesh::Line(g) => g.integrate(f) / g.length(),
        Mesh::Plane(g) => g.integrate(f) / g.area(),
    };
    let dev: Vec<f64> = f.iter().map(|x| x - mean).collect();
    field_norms(&dev, mesh).l2
}

/// Per-field H¹ distances and their Euclidean combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldErrors {
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub combined: f64,
}

pub fn h1_error(a: &FieldState, b: &FieldState) -> Result<FieldErrors> {
    if !a.mesh.same_as(&b.mesh) {
        return Err(Error::GridMismatch(format!(
            "{} vs {}",
            a.mesh.describe(),
            b.mesh.describe()
        )));
    }
    let diff = |x: &[f64], y: &[f64]| -> f64 {
        let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
        field_norms(&d, &a.mesh).h1
    };
    let (u, v, r) = (diff(&a.u, &b.u), diff(&a.v, &b.v), diff(&a.r, &b.r));
    Ok(FieldErrors { u, v, r, combined: (u * u + v * v + r * r).sqrt() })
}
