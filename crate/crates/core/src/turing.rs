//! Diffusion-driven instability of the interior state.
//!
//! Linearizing about `E8` with perturbations `exp(λt + ikx)` gives
//! `λ³ + μ2(k²)λ² + μ1(k²)λ + μ0(k²) = 0`. Both `μ0` and the Hurwitz product
//! `μ2μ1 − μ0` are cubics in `k²`,
//! `G(k²) = HH + DD·k² + CC·k⁴ + BB·k⁶`, and Turing instability means one of
//! them dips below zero at some `k² > 0` while the state is stable at `k = 0`.

use nalgebra::{Complex, Matrix3};
use serde::Serialize;
use std::fmt;

use crate::equilibria::{interior_candidates, interior_equilibrium, jacobian, Equilibrium, Jacobian3};
use crate::error::{Error, Result};
use crate::model::Params;
use crate::poly::{cubic_roots, CubicCoefficients};

/// Relative size below which a decisive quantity is reported as marginal.
pub const MARGINAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffusionMatrix {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl DiffusionMatrix {
    pub fn new(d1: f64, d2: f64, d3: f64) -> Result<Self> {
        if [d1, d2, d3].iter().all(|d| d.is_finite() && *d > 0.0) {
            Ok(Self { d1, d2, d3 })
        } else {
            Err(Error::Domain(format!("diffusivities must be positive, got ({d1}, {d2}, {d3})")))
        }
    }

    pub fn from_params(p: &Params) -> Self {
        Self { d1: p.d1, d2: p.d2, d3: p.d3 }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&nalgebra::Vector3::new(self.d1, self.d2, self.d3))
    }
}

/// Ascending coefficients of a polynomial in `k²`.
fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// `μ2`, `μ1`, `μ0` as polynomials in `k²`, coefficients ascending.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionCubic {
    pub mu2: [f64; 2],
    pub mu1: [f64; 3],
    pub mu0: [f64; 4],
}

impl DispersionCubic {
    pub fn mu2(&self, k2: f64) -> f64 {
        horner(&self.mu2, k2)
    }

    pub fn mu1(&self, k2: f64) -> f64 {
        horner(&self.mu1, k2)
    }

    pub fn mu0(&self, k2: f64) -> f64 {
        horner(&self.mu0, k2)
    }

    pub fn hurwitz_product(&self, k2: f64) -> f64 {
        self.mu2(k2) * self.mu1(k2) - self.mu0(k2)
    }

    pub fn eval(&self, which: GFunction, k2: f64) -> f64 {
        match which {
            GFunction::Mu0 => self.mu0(k2),
            GFunction::HurwitzProduct => self.hurwitz_product(k2),
        }
    }

    /// The characteristic polynomial in `λ` at a fixed `k²`.
    pub fn at(&self, k2: f64) -> CubicCoefficients {
        CubicCoefficients::new(1.0, self.mu2(k2), self.mu1(k2), self.mu0(k2))
    }
}

pub fn dispersion_cubic(j: &Jacobian3, d: &DiffusionMatrix) -> DispersionCubic {
    let [j11, j12, j21, j22, j23, j32, j33] = entries(j);
    let DiffusionMatrix { d1, d2, d3 } = *d;
    DispersionCubic {
        mu2: [-(j11 + j22 + j33), d1 + d2 + d3],
        mu1: [
            j11 * j33 + j11 * j22 + j22 * j33 - j32 * j23 - j12 * j21,
            -((d3 + d1) * j22 + (d2 + d1) * j33 + (d2 + d3) * j11),
            d2 * d3 + d2 * d1 + d1 * d3,
        ],
        mu0: [
            j11 * j32 * j23 - j11 * j22 * j33 + j12 * j21 * j33,
            d1 * (j22 * j33 - j32 * j23) + d2 * j11 * j33 + d3 * (j22 * j11 - j12 * j21),
            -(d2 * d1 * j33 + d1 * d3 * j22 + d2 * d3 * j11),
            d1 * d2 * d3,
        ],
    }
}

/// The nonzero entries `J11, J12, J21, J22, J23, J32, J33`.
fn entries(j: &Jacobian3) -> [f64; 7] {
    let m = &j.0;
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)], m[(1, 2)], m[(2, 1)], m[(2, 2)]]
}

pub fn routh_hurwitz_stable(c: &DispersionCubic, k2: f64) -> bool {
    let (m2, m1, m0) = (c.mu2(k2), c.mu1(k2), c.mu0(k2));
    m2 > 0.0 && m1 > 0.0 && m0 > 0.0 && m2 * m1 - m0 > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GFunction {
    /// `μ0(k²)`
    Mu0,
    /// `μ2(k²)μ1(k²) − μ0(k²)`
    HurwitzProduct,
}

impl GFunction {
    pub const ALL: [GFunction; 2] = [GFunction::Mu0, GFunction::HurwitzProduct];
}

impl fmt::Display for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GFunction::Mu0 => "mu0",
            GFunction::HurwitzProduct => "mu2*mu1-mu0",
        })
    }
}

/// `G(k²) = HH + DD·k² + CC·k⁴ + BB·k⁶`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GCoefficients {
    pub which: GFunction,
    pub hh: f64,
    pub dd: f64,
    pub cc: f64,
    pub bb: f64,
}

impl GCoefficients {
    pub fn eval(&self, k2: f64) -> f64 {
        horner(&[self.hh, self.dd, self.cc, self.bb], k2)
    }

    pub fn derivative(&self, k2: f64) -> f64 {
        (3.0 * self.bb * k2 + 2.0 * self.cc) * k2 + self.dd
    }

    pub fn second_derivative(&self, k2: f64) -> f64 {
        6.0 * self.bb * k2 + 2.0 * self.cc
    }

    /// `CC² − 3·BB·DD`, positive when `G` has two real critical points.
    pub fn discriminant(&self) -> f64 {
        self.cc * self.cc - 3.0 * self.bb * self.dd
    }

    fn scale(&self) -> f64 {
        [self.hh, self.dd, self.cc, self.bb].iter().fold(0.0_f64, |a, c| a.max(c.abs()))
    }
}

/// Coefficients of `G` written out term by term in `J` and `D`.
pub fn g_coefficients(j: &Jacobian3, d: &DiffusionMatrix, which: GFunction) -> GCoefficients {
    let [j11, j12, j21, j22, j23, j32, j33] = entries(j);
    let DiffusionMatrix { d1, d2, d3 } = *d;
    let (hh, dd, cc, bb) = match which {
        GFunction::Mu0 => (
            j11 * j32 * j23 + j12 * j21 * j33 - j11 * j22 * j33,
            d1 * (j22 * j33 - j32 * j23) + d2 * j11 * j33 + d3 * (j11 * j22 - j12 * j21),
            -d1 * d2 * j33 - d1 * d3 * j22 - d2 * d3 * j11,
            d1 * d2 * d3,
        ),
        GFunction::HurwitzProduct => (
            j11 * j22 * j33
                - (j11 + j22 + j33) * (j11 * j22 - j12 * j21 + j11 * j33 + j22 * j33 - j23 * j32)
                - j11 * j23 * j32
                - j12 * j21 * j33,
            d1 * (2.0 * j11 * j33 + 2.0 * j11 * j22 + 2.0 * j22 * j33 + j33 * j33 + j22 * j22
                - j12 * j21)
                + d2 * (2.0 * j22 * j11 + 2.0 * j22 * j33 + 2.0 * j33 * j11 + j11 * j11 + j33 * j33
                    - j21 * j12
                    - j23 * j32)
                + d3 * (2.0 * j22 * j11 + 2.0 * j22 * j33 + 2.0 * j33 * j11 + j11 * j11 + j22 * j22
                    - j23 * j32),
            -j11 * (d2 + d3) * (2.0 * d1 + d2 + d3)
                - j22 * (d1 + d3) * (d1 + 2.0 * d2 + d3)
                - j33 * (d1 + d2) * (d1 + d2 + 2.0 * d3),
            (d2 + d3) * (d1 * d1 + d2 * d3 + d1 * d2 + d1 * d3),
        ),
    };
    GCoefficients { which, hh, dd, cc, bb }
}

/// The positive critical point of `G`, where it attains its local minimum.
pub fn turing_point(g: &GCoefficients) -> Option<f64> {
    let disc = g.discriminant();
    if !(g.bb > 0.0) || !(disc > 0.0) {
        return None;
    }
    let k2 = (-g.cc + disc.sqrt()) / (3.0 * g.bb);
    (k2 > 0.0).then_some(k2)
}

/// `2CC³ − 9·DD·CC·BB − 2(CC² − 3·DD·BB)^{3/2} + 27·BB·HH²`.
pub fn g_min(g: &GCoefficients) -> Result<f64> {
    let disc = g.discriminant();
    if disc < 0.0 {
        return Err(Error::Domain(format!("CC² − 3·BB·DD = {disc:e} is negative")));
    }
    Ok(2.0 * g.cc.powi(3) - 9.0 * g.dd * g.cc * g.bb - 2.0 * disc.powf(1.5)
        + 27.0 * g.bb * g.hh * g.hh)
}

/// `27·BB²·G(k²_T)` in closed form:
/// `2CC³ − 9·DD·CC·BB − 2(CC² − 3·DD·BB)^{3/2} + 27·BB²·HH`.
///
/// Differs from [`g_min`] only in the last term. The sign of this value is
/// the sign of the true minimum, so the verdict is decided on it.
pub fn g_min_exact(g: &GCoefficients) -> Result<f64> {
    let disc = g.discriminant();
    if disc < 0.0 {
        return Err(Error::Domain(format!("CC² − 3·BB·DD = {disc:e} is negative")));
    }
    Ok(2.0 * g.cc.powi(3) - 9.0 * g.dd * g.cc * g.bb - 2.0 * disc.powf(1.5)
        + 27.0 * g.bb * g.bb * g.hh)
}

/// Conditions checked for one `G` function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GAssessment {
    pub coefficients: GCoefficients,
    pub hh_positive: bool,
    pub condition_dd_or_cc: bool,
    pub k2_t: Option<f64>,
    /// The minimum as given by [`g_min`].
    pub g_min: Option<f64>,
    /// The minimum as given by [`g_min_exact`]; decides `gmin_negative`.
    pub g_min_exact: Option<f64>,
    /// `G(k²_T)` evaluated directly.
    pub g_at_k2_t: Option<f64>,
    pub gmin_negative: bool,
    pub satisfied: bool,
    /// Some decisive quantity is within rounding of zero.
    pub marginal: bool,
}

fn assess(j: &Jacobian3, d: &DiffusionMatrix, which: GFunction) -> GAssessment {
    let g = g_coefficients(j, d, which);
    let tiny = MARGINAL_TOL * g.scale().max(f64::MIN_POSITIVE);
    let disc = g.discriminant();
    let k2_t = turing_point(&g);
    let gmin = g_min(&g).ok();
    let gmin_exact = g_min_exact(&g).ok();
    let hh_positive = g.hh > 0.0;
    let condition = (g.dd < 0.0 || g.cc < 0.0) && disc > 0.0;
    let gmin_negative = gmin_exact.is_some_and(|v| v < 0.0);
    let marginal = g.hh.abs() < tiny
        || disc.abs() < MARGINAL_TOL * (g.cc * g.cc).max(f64::MIN_POSITIVE)
        || gmin_exact.is_some_and(|v| v.abs() < MARGINAL_TOL * g.cc.abs().powi(3).max(f64::MIN_POSITIVE));
    GAssessment {
        coefficients: g,
        hh_positive,
        condition_dd_or_cc: condition,
        k2_t,
        g_min: gmin,
        g_min_exact: gmin_exact,
        g_at_k2_t: k2_t.map(|k| g.eval(k)),
        gmin_negative,
        satisfied: hh_positive && condition && gmin_negative,
        marginal,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuringVerdict {
    pub equilibrium: Option<[f64; 3]>,
    pub stable_without_diffusion: bool,
    pub condition_dd_or_cc: bool,
    pub gmin_negative: bool,
    pub turing_unstable: bool,
    pub k2_t: Option<f64>,
    /// The `G` function that satisfies every condition, if any.
    pub offending_function: Option<GFunction>,
    pub assessments: Vec<GAssessment>,
    pub marginal: bool,
    pub note: String,
}

impl TuringVerdict {
    fn no_equilibrium(note: String) -> Self {
        Self {
            equilibrium: None,
            stable_without_diffusion: false,
            condition_dd_or_cc: false,
            gmin_negative: false,
            turing_unstable: false,
            k2_t: None,
            offending_function: None,
            assessments: Vec::new(),
            marginal: false,
            note,
        }
    }
}

/// Verdict for a given Jacobian and diffusion matrix.
pub fn verdict_for(j: &Jacobian3, d: &DiffusionMatrix) -> TuringVerdict {
    let cubic = dispersion_cubic(j, d);
    let stable = routh_hurwitz_stable(&cubic, 0.0);
    let assessments: Vec<GAssessment> = GFunction::ALL.iter().map(|&w| assess(j, d, w)).collect();
    let hit = assessments.iter().find(|a| a.satisfied);
    let turing_unstable = stable && hit.is_some();
    let lead = hit.unwrap_or_else(|| {
        assessments
            .iter()
            .find(|a| a.condition_dd_or_cc)
            .unwrap_or(&assessments[0])
    });
    let marginal = assessments.iter().any(|a| a.marginal);
    let mut note = String::new();
    if !stable {
        note.push_str("not stable without diffusion");
    }
    TuringVerdict {
        equilibrium: None,
        stable_without_diffusion: stable,
        condition_dd_or_cc: assessments.iter().any(|a| a.condition_dd_or_cc),
        gmin_negative: assessments.iter().any(|a| a.gmin_negative),
        turing_unstable,
        k2_t: lead.k2_t,
        offending_function: if turing_unstable { hit.map(|a| a.coefficients.which) } else { None },
        assessments,
        marginal,
        note,
    }
}

fn verdict_at(eq: &Equilibrium, p: &Params) -> TuringVerdict {
    if !eq.exists {
        return TuringVerdict::no_equilibrium(format!("no interior equilibrium: {}", eq.note));
    }
    match jacobian(eq.point, p) {
        Ok(j) => {
            let mut v = verdict_for(&j, &DiffusionMatrix::from_params(p));
            v.equilibrium = Some(eq.point.as_array());
            if !eq.note.is_empty() {
                v.note = if v.note.is_empty() { eq.note.clone() } else { format!("{}; {}", v.note, eq.note) };
            }
            v
        }
        Err(e) => TuringVerdict::no_equilibrium(e.to_string()),
    }
}

/// Verdict at the interior state chosen by [`interior_equilibrium`].
pub fn turing_unstable(p: &Params) -> TuringVerdict {
    verdict_at(&interior_equilibrium(p), p)
}

/// Verdicts for every interior candidate.
pub fn turing_verdicts(p: &Params) -> Vec<TuringVerdict> {
    interior_candidates(p).iter().map(|e| verdict_at(e, p)).collect()
}

/// Largest real part of the roots of the dispersion relation at each `k²`.
pub fn growth_rates(j: &Jacobian3, d: &DiffusionMatrix, k2_grid: &[f64]) -> Vec<f64> {
    let cubic = dispersion_cubic(j, d);
    k2_grid
        .iter()
        .map(|&k2| {
            cubic_roots(&cubic.at(k2))
                .map(|zs| zs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
                .unwrap_or(f64::NAN)
        })
        .collect()
}

/// Eigenvalues of `J − k²D`.
pub fn spectrum(j: &Jacobian3, d: &DiffusionMatrix, k2: f64) -> [Complex<f64>; 3] {
    let m = j.0 - d.matrix() * k2;
    let e = m.complex_eigenvalues();
    [e[0], e[1], e[2]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_j(rng: &mut impl Rng) -> Jacobian3 {
        let mut x = || rng.random_range(-2.0..2.0);
        #[rustfmt::skip]
        let m = Matrix3::new(
            x(), x(), 0.0,
            x(), x(), x(),
            0.0, x(), x(),
        );
        Jacobian3(m)
    }

    fn random_d(rng: &mut impl Rng) -> DiffusionMatrix {
        DiffusionMatrix::new(
            rng.random_range(1e-4..1.0),
            rng.random_range(1e-4..1.0),
            rng.random_range(1e-4..1.0),
        )
        .unwrap()
    }

    /// Coefficients of `det(λI − (J − k²D))` by numerical interpolation of the
    /// determinant at four values of `λ`.
    pub(crate) fn determinant_coefficients(j: &Jacobian3, d: &DiffusionMatrix, k2: f64) -> [f64; 3] {
        let a = j.0 - d.matrix() * k2;
        let p = |l: f64| (Matrix3::identity() * l - a).determinant();
        // p(λ) = λ³ + c2λ² + c1λ + c0, sampled at λ = 0, ±1, 2.
        let (p0, p1, pm1, p2) = (p(0.0), p(1.0), p(-1.0), p(2.0));
        let c0 = p0;
        let c2 = 0.5 * (p1 + pm1) - c0;
        let c1 = p1 - 1.0 - c2 - c0;
        debug_assert!((p2 - (8.0 + 4.0 * c2 + 2.0 * c1 + c0)).abs() < 1e-8 * p2.abs().max(1.0));
        [c2, c1, c0]
    }

    fn rel(a: f64, b: f64, scale: f64) -> f64 {
        (a - b).abs() / scale.max(1.0)
    }

    #[test]
    fn dispersion_matches_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let j = random_j(&mut rng);
            let d = random_d(&mut rng);
            let k2 = rng.random_range(0.0..5.0);
            let c = dispersion_cubic(&j, &d);
            let [c2, c1, c0] = determinant_coefficients(&j, &d, k2);
            assert!(rel(c.mu2(k2), c2, c2.abs()) < 1e-10);
            assert!(rel(c.mu1(k2), c1, c1.abs()) < 1e-10);
            assert!(rel(c.mu0(k2), c0, c0.abs()) < 1e-10);
        }
    }

    #[test]
    fn g_coefficients_reconstruct_both_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let j = random_j(&mut rng);
            let d = random_d(&mut rng);
            let c = dispersion_cubic(&j, &d);
            for which in GFunction::ALL {
                let g = g_coefficients(&j, &d, which);
                assert!(g.bb > 0.0);
                let k2 = rng.random_range(0.0..5.0);
                let direct = c.eval(which, k2);
                assert!(rel(g.eval(k2), direct, direct.abs()) < 1e-10, "{which}");
            }
        }
    }

    #[test]
    fn mu2_at_zero_is_negative_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let j = random_j(&mut rng);
        let c = dispersion_cubic(&j, &random_d(&mut rng));
        assert_eq!(c.mu2(0.0), -(j.trace()));
        assert!((c.mu1(0.0) - j.minor_sum()).abs() < 1e-13);
        assert!((c.mu0(0.0) + j.determinant()).abs() < 1e-12);
    }

    #[test]
    fn bb_for_mu0_is_product_of_diffusivities() {
        let d = DiffusionMatrix::new(0.2, 0.3, 0.7).unwrap();
        let j = Jacobian3(Matrix3::identity());
        let g = g_coefficients(&j, &d, GFunction::Mu0);
        assert_eq!(g.bb, 0.2 * 0.3 * 0.7);
    }

    #[test]
    fn bb_for_hurwitz_product_with_equal_diffusivities() {
        let d = 0.3;
        let g = g_coefficients(
            &Jacobian3(Matrix3::identity()),
            &DiffusionMatrix::new(d, d, d).unwrap(),
            GFunction::HurwitzProduct,
        );
        // (d2 + d3)(d1² + d2d3 + d1d2 + d1d3) = 2d·4d²
        assert!((g.bb - 8.0 * d * d * d).abs() < 1e-15);
    }

    #[test]
    fn diagonal_negative_jacobian_is_stable_and_not_turing() {
        let j = Jacobian3(Matrix3::from_diagonal(&nalgebra::Vector3::new(-1.0, -0.5, -2.0)));
        let d = DiffusionMatrix::new(1e-3, 1e-2, 0.5).unwrap();
        let c = dispersion_cubic(&j, &d);
        for k2 in [0.0, 0.1, 1.0, 100.0] {
            assert!(routh_hurwitz_stable(&c, k2));
        }
        assert!(!verdict_for(&j, &d).turing_unstable);
    }

    #[test]
    fn turing_point_is_strict_local_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut seen = 0;
        while seen < 200 {
            let j = random_j(&mut rng);
            let d = random_d(&mut rng);
            for which in GFunction::ALL {
                let g = g_coefficients(&j, &d, which);
                let Some(k2) = turing_point(&g) else { continue };
                seen += 1;
                let scale = g.dd.abs().max(g.cc.abs() * k2).max(g.bb.abs() * k2 * k2);
                assert!(g.derivative(k2).abs() < 1e-9 * scale.max(1.0));
                assert!(g.second_derivative(k2) > 0.0);
                let h = 1e-3 * k2.max(1e-6);
                assert!(g.eval(k2 + h) > g.eval(k2) && g.eval(k2 - h) > g.eval(k2));
            }
        }
    }

    #[test]
    fn turing_point_matches_grid_search() {
        let p = Params::preset("spotted", 0.01).unwrap();
        let e8 = interior_equilibrium(&p);
        let j = jacobian(e8.point, &p).unwrap();
        let d = DiffusionMatrix::from_params(&p);
        for which in GFunction::ALL {
            let g = g_coefficients(&j, &d, which);
            let Some(k2) = turing_point(&g) else { continue };
            let n = 1_000_000;
            let h = 1e3 / n as f64;
            let (mut best, mut arg) = (f64::INFINITY, 0.0);
            for i in 1..=n {
                let x = h * i as f64;
                let y = g.eval(x);
                if y < best {
                    best = y;
                    arg = x;
                }
            }
            // A boundary minimum at the far end means G has no interior minimum on the grid.
            if arg < 1e3 - h {
                assert!((arg - k2).abs() <= h, "{which}: grid {arg} vs closed form {k2}");
            }
        }
    }

    #[test]
    fn negative_dd_forces_positive_discriminant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let g = GCoefficients {
                which: GFunction::Mu0,
                hh: rng.random_range(-1.0..1.0),
                dd: -rng.random_range(1e-6..1.0),
                cc: rng.random_range(-1.0..1.0),
                bb: rng.random_range(1e-6..1.0),
            };
            assert!(g.discriminant() > 0.0);
            assert!(turing_point(&g).is_some());
        }
    }

    #[test]
    fn zero_hh_with_negative_dd_gives_negative_g_min() {
        let g = GCoefficients { which: GFunction::Mu0, hh: 0.0, dd: -0.5, cc: 0.3, bb: 0.2 };
        assert!(g_min(&g).unwrap() < 0.0);
    }

    #[test]
    fn g_min_rejects_negative_discriminant() {
        let g = GCoefficients { which: GFunction::Mu0, hh: 1.0, dd: 1.0, cc: 0.1, bb: 1.0 };
        assert!(g_min(&g).is_err());
    }

    /// Compares the sign of the closed-form minimum with a direct evaluation
    /// of `27·BB²·G(k²_T)` and reports the disagreement rate.
    #[test]
    fn g_min_sign_against_direct_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let (mut total, mut agree) = (0, 0);
        while total < 1000 {
            let g = GCoefficients {
                which: GFunction::Mu0,
                hh: rng.random_range(0.0..1.0),
                dd: rng.random_range(-1.0..1.0),
                cc: rng.random_range(-1.0..1.0),
                bb: rng.random_range(1e-3..1.0),
            };
            let Some(k2) = turing_point(&g) else { continue };
            total += 1;
            let direct = 27.0 * g.bb * g.bb * g.eval(k2);
            let printed = g_min(&g).unwrap();
            assert!((g_min_exact(&g).unwrap() - direct).abs() < 1e-10 * direct.abs().max(1.0));
            // The exact minimum identity: 27·BB²·G(k²_T) = 2CC³ − 9BB·CC·DD + 27BB²HH − 2(CC² − 3BB·DD)^{3/2}.
            let exact = 2.0 * g.cc.powi(3) - 9.0 * g.bb * g.cc * g.dd + 27.0 * g.bb * g.bb * g.hh
                - 2.0 * g.discriminant().powf(1.5);
            assert!((direct - exact).abs() < 1e-10 * exact.abs().max(1.0));
            if (printed < 0.0) == (direct < 0.0) {
                agree += 1;
            }
        }
        eprintln!("g_min sign agreement with 27·BB²·G(k²_T): {agree}/{total}");
        assert!(agree > 0);
    }

    #[test]
    fn growth_rates_match_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let j = random_j(&mut rng);
            let d = random_d(&mut rng);
            let k2 = rng.random_range(0.0..10.0);
            let ours = growth_rates(&j, &d, &[k2])[0];
            let reference = spectrum(&j, &d, k2).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            assert!((ours - reference).abs() < 1e-9 * reference.abs().max(1.0), "{ours} vs {reference}");
        }
    }

    #[test]
    fn spotted_set_is_turing_unstable_at_small_threshold() {
        let p = Params::preset("spotted", 0.01).unwrap();
        let v = turing_unstable(&p);
        assert!(v.stable_without_diffusion, "{v:?}");
        assert!(v.turing_unstable, "{v:?}");
        let j = jacobian(interior_equilibrium(&p).point, &p).unwrap();
        let d = DiffusionMatrix::from_params(&p);
        let grid: Vec<f64> = (0..4000).map(|i| i as f64 * 0.5).collect();
        assert!(growth_rates(&j, &d, &grid).iter().any(|&g| g > 0.0));
    }

    #[test]
    fn high_threshold_loses_kinetic_stability() {
        let p = Params::preset("spotted", 0.5).unwrap();
        let v = turing_unstable(&p);
        assert!(!v.stable_without_diffusion);
        assert!(!v.turing_unstable);
    }

    #[test]
    fn missing_interior_state_is_reported() {
        let p = Params { w1: 1.5, ..Params::preset("spotted", 0.01).unwrap() };
        let v = turing_unstable(&p);
        assert!(!v.turing_unstable);
        assert!(v.note.contains("no interior equilibrium"));
    }

    #[test]
    fn every_candidate_gets_a_verdict() {
        let p = Params::preset("spotted", 0.01).unwrap();
        let vs = turing_verdicts(&p);
        assert_eq!(vs.len(), interior_candidates(&p).len());
    }

    #[test]
    fn turing_verdict_implies_positive_growth() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut hits = 0;
        for _ in 0..200_000 {
            let j = random_j(&mut rng);
            let d = DiffusionMatrix::new(
                10f64.powf(rng.random_range(-4.0..0.0)),
                10f64.powf(rng.random_range(-4.0..0.0)),
                10f64.powf(rng.random_range(-4.0..0.0)),
            )
            .unwrap();
            let v = verdict_for(&j, &d);
            if !v.turing_unstable || v.marginal {
                continue;
            }
            hits += 1;
            let a = v.assessments.iter().find(|a| a.satisfied).unwrap();
            let k2 = a.k2_t.unwrap();
            assert!(a.g_at_k2_t.unwrap() < 0.0);
            assert!(growth_rates(&j, &d, &[k2])[0] > 0.0, "{v:?}");
            assert!(routh_hurwitz_stable(&dispersion_cubic(&j, &d), 0.0));
            if hits == 100 {
                break;
            }
        }
        assert_eq!(hits, 100);
    }

    proptest! {
        #[test]
        fn mu2_positive_when_trace_negative(
            a in -2.0..0.0f64, b in -2.0..0.0f64, c in -2.0..0.0f64,
            off in prop::array::uniform4(-2.0..2.0f64),
            d in prop::array::uniform3(1e-4..1.0f64),
            k2 in 0.0..100.0f64,
        ) {
            #[rustfmt::skip]
            let j = Jacobian3(Matrix3::new(
                a, off[0], 0.0,
                off[1], b, off[2],
                0.0, off[3], c,
            ));
            let dm = DiffusionMatrix::new(d[0], d[1], d[2]).unwrap();
            prop_assume!(j.trace() < 0.0);
            prop_assert!(dispersion_cubic(&j, &dm).mu2(k2) > 0.0);
        }

    }
}
