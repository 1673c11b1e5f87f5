//! Nonnegative steady states of the kinetics and the Jacobian used for
//! linear stability.
//!
//! `E0`–`E6` are closed-form boundary states. `E7` (coexistence with the top
//! predator pinned at the Allee threshold) and `E8` (interior coexistence)
//! reduce to cubic equations in the prey density; every root inside the
//! admissible window `(1 − w1, 1)` is surfaced.

use nalgebra::Matrix3;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{kinetic_residual, Params, StatePoint};
use crate::poly::{cubic_real_roots, CubicCoefficients};

/// Residual below which a computed steady state is accepted.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    E0,
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    E7,
    E8,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub label: Label,
    pub point: StatePoint,
    pub exists: bool,
    /// Why the state does not exist, or remarks such as root ambiguity.
    pub note: String,
}

impl Equilibrium {
    fn present(label: Label, point: StatePoint) -> Self {
        Self { label, point, exists: true, note: String::new() }
    }

    fn absent(label: Label, point: StatePoint, note: impl Into<String>) -> Self {
        Self { label, point, exists: false, note: note.into() }
    }

    pub fn residual(&self, p: &Params) -> f64 {
        kinetic_residual(self.point, p)
    }
}

/// The closed-form boundary states `E0`–`E6`.
pub fn boundary_equilibria(p: &Params) -> Vec<Equilibrium> {
    let k = p.top_capacity();
    let mut out = vec![
        Equilibrium::present(Label::E0, StatePoint::new(0.0, 0.0, 0.0)),
        Equilibrium::present(Label::E1, StatePoint::new(1.0, 0.0, 0.0)),
    ];

    let e2 = StatePoint::new(0.0, 0.0, p.m);
    out.push(if p.m > 0.0 {
        Equilibrium::present(Label::E2, e2)
    } else {
        Equilibrium::absent(Label::E2, e2, "m = 0: coincides with E0")
    });

    let mut e3 = Equilibrium::present(Label::E3, StatePoint::new(0.0, 0.0, k));
    if k == p.m {
        e3.note = "coincides with E2 (m = c·D3/w4)".into();
    }
    out.push(e3);

    let u4 = (p.w2 - p.w1 * p.w2 + p.a2 * p.w1) / p.w2;
    let v4 = (p.w2 - p.a2) * u4 / p.a2;
    let e4 = StatePoint::new(u4, v4, 0.0);
    out.push(if p.w2 <= p.a2 {
        Equilibrium::absent(Label::E4, e4, "requires w2 > a2")
    } else if p.w2 <= p.w1 * (p.w2 - p.a2) {
        Equilibrium::absent(Label::E4, e4, "requires w2 > w1·(w2 − a2)")
    } else {
        Equilibrium::present(Label::E4, e4)
    });

    out.push(Equilibrium::present(Label::E5, StatePoint::new(1.0, 0.0, k)));

    let e6 = StatePoint::new(1.0, 0.0, p.m);
    out.push(if p.m > 0.0 {
        Equilibrium::present(Label::E6, e6)
    } else {
        Equilibrium::absent(Label::E6, e6, "m = 0: coincides with E1")
    });
    out
}

/// Coefficients of the cubic whose roots are the prey level of `E7`.
pub fn allee_coexistence_cubic(p: &Params) -> CubicCoefficients {
    let (w1, w2, w3, a2, m) = (p.w1, p.w2, p.w3, p.a2, p.m);
    CubicCoefficients::new(
        w2,
        -(a2 * w1 + w2 * (-w1 + (2.0 + m))),
        a2 * w1 - w1 * w2 + w2 + m * w1 * w3 - m * (-a2 * w1 + 2.0 * w2 * (w1 - 1.0)),
        m * (w1 - 1.0) * (w2 + w1 * (w3 - (w2 - a2))),
    )
}

/// Coefficients of the cubic whose roots are the prey level of `E8`,
/// written as `α1·u³ − α2·u² − α3·u − α4`.
pub fn interior_cubic(p: &Params) -> CubicCoefficients {
    let (w1, w2, w3, w4, a2, c, d) = (p.w1, p.w2, p.w3, p.w4, p.a2, p.c, p.alt_food);
    let alpha1 = w2 * (w4 + c);
    let alpha2 = w4 * (a2 * w1 - w1 * w2 + 2.0 * w2) + c * (w2 * (2.0 + d) + w1 * (w3 + a2 - w2));
    let alpha3 = -w2 * (w4 + c)
        - c * d * w1 * (w3 + (a2 - 2.0 * w2))
        - (w1 * (a2 - w2) * w4 + c * (2.0 * d * w2 + w1 * (w3 + a2 - w2)));
    let alpha4 = -c * d * (w1 - 1.0) * (w2 + w1 * (w3 + a2 - w2));
    CubicCoefficients::new(alpha1, -alpha2, -alpha3, -alpha4)
}

/// Middle-predator level on the prey nullcline `1 − u − w1 v/(u+v) = 0`.
pub fn predator_on_prey_nullcline(u: f64, w1: f64) -> f64 {
    (1.0 - u) * u / (w1 + u - 1.0)
}

/// Roots of `cubic` strictly inside `(1 − w1, 1)`, ascending.
fn window_roots(cubic: &CubicCoefficients, w1: f64) -> Result<Vec<f64>> {
    let lo = 1.0 - w1;
    Ok(cubic_real_roots(cubic)?
        .into_iter()
        .map(|r| r.value)
        .filter(|&u| u > lo && u < 1.0)
        .collect())
}

/// `E7`: coexistence with the top predator at the Allee threshold.
pub fn coexistence_with_allee(p: &Params) -> Equilibrium {
    let placeholder = StatePoint::new(0.0, 0.0, p.m);
    if p.m <= 0.0 {
        return Equilibrium::absent(Label::E7, placeholder, "requires m > 0");
    }
    if p.w1 >= 1.0 {
        return Equilibrium::absent(Label::E7, placeholder, "requires w1 < 1");
    }
    let roots = match window_roots(&allee_coexistence_cubic(p), p.w1) {
        Ok(r) => r,
        Err(e) => return Equilibrium::absent(Label::E7, placeholder, e.to_string()),
    };
    let Some(&u) = roots.first() else {
        return Equilibrium::absent(Label::E7, placeholder, "no root in (1 − w1, 1)");
    };
    let point = StatePoint::new(u, predator_on_prey_nullcline(u, p.w1), p.m);
    let mut eq = Equilibrium::present(Label::E7, point);
    if roots.len() > 1 {
        eq.note = format!("{} admissible roots {:?}; using the smallest", roots.len(), roots);
    }
    certify(eq, p)
}

/// Every admissible `E8` candidate, ascending in `u*`.
pub fn interior_candidates(p: &Params) -> Vec<Equilibrium> {
    let placeholder = StatePoint::default();
    if p.w1 >= 1.0 {
        return vec![Equilibrium::absent(Label::E8, placeholder, "requires w1 < 1")];
    }
    let roots = match window_roots(&interior_cubic(p), p.w1) {
        Ok(r) => r,
        Err(e) => return vec![Equilibrium::absent(Label::E8, placeholder, e.to_string())],
    };
    if roots.is_empty() {
        return vec![Equilibrium::absent(Label::E8, placeholder, "no root in (1 − w1, 1)")];
    }
    let n = roots.len();
    roots
        .into_iter()
        .enumerate()
        .map(|(i, u)| {
            let v = predator_on_prey_nullcline(u, p.w1);
            let r = p.c * (v + p.alt_food) / p.w4;
            let point = StatePoint::new(u, v, r);
            let mut eq = if v > 0.0 && r > 0.0 {
                Equilibrium::present(Label::E8, point)
            } else {
                Equilibrium::absent(Label::E8, point, "v* or r* not positive")
            };
            if n > 1 {
                eq.note = format!("candidate {} of {n}", i + 1);
            }
            certify(eq, p)
        })
        .collect()
}

/// The `E8` used downstream: the first candidate that is stable for the
/// kinetics alone, otherwise the first admissible one.
pub fn interior_equilibrium(p: &Params) -> Equilibrium {
    let candidates = interior_candidates(p);
    let n_present = candidates.iter().filter(|e| e.exists).count();
    let stable = candidates
        .iter()
        .position(|e| e.exists && jacobian(e.point, p).is_ok_and(|j| j.is_hurwitz_stable()));
    let chosen = stable.or_else(|| candidates.iter().position(|e| e.exists)).unwrap_or(0);
    let mut eq = candidates[chosen].clone();
    if n_present > 1 {
        let others: Vec<String> = candidates
            .iter()
            .enumerate()
            .filter(|(i, e)| *i != chosen && e.exists)
            .map(|(_, e)| format!("u*={:.6}", e.point.u))
            .collect();
        let why = if stable.is_some() { "kinetically stable" } else { "first admissible" };
        eq.note = format!("{n_present} admissible roots; using {why} one, others: {}", others.join(", "));
    }
    eq
}

/// `E0`–`E8` in label order, `E8` as chosen by [`interior_equilibrium`].
pub fn all_equilibria(p: &Params) -> Vec<Equilibrium> {
    let mut out = boundary_equilibria(p);
    out.push(coexistence_with_allee(p));
    out.push(interior_equilibrium(p));
    out
}

/// Flags a root-derived state whose kinetic residual is not small.
fn certify(mut eq: Equilibrium, p: &Params) -> Equilibrium {
    if eq.exists {
        let res = eq.residual(p);
        if !(res < RESIDUAL_TOL) {
            eq.exists = false;
            eq.note = format!("kinetic residual {res:.3e} exceeds {RESIDUAL_TOL:e}");
        }
    }
    eq
}

/// Linearization of the kinetics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian3(pub Matrix3<f64>);

impl Jacobian3 {
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Sum of the principal 2×2 minors.
    pub fn minor_sum(&self) -> f64 {
        let j = &self.0;
        j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)] + j[(0, 0)] * j[(2, 2)]
            - j[(0, 2)] * j[(2, 0)]
            + j[(1, 1)] * j[(2, 2)]
            - j[(1, 2)] * j[(2, 1)]
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Routh–Hurwitz stability of `λ³ − tr λ² + M λ − det`.
    pub fn is_hurwitz_stable(&self) -> bool {
        let a2 = -self.trace();
        let a1 = self.minor_sum();
        let a0 = -self.determinant();
        a2 > 0.0 && a1 > 0.0 && a0 > 0.0 && a2 * a1 - a0 > 0.0
    }
}

/// `num/den` with `0/0` read as the continuous extension `0`.
fn quotient(num: f64, den: f64, what: &str, s: StatePoint) -> Result<f64> {
    if den != 0.0 {
        Ok(num / den)
    } else if num == 0.0 {
        Ok(0.0)
    } else {
        Err(Error::Domain(format!("jacobian: {what} vanishes at {s:?}")))
    }
}

/// Jacobian in the equilibrium-reduced form: `J22` and `J33` use the
/// steady-state relations of `E8`, so the matrix equals the true
/// derivative of the kinetics only at interior steady states.
pub fn jacobian(s: StatePoint, p: &Params) -> Result<Jacobian3> {
    let StatePoint { u, v, r } = s;
    let uv2 = (u + v) * (u + v);
    let vr2 = (v + r) * (v + r);
    let vd = v + p.alt_food;

    let j11 = u * (-1.0 + p.w1 * quotient(v, uv2, "u + v", s)?);
    let j12 = -p.w1 * quotient(u * u, uv2, "u + v", s)?;
    let j21 = p.w2 * quotient(v * v, uv2, "u + v", s)?;
    let j22 = v * (-p.w2 * quotient(u, uv2, "u + v", s)? + p.w3 * quotient(r, vr2, "v + r", s)?);
    let j23 = -p.w3 * quotient(v * v, vr2, "v + r", s)?;
    let j32 = r * r * (r - p.m) * p.w4 / (vd * vd);
    let j33 = -r * (r - p.m) * p.w4 / vd;

    #[rustfmt::skip]
    let m = Matrix3::new(
        j11, j12, 0.0,
        j21, j22, j23,
        0.0, j32, j33,
    );
    Ok(Jacobian3(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reaction;

    fn spotted() -> Params {
        Params::preset("spotted", 0.01).unwrap()
    }

    #[test]
    fn prey_only_state_always_exists() {
        for m in [0.0, 0.01, 0.5] {
            let eqs = boundary_equilibria(&spotted().with_m(m));
            let e1 = eqs.iter().find(|e| e.label == Label::E1).unwrap();
            assert!(e1.exists);
            assert_eq!(e1.point, StatePoint::new(1.0, 0.0, 0.0));
        }
    }

    #[test]
    fn predator_only_capacity() {
        let eqs = boundary_equilibria(&spotted());
        let e3 = eqs.iter().find(|e| e.label == Label::E3).unwrap();
        assert!((e3.point.r - 0.1 * 0.1 / 0.37).abs() < 1e-15);
        assert!((e3.point.r - 0.027_027_027_027_027).abs() < 1e-14);
    }

    #[test]
    fn top_free_state_degenerates_when_w2_equals_a2() {
        let p = Params { w2: 0.014, ..spotted() };
        let e4 = boundary_equilibria(&p).into_iter().find(|e| e.label == Label::E4).unwrap();
        assert!(!e4.exists);
        assert!(e4.note.contains("w2 > a2"));
    }

    #[test]
    fn zero_threshold_removes_allee_states() {
        let p = spotted().with_m(0.0);
        let eqs = boundary_equilibria(&p);
        for label in [Label::E2, Label::E6] {
            assert!(!eqs.iter().find(|e| e.label == label).unwrap().exists);
        }
        assert!(!coexistence_with_allee(&p).exists);
    }

    #[test]
    fn existing_states_have_small_residual() {
        for m in [0.0, 0.01, 0.1, 0.3] {
            let p = spotted().with_m(m);
            for eq in all_equilibria(&p).iter().chain(interior_candidates(&p).iter()) {
                if eq.exists {
                    assert!(eq.residual(&p) < RESIDUAL_TOL, "{eq:?} at m={m}");
                    assert!(eq.point.is_nonnegative());
                }
            }
        }
    }

    #[test]
    fn interior_state_in_window_and_on_nullclines() {
        let p = spotted();
        let e8 = interior_equilibrium(&p);
        assert!(e8.exists, "{e8:?}");
        let StatePoint { u, v, r } = e8.point;
        assert!(u > 1.0 - p.w1 && u < 1.0);
        assert!((1.0 - u - p.w1 * v / (u + v)).abs() < 1e-10);
        assert!((-p.a2 + p.w2 * u / (u + v) - p.w3 * r / (r + v)).abs() < 1e-10);
        assert!((p.c - p.w4 * r / (v + p.alt_food)).abs() < 1e-12);
    }

    #[test]
    fn interior_state_requires_w1_below_one() {
        let p = Params { w1: 1.2, ..spotted() };
        let e8 = interior_equilibrium(&p);
        assert!(!e8.exists);
        assert!(e8.note.contains("w1 < 1"));
    }

    #[test]
    fn two_candidates_for_the_spotted_set() {
        let cands = interior_candidates(&spotted());
        assert_eq!(cands.iter().filter(|e| e.exists).count(), 2);
        let chosen = interior_equilibrium(&spotted());
        assert!(jacobian(chosen.point, &spotted()).unwrap().is_hurwitz_stable());
        assert!(chosen.note.contains("2 admissible roots"));
    }

    /// Sign-change scan of the allee-coexistence cubic over the window, as an
    /// independent check on the closed-form roots.
    fn scan_roots(c: &CubicCoefficients, lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let h = (hi - lo) / n as f64;
        let mut out = Vec::new();
        let mut x0 = lo;
        let mut f0 = c.eval(x0);
        for i in 1..=n {
            let x1 = lo + h * i as f64;
            let f1 = c.eval(x1);
            if f0 == 0.0 || f0 * f1 < 0.0 {
                let (mut a, mut b) = (x0, x1);
                for _ in 0..100 {
                    let mid = 0.5 * (a + b);
                    if c.eval(a) * c.eval(mid) <= 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                out.push(0.5 * (a + b));
            }
            x0 = x1;
            f0 = f1;
        }
        out
    }

    #[test]
    fn allee_coexistence_matches_scan() {
        let p = spotted();
        let cubic = allee_coexistence_cubic(&p);
        let scanned: Vec<f64> = scan_roots(&cubic, (1.0 - p.w1).max(0.0), 1.0, 1_000_000)
            .into_iter()
            .filter(|&u| u > 1.0 - p.w1 && u < 1.0)
            .collect();
        let e7 = coexistence_with_allee(&p);
        match scanned.first() {
            Some(&u) => {
                assert!(e7.exists, "{e7:?}");
                assert!((e7.point.u - u).abs() < 1e-9);
                assert!(e7.residual(&p) < RESIDUAL_TOL);
            }
            None => assert!(!e7.exists),
        }
    }

    #[test]
    fn structural_zeros() {
        let p = spotted();
        let j = jacobian(interior_equilibrium(&p).point, &p).unwrap();
        assert_eq!(j.entry(0, 2), 0.0);
        assert_eq!(j.entry(2, 0), 0.0);
        assert!(j.entry(2, 2) < 0.0);
    }

    #[test]
    fn jacobian_matches_finite_differences_at_interior_state() {
        let p = spotted();
        let s = interior_equilibrium(&p).point;
        let j = jacobian(s, &p).unwrap();
        let x = s.as_array();
        for col in 0..3 {
            let h = 1e-6 * x[col].abs().max(1.0);
            let mut plus = x;
            let mut minus = x;
            plus[col] += h;
            minus[col] -= h;
            let fp = reaction(plus.into(), &p);
            let fm = reaction(minus.into(), &p);
            for row in 0..3 {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                let an = j.entry(row, col);
                let scale = an.abs().max(1e-3);
                assert!((fd - an).abs() / scale < 1e-5, "J[{row}][{col}] fd={fd} analytic={an}");
            }
        }
    }

    #[test]
    fn jacobian_rejects_cancelling_negative_state() {
        let p = spotted();
        assert!(jacobian(StatePoint::new(0.5, -0.5, 0.1), &p).is_err());
        assert!(jacobian(StatePoint::new(1.0, 0.0, 0.0), &p).is_ok());
        assert!(jacobian(StatePoint::new(0.0, 0.0, 0.0), &p).is_ok());
    }
}
