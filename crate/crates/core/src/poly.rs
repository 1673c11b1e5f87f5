//! Real and complex roots of cubic polynomials.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Coefficients of `c3·x³ + c2·x² + c1·x + c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoefficients {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CubicCoefficients {
    pub const fn new(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        Self { c3, c2, c1, c0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (3.0 * self.c3 * x + 2.0 * self.c2) * x + self.c1
    }

    fn scale(&self) -> f64 {
        [self.c3, self.c2, self.c1, self.c0]
            .iter()
            .fold(1.0_f64, |acc, c| acc.max(c.abs()))
    }

    /// Sum of the absolute terms at `x`; the rounding floor for `eval(x)`.
    fn magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        ((self.c3.abs() * ax + self.c2.abs()) * ax + self.c1.abs()) * ax + self.c0.abs()
    }

    fn check(&self) -> Result<()> {
        if ![self.c3, self.c2, self.c1, self.c0].iter().all(|c| c.is_finite()) {
            return Err(Error::Domain(format!("non-finite cubic coefficients {self:?}")));
        }
        if self.c3 == 0.0 {
            return Err(Error::Domain("leading cubic coefficient is zero".into()));
        }
        Ok(())
    }
}

/// A real root with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: u8,
}

/// Root separation below which two computed roots are reported as one
/// repeated root. Rounding spreads a triple root over roughly `ε^{1/3}`.
const MERGE_TOL: f64 = 1e-5;

/// All three complex roots, each real root Newton-polished.
pub fn cubic_roots(c: &CubicCoefficients) -> Result<[Complex<f64>; 3]> {
    c.check()?;
    let a = c.c2 / c.c3;
    let b = c.c1 / c.c3;
    let d = c.c0 / c.c3;

    let first = polish(c, depressed_real_root(a, b, d));
    // Deflate x³ + a x² + b x + d by (x − first).
    let q1 = a + first;
    let q0 = if first.abs() > 1.0 && d != 0.0 { -d / first } else { b + first * q1 };
    let disc = q1 * q1 - 4.0 * q0;
    let tol = 64.0 * f64::EPSILON * q1.abs().max(q0.abs().sqrt()).max(1.0).powi(2);
    let (z1, z2) = if disc >= -tol {
        let sq = disc.max(0.0).sqrt();
        let big = -0.5 * (q1 + q1.signum() * sq);
        let (x1, x2) = if big == 0.0 { (0.0, 0.0) } else { (big, q0 / big) };
        (
            Complex::new(polish(c, x1), 0.0),
            Complex::new(polish(c, x2), 0.0),
        )
    } else {
        let re = -0.5 * q1;
        let im = 0.5 * (-disc).sqrt();
        (Complex::new(re, im), Complex::new(re, -im))
    };
    Ok([Complex::new(first, 0.0), z1, z2])
}

/// All real roots in ascending order, with multiplicities.
pub fn cubic_real_roots(c: &CubicCoefficients) -> Result<Vec<RealRoot>> {
    let roots = cubic_roots(c)?;
    let mut reals: Vec<f64> = roots
        .iter()
        .filter(|z| z.im.abs() <= MERGE_TOL * z.re.abs().max(1.0))
        .map(|z| z.re)
        .collect();
    reals.sort_by(f64::total_cmp);

    let mut out: Vec<(f64, u8)> = Vec::with_capacity(3);
    for x in reals {
        match out.last_mut() {
            Some((prev, mult)) if (x - *prev).abs() <= MERGE_TOL * prev.abs().max(1.0) => {
                // Weighted mean keeps a clustered root centred.
                *prev = (*prev * f64::from(*mult) + x) / f64::from(*mult + 1);
                *mult += 1;
            }
            _ => out.push((x, 1)),
        }
    }
    Ok(out
        .into_iter()
        .map(|(x, multiplicity)| RealRoot {
            value: if multiplicity == 1 { polish(c, x) } else { x },
            multiplicity,
        })
        .collect())
}

/// One real root of the monic cubic `x³ + a x² + b x + d`.
fn depressed_real_root(a: f64, b: f64, d: f64) -> f64 {
    let shift = a / 3.0;
    let p = b - a * shift;
    let q = 2.0 * shift * shift * shift - b * shift + d;
    if p == 0.0 {
        return -q.cbrt() - shift;
    }
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let t = if disc > 0.0 {
        let big = -(half_q.abs() + disc.sqrt()).cbrt() * half_q.signum();
        let big = if half_q == 0.0 { (disc.sqrt()).cbrt() } else { big };
        big - third_p / big
    } else {
        // Three real roots; take the one of largest magnitude.
        let rho = (-third_p).sqrt();
        let cos_arg = (-half_q / (rho * rho * rho)).clamp(-1.0, 1.0);
        let phi = cos_arg.acos();
        let candidates = [0.0, 1.0, 2.0].map(|k| 2.0 * rho * ((phi - 2.0 * PI * k) / 3.0).cos());
        candidates
            .into_iter()
            .max_by(|x, y| (x - shift).abs().total_cmp(&(y - shift).abs()))
            .unwrap_or(0.0)
    };
    t - shift
}

/// Newton refinement that never makes the residual worse.
fn polish(c: &CubicCoefficients, mut x: f64) -> f64 {
    let mut best = c.eval(x).abs();
    for _ in 0..60 {
        if best <= 4.0 * f64::EPSILON * c.magnitude(x) {
            break;
        }
        let dp = c.derivative(x);
        if dp == 0.0 || !dp.is_finite() {
            break;
        }
        let next = x - c.eval(x) / dp;
        let res = c.eval(next).abs();
        if !(res < best) {
            break;
        }
        x = next;
        best = res;
    }
    x
}

/// Residual bound a polished simple root `x` satisfies: `1e-13` times the
/// larger of the coefficient size and the size of the terms at `x`.
pub fn residual_bound(c: &CubicCoefficients, x: f64) -> f64 {
    1e-13 * c.scale().max(c.magnitude(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn values(roots: &[RealRoot]) -> Vec<(f64, u8)> {
        roots.iter().map(|r| (r.value, r.multiplicity)).collect()
    }

    #[test]
    fn triple_zero() {
        let roots = cubic_real_roots(&CubicCoefficients::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(values(&roots), vec![(0.0, 3)]);
    }

    #[test]
    fn factored_cubic() {
        let c = CubicCoefficients::new(1.0, -6.0, 11.0, -6.0);
        let roots = cubic_real_roots(&c).unwrap();
        assert_eq!(roots.len(), 3);
        for (root, expected) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((root.value - expected).abs() < 1e-14, "{root:?}");
            assert_eq!(root.multiplicity, 1);
            assert!(c.eval(root.value).abs() < residual_bound(&c, root.value));
        }
    }

    #[test]
    fn double_root_is_merged() {
        // (x − 1)²(x + 2) = x³ − 3x + 2
        let roots = cubic_real_roots(&CubicCoefficients::new(1.0, 0.0, -3.0, 2.0)).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].value + 2.0).abs() < 1e-12);
        assert_eq!(roots[1].multiplicity, 2);
        assert!((roots[1].value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn single_real_root_with_complex_pair() {
        // (x − 2)(x² + 1)
        let c = CubicCoefficients::new(1.0, -2.0, 1.0, -2.0);
        let roots = cubic_real_roots(&c).unwrap();
        assert_eq!(values(&roots), vec![(2.0, 1)]);
        let all = cubic_roots(&c).unwrap();
        let mut ims: Vec<f64> = all.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_leading_coefficient_rejected() {
        assert!(cubic_real_roots(&CubicCoefficients::new(0.0, 1.0, 1.0, 1.0)).is_err());
    }

    /// Real eigenvalues of the companion matrix, used as an independent
    /// reference for the closed-form solver.
    fn companion_real_eigs(c: &CubicCoefficients) -> Vec<f64> {
        let m = Matrix3::new(
            -c.c2 / c.c3, -c.c1 / c.c3, -c.c0 / c.c3,
            1.0, 0.0, 0.0,
            0.0, 1.0, 0.0,
        );
        let mut out: Vec<f64> = m
            .complex_eigenvalues()
            .iter()
            .filter(|z| z.im.abs() < 1e-9)
            .map(|z| z.re)
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn agrees_with_companion_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        for _ in 0..1000 {
            let c = CubicCoefficients::new(
                rng.random_range(0.1..5.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 },
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
            );
            let ours = cubic_real_roots(&c).unwrap();
            let reference = companion_real_eigs(&c);
            let expanded: Vec<f64> = ours
                .iter()
                .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity as usize))
                .collect();
            assert_eq!(expanded.len(), reference.len(), "{c:?}: {ours:?} vs {reference:?}");
            for (x, y) in expanded.iter().zip(&reference) {
                assert!((x - y).abs() < 1e-9 * y.abs().max(1.0), "{c:?}: {x} vs {y}");
            }
            for r in &ours {
                assert!(c.eval(r.value).abs() < residual_bound(&c, r.value), "{c:?} {r:?}");
            }
            checked += 1;
        }
        assert_eq!(checked, 1000);
    }

    #[test]
    fn agrees_with_companion_on_constructed_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let mut r = [
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            ];
            r.sort_by(f64::total_cmp);
            if (r[1] - r[0]).min(r[2] - r[1]) < 1e-3 {
                continue;
            }
            let lead = rng.random_range(0.5..2.0);
            let c = CubicCoefficients::new(
                lead,
                -lead * (r[0] + r[1] + r[2]),
                lead * (r[0] * r[1] + r[0] * r[2] + r[1] * r[2]),
                -lead * r[0] * r[1] * r[2],
            );
            let ours = cubic_real_roots(&c).unwrap();
            let reference = companion_real_eigs(&c);
            assert_eq!(ours.len(), 3);
            for (x, y) in ours.iter().zip(&reference) {
                assert!((x.value - y).abs() < 1e-9, "{c:?}");
            }
        }
    }
}
