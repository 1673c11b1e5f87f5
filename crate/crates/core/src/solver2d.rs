//! Five-point finite differences on a uniform rectangular mesh, forward Euler
//! in time.
//!
//! Mesh points sit at `x_i = i·dx`, `y_j = j·dy` including the boundary. Zero
//! flux is imposed by reflecting ghost values, `f_{−1} = f_1` and
//! `f_{n} = f_{n−2}`, which makes the operator symmetric with respect to the
//! trapezoid weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{reaction_uvr, Params, StatePoint};
use crate::simulate::{FieldState, InitialKind, Mesh, RunOutput, SimConfig, Simulator};

/// Largest admissible `max(d)·dt·(1/dx² + 1/dy²)`.
pub const CFL_LIMIT: f64 = 0.5;

const BLOWUP: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub dt: f64,
}

/// `max(d)·dt·(1/dx² + 1/dy²)`.
pub fn cfl_number(d_max: f64, dt: f64, dx: f64, dy: f64) -> f64 {
    d_max * dt * (1.0 / (dx * dx) + 1.0 / (dy * dy))
}

impl Grid2D {
    /// Fails when the explicit diffusion step would be unstable for `d_max`.
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, dt: f64, d_max: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::Config(format!("mesh needs at least 3×3 points, got {nx}×{ny}")));
        }
        for (name, x) in [("dx", dx), ("dy", dy), ("dt", dt)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {x}")));
            }
        }
        let cfl = cfl_number(d_max, dt, dx, dy);
        if cfl > CFL_LIMIT {
            let bound = CFL_LIMIT / (d_max * (1.0 / (dx * dx) + 1.0 / (dy * dy)));
            return Err(Error::Config(format!(
                "dt = {dt} violates the explicit stability bound: max(d)·dt·(1/dx² + 1/dy²) = {cfl:.4} > {CFL_LIMIT}; need dt ≤ {bound:.6e}"
            )));
        }
        Ok(Self { nx, ny, dx, dy, dt })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn lx(&self) -> f64 {
        (self.nx - 1) as f64 * self.dx
    }

    pub fn ly(&self) -> f64 {
        (self.ny - 1) as f64 * self.dy
    }

    pub fn area(&self) -> f64 {
        self.lx() * self.ly()
    }

    pub fn same_geometry(&self, other: &Grid2D) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.dx == other.dx && self.dy == other.dy
    }

    /// Trapezoid weight of point `(i, j)`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let edge = |k: usize, n: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        edge(i, self.nx) * edge(j, self.ny) * self.dx * self.dy
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        let mut s = 0.0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                s += self.weight(i, j) * f[self.index(i, j)];
            }
        }
        s
    }

    /// Centred differences with reflected ghosts (zero at the walls).
    pub fn gradient(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (nx, ny) = (self.nx, self.ny);
        let mut gx = vec![0.0; f.len()];
        let mut gy = vec![0.0; f.len()];
        for j in 0..ny {
            for i in 0..nx {
                let k = self.index(i, j);
                if i > 0 && i < nx - 1 {
                    gx[k] = (f[k + 1] - f[k - 1]) / (2.0 * self.dx);
                }
                if j > 0 && j < ny - 1 {
                    gy[k] = (f[k + nx] - f[k - nx]) / (2.0 * self.dy);
                }
            }
        }
        (gx, gy)
    }
}

#[inline]
fn reflect(k: isize, n: usize) -> usize {
    if k < 0 {
        (-k) as usize
    } else if k as usize >= n {
        2 * (n - 1) - k as usize
    } else {
        k as usize
    }
}

fn laplacian_row(f: &[f64], grid: &Grid2D, j: usize, out: &mut [f64]) {
    let (nx, ny) = (grid.nx, grid.ny);
    let (ax, ay) = (1.0 / (grid.dx * grid.dx), 1.0 / (grid.dy * grid.dy));
    let row = &f[j * nx..(j + 1) * nx];
    let below = &f[reflect(j as isize - 1, ny) * nx..][..nx];
    let above = &f[reflect(j as isize + 1, ny) * nx..][..nx];
    for i in 0..nx {
        let left = row[reflect(i as isize - 1, nx)];
        let right = row[reflect(i as isize + 1, nx)];
        out[i] = ax * (left + right - 2.0 * row[i]) + ay * (below[i] + above[i] - 2.0 * row[i]);
    }
}

pub fn laplacian_5pt(f: &[f64], grid: &Grid2D) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    out.par_chunks_mut(grid.nx)
        .enumerate()
        .for_each(|(j, row)| laplacian_row(f, grid, j, row));
    out
}

/// One forward-Euler step of diffusion plus kinetics.
pub fn step2d(state: &FieldState, p: &Params, grid: &Grid2D) -> Result<FieldState> {
    step2d_with(state, p, grid, true)
}

fn step2d_with(state: &FieldState, p: &Params, grid: &Grid2D, reaction: bool) -> Result<FieldState> {
    let nx = grid.nx;
    let d = p.diffusivities();
    let dt = grid.dt;
    let mut next = state.clone();
    next.t = state.t + dt;
    {
        let [nu, nv, nr] = next.fields_mut();
        nu.par_chunks_mut(nx)
            .zip(nv.par_chunks_mut(nx))
            .zip(nr.par_chunks_mut(nx))
            .enumerate()
            .for_each(|(j, ((ru, rv), rr))| {
                let mut lap = [vec![0.0; nx], vec![0.0; nx], vec![0.0; nx]];
                laplacian_row(&state.u, grid, j, &mut lap[0]);
                laplacian_row(&state.v, grid, j, &mut lap[1]);
                laplacian_row(&state.r, grid, j, &mut lap[2]);
                for i in 0..nx {
                    let k = j * nx + i;
                    let (u, v, r) = (state.u[k], state.v[k], state.r[k]);
                    let f = if reaction { reaction_uvr(u, v, r, p) } else { [0.0; 3] };
                    ru[i] = u + dt * (d[0] * lap[0][i] + f[0]);
                    rv[i] = v + dt * (d[1] * lap[1][i] + f[1]);
                    rr[i] = r + dt * (d[2] * lap[2][i] + f[2]);
                }
            });
    }
    for (name, f) in ["u", "v", "r"].iter().zip(next.fields()) {
        if let Some((k, x)) = f.iter().enumerate().find(|(_, x)| !x.is_finite() || x.abs() > BLOWUP) {
            return Err(Error::Divergence {
                t: next.t,
                detail: format!("{name} = {x} at mesh point ({}, {})", k % nx, k / nx),
            });
        }
    }
    Ok(next)
}

/// Base state plus the configured perturbation.
pub fn init2d(base: StatePoint, cfg: &SimConfig, grid: &Arc<Grid2D>) -> FieldState {
    let mut s = FieldState::homogeneous(base, Mesh::Plane(grid.clone()), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.wavenumber as f64;
    for (k, f) in s.fields_mut().into_iter().enumerate() {
        let eps = cfg.eps[k];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let idx = grid.index(i, j);
                f[idx] += match cfg.initial {
                    InitialKind::Random => eps * rng.random_range(-1.0..=1.0),
                    InitialKind::RandomPositive => eps * rng.random_range(0.0..=1.0),
                    InitialKind::Cosine => {
                        let (x, y) = (i as f64 * grid.dx, j as f64 * grid.dy);
                        eps * (n * x).cos().powi(2) * (n * y).cos().powi(2)
                    }
                };
            }
        }
    }
    s
}

/// Integrates from an explicit initial state on `grid`.
pub fn run2d_from(p: &Params, cfg: &SimConfig, grid: &Grid2D, initial: FieldState) -> Result<RunOutput> {
    cfg.validate()?;
    let steps_total = (cfg.t_end / grid.dt).round().max(1.0) as u64;
    let every = (cfg.snapshot_every / grid.dt).round().max(1.0) as u64;
    let mut state = initial;
    let t0 = state.t;
    let mut min_value = state.min_value();
    let mut snapshots = vec![state.clone()];
    for step in 1..=steps_total {
        state = step2d_with(&state, p, grid, cfg.reaction)?;
        state.t = t0 + step as f64 * grid.dt;
        min_value = min_value.min(state.min_value());
        if step % every == 0 || step == steps_total {
            snapshots.push(state.clone());
        }
    }
    Ok(RunOutput { simulator: "fd2d".into(), snapshots, min_value, steps: steps_total })
}

pub fn run2d(p: &Params, cfg: &SimConfig) -> Result<RunOutput> {
    p.validate()?;
    cfg.validate()?;
    let d_max = p.diffusivities().into_iter().fold(0.0, f64::max);
    let grid = Arc::new(Grid2D::new(cfg.nx, cfg.ny, cfg.dx, cfg.dy, cfg.dt, d_max)?);
    let base = cfg.base_state(p)?;
    let initial = init2d(base, cfg, &grid);
    run2d_from(p, cfg, &grid, initial)
}

/// Registry entry for the finite-difference discretization.
pub struct FiniteDifference2D;

impl Simulator for FiniteDifference2D {
    fn name(&self) -> &'static str {
        "fd2d"
    }

    fn run(&self, p: &Params, cfg: &SimConfig) -> Result<RunOutput> {
        run2d(p, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::interior_equilibrium;
    use crate::model::reaction;

    fn grid(nx: usize, ny: usize, h: f64, dt: f64) -> Arc<Grid2D> {
        Arc::new(Grid2D::new(nx, ny, h, h, dt, 1e-3).unwrap())
    }

    fn random_field(g: &Grid2D, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn cfl_rejects_unstable_step() {
        assert!((cfl_number(1e-3, 0.1, 0.1, 0.1) - 0.02).abs() < 1e-15);
        assert!(Grid2D::new(200, 200, 0.1, 0.1, 0.1, 1e-3).is_ok());
        let err = Grid2D::new(50, 50, 0.1, 0.1, 30.0, 1e-3).unwrap_err();
        assert!(err.to_string().contains("need dt ≤ 2.5"), "{err}");
    }

    #[test]
    fn constant_field_has_zero_laplacian() {
        let g = grid(13, 9, 0.1, 0.1);
        assert!(laplacian_5pt(&vec![2.5; g.len()], &g).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn quadratic_interior_laplacian() {
        let g = grid(21, 21, 0.1, 0.1);
        let f: Vec<f64> = (0..g.len()).map(|k| ((k % 21) as f64 * 0.1).powi(2)).collect();
        let lap = laplacian_5pt(&f, &g);
        for j in 1..20 {
            for i in 1..20 {
                assert!((lap[g.index(i, j)] - 2.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn weighted_laplacian_sum_vanishes() {
        let g = grid(17, 11, 0.1, 0.1);
        for seed in 0..5 {
            let f = random_field(&g, seed);
            let lap = laplacian_5pt(&f, &g);
            let total: f64 = lap.iter().map(|x| x.abs()).sum::<f64>() * g.dx * g.dy;
            assert!(g.integrate(&lap).abs() < 1e-12 * total);
        }
    }

    fn diffusion_params() -> Params {
        Params { d1: 1e-3, d2: 1e-3, d3: 1e-3, ..Params::preset("spotted", 0.01).unwrap() }
    }

    #[test]
    fn pure_diffusion_conserves_mean_per_step() {
        let g = grid(20, 20, 0.1, 0.1);
        let p = diffusion_params();
        let mut s = FieldState::homogeneous(StatePoint::new(0.0, 0.0, 0.0), Mesh::Plane(g.clone()), 0.0);
        s.u = random_field(&g, 3).iter().map(|x| 1.0 + x).collect();
        let m0 = g.integrate(&s.u);
        for _ in 0..100 {
            let next = step2d_with(&s, &p, &g, false).unwrap();
            assert!((g.integrate(&next.u) - g.integrate(&s.u)).abs() < 1e-12 * m0);
            s = next;
        }
    }

    #[test]
    fn cosine_mode_decays_at_analytic_rate() {
        let g = grid(41, 41, 0.1, 0.1);
        let p = diffusion_params();
        let (lx, ly) = (g.lx(), g.ly());
        let (kx, ky) = (std::f64::consts::PI / lx, 2.0 * std::f64::consts::PI / ly);
        let mode: Vec<f64> = (0..g.len())
            .map(|k| {
                let (i, j) = (k % g.nx, k / g.nx);
                (kx * i as f64 * g.dx).cos() * (ky * j as f64 * g.dy).cos()
            })
            .collect();
        let mut s = FieldState::homogeneous(StatePoint::new(0.0, 0.0, 0.0), Mesh::Plane(g.clone()), 0.0);
        s.u = mode.clone();
        for _ in 0..1000 {
            s = step2d_with(&s, &p, &g, false).unwrap();
        }
        let amp = g.integrate(&s.u.iter().zip(&mode).map(|(a, b)| a * b).collect::<Vec<_>>())
            / g.integrate(&mode.iter().map(|b| b * b).collect::<Vec<_>>());
        let rate = -amp.ln() / s.t;
        let analytic = p.d1 * (kx * kx + ky * ky);
        assert!((rate - analytic).abs() < 0.01 * analytic, "{rate} vs {analytic}");
    }

    #[test]
    fn homogeneous_equilibrium_is_fixed_point() {
        let p = Params::preset("spotted", 0.01).unwrap();
        let e8 = interior_equilibrium(&p).point;
        let g = grid(10, 10, 0.1, 0.1);
        let mut s = FieldState::homogeneous(e8, Mesh::Plane(g.clone()), 0.0);
        for _ in 0..100 {
            s = step2d(&s, &p, &g).unwrap();
        }
        for (f, target) in s.fields().iter().zip(e8.as_array()) {
            assert!(f.iter().all(|x| (x - target).abs() < 1e-12), "{target}");
        }
    }

    fn rk4(s: StatePoint, p: &Params, dt: f64, steps: usize) -> [f64; 3] {
        let mut y = s.as_array();
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
        y
    }

    #[test]
    fn zero_diffusion_follows_pointwise_kinetics() {
        let p = Params { d1: 0.0, d2: 0.0, d3: 0.0, ..Params::preset("spotted", 0.01).unwrap() };
        let g = Arc::new(Grid2D { nx: 10, ny: 10, dx: 0.1, dy: 0.1, dt: 1e-6 });
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut s = FieldState::homogeneous(StatePoint::new(0.0, 0.0, 0.0), Mesh::Plane(g.clone()), 0.0);
        for f in s.fields_mut() {
            for x in f.iter_mut() {
                *x = rng.random_range(0.05..1.0);
            }
        }
        let start = s.clone();
        for _ in 0..100_000 {
            s = step2d(&s, &p, &g).unwrap();
        }
        for k in 0..g.len() {
            let reference = rk4(StatePoint::new(start.u[k], start.v[k], start.r[k]), &p, 1e-3, 100);
            for (f, r) in s.fields().iter().zip(reference) {
                assert!((f[k] - r).abs() < 1e-6, "point {k}: {} vs {r}", f[k]);
            }
        }
    }

    #[test]
    fn halving_dt_is_first_order_consistent() {
        let p = Params::preset("spotted", 0.01).unwrap();
        let base = SimConfig { nx: 30, ny: 30, t_end: 100.0, snapshot_every: 100.0, seed: 5, ..SimConfig::default() };
        let coarse = run2d(&p, &SimConfig { dt: 0.1, ..base.clone() }).unwrap();
        let fine = run2d(&p, &SimConfig { dt: 0.05, ..base }).unwrap();
        let g = match &coarse.final_state().mesh {
            Mesh::Plane(g) => g.clone(),
            _ => unreachable!(),
        };
        for k in 0..3 {
            let diff: Vec<f64> = coarse.final_state().fields()[k]
                .iter()
                .zip(fine.final_state().fields()[k])
                .map(|(a, b)| (a - b).powi(2))
                .collect();
            let l2 = (g.integrate(&diff) / g.area()).sqrt();
            assert!(l2 < 1e-3, "field {k}: {l2}");
        }
    }

    #[test]
    fn runs_are_deterministic_and_nonnegative() {
        let p = Params::preset("spotted", 0.01).unwrap();
        let cfg = SimConfig { nx: 20, ny: 20, t_end: 20.0, snapshot_every: 10.0, seed: 9, ..SimConfig::default() };
        let a = run2d(&p, &cfg).unwrap();
        let b = run2d(&p, &cfg).unwrap();
        assert_eq!(a.final_state().u, b.final_state().u);
        assert!(!a.negativity_flagged());
        assert_eq!(a.snapshots.len(), 3);
    }
}
