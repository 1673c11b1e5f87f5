//! Chebyshev collocation on `x ∈ [0, π]` with zero-flux ends.
//!
//! Nodes are the Gauss–Lobatto points `ξ_j = cos(πj/(N−1))` mapped by
//! `x = (1 − ξ)π/2`, so `x_0 = 0` and `x_{N−1} = π`. The boundary values of
//! each field are slaved to the interior through the two `D1` boundary rows,
//! which keeps the discrete flux at both ends at zero.
//!
//! Two time integrators are registered: `sbdf2` (second-order IMEX backward
//! differentiation, diffusion implicit, kinetics explicit; the default) and
//! `dopri5` (explicit embedded Runge–Kutta 5(4) with step control).

use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{reaction_uvr, Params, StatePoint};
use crate::simulate::{FieldState, Mesh, RunOutput, SimConfig, Simulator};

pub const MIN_POINTS: usize = 8;

/// Fields larger than this are treated as a blow-up.
const BLOWUP: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct Grid1D {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    /// Clenshaw–Curtis quadrature weights on `[0, π]`.
    pub weights: Vec<f64>,
}

impl Grid1D {
    pub fn length(&self) -> f64 {
        PI
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        (&self.d1 * DVector::from_column_slice(f)).as_slice().to_vec()
    }

    pub fn second_derivative(&self, f: &[f64]) -> Vec<f64> {
        (&self.d2 * DVector::from_column_slice(f)).as_slice().to_vec()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, x)| w * x).sum()
    }
}

pub fn build_grid(n: usize) -> Result<Grid1D> {
    if n < MIN_POINTS {
        return Err(Error::Config(format!("collocation needs N ≥ {MIN_POINTS}, got {n}")));
    }
    let last = n - 1;
    let xi: Vec<f64> = (0..n).map(|j| (PI * j as f64 / last as f64).cos()).collect();
    let weight = |i: usize| {
        let c = if i == 0 || i == last { 2.0 } else { 1.0 };
        if i % 2 == 0 { c } else { -c }
    };
    let mut d = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let entry = weight(i) / weight(j) / (xi[i] - xi[j]);
                d[(i, j)] = entry;
                row_sum += entry;
            }
        }
        d[(i, i)] = -row_sum;
    }
    // d/dx = (dξ/dx) d/dξ with dξ/dx = −2/π.
    let d1 = d * (-2.0 / PI);
    let d2 = &d1 * &d1;
    let nodes = xi.iter().map(|&s| (1.0 - s) * PI / 2.0).collect();
    let weights = clenshaw_curtis(last).into_iter().map(|w| w * PI / 2.0).collect();
    Ok(Grid1D { n, nodes, d1, d2, weights })
}

/// Clenshaw–Curtis weights on `[−1, 1]` for the nodes `cos(πj/m)`.
fn clenshaw_curtis(m: usize) -> Vec<f64> {
    let mf = m as f64;
    let mut w = vec![0.0; m + 1];
    let theta = |j: usize| PI * j as f64 / mf;
    if m % 2 == 0 {
        w[0] = 1.0 / (mf * mf - 1.0);
        w[m] = w[0];
    } else {
        w[0] = 1.0 / (mf * mf);
        w[m] = w[0];
    }
    for (j, wj) in w.iter_mut().enumerate().take(m).skip(1) {
        let mut v = 1.0;
        for k in 1..=((m - 1) / 2) {
            let kf = k as f64;
            v -= 2.0 * (2.0 * kf * theta(j)).cos() / (4.0 * kf * kf - 1.0);
        }
        if m % 2 == 0 {
            v -= (mf * theta(j)).cos() / (mf * mf - 1.0);
        }
        *wj = 2.0 * v / mf;
    }
    w
}

/// `eq + ε_i cos²(n x)` on every node.
pub fn init_perturbation(eq: StatePoint, eps: [f64; 3], n: u32, grid: &Arc<Grid1D>) -> FieldState {
    let shape: Vec<f64> = grid.nodes.iter().map(|&x| (n as f64 * x).cos().powi(2)).collect();
    let field = |base: f64, e: f64| shape.iter().map(|s| base + e * s).collect::<Vec<f64>>();
    FieldState {
        t: 0.0,
        mesh: Mesh::Line(grid.clone()),
        u: field(eq.u, eps[0]),
        v: field(eq.v, eps[1]),
        r: field(eq.r, eps[2]),
    }
}

/// Solves the two boundary rows of `D1 f = 0` for `f_0` and `f_{N−1}`.
#[derive(Debug, Clone)]
struct NeumannClosure {
    inv: [[f64; 2]; 2],
}

impl NeumannClosure {
    fn new(g: &Grid1D) -> Self {
        let l = g.n - 1;
        let (a, b, c, d) = (g.d1[(0, 0)], g.d1[(0, l)], g.d1[(l, 0)], g.d1[(l, l)]);
        let det = a * d - b * c;
        Self { inv: [[d / det, -b / det], [-c / det, a / det]] }
    }

    fn apply(&self, g: &Grid1D, f: &mut [f64]) {
        let l = g.n - 1;
        let (mut s0, mut sl) = (0.0, 0.0);
        for (j, x) in f.iter().enumerate().take(l).skip(1) {
            s0 += g.d1[(0, j)] * x;
            sl += g.d1[(l, j)] * x;
        }
        f[0] = -(self.inv[0][0] * s0 + self.inv[0][1] * sl);
        f[l] = -(self.inv[1][0] * s0 + self.inv[1][1] * sl);
    }
}

/// Resets the end values of every field so the discrete flux vanishes.
pub fn enforce_neumann(state: &mut FieldState, grid: &Grid1D) {
    let closure = NeumannClosure::new(grid);
    for f in state.fields_mut() {
        closure.apply(grid, f);
    }
}

/// The method-of-lines system `ẏ = d·D2 y + f(y)` for the three fields.
pub struct Problem1D {
    pub grid: Arc<Grid1D>,
    pub params: Params,
    pub reaction: bool,
    closure: NeumannClosure,
}

impl Problem1D {
    pub fn new(grid: Arc<Grid1D>, params: Params, reaction: bool) -> Self {
        let closure = NeumannClosure::new(&grid);
        Self { grid, params, reaction, closure }
    }

    fn n(&self) -> usize {
        self.grid.n
    }

    /// Kinetic part only, fields stacked as `[u; v; r]`.
    fn kinetics(&self, y: &[f64], out: &mut [f64]) {
        let n = self.n();
        if !self.reaction {
            out.fill(0.0);
            return;
        }
        for i in 0..n {
            let f = reaction_uvr(y[i], y[n + i], y[2 * n + i], &self.params);
            out[i] = f[0];
            out[n + i] = f[1];
            out[2 * n + i] = f[2];
        }
    }

    fn close(&self, y: &mut [f64]) {
        let n = self.n();
        for k in 0..3 {
            self.closure.apply(&self.grid, &mut y[k * n..(k + 1) * n]);
        }
    }

    /// Full right-hand side on the interior with boundary values slaved.
    fn rhs(&self, y: &[f64], out: &mut [f64]) {
        let n = self.n();
        let mut yc = y.to_vec();
        self.close(&mut yc);
        self.kinetics(&yc, out);
        let d = self.params.diffusivities();
        for k in 0..3 {
            let lap = &self.grid.d2 * DVector::from_column_slice(&yc[k * n..(k + 1) * n]);
            for i in 0..n {
                out[k * n + i] += d[k] * lap[i];
            }
            out[k * n] = 0.0;
            out[k * n + n - 1] = 0.0;
        }
    }
}

/// Integration controls shared by the registered integrators.
#[derive(Debug, Clone, Copy)]
pub struct StepOptions {
    pub dt: f64,
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: u64,
}

/// A time integrator in progress.
pub trait Stepper {
    fn t(&self) -> f64;
    fn state(&self) -> &[f64];
    /// Advances exactly to `t_target`.
    fn advance_to(&mut self, t_target: f64) -> Result<()>;
    fn steps(&self) -> u64;
    /// Smallest value seen at any accepted step.
    fn min_seen(&self) -> f64;
}

pub trait TimeIntegrator: Send + Sync {
    fn name(&self) -> &'static str;
    fn start<'a>(&self, problem: &'a Problem1D, y0: Vec<f64>, t0: f64, opts: StepOptions)
        -> Result<Box<dyn Stepper + 'a>>;
}

fn check_state(y: &[f64], t: f64) -> Result<f64> {
    let mut min = f64::INFINITY;
    for (i, x) in y.iter().enumerate() {
        if !x.is_finite() || x.abs() > BLOWUP {
            return Err(Error::Divergence { t, detail: format!("value {x} at index {i}") });
        }
        min = min.min(*x);
    }
    Ok(min)
}

/// Second-order IMEX backward differentiation with a fixed step.
pub struct Sbdf2;

struct Sbdf2Stepper<'a> {
    problem: &'a Problem1D,
    dt: f64,
    t: f64,
    y: Vec<f64>,
    y_prev: Option<Vec<f64>>,
    f_prev: Vec<f64>,
    /// Inverses of the implicit operators, first-order start and second order.
    start_inv: [DMatrix<f64>; 3],
    main_inv: [DMatrix<f64>; 3],
    steps: u64,
    max_steps: u64,
    min_seen: f64,
}

fn implicit_inverse(grid: &Grid1D, lead: f64, dtd: f64) -> Result<DMatrix<f64>> {
    let n = grid.n;
    let mut a = DMatrix::<f64>::identity(n, n) * lead - &grid.d2 * dtd;
    for &row in &[0, n - 1] {
        for j in 0..n {
            a[(row, j)] = grid.d1[(row, j)];
        }
    }
    a.try_inverse()
        .ok_or_else(|| Error::Config("implicit diffusion operator is singular".into()))
}

impl TimeIntegrator for Sbdf2 {
    fn name(&self) -> &'static str {
        "sbdf2"
    }

    fn start<'a>(&self, problem: &'a Problem1D, mut y0: Vec<f64>, t0: f64, opts: StepOptions)
        -> Result<Box<dyn Stepper + 'a>> {
        let d = problem.params.diffusivities();
        let g = &problem.grid;
        let build = |lead: f64| -> Result<[DMatrix<f64>; 3]> {
            Ok([
                implicit_inverse(g, lead, opts.dt * d[0])?,
                implicit_inverse(g, lead, opts.dt * d[1])?,
                implicit_inverse(g, lead, opts.dt * d[2])?,
            ])
        };
        problem.close(&mut y0);
        let min_seen = check_state(&y0, t0)?;
        Ok(Box::new(Sbdf2Stepper {
            problem,
            dt: opts.dt,
            t: t0,
            f_prev: vec![0.0; y0.len()],
            y: y0,
            y_prev: None,
            start_inv: build(1.0)?,
            main_inv: build(1.5)?,
            steps: 0,
            max_steps: opts.max_steps,
            min_seen,
        }))
    }
}

impl Sbdf2Stepper<'_> {
    fn step(&mut self, dt: f64) -> Result<()> {
        let n = self.problem.n();
        let mut f = vec![0.0; 3 * n];
        self.problem.kinetics(&self.y, &mut f);
        let full_step = (dt - self.dt).abs() <= 1e-12 * self.dt;
        let mut next = vec![0.0; 3 * n];
        match (&self.y_prev, full_step) {
            (Some(prev), true) => {
                for k in 0..3 {
                    let mut rhs = DVector::<f64>::zeros(n);
                    for i in 1..n - 1 {
                        let idx = k * n + i;
                        rhs[i] = 2.0 * self.y[idx] - 0.5 * prev[idx]
                            + dt * (2.0 * f[idx] - self.f_prev[idx]);
                    }
                    let sol = &self.main_inv[k] * rhs;
                    next[k * n..(k + 1) * n].copy_from_slice(sol.as_slice());
                }
            }
            _ => {
                // First step, or a shortened final step: implicit–explicit Euler.
                let d = self.problem.params.diffusivities();
                for k in 0..3 {
                    let mut rhs = DVector::<f64>::zeros(n);
                    for i in 1..n - 1 {
                        let idx = k * n + i;
                        rhs[i] = self.y[idx] + dt * f[idx];
                    }
                    let sol = if full_step {
                        &self.start_inv[k] * rhs
                    } else {
                        implicit_inverse(&self.problem.grid, 1.0, dt * d[k])? * rhs
                    };
                    next[k * n..(k + 1) * n].copy_from_slice(sol.as_slice());
                }
            }
        }
        self.t += dt;
        self.min_seen = self.min_seen.min(check_state(&next, self.t)?);
        self.y_prev = Some(std::mem::replace(&mut self.y, next));
        self.f_prev = f;
        self.steps += 1;
        if self.steps > self.max_steps {
            return Err(Error::Divergence { t: self.t, detail: "step budget exhausted".into() });
        }
        Ok(())
    }
}

impl Stepper for Sbdf2Stepper<'_> {
    fn t(&self) -> f64 {
        self.t
    }

    fn state(&self) -> &[f64] {
        &self.y
    }

    fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while t_target - self.t > 1e-9 * self.dt {
            let dt = self.dt.min(t_target - self.t);
            let dt = if (dt - self.dt).abs() <= 1e-9 * self.dt { self.dt } else { dt };
            self.step(dt)?;
        }
        self.t = t_target;
        Ok(())
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn min_seen(&self) -> f64 {
        self.min_seen
    }
}

/// Dormand–Prince 5(4) with standard step-size control.
pub struct Dopri5;

struct Dopri5Stepper<'a> {
    problem: &'a Problem1D,
    t: f64,
    h: f64,
    y: Vec<f64>,
    atol: f64,
    rtol: f64,
    steps: u64,
    max_steps: u64,
    min_seen: f64,
}

const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl TimeIntegrator for Dopri5 {
    fn name(&self) -> &'static str {
        "dopri5"
    }

    fn start<'a>(&self, problem: &'a Problem1D, mut y0: Vec<f64>, t0: f64, opts: StepOptions)
        -> Result<Box<dyn Stepper + 'a>> {
        problem.close(&mut y0);
        let min_seen = check_state(&y0, t0)?;
        Ok(Box::new(Dopri5Stepper {
            problem,
            t: t0,
            h: opts.dt.min(1e-3),
            y: y0,
            atol: opts.atol,
            rtol: opts.rtol,
            steps: 0,
            max_steps: opts.max_steps,
            min_seen,
        }))
    }
}

impl Dopri5Stepper<'_> {
    /// One attempted step; returns the candidate and its scaled error.
    fn attempt(&self, h: f64) -> (Vec<f64>, f64) {
        let len = self.y.len();
        let mut k = vec![vec![0.0; len]; 7];
        let mut stage = vec![0.0; len];
        for s in 0..7 {
            stage.copy_from_slice(&self.y);
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = DP_A[s][j];
                if a != 0.0 {
                    for i in 0..len {
                        stage[i] += h * a * kj[i];
                    }
                }
            }
            self.problem.rhs(&stage, &mut k[s]);
        }
        let mut next = self.y.clone();
        let mut err_sq = 0.0;
        for i in 0..len {
            let mut inc = 0.0;
            let mut err = 0.0;
            for s in 0..7 {
                inc += DP_B[s] * k[s][i];
                err += DP_E[s] * k[s][i];
            }
            next[i] += h * inc;
            let sc = self.atol + self.rtol * self.y[i].abs().max(next[i].abs());
            err_sq += (h * err / sc).powi(2);
        }
        (next, (err_sq / len as f64).sqrt())
    }
}

impl Stepper for Dopri5Stepper<'_> {
    fn t(&self) -> f64 {
        self.t
    }

    fn state(&self) -> &[f64] {
        &self.y
    }

    fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while t_target - self.t > 1e-12 * t_target.abs().max(1.0) {
            let h = self.h.min(t_target - self.t);
            let (mut next, err) = self.attempt(h);
            if !err.is_finite() {
                self.h = h * 0.2;
            } else if err <= 1.0 {
                self.problem.close(&mut next);
                self.t += h;
                self.min_seen = self.min_seen.min(check_state(&next, self.t)?);
                self.y = next;
                self.steps += 1;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // Keep the controller's step when the last one was clipped to the target.
                self.h = (h * factor).max(self.h.min(h * factor * 4.0));
            } else {
                self.h = h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            }
            if self.h < 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::Divergence { t: self.t, detail: "step size underflow".into() });
            }
            if self.steps > self.max_steps {
                return Err(Error::Divergence { t: self.t, detail: "step budget exhausted".into() });
            }
        }
        Ok(())
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn min_seen(&self) -> f64 {
        self.min_seen
    }
}

/// Time integrators keyed by name.
pub struct IntegratorRegistry {
    entries: BTreeMap<&'static str, Box<dyn TimeIntegrator>>,
}

impl IntegratorRegistry {
    pub fn register(&mut self, it: Box<dyn TimeIntegrator>) {
        self.entries.insert(it.name(), it);
    }

    pub fn get(&self, name: &str) -> Result<&dyn TimeIntegrator> {
        self.entries.get(name).map(|b| b.as_ref()).ok_or_else(|| {
            Error::Config(format!("unknown integrator '{name}', expected one of {:?}", self.names()))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for IntegratorRegistry {
    fn default() -> Self {
        let mut reg = Self { entries: BTreeMap::new() };
        reg.register(Box::new(Sbdf2));
        reg.register(Box::new(Dopri5));
        reg
    }
}

fn stack(s: &FieldState) -> Vec<f64> {
    let mut y = Vec::with_capacity(3 * s.u.len());
    for f in s.fields() {
        y.extend_from_slice(f);
    }
    y
}

fn unstack(y: &[f64], t: f64, mesh: &Mesh) -> FieldState {
    let n = y.len() / 3;
    FieldState {
        t,
        mesh: mesh.clone(),
        u: y[..n].to_vec(),
        v: y[n..2 * n].to_vec(),
        r: y[2 * n..].to_vec(),
    }
}

/// Integrates from an explicit initial state.
pub fn run1d_from(p: &Params, cfg: &SimConfig, initial: FieldState) -> Result<RunOutput> {
    p.validate()?;
    cfg.validate()?;
    let Mesh::Line(grid) = initial.mesh.clone() else {
        return Err(Error::GridMismatch("run1d needs a collocation grid".into()));
    };
    let registry = IntegratorRegistry::default();
    let integrator = registry.get(&cfg.integrator)?;
    let problem = Problem1D::new(grid, *p, cfg.reaction);
    let opts = StepOptions { dt: cfg.dt, atol: cfg.atol, rtol: cfg.rtol, max_steps: cfg.max_steps };
    let mesh = initial.mesh.clone();
    let mut stepper = integrator.start(&problem, stack(&initial), initial.t, opts)?;
    let mut snapshots = vec![unstack(stepper.state(), stepper.t(), &mesh)];
    let t0 = initial.t;
    let n_snap = ((cfg.t_end - t0) / cfg.snapshot_every - 1e-9).ceil().max(1.0) as u64;
    for i in 1..=n_snap {
        let target = (t0 + i as f64 * cfg.snapshot_every).min(cfg.t_end);
        stepper.advance_to(target)?;
        snapshots.push(unstack(stepper.state(), target, &mesh));
    }
    Ok(RunOutput {
        simulator: format!("collocation1d/{}", cfg.integrator),
        min_value: stepper.min_seen(),
        steps: stepper.steps(),
        snapshots,
    })
}

/// Integrates from the cos² perturbation of the base state.
pub fn run1d(p: &Params, cfg: &SimConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = Arc::new(build_grid(cfg.n)?);
    let base = cfg.base_state(p)?;
    let initial = init_perturbation(base, cfg.eps, cfg.wavenumber, &grid);
    run1d_from(p, cfg, initial)
}

/// Registry entry for the collocation discretization.
pub struct Collocation1D;

impl Simulator for Collocation1D {
    fn name(&self) -> &'static str {
        "collocation1d"
    }

    fn run(&self, p: &Params, cfg: &SimConfig) -> Result<RunOutput> {
        run1d(p, cfg)
    }
}
