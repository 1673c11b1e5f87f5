//! Commands, keyed by name.
//!
//! A command first resolves the configuration (defaults filled in, every
//! block it uses validated) and only then executes against a fresh run
//! directory. Resolution errors are configuration errors and leave nothing
//! on disk.

use std::collections::BTreeMap;

use foodchain::analysis::norms::spatial_std;
use foodchain::analysis::scenario::ScenarioSetup;
use foodchain::analysis::{
    classify_pattern, decay_experiment, norms, overexploitation_scenario, DecayConfig, FitResult,
};
use foodchain::equilibria::{all_equilibria, interior_candidates, jacobian, Equilibrium};
use foodchain::simulate::{FieldState, Mesh, RunOutput, SimConfig, SimulatorRegistry};
use foodchain::solver1d::{build_grid, IntegratorRegistry};
use foodchain::solver2d::Grid2D;
use foodchain::turing::{dispersion_cubic, growth_rates, turing_verdicts, DiffusionMatrix, TuringVerdict};
use foodchain::{Error, Params};

use crate::config::{RunConfig, SnapshotFiles};
use crate::error::CliError;
use crate::output::{matrix, num, opt, KeyValues, RunDir, Table};

pub type Resolved = Result<RunConfig, String>;

pub trait Command: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    /// Effective configuration with every default made explicit.
    fn resolve(&self, cfg: &RunConfig) -> Resolved;
    fn execute(&self, cfg: &RunConfig, out: &RunDir) -> Result<(), CliError>;
}

pub struct CommandRegistry {
    entries: BTreeMap<&'static str, Box<dyn Command>>,
}

impl CommandRegistry {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn register(&mut self, c: Box<dyn Command>) {
        self.entries.insert(c.name(), c);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Command> {
        self.entries.get(name).map(|c| c.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Command> {
        self.entries.values().map(|c| c.as_ref())
    }
}

impl Default for CommandRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(Equilibria));
        reg.register(Box::new(Turing));
        reg.register(Box::new(TuringTable));
        reg.register(Box::new(Simulate { two_d: false }));
        reg.register(Box::new(Simulate { two_d: true }));
        reg.register(Box::new(Decay));
        reg.register(Box::new(Overexploit));
        reg
    }
}

fn runtime(e: Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn params_of(cfg: &RunConfig) -> Params {
    cfg.resolve_params().expect("resolved configuration")
}

fn bool_word(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn with_params(cfg: &RunConfig) -> Resolved {
    let p = cfg.resolve_params()?;
    let mut eff = cfg.clone();
    eff.set_params(&p);
    Ok(eff)
}

// ---------------------------------------------------------------- equilibria

struct Equilibria;

fn equilibrium_row(t: &mut Table, name: String, e: &Equilibrium, p: &Params) {
    let stable = if e.exists {
        match jacobian(e.point, p) {
            Ok(j) => bool_word(j.is_hurwitz_stable()).to_string(),
            Err(_) => "undefined".to_string(),
        }
    } else {
        "-".to_string()
    };
    t.row(&[
        name,
        num(e.point.u),
        num(e.point.v),
        num(e.point.r),
        bool_word(e.exists).to_string(),
        num(e.residual(p)),
        stable,
        if e.note.is_empty() { "-".to_string() } else { e.note.clone() },
    ]);
}

const EQ_HEADER: [&str; 8] = ["label", "u", "v", "r", "exists", "residual", "kinetically_stable", "note"];

impl Command for Equilibria {
    fn name(&self) -> &'static str {
        "equilibria"
    }

    fn summary(&self) -> &'static str {
        "steady states E0-E8 with existence, residual and kinetic stability"
    }

    fn resolve(&self, cfg: &RunConfig) -> Resolved {
        with_params(cfg)
    }

    fn execute(&self, cfg: &RunConfig, out: &RunDir) -> Result<(), CliError> {
        let p = params_of(cfg);
        let mut t = Table::new(&EQ_HEADER);
        for e in all_equilibria(&p) {
            equilibrium_row(&mut t, e.label.to_string(), &e, &p);
        }
        out.write("equilibria.tsv", &t.finish())?;
        let mut c = Table::new(&EQ_HEADER);
        for (i, e) in interior_candidates(&p).iter().enumerate() {
            equilibrium_row(&mut c, format!("{}#{}", e.label, i + 1), e, &p);
        }
        out.write("interior_candidates.tsv", &c.finish())?;
        Ok(())
    }
}

// -------------------------------------------------------------------- turing

struct Turing;

const DEFAULT_K2_POINTS: usize = 401;

fn default_k2_max(verdicts: &[TuringVerdict], p: &Params) -> f64 {
    let k2t = verdicts
        .iter()
        .flat_map(|v| v.assessments.iter().filter_map(|a| a.k2_t))
        .filter(|k| k.is_finite() && *k > 0.0)
        .fold(0.0, f64::max);
    if k2t > 0.0 {
        2.0 * k2t
    } else {
        // Beyond this every mode is damped by the slowest diffusion.
        let d_min = p.diffusivities().into_iter().fold(f64::INFINITY, f64::min);
        1.0 / d_min
    }
}

fn verdict_lines(kv: &mut KeyValues, prefix: &str, v: &TuringVerdict) {
    let eq = v.equilibrium.map(|e| format!("{} {} {}", num(e[0]), num(e[1]), num(e[2])));
    kv.put(&format!("{prefix}equilibrium"), eq.unwrap_or_else(|| "none".into()))
        .put(&format!("{prefix}stable_without_diffusion"), v.stable_without_diffusion)
        .put(&format!("{prefix}condition_dd_or_cc"), v.condition_dd_or_cc)
        .put(&format!("{prefix}gmin_negative"), v.gmin_negative)
        .put(&format!("{prefix}turing_unstable"), v.turing_unstable)
        .put(&format!("{prefix}k2_t"), opt(v.k2_t))
        .put(
            &format!("{prefix}offending_function"),
            v.offending_function.map(|g| g.to_string()).unwrap_or_else(|| "none".into()),
        )
        .put(&format!("{prefix}marginal"), v.marginal)
        .put(&format!("{prefix}note"), if v.note.is_empty() { "-" } else { &v.note });
}

impl Command for Turing {
    fn name(&self) -> &'static str {
        "turing"
    }

    fn summary(&self) -> &'static str {
        "diffusion-driven instability verdict and dispersion data at the interior state"
    }

    fn resolve(&self, cfg: &RunConfig) -> Resolved {
        let mut eff = with_params(cfg)?;
        let p = params_of(&eff);
        let e = &mut eff.experiment;
        let k2_max = match e.k2_max {
            Some(k) => k,
            None => default_k2_max(&turing_verdicts(&p), &p),
        };
        if !(k2_max.is_finite() && k2_max > 0.0) {
            return Err(format!("experiment.k2_max: must be positive, got {k2_max}"));
        }
        let points = *e.k2_points.get_or_insert(DEFAULT_K2_POINTS);
        if points < 2 {
            return Err(format!("experiment.k2_points: need at least 2, got {points}"));
        }
        e.k2_max = Some(k2_max);
        Ok(eff)
    }

    fn execute(&self, cfg: &RunConfig, out: &RunDir) -> Result<(), CliError> {
        let p = params_of(cfg);
        let verdicts = turing_verdicts(&p);
        let chosen = foodchain::equilibria::interior_equilibrium(&p);

        let mut kv = KeyValues::default();
        let main = foodchain::turing::turing_unstable(&p);
        verdict_lines(&mut kv, "", &main);
        kv.put("patterns", if main.turing_unstable { "may occur" } else { "not predicted" });
        for (i, v) in verdicts.iter().enumerate() {
            verdict_lines(&mut kv, &format!("candidate{}.", i + 1), v);
        }
        out.write("verdict.txt", &kv.finish())?;

        let mut g = Table::new(&[
            "candidate", "function", "HH", "DD", "CC", "BB", "k2_t", "g_min_printed", "g_min_exact", "g_at_k2_t",
            "satisfied",
        ]);
        for (i, v) in verdicts.iter().enumerate() {
            for a in &v.assessments {
                let c = &a.coefficients;
                g.row(&[
                    (i + 1).to_string(),
                    c.which.to_string(),
                    num(c.hh),
                    num(c.dd),
                    num(c.cc),
                    num(c.bb),
                    opt(a.k2_t),
                    opt(a.g_min),
                    opt(a.g_min_exact),
                    opt(a.g_at_k2_t),
                    bool_word(a.satisfied).to_string(),
                ]);
            }
        }
        out.write("g_functions.tsv", &g.finish())?;

        let mut d = Table::new(&["k2", "mu2", "mu1", "mu0", "mu2mu1_minus_mu0", "max_re_lambda"]);
        if chosen.exists {
            let j = jacobian(chosen.point, &p).map_err(runtime)?;
            let dm = DiffusionMatrix::from_params(&p);
            let cubic = dispersion_cubic(&j, &dm);
            let k2_max = cfg.experiment.k2_max.expect("resolved");
            let n = cfg.experiment.k2_points.expect("resolved");
            let grid: Vec<f64> = (0..n).map(|i| k2_max * i as f64 / (n - 1) as f64).collect();
            let rates = growth_rates(&j, &dm, &grid);
            for (k2, re) in grid.iter().zip(rates) {
                d.row(&[
                    num(*k2),
                    num(cubic.mu2(*k2)),
                    num(cubic.mu1(*k2)),
                    num(cubic.mu0(*k2)),
                    num(cubic.hurwitz_product(*k2)),
                    num(re),
                ]);
            }
        }
        out.write("dispersion.tsv", &d.finish())?;
        Ok(())
    }
}

// -------------------------------------------------------------- turing-table

struct TuringTable;

const TABLE_M: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

fn sign(x: f64) -> &'static str {
    if x > 0.0 {
        "+"
    } else if x < 0.0 {
        "-"
    } else {
        "0"
    }
}

impl Command for TuringTable {
    fn name(&self) -> &'static str {
        "turing-table"
    }

    fn summary(&self) -> &'static str {
        "signs of mu0 and mu2*mu1-mu0 at k = 0 over a list of Allee thresholds"
    }

    fn resolve(&self, cfg: &RunConfig) -> Resolved {
        let mut eff = with_params(cfg)?;
        let m = eff.m_list()?.unwrap_or_else(|| TABLE_M.to_vec());
        if m.is_empty() || m.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(format!("experiment.m_values: need nonnegative values, got {m:?}"));
        }
        let e = &mut eff.experiment;
        e.m_values = Some(m);
        e.m_min = None;
        e.m_max = None;
        e.m_count = None;
        Ok(eff)
    }

    fn execute(&self, cfg: &RunConfig, out: &RunDir) -> Result<(), CliError> {
        let p = params_of(cfg);
        let mut t = Table::new(&[
            "m", "u", "v", "r", "sign_mu0", "sign_mu2mu1_minus_mu0", "mu0", "mu2mu1_minus_mu0", "stable",
            "turing_unstable", "patterns",
        ]);
        for &m in cfg.experiment.m_values.as_ref().expect("resolved") {
            let pm = p.with_m(m);
            let e8 = foodchain::equilibria::interior_equilibrium(&pm);
            let j = if e8.exists { jacobian(e8.point, &pm).ok() } else { None };
            match j {
                Some(j) => {
                    let cubic = dispersion_cubic(&j, &DiffusionMatrix::from_params(&pm));
                    let (a, b) = (cubic.mu0(0.0), cubic.hurwitz_product(0.0));
                    let v = foodchain::turing::turing_unstable(&pm);
                    t.row(&[
                        num(m),
                        num(e8.point.u),
                        num(e8.point.v),
                        num(e8.point.r),
                        sign(a).into(),
                        sign(b).into(),
                        num(a),
                        num(b),
                        bool_word(v.stable_without_diffusion).into(),
                        bool_word(v.turing_unstable).into(),
                        if v.turing_unstable { "may occur" } else { "not predicted" }.into(),
                    ]);
                }
                None => {
                    let mut cells = vec![num(m), num(e8.point.u), num(e8.point.v), num(e8.point.r)];
                    cells.extend(["n/a", "n/a", "nan", "nan", "no", "no", "no interior state"].map(String::from));
                    t.row(&cells);
                }
            }
        }
        out.write("table.tsv", &t.finish())?;
        Ok(())
    }
}

// ------------------------------------------------------------- simulations

/// Fills the grid, initial, time and solver blocks from `d`.
fn fill_sim(eff: &mut RunConfig, d: &SimConfig, two_d: bool) -> Result<(), String> {
    let g = &mut eff.grid;
    if two_d {
        g.nx.get_or_insert(d.nx);
        g.ny.get_or_insert(d.ny);
        g.dx.get_or_insert(d.dx);
        g.dy.get_or_insert(d.dy);
        eff.initial.kind.get_or_insert(d.initial);
    } else {
        g.n.get_or_insert(d.n);
        if eff.initial.kind.is_some() {
            return Err("initial.kind: 1D runs always use the cos² perturbation; remove this key".into());
        }
        let s = &mut eff.solver;
        s.integrator.get_or_insert_with(|| d.integrator.clone());
        s.atol.get_or_insert(d.atol);
        s.rtol.get_or_insert(d.rtol);
    }
    g.dt.get_or_insert(d.dt);
    let i = &mut eff.initial;
    i.eps.get_or_insert(crate::config::Amplitude::PerField(d.eps));
    i.wavenumber.get_or_insert(d.wavenumber);
    i.seed.get_or_insert(d.seed);
    if i.base.is_none() {
        i.base = d.base;
    }
    let t = &mut eff.time;
    t.t_end.get_or_insert(d.t_end);
    t.snapshot_every.get_or_insert(d.snapshot_every);
    let s = &mut eff.solver;
    s.max_steps.get_or_insert(d.max_steps);
    s.reaction.get_or_insert(d.reaction);
    Ok(())
}

/// Simulation settings from a resolved configuration.
fn sim_of(cfg: &RunConfig) -> SimConfig {
    let d = SimConfig::default();
    let g = &cfg.grid;
    SimConfig {
        t_end: cfg.time.t_end.unwrap_or(d.t_end),
        snapshot_every: cfg.time.snapshot_every.unwrap_or(d.snapshot_every),
        eps: cfg.initial.eps.map(|e| e.expand()).unwrap_or(d.eps),
        wavenumber: cfg.initial.wavenumber.unwrap_or(d.wavenumber),
        seed: cfg.initial.seed.unwrap_or(d.seed),
        base: cfg.initial.base,
        reaction: cfg.solver.reaction.unwrap_or(d.reaction),
        n: g.n.unwrap_or(d.n),
        integrator: cfg.solver.integrator.clone().unwrap_or(d.integrator),
        atol: cfg.solver.atol.unwrap_or(d.atol),
        rtol: cfg.solver.rtol.unwrap_or(d.rtol),
        nx: g.nx.unwrap_or(d.nx),
        ny: g.ny.unwrap_or(d.ny),
        dx: g.dx.unwrap_or(d.dx),
        dy: g.dy.unwrap_or(d.dy),
        dt: g.dt.unwrap_or(d.dt),
        initial: cfg.initial.kind.unwrap_or(d.initial),
        max_steps: cfg.solver.max_steps.unwrap_or(d.max_steps),
    }
}

/// Checks everything a run of `simulator` will need, before it starts.
fn check_sim(p: &Params, sim: &SimConfig, simulator: &str, needs_base: bool) -> Result<(), String> {
    let block = |e: Error| match e {
        Error::Config(m) | Error::Domain(m) => m,
        other => other.to_string(),
    };
    sim.validate().map_err(|e| format!("time: {}", block(e)))?;
    SimulatorRegistry::default().get(simulator).map_err(|e| format!("solver.simulator: {}", block(e)))?;
    match simulator {
        "fd2d" => {
            let d_max = p.diffusivities().into_iter().fold(0.0, f64::max);
            Grid2D::new(sim.nx, sim.ny, sim.dx, sim.dy, sim.dt, d_max).map_err(|e| format!("grid.dt: {}", block(e)))?;
        }
        _ => {
            build_grid(sim.n).map_err(|e| format!("grid.n: {}", block(e)))?;
            IntegratorRegistry::default()
                .get(&sim.integrator)
                .map_err(|e| format!("solver.integrator: {}", block(e)))?;
        }
    }
    if needs_base {
        sim.base_state(p)
            .map_err(|e| format!("initial.base: {}; set a base state explicitly", block(e)))?;
    }
    Ok(())
}

struct Simulate {
    two_d: bool,
}

impl Simulate {
    fn simulator(&self) -> &'static str {
        if self.two_d {
            "fd2d"
        } else {
            "collocation1d"
        }
    }
}

fn write_norm_series(out: &RunDir, run: &RunOutput) -> Result<(), CliError> {
    let mut t = Table::new(&[
        "t", "l2_u", "h1_u", "sup_u", "std_u", "l2_v", "h1_v", "sup_v", "std_v", "l2_r", "h1_r", "sup_r", "std_r",
        "min",
    ]);
    for s in &run.snapshots {
        let n = norms(s);
        let std = [&s.u, &s.v, &s.r].map(|f| spatial_std(f, &s.mesh));
        let mut row = vec![num(s.t)];
        for (k, f) in [n.u, n.v, n.r].iter().enumerate() {
            row.extend([num(f.l2), num(f.h1), num(f.sup), num(std[k])]);
        }
        row.push(num(s.min_value()));
        t.row(&row);
    }
    out.write("norms.tsv", &t.finish())?;
    Ok(())
}

/// Per-snapshot node tables plus space-time matrices (one row per
/// snapshot, first column `t`, first row the nodes).
fn write_line_fields(out: &RunDir, run: &RunOutput) -> Result<(), CliError> {
    let Mesh::Line(grid) = &run.final_state().mesh else {
        unreachable!("1D runs live on a line");
    };
    let dir = out.subdir("snapshots")?;
    for (i, s) in run.snapshots.iter().enumerate() {
        let mut text = format!("# t = {}\n", num(s.t));
        let mut t = Table::new(&["x", "u", "v", "r"]);
        for (k, x) in grid.nodes.iter().enumerate() {
            t.row(&[num(*x), num(s.u[k]), num(s.v[k]), num(s.r[k])]);
        }
        text.push_str(&t.finish());
        dir.write(&format!("s{i:05}.tsv"), &text)?;
    }
    let mut header = String::from("t");
    for x in &grid.nodes {
        header.push('\t');
        header.push_str(&num(*x));
    }
    header.push('\n');
    for (name, pick) in [("u", 0usize), ("v", 1), ("r", 2)] {
        let mut text = header.clone();
        for s in &run.snapshots {
            text.push_str(&num(s.t));
            for x in s.fields()[pick] {
                text.push('\t');
                text.push_str(&num(*x));
            }
            text.push('\n');
        }
        out.write(&format!("spacetime_{name}.tsv"), &text)?;
    }
    Ok(())
}

fn write_plane_snapshot(out: &RunDir, stem: &str, s: &FieldState) -> Result<(), CliError> {
    let Mesh::Plane(g) = &s.mesh else {
        unreachable!("2D runs live on a plane");
    };
    for (name, f) in ["u", "v", "r"].iter().zip(s.fields()) {
        out.write(&format!("{stem}_{name}.tsv"), &matrix(f, g.nx))?;
    }
    let mut kv = KeyValues::default();
    kv.put("t", num(s.t))
        .put("nx", g.nx)
        .put("ny", g.ny)
        .put("dx", num(g.dx))
        .put("dy", num(g.dy))
        .put("layout", "row j holds y = j*dy, column i holds x = i*dx");
    out.write(&format!("{stem}.meta"), &kv.finish())?;
    Ok(())
}

fn run_summary(kv: &mut KeyValues, run: &RunOutput) {
    kv.put("simulator", &run.simulator)
        .put("steps", run.steps)
        .put("snapshots", run.snapshots.len())
        .put("t_final", num(run.final_state().t))
        .put("min_value", num(run.min_value))
        .put("negativity_flagged", run.negativity_flagged());
}

impl Command for Simulate {
    fn name(&self) -> &'static str {
        if self.two_d {
            "sim2d"
        } else {
            "sim1d"
        }
    }

    fn summary(&self) -> &'static str {
        if self.two_d {
            "finite-difference run on a rectangle, snapshots and pattern class"
        } else {
            "collocation run on [0, pi], space-time fields and pattern class"
        }
    }

    fn resolve(&self, cfg: &RunConfig) -> Resolved {
        let mut eff = with_params(cfg)?;
        let d = if self.two_d { SimConfig::default() } else { SimConfig { dt: 0.05, ..SimConfig::default() } };
        fill_sim(&mut eff, &d, self.two_d)?;
        match eff.solver.simulator.get_or_insert_with(|| self.simulator().into()) {
            s if s == self.simulator() => {}
            s => return Err(format!("solver.simulator: {} runs use '{}', got '{s}'", self.name(), self.simulator())),
        }
        if self.two_d {
            eff.output.snapshots.get_or_insert(SnapshotFiles::Final);
        }
        let c = eff.classify_options();
        eff.classify.homogeneous_tol = Some(c.homogeneous_tol);
        eff.classify.steady_tol = Some(c.steady_tol);
        check_sim(&params_of(&eff), &sim_of(&eff), self.simulator(), true)?;
        Ok(eff)
    }

    fn execute(&self, cfg: &RunConfig, out: &RunDir) -> Result<(), CliError> {
        let p = params_of(cfg);
        let sim = sim_of(cfg);
        let run = SimulatorRegistry::default().get(self.simulator()).map_err(runtime)?.run(&p, &sim).map_err(runtime)?;
        write_norm_series(out, &run)?;
        if self.two_d {
            match cfg.output.snapshots.unwrap_or(SnapshotFiles::Final) {
                SnapshotFiles::Final => write_plane_snapshot(out, "final", run.final_state())?,
                SnapshotFiles::All => {
                    let dir = out.subdir("snapshots")?;
                    for (i, s) in run.snapshots.iter().enumerate() {
                        write_plane_snapshot(&dir, &format!("s{i:05}"), s)?;
                    }
                    write_plane_snapshot(out, "final", run.final_state())?;
                }
            }
        } else {
            write_line_fields(out, &run)?;
        }
        let c = classify_pattern(&run.snapshots, &cfg.classify_options()).map_err(runtime)?;
        let mut kv = KeyValues::default();
        kv.put("class", c.class)
            .put("relative_std", num(c.relative_std))
            .put("std_u", num(c.std_u))
            .put("late_change", num(c.late_change));
        run_summary(&mut kv, &run);
        out.write("classification.txt", &kv.finish())?;
        Ok(())
    }
}

// --------------------------------------------------------------------- decay

struct Decay;

fn fit_lines(kv: &mut KeyValues, prefix: &str, fit: &Option<FitResult>) {
    match fit {
        Some(f) => {
            kv.put(&format!("{prefix}.slope"), num(f.slope))
                .put(&format!("{prefix}.intercept"), num(f.intercept))
                .put(&format!("{prefix}.correlation"), num(f.correlation))
                .put(&format!("{prefix}.ci95_slope"), format!("{} {}", num(f.ci95_slope.0), num(f.ci95_slope.1)))
                .put(
                    &format!("{prefix}.ci95_intercept"),
                    format!("{} {}", num(f.ci95_intercept.0), num(f.ci95_intercept.1)),
                )
                .put(&format!("{prefix}.points"), f.n)
                .put(&format!("{prefix}.excluded"), f.excluded);
        }
        None => {
            kv.put(&format!("{prefix}.slope"), "nan");
        }
    }
}

impl Command for Decay {
    fn name(&self) -> &'static str {
        "decay"
    }

    fn summary(&self) -> &'static str {
        "H1 distance between patterns at m and m = 0, with linear and log-log fits"
    }

    fn resolve(&self, cfg: &RunConfig) -> Resolved {
        let mut eff = with_params(cfg)?;
        let protocol = eff.experiment.protocol.get_or_insert_with(|| "desk".into()).clone();
        let d = match protocol.as_str() {
            "desk" => DecayConfig::desk(),
            "full" => DecayConfig::full(),
            other => return Err(format!("experiment.protocol: expected 'desk' or 'full', got '{other}'")),
        };
        let m = eff.m_list()?.unwrap_or(d.m_values.clone());
        if m.len() < 3 || m.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(format!("experiment.m_values: need at least 3 nonnegative values, got {m:?}"));
        }
        let e = &mut eff.experiment;
        e.m_values = Some(m);
        e.m_min = None;
        e.m_max = None;
        e.m_count = None;
        let simulator = eff.solver.simulator.get_or_insert_with(|| d.simulator.clone()).clone();
        fill_sim(&mut eff, &d.sim, simulator == "fd2d")?;
        let c = eff.classify_options();
        eff.classify.homogeneous_tol = Some(c.homogeneous_tol);
        eff.classify.steady_tol = Some(c.steady_tol);
        // The base state is the m = 0 interior state unless given.
        let p0 = params_of(&eff).with_m(0.0);
        check_sim(&p0, &sim_of(&eff), &simulator, true)?;
        Ok(eff)
    }

    fn execute(&self, cfg: &RunConfig, out: &RunDir) -> Result<(), CliError> {
        let p = params_of(cfg);
        let dc = DecayConfig {
            m_values: cfg.experiment.m_values.clone().expect("resolved"),
            simulator: cfg.solver.simulator.clone().expect("resolved"),
            sim: sim_of(cfg),
            classify: cfg.classify_options(),
        };
        let outcome = decay_experiment(&p, &dc).map_err(runtime)?;
        let mut t = Table::new(&["m", "h1_error_u", "h1_error_v", "h1_error_r", "h1_error_combined", "class", "late_change"]);
        for r in &outcome.records {
            t.row(&[
                num(r.m),
                num(r.h1_error_u),
                num(r.h1_error_v),
                num(r.h1_error_r),
                num(r.h1_error_combined),
                r.class.to_string(),
                num(r.late_change),
            ]);
        }
        out.write("records.tsv", &t.finish())?;
        let mut x = Table::new(&["m", "reason"]);
        for (m, why) in &outcome.excluded {
            x.row(&[num(*m), why.clone()]);
        }
        out.write("excluded.tsv", &x.finish())?;
        let mut kv = KeyValues::default();
        fit_lines(&mut kv, "raw", &outcome.raw_fit);
        fit_lines(&mut kv, "loglog", &outcome.loglog_fit);
        for (name, f) in ["u", "v", "r"].iter().zip(&outcome.loglog_fit_fields) {
            fit_lines(&mut kv, &format!("loglog_{name}"), f);
        }
        out.write("fits.txt", &kv.finish())?;
        Ok(())
    }
}

// --------------------------------------------------------------- overexploit

struct Overexploit;

impl Command for Overexploit {
    fn name(&self) -> &'static str {
        "overexploit"
    }

    fn summary(&self) -> &'static str {
        "extinction, prey recovery or persistence run with hypothesis checks"
    }

    fn resolve(&self, cfg: &RunConfig) -> Resolved {
        let mut eff = with_params(cfg)?;
        let d = ScenarioSetup::default();
        let s = &mut eff.scenario;
        s.kind.get_or_insert(d.kind);
        let init = *s.initial.get_or_insert(d.initial);
        let ext = *s.extinction_tol.get_or_insert(d.extinction_tol);
        let lim = *s.limit_tol.get_or_insert(d.limit_tol);
        if init.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(format!("scenario.initial: must be nonnegative, got {init:?}"));
        }
        for (key, x) in [("extinction_tol", ext), ("limit_tol", lim)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(format!("scenario.{key}: must be positive, got {x}"));
            }
        }
        if eff.initial.base.is_some() {
            return Err("initial.base: overexploitation runs start from scenario.initial".into());
        }
        fill_sim(&mut eff, &d.sim, false)?;
        match eff.solver.simulator.get_or_insert_with(|| "collocation1d".into()) {
            s if s == "collocation1d" => {}
            s => return Err(format!("solver.simulator: overexploitation runs use 'collocation1d', got '{s}'")),
        }
        check_sim(&params_of(&eff), &sim_of(&eff), "collocation1d", false)?;
        Ok(eff)
    }

    fn execute(&self, cfg: &RunConfig, out: &RunDir) -> Result<(), CliError> {
        let p = params_of(cfg);
        let s = &cfg.scenario;
        let setup = ScenarioSetup {
            kind: s.kind.expect("resolved"),
            initial: s.initial.expect("resolved"),
            sim: sim_of(cfg),
            extinction_tol: s.extinction_tol.expect("resolved"),
            limit_tol: s.limit_tol.expect("resolved"),
        };
        let o = overexploitation_scenario(&p, &setup).map_err(runtime)?;
        let triple = |a: [f64; 3]| format!("{} {} {}", num(a[0]), num(a[1]), num(a[2]));
        let mut kv = KeyValues::default();
        kv.put("kind", o.kind)
            .put("hypotheses_satisfied", o.hypotheses_satisfied)
            .put("target", triple(o.target))
            .put("reached", o.reached)
            .put("time_to_threshold", opt(o.time_to_threshold))
            .put("t_end", num(o.t_end))
            .put("final_sup", triple(o.final_sup))
            .put("final_min", triple(o.final_min))
            .put("final_mean", triple(o.limits));
        out.write("outcome.txt", &kv.finish())?;
        let mut h = Table::new(&["hypothesis", "lhs", "rhs", "holds"]);
        for x in &o.hypotheses {
            h.row(&[x.statement.clone(), num(x.lhs), num(x.rhs), bool_word(x.holds).into()]);
        }
        out.write("hypotheses.tsv", &h.finish())?;
        let mut t = Table::new(&["t", "sup_u", "sup_v", "sup_r", "min_u", "min_v", "min_r"]);
        for x in &o.history {
            let mut row = vec![num(x.t)];
            row.extend(x.sup.iter().chain(&x.min).map(|v| num(*v)));
            t.row(&row);
        }
        out.write("trajectory.tsv", &t.finish())?;
        Ok(())
    }
}
