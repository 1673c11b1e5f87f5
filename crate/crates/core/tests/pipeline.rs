use foodchain::equilibria::{interior_equilibrium, jacobian};
use foodchain::model::PRESETS;
use foodchain::simulate::{SimConfig, SimulatorRegistry};
use foodchain::turing::{growth_rates, turing_unstable, DiffusionMatrix};
use foodchain::Params;

#[test]
fn presets_have_stable_interior_state_with_growing_band() {
    for name in PRESETS {
        let p = Params::preset(name, 0.0).unwrap();
        let e8 = interior_equilibrium(&p);
        assert!(e8.exists, "{name}: {}", e8.note);
        assert!(e8.residual(&p) < 1e-10, "{name}");

        let v = turing_unstable(&p);
        assert!(v.turing_unstable, "{name}: {}", v.note);
        let k2 = v.k2_t.unwrap();

        let j = jacobian(e8.point, &p).unwrap();
        let d = DiffusionMatrix::from_params(&p);
        let grid: Vec<f64> = (0..=400).map(|i| 4.0 * k2 * i as f64 / 400.0).collect();
        let rates = growth_rates(&j, &d, &grid);
        assert!(rates[0] < 0.0, "{name}: k = 0 rate {}", rates[0]);
        let peak = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(peak > 0.0, "{name}: no positive growth rate");
    }
}

#[test]
fn registry_runs_both_discretizations_from_the_same_state() {
    let p = Params::preset("stationary", 0.0).unwrap();
    let reg = SimulatorRegistry::default();
    let cfg = SimConfig {
        n: 32,
        nx: 16,
        ny: 16,
        dx: 0.5,
        dy: 0.5,
        dt: 0.05,
        t_end: 5.0,
        snapshot_every: 1.0,
        eps: [0.0; 3],
        ..SimConfig::default()
    };
    let e8 = interior_equilibrium(&p).point;
    for name in reg.names() {
        let out = reg.get(name).unwrap().run(&p, &cfg).unwrap();
        let last = out.final_state();
        assert!((last.t - 5.0).abs() < 1e-9, "{name}");
        for (field, want) in last.fields().iter().zip([e8.u, e8.v, e8.r]) {
            for x in field.iter() {
                assert!((x - want).abs() < 1e-8, "{name}: {x} vs {want}");
            }
        }
    }
}
