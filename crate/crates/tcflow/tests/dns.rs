use tcflow::baseflow::NondimParams;
use tcflow::boxmodel::BoxOperator;
use tcflow::dns::*;
use tcflow::field::Field;
use tcflow::Error;

const L1: f64 = 1.0079;
// 24 x 24 carries mz = 8 axial modes and nb = 13 radial functions
const NZ: usize = 24;
const NR: usize = 24;

fn cfg(lambda: f64, initial: InitialCondition) -> DnsConfig {
    let mut c = DnsConfig::new(NondimParams::new(lambda, 0.0, 1.0, 0.0, L1), NZ, NR);
    c.initial = initial;
    c.diag_every = 10;
    c
}

fn box_critical() -> f64 {
    let n = NondimParams::new(41.0, 0.0, 1.0, 0.0, L1);
    BoxOperator::new(&n, NZ / 3, (2 * NR - 9) / 3, false).critical(30.0, 70.0).unwrap()
}

#[test]
fn energy_decays_without_rotation() {
    let mut c = cfg(0.0, InitialCondition::Random { amplitude: 0.1, seed: 7 });
    c.t_end = 1.0;
    let res = run_to_steady(&c).unwrap();
    let e: Vec<f64> = res.diagnostics.iter().map(|d| d.energy).collect();
    assert!(e.len() > 5);
    // the final record can repeat the last periodic one
    assert!(e.windows(2).all(|w| w[1] <= w[0]), "{e:?}");
    assert!(e[e.len() - 1] < 0.1 * e[0]);
}

#[test]
fn zero_is_a_fixed_point() {
    let mut sim = Simulation::new(cfg(60.0, InitialCondition::Zero)).unwrap();
    for _ in 0..20 {
        sim.step().unwrap();
    }
    assert!(sim.state().iter().all(|v| *v == 0.0));
    assert!(sim.is_steady());
}

#[test]
fn eigenmode_decays_at_its_eigenvalue() {
    let lambda = 30.0;
    let mut c = cfg(lambda, InitialCondition::Eigenmode { amplitude: 1e-6 });
    c.dt = 1e-3;
    c.t_end = 0.5;
    c.steady_tol = 0.0;
    let mut sim = Simulation::new(c).unwrap();
    let (beta, _) = sim.leading_linear_mode().unwrap();
    assert!(beta < 0.0);
    let e0 = sim.energy();
    let res = sim.run_to_steady().unwrap();
    let rate = (sim.energy() / e0).ln() / (2.0 * res.t);
    assert!((rate - beta).abs() < 0.05 * beta.abs(), "{rate} vs {beta}");
}

#[test]
fn amplitude_grows_above_onset_and_decays_below() {
    let lc = box_critical();
    let grow = |lam: f64| {
        let mut c = cfg(lam, InitialCondition::Eigenmode { amplitude: 1e-4 });
        c.t_end = 1.0;
        c.steady_tol = 0.0;
        run_to_steady(&c).unwrap().sigma
    };
    assert!(grow(1.05 * lc) > 1e-4);
    assert!(grow(0.95 * lc) < 1e-4);
}

#[test]
fn advection_is_energy_neutral_and_divergence_free() {
    let lc = box_critical();
    let mut c = cfg(1.3 * lc, InitialCondition::Random { amplitude: 0.5, seed: 3 });
    c.t_end = 0.3;
    let res = run_to_steady(&c).unwrap();
    for d in &res.diagnostics {
        let scale = d.energy.max(1e-300);
        assert!(d.adv_residual.abs() < 1e-10 * scale.sqrt() * (1.0 + scale), "{d:?}");
        assert!(d.div_norm < 1e-10 * (1.0 + scale.sqrt()), "{d:?}");
    }
}

#[test]
fn saturated_amplitude_converges_with_the_grid() {
    let lc = box_critical();
    let steady = |nz: usize, nr: usize| {
        let mut c = DnsConfig::new(NondimParams::new(1.1 * lc, 0.0, 1.0, 0.0, L1), nz, nr);
        c.initial = InitialCondition::Eigenmode { amplitude: 0.1 };
        c.t_end = 200.0;
        c.steady_tol = 1e-6;
        c.diag_every = 0;
        let r = run_to_steady(&c).unwrap();
        assert!(r.converged);
        r.sigma
    };
    let (a, b) = (steady(24, 24), steady(36, 36));
    assert!(a > 0.0);
    assert!(((a - b) / b).abs() < 0.01, "{a} vs {b}");
}

#[test]
fn runs_are_deterministic() {
    let lc = box_critical();
    let mut c = cfg(1.2 * lc, InitialCondition::near_couette(1.0, Some(11)));
    c.t_end = 0.5;
    let a = run_to_steady(&c).unwrap();
    let b = run_to_steady(&c).unwrap();
    assert_eq!(a.field, b.field);
    assert_eq!(a.sigma.to_bits(), b.sigma.to_bits());
}

#[test]
fn field_file_round_trip() {
    let lc = box_critical();
    let mut c = cfg(1.2 * lc, InitialCondition::Eigenmode { amplitude: 0.05 });
    c.t_end = 0.2;
    let res = run_to_steady(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.txt");
    res.field.write(&path).unwrap();
    let back = Field::read(&path).unwrap();
    assert_eq!(back, res.field);
    // restarting from the file reproduces the state up to interpolation
    let mut c2 = c.clone();
    c2.initial = InitialCondition::File(path);
    let sim = Simulation::new(c2).unwrap();
    assert!((sim.sigma() - res.sigma).abs() < 1e-3 * res.sigma.abs(), "{} vs {}", sim.sigma(), res.sigma);
}

#[test]
fn single_step_on_a_sampled_state() {
    let c = cfg(45.0, InitialCondition::Zero);
    let z = Field::zeros(NZ, NR, L1, 0.0);
    let next = step(&z, &c).unwrap();
    assert_eq!(next.norm(), 0.0);
    assert!(step(&Field::zeros(NZ, NR - 1, L1, 0.0), &c).is_err());
}

#[test]
fn config_and_input_errors() {
    let mut c = cfg(45.0, InitialCondition::Zero);
    c.dt = 0.0;
    assert!(c.validate().is_err());
    let c = DnsConfig::new(NondimParams::new(45.0, 0.0, 1.0, 0.0, L1), 6, 24);
    assert!(matches!(Simulation::new(c), Err(Error::Resolution(_))));
    let c = cfg(45.0, InitialCondition::Zero);
    assert!(transition_experiment(&c, &[50.0, 45.0], &TransitionOptions::default()).is_err());
    let mut c = cfg(45.0, InitialCondition::File("/nonexistent/state.txt".into()));
    c.t_end = 0.0;
    assert!(Simulation::new(c).is_err());
}

#[test]
fn diagnostics_csv_layout() {
    let d = Diagnostic { t: 0.5, energy: 1.0, sigma: 0.0, div_norm: 0.0, adv_residual: 0.0 };
    let s = diagnostics_csv(&[d, d]);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "t,energy,sigma,div_norm,adv_residual");
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1].split(',').count(), 5);
}
