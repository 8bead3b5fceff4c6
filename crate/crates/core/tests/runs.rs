use fpm_wetting::config::PhaseRegion;
use fpm_wetting::driver::{run, snapshot_name, RunOptions, DIAGNOSTICS_FILE};
use fpm_wetting::io::{parse_diagnostics, parse_snapshot};
use fpm_wetting::scenarios::{builtin, sessile_circular, unit_square, wall_adhesion};
use fpm_wetting::{parse_config_str, Error, Simulation};

#[test]
fn short_drop_run_writes_parseable_monotone_diagnostics() {
    let mut c = sessile_circular(150);
    c.numerics.h = 0.02;
    c.numerics.dt = 1e-3;
    c.numerics.t_end = 0.02;
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        c,
        dir.path(),
        &RunOptions {
            snapshot_every: Some(0.01),
        },
    )
    .unwrap();
    assert!(out.error.is_none(), "{:?}", out.error);
    let diag = parse_diagnostics(&std::fs::read_to_string(dir.path().join(DIAGNOSTICS_FILE)).unwrap()).unwrap();
    assert_eq!(diag.len(), 21);
    assert!(diag.windows(2).all(|w| w[1][0] > w[0][0]));
    assert!(diag.iter().skip(1).all(|r| r[3].is_finite()));
    let last = parse_snapshot(&std::fs::read_to_string(dir.path().join(snapshot_name(2))).unwrap()).unwrap();
    assert_eq!(last.len() as f64, diag.last().unwrap()[5]);
}

#[test]
fn wall_adhesion_step_populates_the_report() {
    let mut c = wall_adhesion(175);
    c.numerics.h = 0.012;
    let mut sim = Simulation::new(c).unwrap();
    let r = sim.step().unwrap();
    assert_eq!(r.step, 1);
    assert!(r.solver_sweeps > 0 && !r.solver_stagnated);
    assert!(r.corrected_normals > 0);
    assert!(r.max_velocity.is_finite() && r.divergence_norm.is_finite());
    assert!(r.dt_cap > 0.0);
}

#[test]
fn free_drop_kinetic_energy_stays_bounded() {
    let mut c = unit_square(0.1);
    c.name = "free-drop".into();
    c.liquid_region = PhaseRegion::Semicircle {
        center: [0.5, 0.5],
        radius: 0.25,
    };
    let drop = builtin("sessile-circular-90").unwrap();
    c.liquid = drop.liquid;
    c.gas = drop.gas;
    c.physics.sigma = drop.physics.sigma;
    c.numerics.density_smoothing = drop.numerics.density_smoothing;
    c.numerics.viscosity_smoothing = drop.numerics.viscosity_smoothing;
    c.numerics.eps_solver = drop.numerics.eps_solver;
    c.numerics.max_sweeps = drop.numerics.max_sweeps;
    c.numerics.dt = 1e-3;
    c.numerics.t_end = 0.1;
    let mut sim = Simulation::new(c).unwrap();
    let mut peak: f64 = 0.0;
    let reports = sim
        .run(|s, _| {
            peak = peak.max(s.diagnostics().kinetic_energy);
            Ok(())
        })
        .unwrap();
    assert_eq!(reports.len(), 100);
    // a quarter of the drop's surface energy is a generous bound
    let surface_energy = sim.config().physics.sigma * 2.0 * std::f64::consts::PI * 0.25;
    assert!(peak.is_finite() && peak < 0.25 * surface_energy, "{peak}");
}

#[test]
fn invalid_contact_angle_is_reported_with_its_key() {
    let text = "scenario = \"sessile-circular-90\"\n[physics]\ntheta_s_deg = 200.0\n";
    match parse_config_str(text) {
        Err(Error::Validation(v)) => assert!(v.iter().any(|x| x.key == "physics.theta_s_deg")),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn builtin_name_yields_the_drop_parameters() {
    let c = parse_config_str("scenario = \"sessile-circular-150\"\n").unwrap();
    assert_eq!(c.physics.theta_s_deg, 150.0);
    assert_eq!((c.liquid.rho, c.liquid.mu, c.gas.mu), (797.88, 0.1, 0.01));
    assert_eq!(c.domain.x_max, 0.3);
}
