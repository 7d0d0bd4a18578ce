//! End-to-end use of the public API.

use speclag::evolve::{run_evolution, CollisionRhs, Integrator, RunOptions};
use speclag::io::{read_field, write_real};
use speclag::scenarios::{bkw_pdf, bkw_q, BkwParams, MixtureParams};
use speclag::{
    collision_operator, moments, CollisionParams, ConservationBasis, RealField, Scenario,
    VelocityGrid,
};

#[test]
fn bkw_operator_on_a_coarse_grid() {
    let p = BkwParams::new(5.5, 1.0).unwrap();
    let grid = VelocityGrid::new(10.0, 24).unwrap();
    let f = RealField::from_fn(grid, |v| bkw_pdf(v, &p).unwrap());
    let q = collision_operator(&f, &CollisionParams::maxwell(6.0).unwrap())
        .unwrap()
        .q;
    let mut err = 0.0_f64;
    let mut scale = 0.0_f64;
    for idx in 0..grid.len() {
        let exact = bkw_q(grid.velocity(idx), &p).unwrap();
        err = err.max((q.data()[idx] - exact).abs());
        scale = scale.max(exact.abs());
    }
    // Spectral accuracy is still poor at N = 24; it reaches 1e-6 by N = 48.
    assert!(err / scale < 5e-2, "relative error {:e}", err / scale);
}

#[test]
fn projected_evolution_conserves_invariants() {
    let grid = VelocityGrid::new(8.0, 16).unwrap();
    let f0 = Scenario::Mixture(MixtureParams::two_beams())
        .sample(grid)
        .unwrap();
    let rhs = CollisionRhs::new(
        CollisionParams::maxwell(6.0).unwrap(),
        Some(ConservationBasis::new(grid).unwrap()),
        None,
    );
    let options = RunOptions {
        dt: 0.1,
        t_final: 0.6,
        integrator: Integrator::Ab4,
        output_times: vec![0.3],
        negativity_abort: None,
    };
    let m0 = moments(&f0);
    let result = run_evolution(f0, 0.0, &rhs, &options, |_| {}).unwrap();
    assert_eq!(result.state.step_index, 6);
    assert_eq!(result.snapshots.len(), 1);
    assert_eq!(result.moments.len(), 7);
    for rec in &result.moments {
        assert!((rec.mass - m0.mass).abs() < 1e-13 * m0.mass);
        assert!((rec.energy - m0.energy).abs() < 1e-13 * m0.energy);
        for d in 0..3 {
            assert!((rec.momentum[d] - m0.momentum[d]).abs() < 1e-13 * m0.mass);
        }
    }
    // Conserved moments stay fixed while higher ones relax.
    assert!(result.moments[6].fourth_moment != result.moments[0].fourth_moment);
}

#[test]
fn field_file_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.bspf");
    let grid = VelocityGrid::new(5.0, 8).unwrap();
    let f = Scenario::by_name("cylindrical")
        .unwrap()
        .sample(grid)
        .unwrap();
    write_real(&path, &f, 5.5).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 28 + 8 * 512);
    let back = read_field(&path).unwrap();
    assert_eq!(back.t, 5.5);
    assert_eq!(back.into_real().unwrap().data(), f.data());
    assert!(read_field(&dir.path().join("absent.bspf")).is_err());
}

#[test]
fn registry_scenarios_have_unit_mass() {
    let grid = VelocityGrid::new(10.0, 48).unwrap();
    for name in Scenario::NAMES {
        let f = Scenario::by_name(name).unwrap().sample(grid).unwrap();
        let m = moments(&f);
        // The cylindrical pdf is twice as narrow in v_x and v_y, so the
        // trapezoid rule sees it on an effectively coarser grid.
        let tol = if name == "cylindrical" { 1e-3 } else { 1e-9 };
        assert!((m.mass - 1.0).abs() < tol, "{name}: mass {}", m.mass);
        assert!(f.min() >= 0.0, "{name} is negative somewhere");
    }
}
