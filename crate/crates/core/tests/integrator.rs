mod common;

use common::*;
use quadcable::dynamics_full::{linear_momentum, total_energy};
use quadcable::integrator::{
    simulate, ControlUpdate, FullPlant, IntegratorConfig, OpenLoop, Retraction, ReducedPlant, Scheme, ThrustModel,
};
use quadcable::{ControlInput, FullState, PhysicalParams, ReducedState, Vec3, N};

fn cfg(dt: f64, horizon: f64) -> IntegratorConfig {
    IntegratorConfig { dt, horizon, ..IntegratorConfig::default() }
}

fn reduced_plant(p: PhysicalParams) -> ReducedPlant {
    ReducedPlant { params: p, disturbance: None, thrust_model: ThrustModel::Direct }
}

fn energy_of(s: &ReducedState, p: &PhysicalParams) -> f64 {
    total_energy(&FullState::from_reduced(s, p.rest_length), p).total()
}

fn load_distance(a: &ReducedState, b: &ReducedState) -> f64 {
    let mut d = (a.load.x - b.load.x).norm() + (a.load.r.matrix() - b.load.r.matrix()).norm();
    for j in 0..N {
        d += (a.links[j].q.as_vec() - b.links[j].q.as_vec()).norm();
    }
    d
}

#[test]
fn free_elastic_system_conserves_energy_and_momentum_balance() {
    let mut p = elastic_params();
    p.damping = 0.0;
    let mut r = rng(11);
    let s0 = full_state(&mut r, p.rest_length);
    let plant = FullPlant { params: p.clone(), thrust_model: ThrustModel::Direct };
    let e0 = total_energy(&s0, &p).total();
    let m0 = linear_momentum(&s0, &p);
    let mut worst: f64 = 0.0;
    let mut worst_mom: f64 = 0.0;
    let total_mass = p.m_load + 4.0 * p.m_quad;
    let c = IntegratorConfig { tidy: false, ..cfg(1e-4, 1.0) };
    simulate(&plant, &OpenLoop(ControlInput::zero()), &s0, 0.0, &c, |t, s: &FullState, _, _| {
        worst = worst.max((total_energy(s, &p).total() - e0).abs());
        let expected = m0 - total_mass * p.gravity * t * Vec3::z();
        worst_mom = worst_mom.max((linear_momentum(s, &p) - expected).norm());
        Ok(())
    })
    .unwrap();
    assert!(worst < 1e-6 * e0.abs().max(1.0), "energy drift {worst:.3e}");
    assert!(worst_mom < 1e-6, "momentum drift {worst_mom:.3e}");
}

#[test]
fn damping_dissipates_energy() {
    let p = elastic_params();
    let mut r = rng(12);
    let s0 = full_state(&mut r, p.rest_length);
    let plant = FullPlant { params: p.clone(), thrust_model: ThrustModel::Direct };
    let mut prev = total_energy(&s0, &p).total();
    simulate(&plant, &OpenLoop(ControlInput::zero()), &s0, 0.0, &cfg(1e-4, 0.5), |_, s: &FullState, _, _| {
        let e = total_energy(s, &p).total();
        assert!(e <= prev + 1e-8);
        prev = e;
        Ok(())
    })
    .unwrap();
}

#[test]
fn rigid_system_conserves_energy() {
    let p = PhysicalParams::reference();
    let mut r = rng(13);
    let s0 = reduced_state(&mut r);
    let e0 = energy_of(&s0, &p);
    let mut worst: f64 = 0.0;
    simulate(&reduced_plant(p.clone()), &OpenLoop(ControlInput::zero()), &s0, 0.0, &cfg(1e-3, 2.0), |_, s, _, _| {
        worst = worst.max((energy_of(s, &p) - e0).abs());
        Ok(())
    })
    .unwrap();
    assert!(worst < 1e-7 * e0.abs().max(1.0), "energy drift {worst:.3e}");
}

fn final_state(scheme: Scheme, retraction: Retraction, dt: f64, s0: &ReducedState, u: &ControlInput) -> ReducedState {
    let c = IntegratorConfig { scheme, retraction, tidy: false, ..cfg(dt, 0.5) };
    simulate(&reduced_plant(PhysicalParams::reference()), &OpenLoop(*u), s0, 0.0, &c, |_, _, _, _| Ok(()))
        .unwrap()
        .final_state
}

fn observed_order(scheme: Scheme, retraction: Retraction, dts: [f64; 3]) -> f64 {
    let mut r = rng(14);
    let s0 = reduced_state(&mut r);
    let u = input(&mut r);
    let a = final_state(scheme, retraction, dts[0], &s0, &u);
    let b = final_state(scheme, retraction, dts[1], &s0, &u);
    let c = final_state(scheme, retraction, dts[2], &s0, &u);
    let e1 = load_distance(&a, &b);
    let e2 = load_distance(&b, &c);
    (e1 / e2).log2()
}

#[test]
fn lie_group_rk4_is_fourth_order() {
    let order = observed_order(Scheme::Rk4, Retraction::Exponential, [2e-2, 1e-2, 5e-3]);
    assert!((3.7..4.4).contains(&order), "observed order {order}");
}

#[test]
fn projected_rk4_is_fourth_order() {
    let order = observed_order(Scheme::Rk4, Retraction::Project, [2e-2, 1e-2, 5e-3]);
    assert!((3.5..4.5).contains(&order), "observed order {order}");
}

#[test]
fn lie_euler_is_first_order() {
    let order = observed_order(Scheme::Euler, Retraction::Exponential, [4e-3, 2e-3, 1e-3]);
    assert!((0.85..1.2).contains(&order), "observed order {order}");
}

#[test]
fn exponential_retraction_stays_on_manifold_without_tidying() {
    let p = PhysicalParams::reference();
    let mut r = rng(15);
    let s0 = reduced_state(&mut r);
    let u = input(&mut r);
    let c = IntegratorConfig { tidy: false, ..cfg(1e-3, 2.0) };
    let mut worst: f64 = 0.0;
    let res = simulate(&reduced_plant(p), &OpenLoop(u), &s0, 0.0, &c, |_, s, _, _| {
        worst = worst.max(s.load.r.orthogonality_error());
        for j in 0..N {
            worst = worst.max(s.links[j].q.norm_error()).max(s.quads[j].r.orthogonality_error());
        }
        Ok(())
    });
    // The open-loop system may tumble; only manifold membership matters here.
    if let Err(e) = &res {
        assert!(e.is_numerical(), "{e}");
    }
    assert!(worst < 1e-10, "manifold drift {worst:.3e}");
}

#[test]
fn held_and_per_stage_control_agree_for_open_loop() {
    let mut r = rng(16);
    let s0 = reduced_state(&mut r);
    let u = input(&mut r);
    let run = |control| {
        let c = IntegratorConfig { control, ..cfg(1e-3, 0.2) };
        simulate(&reduced_plant(PhysicalParams::reference()), &OpenLoop(u), &s0, 0.0, &c, |_, _, _, _| Ok(()))
            .unwrap()
            .final_state
    };
    assert!(load_distance(&run(ControlUpdate::Hold), &run(ControlUpdate::PerStage)) < 1e-14);
}

#[test]
fn divergence_is_reported_as_numerical_error() {
    let mut p = elastic_params();
    p.stiffness = 1e9;
    p.damping = 0.0;
    let mut r = rng(17);
    let s0 = full_state(&mut r, p.rest_length);
    let plant = FullPlant { params: p, thrust_model: ThrustModel::Direct };
    let err = simulate(&plant, &OpenLoop(ControlInput::zero()), &s0, 0.0, &cfg(1e-2, 5.0), |_, _, _, _| Ok(()))
        .unwrap_err();
    assert!(err.is_numerical(), "{err}");
}

#[test]
fn invalid_step_is_rejected() {
    let s0 = ReducedState::hover(Vec3::zeros());
    for dt in [0.0, -1e-3, f64::NAN] {
        let c = cfg(dt, 1.0);
        assert!(simulate(&reduced_plant(PhysicalParams::reference()), &OpenLoop(ControlInput::zero()), &s0, 0.0, &c, |_, _, _, _| Ok(())).is_err());
    }
}

#[test]
fn body_axis_thrust_keeps_only_the_axial_component() {
    let p = PhysicalParams::reference();
    let s = ReducedState::hover(Vec3::zeros());
    let mut u = ControlInput::zero();
    for j in 0..N {
        u.thrust[j] = Vec3::new(3.0, 0.0, 12.0);
    }
    let mut a = vec![0.0; 12 + 12 * N];
    let mut b = a.clone();
    use quadcable::integrator::Plant;
    ReducedPlant { thrust_model: ThrustModel::BodyAxis, ..reduced_plant(p.clone()) }.velocity(0.0, &s, &u, &mut a).unwrap();
    for j in 0..N {
        u.thrust[j].x = 0.0;
    }
    reduced_plant(p).velocity(0.0, &s, &u, &mut b).unwrap();
    assert_eq!(a, b);
}
