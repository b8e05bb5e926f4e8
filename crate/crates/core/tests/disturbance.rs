mod common;

use common::*;
use quadcable::certificate::{certify, gain_search, CertificateConstants, GainSearchOptions};
use quadcable::controller::GainSet;
use quadcable::disturbance::{
    bound_vector, d1_from, ultimate_bound, BoundScales, DisturbanceBounds, DisturbanceSpec, SignalTerm, VectorSignal,
};
use quadcable::dynamics_reduced::{reduced_derivative, reduced_derivative_perturbed, Perturbation};
use quadcable::{Error, PhysicalParams, Vec3, N};

#[test]
fn reference_signals() {
    let d = DisturbanceSpec::reference();
    d.validate().unwrap();
    for &t in &[0.0, 0.7, 3.3, 12.0] {
        let s = d.sample(t);
        let f = Vec3::new(0.5 * (0.43 * t).sin(), 0.5 * (0.21 * t).cos(), 0.2 * (0.75 * t).sin() - (-t).exp());
        let m = Vec3::new(0.2 + 0.45 * (3.0 * t).sin(), 0.3 - 0.65 * (1.4 * t).cos(), 0.05 * (2.1 * t).sin());
        assert!((s.force - f).norm() < 1e-15);
        assert!((s.moment - m).norm() < 1e-15);
        assert!(s.link.iter().all(|l| *l == Vec3::zeros()));
    }
    let b = d.bounds();
    assert!((b.force - Vec3::new(0.5, 0.5, 1.2).norm()).abs() < 1e-15);
    assert!((b.moment - Vec3::new(0.65, 0.95, 0.05).norm()).abs() < 1e-15);
    assert_eq!(b.link, 0.0);
    assert!(!d.is_zero());
    assert!(DisturbanceSpec::default().is_zero());
}

#[test]
fn invalid_signals_are_rejected() {
    let bad = DisturbanceSpec {
        force: VectorSignal { x: vec![SignalTerm::Decay { amp: 1.0, rate: -1.0 }], ..Default::default() },
        ..Default::default()
    };
    assert!(bad.validate().is_err());
    let bad = DisturbanceSpec { link: vec![VectorSignal::default(); N + 1], ..Default::default() };
    assert!(bad.validate().is_err());
}

fn momentum_rates(s: &quadcable::ReducedState, u: &quadcable::ControlInput, p: &PhysicalParams, d: &Perturbation) -> (Vec3, Vec3) {
    let der = reduced_derivative_perturbed(s, u, p, d).unwrap();
    let rm = s.load.r.matrix();
    let om = s.load.omega;
    let od = der.load.omega_dot;
    let mut f = p.m_load * der.load.v_dot;
    let mut h = p.m_load * s.load.x.cross(&der.load.v_dot) + rm * (om.cross(&(p.j_load * om)) + p.j_load * od);
    for j in 0..N {
        let r = p.attach[j];
        let xq = s.load.x + rm * r - p.rest_length * s.links[j].q.as_vec();
        let aq = der.load.v_dot + rm * (om.cross(&om.cross(&r)) + od.cross(&r)) - p.rest_length * der.link_q_ddot[j];
        f += p.m_quad * aq;
        h += p.m_quad * xq.cross(&aq);
    }
    (f, h)
}

#[test]
fn load_disturbances_enter_as_external_wrench() {
    let p = PhysicalParams::reference();
    let ge3 = Vec3::new(0.0, 0.0, p.gravity);
    let mut r = rng(41);
    for _ in 0..200 {
        let s = reduced_state(&mut r);
        let u = input(&mut r);
        let d = Perturbation { force: vec3(&mut r, 2.0), moment: vec3(&mut r, 1.0), link: [Vec3::zeros(); N] };
        let (f, h) = momentum_rates(&s, &u, &p, &d);
        let mut f_ext = d.force - p.m_load * ge3;
        let mut h_ext = s.load.x.cross(&(d.force - p.m_load * ge3)) + s.load.r.apply(&d.moment);
        for j in 0..N {
            let xq = s.load.x + s.load.r.apply(&p.attach[j]) - p.rest_length * s.links[j].q.as_vec();
            f_ext += u.thrust[j] - p.m_quad * ge3;
            h_ext += xq.cross(&(u.thrust[j] - p.m_quad * ge3));
        }
        assert!((f - f_ext).norm() < 1e-9);
        assert!((h - h_ext).norm() < 1e-9);
    }
}

#[test]
fn zero_perturbation_is_nominal() {
    let p = PhysicalParams::reference();
    let mut r = rng(42);
    let s = reduced_state(&mut r);
    let u = input(&mut r);
    let a = reduced_derivative(&s, &u, &p).unwrap();
    let b = reduced_derivative_perturbed(&s, &u, &p, &DisturbanceSpec::default().sample(3.0)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cable_disturbance_acts_normal_to_the_cable() {
    let p = PhysicalParams::reference();
    let mut r = rng(43);
    for _ in 0..50 {
        let s = reduced_state(&mut r);
        let u = input(&mut r);
        let mut link = [Vec3::zeros(); N];
        // A purely radial disturbance is absorbed by the constraint.
        link[1] = s.links[1].q.as_vec() * 3.0;
        let a = reduced_derivative(&s, &u, &p).unwrap();
        let b = reduced_derivative_perturbed(&s, &u, &p, &Perturbation { link, ..Perturbation::zero() }).unwrap();
        assert!((a.load.v_dot - b.load.v_dot).norm() < 1e-12);
        assert!((a.link_omega_dot[1] - b.link_omega_dot[1]).norm() < 1e-12);
        link[1] = perp(&s.links[1].q, vec3(&mut r, 3.0));
        let c = reduced_derivative_perturbed(&s, &u, &p, &Perturbation { link, ..Perturbation::zero() }).unwrap();
        assert!((a.link_omega_dot[1] - c.link_omega_dot[1]).norm() > 1e-3);
    }
}

fn certified() -> quadcable::certificate::CertificateReport {
    let p = PhysicalParams::reference();
    let g = GainSet {
        k_x: 600.0,
        k_v: 600.0,
        k_r: 1.0,
        k_omega: 1.0,
        k_q: 1.0,
        k_w: 1.0,
        k_r_quad: 60.0,
        k_omega_quad: 5.0,
        eps_att: 1.0,
    };
    let c = CertificateConstants {
        c_x: 1.0,
        c_q: 1.0,
        c_r: 1.0,
        psi_q: [1e-4; N],
        psi_r: 1e-4,
        e_xmax: 0.5,
        b: 25.0,
        c_qj: [0.5; N],
    };
    gain_search(&g, &c, &p, &GainSearchOptions::default()).unwrap()
}

#[test]
fn bound_vector_layout() {
    let b = DisturbanceBounds { force: 2.0, moment: 4.0, link: 3.0 };
    let s = BoundScales { mass: 2.0, length_r: 1.0, length_c: 1.5 };
    let e = bound_vector(0.1, 0.2, 0.3, 0.75, &b, &s);
    let expected = [0.1, 1.0, 0.2 * 3.0, 3.0, 0.3 * 3.0 / (0.75 * 1.5), 3.0 / (0.75 * 1.5)];
    for k in 0..6 {
        assert!((e[k] - expected[k]).abs() < 1e-15);
    }
}

#[test]
fn ultimate_bound_scales_inversely_with_dissipation() {
    let e = [0.1, 0.2, 0.3, 0.4, 0.0, 0.0];
    let a = d1_from(2.0, 0.5, &e, 0.01).unwrap();
    let b = d1_from(2.0, 5.0, &e, 0.01).unwrap();
    assert!((a / b - 10.0).abs() < 1e-12);
    assert!((a - 2.0 / 0.5 * 0.3 / (64.0 * 0.01)).abs() < 1e-12);
    assert!(matches!(d1_from(2.0, -1.0, &e, 0.01), Err(Error::CertificationFailed(_))));
    assert!(d1_from(2.0, 1.0, &e, 0.0).is_err());
}

#[test]
fn ultimate_bound_for_certified_gains() {
    let p = PhysicalParams::reference();
    let rep = certified();
    let b = DisturbanceSpec::reference().bounds();
    let s = BoundScales::from_params(&p);
    let eps = 0.5 * rep.lambda_min_exact();
    let u = ultimate_bound(&rep, &p, &b, &s, eps).unwrap();
    assert!(u.d1 > 0.0 && u.d1.is_finite());
    assert!(u.radius.is_finite());
    assert!((u.lambda_min_w_star - (rep.lambda_min_exact() - eps)).abs() < 1e-15);
    // Young weight beyond λ_min(𝒲) leaves 𝒲* indefinite.
    assert!(ultimate_bound(&rep, &p, &b, &s, 2.0 * rep.lambda_min_exact()).is_err());
    // Uncertified gains are rejected.
    let bad = certify(&GainSet { k_w: 1e-3, ..rep.gains }, &rep.constants, &p).unwrap();
    assert!(ultimate_bound(&bad, &p, &b, &s, 1e-6).is_err());
}
