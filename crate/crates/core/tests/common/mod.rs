#![allow(dead_code)]

use nalgebra::Matrix3;
use quadcable::manifold::so3_exp;
use quadcable::{
    CableState, ControlInput, FullState, LinkState, LoadState, PhysicalParams, QuadAttitude, ReducedState,
    UnitVector, Vec3, N,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vec3(r: &mut impl Rng, scale: f64) -> Vec3 {
    Vec3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * scale
}

pub fn unit(r: &mut impl Rng) -> UnitVector {
    loop {
        let v = vec3(r, 1.0);
        if v.norm() > 0.2 {
            return UnitVector::normalize(v, 0.0).unwrap();
        }
    }
}

/// Unit vector in the lower hemisphere, at most `max_tilt` from −e3.
pub fn hanging_unit(r: &mut impl Rng, max_tilt: f64) -> UnitVector {
    let axis = Vec3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), 0.0);
    let axis = if axis.norm() > 1e-3 { axis.normalize() } else { Vec3::x() };
    let q = so3_exp(&(axis * r.gen_range(0.0..max_tilt))).apply(&-Vec3::z());
    UnitVector::normalize(q, 0.0).unwrap()
}

pub fn rotation(r: &mut impl Rng, max_angle: f64) -> quadcable::RotationMatrix {
    let v = vec3(r, 1.0);
    so3_exp(&(v.normalize() * r.gen_range(0.0..max_angle)))
}

pub fn perp(q: &UnitVector, v: Vec3) -> Vec3 {
    let qv = q.as_vec();
    v - qv * qv.dot(&v)
}

pub fn load(r: &mut impl Rng) -> LoadState {
    LoadState { x: vec3(r, 3.0), v: vec3(r, 1.0), r: rotation(r, 1.0), omega: vec3(r, 0.5) }
}

pub fn quads(r: &mut impl Rng) -> [QuadAttitude; N] {
    std::array::from_fn(|_| QuadAttitude { r: rotation(r, 0.5), omega: vec3(r, 1.0) })
}

pub fn reduced_state(r: &mut impl Rng) -> ReducedState {
    let load = load(r);
    let links = std::array::from_fn(|_| {
        let q = hanging_unit(r, 1.0);
        let w = perp(&q, vec3(r, 1.0));
        LinkState { q, omega: w }
    });
    ReducedState { load, links, quads: quads(r) }
}

pub fn full_state(r: &mut impl Rng, rest: f64) -> FullState {
    let s = reduced_state(r);
    FullState {
        load: s.load,
        cables: std::array::from_fn(|j| CableState {
            q: s.links[j].q,
            omega: s.links[j].omega,
            length: rest * r.gen_range(0.9..1.1),
            length_rate: r.gen_range(-0.3..0.3),
        }),
        quads: s.quads,
    }
}

pub fn input(r: &mut impl Rng) -> ControlInput {
    ControlInput {
        thrust: std::array::from_fn(|_| Vec3::new(0.0, 0.0, 12.0) + vec3(r, 4.0)),
        moment: std::array::from_fn(|_| vec3(r, 0.1)),
    }
}

pub fn elastic_params() -> PhysicalParams {
    let mut p = PhysicalParams::reference();
    p.stiffness = 800.0;
    p.damping = 6.0;
    p
}

pub fn hat(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}
