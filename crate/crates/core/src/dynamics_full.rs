//! Elastic-cable model: load, four cables with stretch, four quadrotor attitudes.
//!
//! The quadrotor translational equations are eliminated in favour of the cable
//! coordinates, which leaves the load force and moment balances coupled to the
//! cable accelerations.  Both balances are affine in `(v̇_L, Ω̇_L)`; they are
//! assembled column by column and solved as one 6×6 system.

use nalgebra::{Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::manifold::Vec3;
use crate::model::{
    quad_positions, quad_velocities, ControlInput, FullState, LoadAccel, LoadState, PhysicalParams, N,
};

/// Condition-number ceiling for the load coupling matrix.
pub const MAX_COUPLING_CONDITION: f64 = 1e12;

/// Radial behaviour of one cable.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Radial {
    /// Stretchable cable; `s = −T/m_Q` is the tension acceleration.
    Elastic { length: f64, rate: f64, s: f64 },
    /// Inextensible cable of fixed length.
    Rigid { length: f64 },
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct CableInput {
    pub q: Vec3,
    pub w: Vec3,
    pub radial: Radial,
    /// Additive term in the cable angular acceleration (already perpendicular to `q`).
    pub extra_wdot: Vec3,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct CableResponse {
    pub omega_dot: Vec3,
    pub length_accel: f64,
    /// Second derivative of `l q`.
    pub zeta_ddot: Vec3,
}

/// Cable response given `a = v̇ + g e3 + R(Ω^² + Ω̇^) r`, i.e. the attachment-point
/// acceleration offset by gravity.
#[inline]
pub(crate) fn cable_response(c: &CableInput, a: &Vec3, u: &Vec3, m_quad: f64) -> CableResponse {
    let w = a - u / m_quad;
    let q = c.q;
    let wxq = c.w.cross(&q);
    let centripetal = c.w.cross(&wxq);
    match c.radial {
        Radial::Elastic { length, rate, s } => {
            let l_dd = length * c.w.norm_squared() + q.dot(&w) + s;
            let omega_dot = (q.cross(&w) - 2.0 * rate * c.w) / length + c.extra_wdot;
            let q_dd = omega_dot.cross(&q) + centripetal;
            CableResponse {
                omega_dot,
                length_accel: l_dd,
                zeta_ddot: l_dd * q + 2.0 * rate * wxq + length * q_dd,
            }
        }
        Radial::Rigid { length } => {
            let omega_dot = q.cross(&w) / length + c.extra_wdot;
            let q_dd = omega_dot.cross(&q) + centripetal;
            CableResponse { omega_dot, length_accel: 0.0, zeta_ddot: length * q_dd }
        }
    }
}

/// Residual of the load force and moment balances at a trial `(v̇, Ω̇)`.
fn coupling_residual(
    z: &Vector6<f64>,
    load: &LoadState,
    cables: &[CableInput; N],
    u: &[Vec3; N],
    p: &PhysicalParams,
    j_eff: &nalgebra::Matrix3<f64>,
    extra_force: &Vec3,
    extra_moment: &Vec3,
    out: Option<&mut [CableResponse; N]>,
) -> Vector6<f64> {
    let v_dot = Vec3::new(z[0], z[1], z[2]);
    let o_dot = Vec3::new(z[3], z[4], z[5]);
    let ge3 = Vec3::new(0.0, 0.0, p.gravity);
    let om = &load.omega;
    let mut sum_f = Vec3::zeros();
    let mut sum_m = Vec3::zeros();
    let mut responses = [CableResponse { omega_dot: Vec3::zeros(), length_accel: 0.0, zeta_ddot: Vec3::zeros() }; N];
    for j in 0..N {
        let r = &p.attach[j];
        let rot = load.r.apply(&(om.cross(&om.cross(r)) + o_dot.cross(r)));
        let a = v_dot + ge3 + rot;
        let resp = cable_response(&cables[j], &a, &u[j], p.m_quad);
        sum_f += u[j] + p.m_quad * resp.zeta_ddot - p.m_quad * rot;
        let inner = -ge3 - v_dot + resp.zeta_ddot + u[j] / p.m_quad;
        sum_m += p.m_quad * r.cross(&load.r.apply_transpose(&inner));
        responses[j] = resp;
    }
    if let Some(o) = out {
        *o = responses;
    }
    let rf = p.m_eff() * (v_dot + ge3) - sum_f - extra_force;
    let rm = j_eff * o_dot + om.cross(&(j_eff * om)) - sum_m - extra_moment;
    Vector6::new(rf.x, rf.y, rf.z, rm.x, rm.y, rm.z)
}

/// Solves the coupled load/cable accelerations.
pub(crate) fn solve_coupled(
    load: &LoadState,
    cables: &[CableInput; N],
    u: &[Vec3; N],
    p: &PhysicalParams,
    extra_force: &Vec3,
    extra_moment: &Vec3,
) -> Result<(LoadAccel, [CableResponse; N])> {
    let j_eff = p.j_eff();
    let res = |z: &Vector6<f64>| coupling_residual(z, load, cables, u, p, &j_eff, extra_force, extra_moment, None);
    let r0 = res(&Vector6::zeros());
    let mut a = Matrix6::zeros();
    for i in 0..6 {
        let mut e = Vector6::zeros();
        e[i] = 1.0;
        a.set_column(i, &(res(&e) - r0));
    }
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::SingularConfiguration("load coupling matrix is singular".into()))?;
    let cond = one_norm(&a) * one_norm(&inv);
    if !(cond <= MAX_COUPLING_CONDITION) {
        return Err(Error::SingularConfiguration(format!("coupling matrix condition number {cond:.3e}")));
    }
    let z = -(inv * r0);
    let mut responses = [CableResponse { omega_dot: Vec3::zeros(), length_accel: 0.0, zeta_ddot: Vec3::zeros() }; N];
    coupling_residual(&z, load, cables, u, p, &j_eff, extra_force, extra_moment, Some(&mut responses));
    if !z.iter().all(|x| x.is_finite()) {
        return Err(Error::SingularConfiguration("non-finite load acceleration".into()));
    }
    Ok((
        LoadAccel { v_dot: Vec3::new(z[0], z[1], z[2]), omega_dot: Vec3::new(z[3], z[4], z[5]) },
        responses,
    ))
}

fn one_norm(m: &Matrix6<f64>) -> f64 {
    m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max)
}

/// Quadrotor attitude dynamics `J Ω̇ = J Ω × Ω + M`.
pub fn quad_attitude_accel(j_quad: &nalgebra::Matrix3<f64>, omega: &Vec3, moment: &Vec3) -> Vec3 {
    let rhs = (j_quad * omega).cross(omega) + moment;
    j_quad.lu().solve(&rhs).unwrap_or_else(|| Vec3::repeat(f64::NAN))
}

/// Accelerations of the elastic model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullDerivative {
    pub load: LoadAccel,
    pub cable_omega_dot: [Vec3; N],
    pub length_accel: [f64; N],
    pub quad_omega_dot: [Vec3; N],
    /// Cable tensions `k(l − L) + c l̇` (positive when stretched).
    pub tension: [f64; N],
}

/// Cable tensions from the spring-damper law.
pub fn spring_tensions(state: &FullState, p: &PhysicalParams) -> [f64; N] {
    state.cables.map(|c| p.stiffness * (c.length - p.rest_length) + p.damping * c.length_rate)
}

/// Accelerations of every degree of freedom of the elastic model.
pub fn full_accelerations(state: &FullState, input: &ControlInput, p: &PhysicalParams) -> Result<FullDerivative> {
    let t = spring_tensions(state, p);
    full_accelerations_with_tensions(state, input, p, &t)
}

/// As [`full_accelerations`] but with the cable tensions supplied by the caller
/// instead of the spring-damper law.
pub fn full_accelerations_with_tensions(
    state: &FullState,
    input: &ControlInput,
    p: &PhysicalParams,
    tension: &[f64; N],
) -> Result<FullDerivative> {
    if !input.is_finite() {
        return Err(Error::InvalidArgument("control input has non-finite entries".into()));
    }
    let cables: [CableInput; N] = std::array::from_fn(|j| {
        let c = &state.cables[j];
        CableInput {
            q: *c.q.as_vec(),
            w: c.omega,
            radial: Radial::Elastic { length: c.length, rate: c.length_rate, s: -tension[j] / p.m_quad },
            extra_wdot: Vec3::zeros(),
        }
    });
    let (load, resp) = solve_coupled(&state.load, &cables, &input.thrust, p, &Vec3::zeros(), &Vec3::zeros())?;
    Ok(FullDerivative {
        load,
        cable_omega_dot: resp.map(|r| r.omega_dot),
        length_accel: resp.map(|r| r.length_accel),
        quad_omega_dot: std::array::from_fn(|j| {
            quad_attitude_accel(&p.j_quad, &state.quads[j].omega, &input.moment[j])
        }),
        tension: *tension,
    })
}

/// Kinetic, potential and total mechanical energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential
    }
}

/// Mechanical energy of the elastic model.  Gravity is counted once per body.
pub fn total_energy(state: &FullState, p: &PhysicalParams) -> Energy {
    let q = state.cables.map(|c| c.q);
    let w = state.cables.map(|c| c.omega);
    let l = state.cables.map(|c| c.length);
    let ld = state.cables.map(|c| c.length_rate);
    let xq = quad_positions(&state.load, &p.attach, &q, &l);
    let vq = quad_velocities(&state.load, &p.attach, &q, &w, &l, &ld);
    let ol = &state.load.omega;
    let mut kinetic = 0.5 * p.m_load * state.load.v.norm_squared() + 0.5 * ol.dot(&(p.j_load * ol));
    let mut potential = p.m_load * p.gravity * state.load.x.z;
    for j in 0..N {
        let oq = &state.quads[j].omega;
        kinetic += 0.5 * p.m_quad * vq[j].norm_squared() + 0.5 * oq.dot(&(p.j_quad * oq));
        potential += p.m_quad * p.gravity * xq[j].z + 0.5 * p.stiffness * (l[j] - p.rest_length).powi(2);
    }
    Energy { kinetic, potential }
}

/// Total linear momentum of load and quadrotors.
pub fn linear_momentum(state: &FullState, p: &PhysicalParams) -> Vec3 {
    let q = state.cables.map(|c| c.q);
    let w = state.cables.map(|c| c.omega);
    let l = state.cables.map(|c| c.length);
    let ld = state.cables.map(|c| c.length_rate);
    let vq = quad_velocities(&state.load, &p.attach, &q, &w, &l, &ld);
    vq.iter().fold(p.m_load * state.load.v, |acc, v| acc + p.m_quad * v)
}
