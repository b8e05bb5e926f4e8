//! Inelastic-cable model, slow manifold and boundary layer of the elastic model.

use crate::dynamics_full::{quad_attitude_accel, solve_coupled, CableInput, Radial};
use crate::error::{Error, Result};
use crate::manifold::{UnitVector, Vec3};
use crate::model::{
    CableState, ControlInput, FullState, LinkState, LoadAccel, PhysicalParams, ReducedState, N,
};

/// Additive terms in the right-hand side of the reduced dynamics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbation {
    /// Force on the load translational equation (world frame).
    pub force: Vec3,
    /// Moment on the load rotational equation (body frame).
    pub moment: Vec3,
    /// Generalized force on each cable equation; only the part normal to the
    /// cable acts, scaled by `1/(m_Q L)`.
    pub link: [Vec3; N],
}

impl Perturbation {
    pub fn zero() -> Self {
        Self { force: Vec3::zeros(), moment: Vec3::zeros(), link: [Vec3::zeros(); N] }
    }
}

/// Accelerations of the reduced model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedDerivative {
    pub load: LoadAccel,
    pub link_omega_dot: [Vec3; N],
    pub quad_omega_dot: [Vec3; N],
    /// Second derivatives `q̈_j`.
    pub link_q_ddot: [Vec3; N],
    /// Constraint tensions implied by the solution (positive when pulling).
    pub tension: [f64; N],
}

/// Accelerations of every degree of freedom of the inelastic model.
pub fn reduced_derivative(state: &ReducedState, input: &ControlInput, p: &PhysicalParams) -> Result<ReducedDerivative> {
    reduced_derivative_perturbed(state, input, p, &Perturbation::zero())
}

/// Reduced dynamics with additive perturbations.
pub fn reduced_derivative_perturbed(
    state: &ReducedState,
    input: &ControlInput,
    p: &PhysicalParams,
    delta: &Perturbation,
) -> Result<ReducedDerivative> {
    if !input.is_finite() {
        return Err(Error::InvalidArgument("control input has non-finite entries".into()));
    }
    let scale = 1.0 / (p.m_quad * p.rest_length);
    let cables: [CableInput; N] = std::array::from_fn(|j| {
        let q = *state.links[j].q.as_vec();
        let d = delta.link[j];
        CableInput {
            q,
            w: state.links[j].omega,
            radial: Radial::Rigid { length: p.rest_length },
            extra_wdot: scale * (d - q * q.dot(&d)),
        }
    });
    let (load, resp) = solve_coupled(&state.load, &cables, &input.thrust, p, &delta.force, &delta.moment)?;
    let ge3 = Vec3::new(0.0, 0.0, p.gravity);
    let om = &state.load.omega;
    let tension = std::array::from_fn(|j| {
        let r = &p.attach[j];
        let a = load.v_dot + ge3 + state.load.r.apply(&(om.cross(&om.cross(r)) + load.omega_dot.cross(r)));
        let q = cables[j].q;
        p.m_quad * q.dot(&(a - input.thrust[j] / p.m_quad - resp[j].zeta_ddot))
    });
    Ok(ReducedDerivative {
        load,
        link_omega_dot: resp.map(|r| r.omega_dot),
        link_q_ddot: resp.map(|r| r.zeta_ddot / p.rest_length),
        quad_omega_dot: std::array::from_fn(|j| {
            quad_attitude_accel(&p.j_quad, &state.quads[j].omega, &input.moment[j])
        }),
        tension,
    })
}

/// Slow-manifold stretch `y_j = h_j(x)`:
/// `y_j = −(m_Q/k̄) q_jᵀ[u_j/m_Q + L q̈_j − v̇_L − R_L(Ω^² + Ω̇^) r_j − g e3]`.
pub fn slow_manifold(
    state: &ReducedState,
    deriv: &ReducedDerivative,
    input: &ControlInput,
    p: &PhysicalParams,
    k_bar: f64,
) -> Result<[f64; N]> {
    if !(k_bar > 0.0) {
        return Err(Error::InvalidArgument("k_bar must be positive".into()));
    }
    let ge3 = Vec3::new(0.0, 0.0, p.gravity);
    let om = &state.load.omega;
    let od = &deriv.load.omega_dot;
    Ok(std::array::from_fn(|j| {
        let r = &p.attach[j];
        let rot = state.load.r.apply(&(om.cross(&om.cross(r)) + od.cross(r)));
        let bracket = input.thrust[j] / p.m_quad + p.rest_length * deriv.link_q_ddot[j] - deriv.load.v_dot - rot - ge3;
        -(p.m_quad / k_bar) * state.links[j].q.as_vec().dot(&bracket)
    }))
}

/// Boundary-layer flow in fast time: `dΔy/dτ = Δz`, `m_Q L dΔz/dτ = −c̄ Δz − k̄ Δy`.
pub fn boundary_layer_derivative(dy: f64, dz: f64, m_quad: f64, rest_length: f64, k_bar: f64, c_bar: f64) -> (f64, f64) {
    (dz, -(c_bar * dz + k_bar * dy) / (m_quad * rest_length))
}

/// Scaled fast variables `y = (l − L)/ε²`, `z = l̇/ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FastVars {
    pub y: [f64; N],
    pub z: [f64; N],
}

impl FastVars {
    pub fn zero() -> Self {
        Self { y: [0.0; N], z: [0.0; N] }
    }
}

/// Elastic state with the given slow part and fast variables.
pub fn embed(slow: &ReducedState, fast: &FastVars, eps: f64, rest_length: f64) -> Result<FullState> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let cables = std::array::from_fn(|j| {
        let l = rest_length + eps * eps * fast.y[j];
        CableState { q: slow.links[j].q, omega: slow.links[j].omega, length: l, length_rate: eps * fast.z[j] }
    });
    let s = FullState { load: slow.load, cables, quads: slow.quads };
    s.validate()?;
    Ok(s)
}

/// Inverse of [`embed`].
pub fn extract(full: &FullState, eps: f64, rest_length: f64) -> Result<(ReducedState, FastVars)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let links = full.cables.map(|c| LinkState { q: c.q, omega: c.omega });
    let fast = FastVars {
        y: full.cables.map(|c| (c.length - rest_length) / (eps * eps)),
        z: full.cables.map(|c| c.length_rate / eps),
    };
    Ok((ReducedState { load: full.load, links, quads: full.quads }, fast))
}

/// Unit-vector helper used by scenario builders: cable direction pointing from
/// the quadrotor at `x_q` to the attachment point at `x_a`.
pub fn link_direction(x_attach: &Vec3, x_quad: &Vec3) -> Result<UnitVector> {
    UnitVector::normalize(x_attach - x_quad, 1e-12)
}
