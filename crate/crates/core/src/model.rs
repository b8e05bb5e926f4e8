//! Physical parameters and state containers shared by both dynamic models.

use crate::error::{Error, Result};
use crate::manifold::{hat_mat, Mat3, RotationMatrix, UnitVector, Vec3};

/// Number of quadrotor/cable pairs.
pub const N: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalParams {
    pub m_load: f64,
    pub j_load: Mat3,
    pub m_quad: f64,
    pub j_quad: Mat3,
    /// Cable attachment points in the load body frame.
    pub attach: [Vec3; N],
    /// Unstretched cable length `L`.
    pub rest_length: f64,
    /// Cable spring constant `k` (N/m).
    pub stiffness: f64,
    /// Cable damping constant `c` (N·s/m).
    pub damping: f64,
    pub gravity: f64,
}

impl PhysicalParams {
    /// Load, quadrotor and attachment geometry of the reference four-quadrotor
    /// rig.  Quadrotor inertia and cable elasticity are not part of that data
    /// set; the values below are a typical 0.75 kg airframe and rigid-ish
    /// cables and are normally overridden by the caller.
    pub fn reference() -> Self {
        Self {
            m_load: 2.0,
            j_load: Mat3::from_diagonal(&Vec3::new(1.04, 5.0, 4.04)),
            m_quad: 0.755,
            j_quad: Mat3::from_diagonal(&Vec3::new(0.0820, 0.0845, 0.1377)),
            attach: [
                Vec3::new(0.5, 1.0, 0.1),
                Vec3::new(0.5, -1.0, 0.1),
                Vec3::new(-0.5, -1.0, 0.1),
                Vec3::new(-0.5, 1.0, 0.1),
            ],
            rest_length: 1.0,
            stiffness: 0.0,
            damping: 0.0,
            gravity: 9.81,
        }
    }

    /// Stiffness and damping from the singular-perturbation scaling `k = k̄/ε²`, `c = c̄/ε`.
    pub fn with_elastic_scaling(mut self, eps: f64, k_bar: f64, c_bar: f64) -> Result<Self> {
        if !(eps > 0.0) || !(k_bar > 0.0) || !(c_bar >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "elastic scaling requires eps > 0, k_bar > 0, c_bar >= 0 (got {eps}, {k_bar}, {c_bar})"
            )));
        }
        self.stiffness = k_bar / (eps * eps);
        self.damping = c_bar / eps;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive (got {v})")))
            }
        };
        pos("m_load", self.m_load)?;
        pos("m_quad", self.m_quad)?;
        pos("rest_length", self.rest_length)?;
        if !(self.stiffness >= 0.0 && self.stiffness.is_finite()) {
            return Err(Error::InvalidArgument("stiffness must be non-negative".into()));
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return Err(Error::InvalidArgument("damping must be non-negative".into()));
        }
        if !(self.gravity >= 0.0 && self.gravity.is_finite()) {
            return Err(Error::InvalidArgument("gravity must be non-negative".into()));
        }
        check_inertia("j_load", &self.j_load)?;
        check_inertia("j_quad", &self.j_quad)?;
        if self.attach.iter().any(|r| !r.iter().all(|x| x.is_finite())) {
            return Err(Error::InvalidArgument("attachment points must be finite".into()));
        }
        Ok(())
    }

    /// `m_L + Σ m_Q`.
    pub fn m_eff(&self) -> f64 {
        self.m_load + N as f64 * self.m_quad
    }

    /// `J_L − m_Q Σ r̂_j²`.
    pub fn j_eff(&self) -> Mat3 {
        let mut j = self.j_load;
        for r in &self.attach {
            let h = hat_mat(r);
            j -= self.m_quad * h * h;
        }
        j
    }
}

fn check_inertia(name: &str, j: &Mat3) -> Result<()> {
    if (j - j.transpose()).abs().max() > 1e-12 * j.abs().max().max(1.0) {
        return Err(Error::InvalidArgument(format!("{name} must be symmetric")));
    }
    let eig = j.symmetric_eigenvalues();
    if !(eig.min() > 0.0) {
        return Err(Error::InvalidArgument(format!("{name} must be positive definite")));
    }
    Ok(())
}

/// Pose and twist of the rigid load.  `omega` is expressed in the body frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoadState {
    pub x: Vec3,
    pub v: Vec3,
    pub r: RotationMatrix,
    pub omega: Vec3,
}

impl LoadState {
    pub fn at_rest(x: Vec3) -> Self {
        Self { x, v: Vec3::zeros(), r: RotationMatrix::identity(), omega: Vec3::zeros() }
    }
}

/// Direction of a cable (from the quadrotor towards the load) and its spatial angular velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkState {
    pub q: UnitVector,
    pub omega: Vec3,
}

impl LinkState {
    pub fn hanging() -> Self {
        Self { q: UnitVector::minus_e3(), omega: Vec3::zeros() }
    }
}

/// An elastic cable: direction, angular velocity, length and length rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CableState {
    pub q: UnitVector,
    pub omega: Vec3,
    pub length: f64,
    pub length_rate: f64,
}

/// Attitude and body angular velocity of one quadrotor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadAttitude {
    pub r: RotationMatrix,
    pub omega: Vec3,
}

impl Default for QuadAttitude {
    fn default() -> Self {
        Self { r: RotationMatrix::identity(), omega: Vec3::zeros() }
    }
}

/// State of the elastic-cable model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullState {
    pub load: LoadState,
    pub cables: [CableState; N],
    pub quads: [QuadAttitude; N],
}

/// State of the inelastic (rigid-cable) model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedState {
    pub load: LoadState,
    pub links: [LinkState; N],
    pub quads: [QuadAttitude; N],
}

/// Thrust vectors `u_j` (world frame) and body moments `M_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlInput {
    pub thrust: [Vec3; N],
    pub moment: [Vec3; N],
}

impl ControlInput {
    pub fn zero() -> Self {
        Self { thrust: [Vec3::zeros(); N], moment: [Vec3::zeros(); N] }
    }

    pub fn is_finite(&self) -> bool {
        self.thrust.iter().chain(self.moment.iter()).all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// Translational and angular acceleration of the load.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoadAccel {
    pub v_dot: Vec3,
    pub omega_dot: Vec3,
}

impl LoadAccel {
    pub fn zero() -> Self {
        Self { v_dot: Vec3::zeros(), omega_dot: Vec3::zeros() }
    }
}

/// Slow variables seen by the controller; every model exposes this view.
pub trait SlowView {
    fn slow(&self) -> ReducedState;
}

impl SlowView for ReducedState {
    fn slow(&self) -> ReducedState {
        *self
    }
}

impl SlowView for FullState {
    fn slow(&self) -> ReducedState {
        ReducedState {
            load: self.load,
            links: self.cables.map(|c| LinkState { q: c.q, omega: c.omega }),
            quads: self.quads,
        }
    }
}

/// Tolerance on `q·ω` when validating cable states.
const PERP_TOL: f64 = 1e-6;

fn check_load(load: &LoadState) -> Result<()> {
    let finite = load.x.iter().chain(load.v.iter()).chain(load.omega.iter()).all(|x| x.is_finite());
    if !finite {
        return Err(Error::InvalidState("load state has non-finite entries".into()));
    }
    if load.r.orthogonality_error() > 1e-6 {
        return Err(Error::InvalidState("load attitude is not a rotation".into()));
    }
    Ok(())
}

fn check_link(j: usize, q: &UnitVector, w: &Vec3) -> Result<()> {
    if q.norm_error() > 1e-6 || !w.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidState(format!("cable {j}: invalid direction or rate")));
    }
    let par = q.as_vec().dot(w);
    if par.abs() > PERP_TOL * (1.0 + w.norm()) {
        return Err(Error::InvalidState(format!(
            "cable {j}: angular velocity not perpendicular to cable (q.w = {par:.3e})"
        )));
    }
    Ok(())
}

fn check_quads(quads: &[QuadAttitude; N]) -> Result<()> {
    for (j, a) in quads.iter().enumerate() {
        if a.r.orthogonality_error() > 1e-6 || !a.omega.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidState(format!("quadrotor {j}: invalid attitude")));
        }
    }
    Ok(())
}

impl FullState {
    pub fn validate(&self) -> Result<()> {
        check_load(&self.load)?;
        for (j, c) in self.cables.iter().enumerate() {
            check_link(j, &c.q, &c.omega)?;
            if !(c.length > 0.0) || !c.length_rate.is_finite() {
                return Err(Error::InvalidState(format!(
                    "cable {j}: length must be positive (got {})",
                    c.length
                )));
            }
        }
        check_quads(&self.quads)
    }

    /// Rigid-cable embedding with all lengths at rest.
    pub fn from_reduced(s: &ReducedState, rest_length: f64) -> Self {
        Self {
            load: s.load,
            cables: s.links.map(|l| CableState { q: l.q, omega: l.omega, length: rest_length, length_rate: 0.0 }),
            quads: s.quads,
        }
    }
}

impl ReducedState {
    pub fn validate(&self) -> Result<()> {
        check_load(&self.load)?;
        for (j, l) in self.links.iter().enumerate() {
            check_link(j, &l.q, &l.omega)?;
        }
        check_quads(&self.quads)
    }

    /// Load at rest at `x` with every cable hanging straight down.
    pub fn hover(x: Vec3) -> Self {
        Self { load: LoadState::at_rest(x), links: [LinkState::hanging(); N], quads: [QuadAttitude::default(); N] }
    }
}

/// Quadrotor positions `x_Q = x_L + R_L r_j − l_j q_j`.
pub fn quad_positions(load: &LoadState, attach: &[Vec3; N], q: &[UnitVector; N], lengths: &[f64; N]) -> [Vec3; N] {
    std::array::from_fn(|j| load.x + load.r.apply(&attach[j]) - lengths[j] * q[j].as_vec())
}

/// Quadrotor velocities `ẋ_Q = v_L + R_L Ω^ r_j − l̇_j q_j − l_j ω_j × q_j`.
pub fn quad_velocities(
    load: &LoadState,
    attach: &[Vec3; N],
    q: &[UnitVector; N],
    omega: &[Vec3; N],
    lengths: &[f64; N],
    rates: &[f64; N],
) -> [Vec3; N] {
    std::array::from_fn(|j| {
        load.v + load.r.apply(&load.omega.cross(&attach[j]))
            - rates[j] * q[j].as_vec()
            - lengths[j] * omega[j].cross(q[j].as_vec())
    })
}
