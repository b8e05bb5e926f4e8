//! Hierarchical geometric controller.
//!
//! Outer loop: load wrench → min-norm cable-force distribution → desired cable
//! directions.  Middle loop: cable attitude tracking on S² → thrust vectors.
//! Inner loop: quadrotor attitude tracking on SO(3) → body moments.

use std::cell::Cell;
use std::sync::Arc;

use nalgebra::{Matrix6, SMatrix, SVector, Vector6};

use crate::error::{Error, Result};
use crate::manifold::{
    attitude_psi, hat_mat, rotation_error, so3_exp, sphere_errors, sphere_psi, Mat3, RotationMatrix, UnitVector,
    Vec3,
};
use crate::integrator::{load_accel_of, Feedback};
use crate::model::{ControlInput, LoadAccel, LoadState, PhysicalParams, ReducedState, SlowView, N};
use crate::trajectory::{DesiredSample, DesiredTrajectory};

/// Controller gains.  `eps_att` scales the quadrotor attitude loop as `k/ε²`, `k/ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainSet {
    pub k_x: f64,
    pub k_v: f64,
    pub k_r: f64,
    pub k_omega: f64,
    pub k_q: f64,
    pub k_w: f64,
    pub k_r_quad: f64,
    pub k_omega_quad: f64,
    pub eps_att: f64,
}

impl GainSet {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("k_x", self.k_x),
            ("k_v", self.k_v),
            ("k_r", self.k_r),
            ("k_omega", self.k_omega),
            ("k_q", self.k_q),
            ("k_w", self.k_w),
            ("k_r_quad", self.k_r_quad),
            ("k_omega_quad", self.k_omega_quad),
            ("eps_att", self.eps_att),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGains(format!("{name} must be positive (got {v})")));
            }
        }
        Ok(())
    }
}

/// Feedforward cable-force allocation for a fixed attachment geometry.
///
/// `P = [I … I; r̂_1 … r̂_4]` (6×12); the min-norm solution of `P μ = w` is
/// `Pᵀ(PPᵀ)⁻¹ w`.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationGeometry {
    pub p: SMatrix<f64, 6, 12>,
    pub p_pinv: SMatrix<f64, 12, 6>,
    pub lambda_min_ppt: f64,
}

impl AllocationGeometry {
    pub fn new(attach: &[Vec3; N]) -> Result<Self> {
        let mut p = SMatrix::<f64, 6, 12>::zeros();
        for (j, r) in attach.iter().enumerate() {
            p.fixed_view_mut::<3, 3>(0, 3 * j).copy_from(&Mat3::identity());
            p.fixed_view_mut::<3, 3>(3, 3 * j).copy_from(&hat_mat(r));
        }
        let ppt: Matrix6<f64> = p * p.transpose();
        let eig = ppt.symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        if !(lo > 1e-10 * hi) {
            return Err(Error::AllocationInfeasible(format!(
                "attachment geometry cannot generate every wrench (lambda_min(PP^T) = {lo:.3e})"
            )));
        }
        let inv = ppt
            .try_inverse()
            .ok_or_else(|| Error::AllocationInfeasible("PP^T is singular".into()))?;
        Ok(Self { p_pinv: p.transpose() * inv, p, lambda_min_ppt: lo })
    }
}

/// Load wrench targets `(F̃, M̃)`; `M̃` is expressed in the load body frame.
pub fn wrench_targets(
    load: &LoadState,
    des: &DesiredSample,
    gains: &GainSet,
    p: &PhysicalParams,
) -> (Vec3, Vec3, LoadErrors) {
    let e = load_errors(load, des);
    let f = p.m_load * (-gains.k_x * e.e_x - gains.k_v * e.e_v + des.a + Vec3::new(0.0, 0.0, p.gravity));
    let rtrd = load.r.matrix().tr_mul(des.r.matrix());
    let wd = rtrd * des.omega;
    let m = -gains.k_r * e.e_r - gains.k_omega * e.e_omega + wd.cross(&(p.j_load * wd))
        + p.j_load * (rtrd * des.omega_dot);
    (f, m, e)
}

/// Load tracking errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoadErrors {
    pub e_x: Vec3,
    pub e_v: Vec3,
    pub e_r: Vec3,
    pub e_omega: Vec3,
    pub psi_r: f64,
}

pub fn load_errors(load: &LoadState, des: &DesiredSample) -> LoadErrors {
    LoadErrors {
        e_x: load.x - des.x,
        e_v: load.v - des.v,
        e_r: rotation_error(&load.r, &des.r),
        e_omega: load.omega - load.r.matrix().tr_mul(des.r.matrix()) * des.omega,
        psi_r: attitude_psi(&load.r, &des.r),
    }
}

/// Min-norm cable forces `μ̃ = diag(R_L) Pᵀ(PPᵀ)⁻¹ [R_Lᵀ F̃; M̃]`.
pub fn mu_distribution(f: &Vec3, m: &Vec3, r_load: &RotationMatrix, geom: &AllocationGeometry) -> [Vec3; N] {
    let fb = r_load.apply_transpose(f);
    let w = Vector6::new(fb.x, fb.y, fb.z, m.x, m.y, m.z);
    let mu: SVector<f64, 12> = geom.p_pinv * w;
    std::array::from_fn(|j| r_load.apply(&Vec3::new(mu[3 * j], mu[3 * j + 1], mu[3 * j + 2])))
}

/// `q̃_j = −μ̃_j/‖μ̃_j‖`.
pub fn desired_cable_attitudes(mu: &[Vec3; N], mu_min: f64) -> Result<[UnitVector; N]> {
    let mut out = [UnitVector::minus_e3(); N];
    for (j, m) in mu.iter().enumerate() {
        let n = m.norm();
        if !(n >= mu_min) {
            return Err(Error::DegenerateAllocation { cable: j, norm: n });
        }
        out[j] = UnitVector::new_unchecked(-m / n);
    }
    Ok(out)
}

/// Load accelerations produced by cable forces `μ_j = q_j q_jᵀ μ̃_j`.
pub fn closed_loop_load_accel(load: &LoadState, mu_par: &[Vec3; N], p: &PhysicalParams) -> LoadAccel {
    let mut f = Vec3::zeros();
    let mut m = Vec3::zeros();
    for j in 0..N {
        f += mu_par[j];
        m += p.attach[j].cross(&load.r.apply_transpose(&mu_par[j]));
    }
    let om = &load.omega;
    let omega_dot = p.j_load.lu().solve(&(m - om.cross(&(p.j_load * om)))).unwrap_or_else(|| Vec3::repeat(f64::NAN));
    LoadAccel { v_dot: f / p.m_load - Vec3::new(0.0, 0.0, p.gravity), omega_dot }
}

/// Parallel and normal thrust components for one cable.
///
/// `a` is `v̇_L + g e3 + R_L Ω^² r_j − R_L r̂_j Ω̇_L`.
#[allow(clippy::too_many_arguments)]
pub fn cable_controls(
    q: &UnitVector,
    omega: &Vec3,
    mu_par: &Vec3,
    e_q: &Vec3,
    e_w: &Vec3,
    omega_d: &Vec3,
    omega_d_dot: &Vec3,
    a: &Vec3,
    gains: &GainSet,
    p: &PhysicalParams,
) -> (Vec3, Vec3) {
    let qv = q.as_vec();
    let (mq, l) = (p.m_quad, p.rest_length);
    let u_par = mu_par + mq * l * omega.norm_squared() * qv + mq * qv * qv.dot(a);
    let q_dot = omega.cross(qv);
    let inner = -gains.k_q * e_q - gains.k_w * e_w - qv.dot(omega_d) * q_dot - qv.cross(&qv.cross(omega_d_dot));
    let u_perp = mq * l * qv.cross(&inner) - mq * qv.cross(&qv.cross(a));
    (u_par, u_perp)
}

/// `R̃_j = [b1, b3 × b1, b3]` with `b3 = u/‖u‖` and `b1` the projection of the
/// heading `[cos ψ, sin ψ, 0]` onto the plane normal to `b3`.
pub fn desired_quad_attitude(u: &Vec3, yaw: f64) -> Result<RotationMatrix> {
    let n = u.norm();
    if !(n > 1e-9) {
        return Err(Error::DegenerateAttitude(format!("thrust norm {n:.3e} too small")));
    }
    let b3 = u / n;
    let (s, c) = yaw.sin_cos();
    let heading = Vec3::new(c, s, 0.0);
    let mut b1 = heading - b3 * b3.dot(&heading);
    if b1.norm() < 1e-6 {
        let alt = Vec3::new(-s, c, 0.0);
        b1 = alt - b3 * b3.dot(&alt);
    }
    let b1 = b1.normalize();
    let b2 = b3.cross(&b1);
    Ok(RotationMatrix::new_unchecked(Mat3::from_columns(&[b1, b2, b3])))
}

/// Quadrotor attitude errors and moment
/// `M = −(k_R/ε²) e_R − (k_Ω/ε) e_Ω + Ω × JΩ − J(Ω^ RᵀR̃ Ω̃ − RᵀR̃ Ω̃̇)`.
#[allow(clippy::too_many_arguments)]
pub fn moment_control(
    r: &RotationMatrix,
    omega: &Vec3,
    rd: &RotationMatrix,
    omega_d: &Vec3,
    omega_d_dot: &Vec3,
    gains: &GainSet,
    j_quad: &Mat3,
) -> (Vec3, Vec3, Vec3) {
    let e_r = rotation_error(r, rd);
    let rtrd = r.matrix().tr_mul(rd.matrix());
    let e_w = omega - rtrd * omega_d;
    let eps = gains.eps_att;
    let m = -(gains.k_r_quad / (eps * eps)) * e_r - (gains.k_omega_quad / eps) * e_w + omega.cross(&(j_quad * omega))
        - j_quad * (omega.cross(&(rtrd * omega_d)) - rtrd * omega_d_dot);
    (m, e_r, e_w)
}

/// Tuning knobs that are not gains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControllerConfig {
    /// Minimum `‖μ̃_j‖` below which the cable direction is undefined.
    pub mu_min: f64,
    /// Time step of the central differences used for `ω̃_j`, `ω̃̇_j`.
    pub fd_step: f64,
    /// Heading used when building quadrotor attitude commands.
    pub yaw: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self { mu_min: 1e-6, fd_step: 1e-4, yaw: 0.0 }
    }
}

/// All tracking errors at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackingErrors {
    pub load: LoadErrors,
    pub e_q: [Vec3; N],
    pub e_w: [Vec3; N],
    pub psi_q: [f64; N],
    pub e_r_quad: [Vec3; N],
    pub e_omega_quad: [Vec3; N],
    pub psi_r_quad: [f64; N],
}

/// Intermediate quantities of one controller evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub force: Vec3,
    pub moment: Vec3,
    pub mu: [Vec3; N],
    pub q_d: [UnitVector; N],
    pub omega_d: [Vec3; N],
    pub omega_d_dot: [Vec3; N],
    pub u_par: [Vec3; N],
    pub u_perp: [Vec3; N],
    pub r_quad_d: [RotationMatrix; N],
    /// Load acceleration used for the feedforward terms.
    pub accel: LoadAccel,
    /// Closed-loop prediction of the load acceleration from the cable forces.
    pub accel_predicted: LoadAccel,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlOutput {
    pub input: ControlInput,
    pub errors: TrackingErrors,
    pub diagnostics: Diagnostics,
}

/// The full controller bound to a trajectory.
#[derive(Clone)]
pub struct GeometricController {
    pub params: PhysicalParams,
    pub gains: GainSet,
    pub geometry: AllocationGeometry,
    pub config: ControllerConfig,
    pub trajectory: Arc<dyn DesiredTrajectory>,
}

impl std::fmt::Debug for GeometricController {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeometricController").field("gains", &self.gains).field("config", &self.config).finish()
    }
}

impl GeometricController {
    pub fn new(
        params: PhysicalParams,
        gains: GainSet,
        config: ControllerConfig,
        trajectory: Arc<dyn DesiredTrajectory>,
    ) -> Result<Self> {
        params.validate()?;
        gains.validate()?;
        if !(config.fd_step > 0.0) || !(config.mu_min > 0.0) {
            return Err(Error::InvalidArgument("fd_step and mu_min must be positive".into()));
        }
        let geometry = AllocationGeometry::new(&params.attach)?;
        Ok(Self { params, gains, geometry, config, trajectory })
    }

    /// `μ̃` for a load state at time `t`.
    fn mu_at(&self, t: f64, load: &LoadState) -> [Vec3; N] {
        let des = self.trajectory.sample(t);
        let (f, m, _) = wrench_targets(load, &des, &self.gains, &self.params);
        mu_distribution(&f, &m, &load.r, &self.geometry)
    }

    fn q_d_at(&self, t: f64, load: &LoadState) -> Result<[UnitVector; N]> {
        desired_cable_attitudes(&self.mu_at(t, load), self.config.mu_min)
    }

    /// Desired cable angular velocities and accelerations by central differences
    /// of `q̃_j` along the predicted closed-loop load motion.
    ///
    /// A first pass with a linear extrapolation of the load yields `μ̃̇`, from
    /// which the load jerk is predicted; the second pass uses the quadratic
    /// extrapolation for both first and second differences.
    pub fn desired_cable_rates(
        &self,
        t: f64,
        load: &LoadState,
        mu: &[Vec3; N],
        q_d: &[UnitVector; N],
        accel: &LoadAccel,
        links: &[(UnitVector, Vec3); N],
    ) -> Result<([Vec3; N], [Vec3; N])> {
        let h = self.config.fd_step;
        let p = &self.params;
        let shift = |s: f64, jerk: Option<(&Vec3, &Vec3)>| -> LoadState {
            let (jv, jo) = jerk.map(|(a, b)| (*a, *b)).unwrap_or((Vec3::zeros(), Vec3::zeros()));
            let s2 = 0.5 * s * s;
            LoadState {
                x: load.x + s * load.v + s2 * accel.v_dot,
                v: load.v + s * accel.v_dot + s2 * jv,
                r: load.r.compose(&so3_exp(&(s * load.omega + s2 * accel.omega_dot))),
                omega: load.omega + s * accel.omega_dot + s2 * jo,
            }
        };
        // First pass: μ̃̇ from a linear extrapolation.
        let (lp, lm) = (shift(h, None), shift(-h, None));
        let mu_p = self.mu_at(t + h, &lp);
        let mu_m = self.mu_at(t - h, &lm);
        let mut mu_par_dot = [Vec3::zeros(); N];
        let mut mu_par = [Vec3::zeros(); N];
        for j in 0..N {
            let (q, w) = (links[j].0.as_vec(), &links[j].1);
            let qd = w.cross(q);
            let mdot = (mu_p[j] - mu_m[j]) / (2.0 * h);
            mu_par[j] = q * q.dot(&mu[j]);
            mu_par_dot[j] = qd * q.dot(&mu[j]) + q * qd.dot(&mu[j]) + q * q.dot(&mdot);
        }
        // Load jerk implied by the parallel cable forces.
        let mut f_dot = Vec3::zeros();
        let mut m_dot = Vec3::zeros();
        for j in 0..N {
            f_dot += mu_par_dot[j];
            let body = load.r.apply_transpose(&mu_par[j]);
            let body_dot = -load.omega.cross(&body) + load.r.apply_transpose(&mu_par_dot[j]);
            m_dot += p.attach[j].cross(&body_dot);
        }
        let jl = &p.j_load;
        let om = &load.omega;
        let od = &accel.omega_dot;
        let v_jerk = f_dot / p.m_load;
        let o_jerk = jl
            .lu()
            .solve(&(m_dot - od.cross(&(jl * om)) - om.cross(&(jl * od))))
            .unwrap_or_else(|| Vec3::repeat(f64::NAN));
        // Second pass.
        let (lp, lm) = (shift(h, Some((&v_jerk, &o_jerk))), shift(-h, Some((&v_jerk, &o_jerk))));
        let qp = self.q_d_at(t + h, &lp)?;
        let qm = self.q_d_at(t - h, &lm)?;
        let mut wd = [Vec3::zeros(); N];
        let mut wdd = [Vec3::zeros(); N];
        for j in 0..N {
            let q0 = q_d[j].as_vec();
            let q_dot = (qp[j].as_vec() - qm[j].as_vec()) / (2.0 * h);
            let q_ddot = (qp[j].as_vec() - 2.0 * q0 + qm[j].as_vec()) / (h * h);
            wd[j] = q0.cross(&q_dot);
            wdd[j] = q0.cross(&q_ddot);
        }
        Ok((wd, wdd))
    }

    /// Evaluates the full control law.  `accel` overrides the closed-loop
    /// prediction of the load acceleration used in the feedforward terms.
    pub fn control(&self, t: f64, s: &ReducedState, accel: Option<LoadAccel>) -> Result<ControlOutput> {
        self.control_inner(t, s, accel, &LoadAccel::zero())
    }

    /// Control law whose feedforward acceleration is the closed-loop
    /// prediction plus `residual`, a measured correction.
    pub fn control_with_residual(&self, t: f64, s: &ReducedState, residual: &LoadAccel) -> Result<ControlOutput> {
        self.control_inner(t, s, None, residual)
    }

    fn control_inner(
        &self,
        t: f64,
        s: &ReducedState,
        accel: Option<LoadAccel>,
        residual: &LoadAccel,
    ) -> Result<ControlOutput> {
        let p = &self.params;
        let g = &self.gains;
        let des = self.trajectory.sample(t);
        let (force, moment, load_err) = wrench_targets(&s.load, &des, g, p);
        let mu = mu_distribution(&force, &moment, &s.load.r, &self.geometry);
        let q_d = desired_cable_attitudes(&mu, self.config.mu_min)?;
        let mu_par: [Vec3; N] = std::array::from_fn(|j| {
            let q = s.links[j].q.as_vec();
            q * q.dot(&mu[j])
        });
        let accel_predicted = closed_loop_load_accel(&s.load, &mu_par, p);
        let base = accel.unwrap_or(accel_predicted);
        let accel =
            LoadAccel { v_dot: base.v_dot + residual.v_dot, omega_dot: base.omega_dot + residual.omega_dot };
        let links = s.links.map(|l| (l.q, l.omega));
        let (omega_d, omega_d_dot) = self.desired_cable_rates(t, &s.load, &mu, &q_d, &accel, &links)?;

        let ge3 = Vec3::new(0.0, 0.0, p.gravity);
        let om = &s.load.omega;
        let mut thrust = [Vec3::zeros(); N];
        let mut moments = [Vec3::zeros(); N];
        let mut e_q = [Vec3::zeros(); N];
        let mut e_w = [Vec3::zeros(); N];
        let mut psi_q = [0.0; N];
        let mut e_rq = [Vec3::zeros(); N];
        let mut e_wq = [Vec3::zeros(); N];
        let mut psi_rq = [0.0; N];
        let mut u_par = [Vec3::zeros(); N];
        let mut u_perp = [Vec3::zeros(); N];
        let mut r_quad_d = [RotationMatrix::identity(); N];
        for j in 0..N {
            let link = &s.links[j];
            let (eq, ew) = sphere_errors(&link.q, &link.omega, &q_d[j], &omega_d[j]);
            let r = &p.attach[j];
            let a = accel.v_dot + ge3 + s.load.r.apply(&(om.cross(&om.cross(r)) + accel.omega_dot.cross(r)));
            let (up, un) = cable_controls(&link.q, &link.omega, &mu_par[j], &eq, &ew, &omega_d[j], &omega_d_dot[j], &a, g, p);
            let u = up + un;
            let rd = desired_quad_attitude(&u, self.config.yaw)?;
            let quad = &s.quads[j];
            let (m, erq, ewq) = moment_control(&quad.r, &quad.omega, &rd, &Vec3::zeros(), &Vec3::zeros(), g, &p.j_quad);
            thrust[j] = u;
            moments[j] = m;
            e_q[j] = eq;
            e_w[j] = ew;
            psi_q[j] = sphere_psi(&link.q, &q_d[j]);
            e_rq[j] = erq;
            e_wq[j] = ewq;
            psi_rq[j] = attitude_psi(&quad.r, &rd);
            u_par[j] = up;
            u_perp[j] = un;
            r_quad_d[j] = rd;
        }
        let input = ControlInput { thrust, moment: moments };
        if !input.is_finite() {
            return Err(Error::NumericalBlowup { step: 0, time: t });
        }
        Ok(ControlOutput {
            input,
            errors: TrackingErrors {
                load: load_err,
                e_q,
                e_w,
                psi_q,
                e_r_quad: e_rq,
                e_omega_quad: e_wq,
                psi_r_quad: psi_rq,
            },
            diagnostics: Diagnostics {
                force,
                moment,
                mu,
                q_d,
                omega_d,
                omega_d_dot,
                u_par,
                u_perp,
                r_quad_d,
                accel,
                accel_predicted,
            },
        })
    }
}

/// Closed-loop feedback on any state with a rigid-cable projection.  The
/// elastic model is controlled through its slow variables.
impl<S: SlowView> Feedback<S> for GeometricController {
    type Info = ControlOutput;

    fn evaluate(&self, t: f64, x: &S) -> Result<(ControlInput, ControlOutput)> {
        let out = self.control(t, &x.slow(), None)?;
        Ok((out.input, out))
    }
}

/// The controller with the feedforward acceleration corrected by a low-pass
/// filtered residual between the measured and predicted load accelerations,
/// lagged by one step.  Unmodelled forces on the load (disturbances) otherwise
/// make the prediction wrong even at equilibrium, and the desired cable rates
/// then follow a load that is not moving.  The filter keeps fast cable
/// oscillations of the elastic model out of the loop.
///
/// Holds per-run state; build one per simulation.
pub struct MeasuredAccel<'a> {
    pub controller: &'a GeometricController,
    /// Filter time constant [s]; zero takes the raw residual.
    pub tau: f64,
    state: Cell<(LoadAccel, Option<f64>)>,
}

impl<'a> MeasuredAccel<'a> {
    pub fn new(controller: &'a GeometricController, tau: f64) -> Self {
        Self { controller, tau, state: Cell::new((LoadAccel::zero(), None)) }
    }

    pub fn residual(&self) -> LoadAccel {
        self.state.get().0
    }
}

impl<S: SlowView> Feedback<S> for MeasuredAccel<'_> {
    type Info = ControlOutput;

    fn evaluate(&self, t: f64, x: &S) -> Result<(ControlInput, ControlOutput)> {
        let out = self.controller.control_with_residual(t, &x.slow(), &self.residual())?;
        Ok((out.input, out))
    }

    fn observe(&self, t: f64, _x: &S, info: &ControlOutput, velocity: &[f64]) {
        let m = load_accel_of(velocity);
        let p = &info.diagnostics.accel_predicted;
        let (v_dot, omega_dot) = (m.v_dot - p.v_dot, m.omega_dot - p.omega_dot);
        if !v_dot.iter().chain(omega_dot.iter()).all(|v| v.is_finite()) {
            return;
        }
        let (r, last) = self.state.get();
        let a = match last {
            Some(t0) if self.tau > 0.0 => 1.0 - (-(t - t0).max(0.0) / self.tau).exp(),
            _ if self.tau > 0.0 => 0.0,
            _ => 1.0,
        };
        let r = LoadAccel { v_dot: r.v_dot + a * (v_dot - r.v_dot), omega_dot: r.omega_dot + a * (omega_dot - r.omega_dot) };
        self.state.set((r, Some(t)));
    }
}
