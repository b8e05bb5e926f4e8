//! Fixed-step integration on products of R, R³, SO(3) and S².
//!
//! States are flattened into ambient coordinates (rotations as 9 row-major
//! entries) and velocities into tangent coordinates (3 per rotation or
//! sphere).  The default scheme is a Runge–Kutta–Munthe-Kaas method: stages
//! are built with the exponential map and the stage slopes are pulled back
//! through the inverse Jacobian of `exp`, so every stage and every step stays
//! on the manifold up to round-off.

use crate::dynamics_full::full_accelerations;
use crate::dynamics_reduced::reduced_derivative_perturbed;
use crate::disturbance::DisturbanceSpec;
use crate::error::{Error, Result};
use crate::manifold::{hat_mat, left_jacobian_inv, right_jacobian_inv, so3_exp, Mat3, RotationMatrix, UnitVector, Vec3};
use crate::model::{
    CableState, ControlInput, FullState, LinkState, LoadAccel, LoadState, PhysicalParams, QuadAttitude, ReducedState, N,
};

/// Geometry of one state component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Scalar,
    Vector,
    /// Rotation with body-frame rate: `Ṙ = R Ω^`.
    Rotation,
    /// Unit vector with spatial rate: `q̇ = ω × q`.
    Sphere,
}

impl Slot {
    fn coords(self) -> usize {
        match self {
            Slot::Scalar => 1,
            Slot::Vector | Slot::Sphere => 3,
            Slot::Rotation => 9,
        }
    }
    fn tangent(self) -> usize {
        match self {
            Slot::Scalar => 1,
            _ => 3,
        }
    }
}

/// A state that can be flattened for the integrator.
pub trait ManifoldState: Clone {
    fn layout() -> &'static [Slot];
    fn write_coords(&self, out: &mut Vec<f64>);
    fn read_coords(c: &[f64]) -> Self;
    /// Removes round-off drift (re-orthonormalization and similar).
    fn tidy(&mut self) {}
}

fn coord_len<S: ManifoldState>() -> usize {
    S::layout().iter().map(|s| s.coords()).sum()
}

fn tangent_len<S: ManifoldState>() -> usize {
    S::layout().iter().map(|s| s.tangent()).sum()
}

#[inline]
fn v3(c: &[f64]) -> Vec3 {
    Vec3::new(c[0], c[1], c[2])
}

#[inline]
fn m3(c: &[f64]) -> Mat3 {
    Mat3::new(c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], c[8])
}

fn push_m3(out: &mut Vec<f64>, m: &Mat3) {
    for i in 0..3 {
        for k in 0..3 {
            out.push(m[(i, k)]);
        }
    }
}

/// `x ⊕ ξ` in ambient coordinates.
fn retract(layout: &[Slot], x: &[f64], xi: &[f64], out: &mut [f64]) {
    let (mut ci, mut ti) = (0, 0);
    for s in layout {
        match s {
            Slot::Scalar => out[ci] = x[ci] + xi[ti],
            Slot::Vector => {
                for k in 0..3 {
                    out[ci + k] = x[ci + k] + xi[ti + k];
                }
            }
            Slot::Rotation => {
                let r = m3(&x[ci..]) * so3_exp(&v3(&xi[ti..])).matrix();
                for i in 0..3 {
                    for k in 0..3 {
                        out[ci + 3 * i + k] = r[(i, k)];
                    }
                }
            }
            Slot::Sphere => {
                let q = so3_exp(&v3(&xi[ti..])).matrix() * v3(&x[ci..]);
                out[ci..ci + 3].copy_from_slice(q.as_slice());
            }
        }
        ci += s.coords();
        ti += s.tangent();
    }
}

/// Pulls a stage velocity back to the algebra at `ξ`.
fn dexp_inv(layout: &[Slot], xi: &[f64], v: &mut [f64]) {
    let mut ti = 0;
    for s in layout {
        match s {
            Slot::Rotation => {
                let w = right_jacobian_inv(&v3(&xi[ti..])) * v3(&v[ti..]);
                v[ti..ti + 3].copy_from_slice(w.as_slice());
            }
            Slot::Sphere => {
                let w = left_jacobian_inv(&v3(&xi[ti..])) * v3(&v[ti..]);
                v[ti..ti + 3].copy_from_slice(w.as_slice());
            }
            _ => {}
        }
        ti += s.tangent();
    }
}

/// Ambient time derivative from tangent velocity (used by the projection scheme).
fn ambient_rate(layout: &[Slot], x: &[f64], v: &[f64], out: &mut [f64]) {
    let (mut ci, mut ti) = (0, 0);
    for s in layout {
        match s {
            Slot::Scalar => out[ci] = v[ti],
            Slot::Vector => out[ci..ci + 3].copy_from_slice(&v[ti..ti + 3]),
            Slot::Rotation => {
                let rd = m3(&x[ci..]) * hat_mat(&v3(&v[ti..]));
                for i in 0..3 {
                    for k in 0..3 {
                        out[ci + 3 * i + k] = rd[(i, k)];
                    }
                }
            }
            Slot::Sphere => {
                let qd = v3(&v[ti..]).cross(&v3(&x[ci..]));
                out[ci..ci + 3].copy_from_slice(qd.as_slice());
            }
        }
        ci += s.coords();
        ti += s.tangent();
    }
}

/// Closest point on the manifold in ambient coordinates.
fn project_coords(layout: &[Slot], x: &mut [f64]) -> Result<()> {
    let mut ci = 0;
    for s in layout {
        match s {
            Slot::Rotation => {
                let r = crate::manifold::project_so3(&m3(&x[ci..]))?;
                for i in 0..3 {
                    for k in 0..3 {
                        x[ci + 3 * i + k] = r.matrix()[(i, k)];
                    }
                }
            }
            Slot::Sphere => {
                let q = v3(&x[ci..]);
                let n = q.norm();
                if !(n > 0.0) {
                    return Err(Error::InvalidState("unit vector collapsed to zero".into()));
                }
                for k in 0..3 {
                    x[ci + k] /= n;
                }
            }
            _ => {}
        }
        ci += s.coords();
    }
    Ok(())
}

/// One Newton step of the polar iteration; quadratically removes
/// orthogonality drift near SO(3).
pub(crate) fn reorthonormalize(r: &RotationMatrix) -> RotationMatrix {
    let m = r.matrix();
    RotationMatrix::new_unchecked(0.5 * m * (3.0 * Mat3::identity() - m.tr_mul(m)))
}

pub(crate) fn renormalize(q: &UnitVector) -> UnitVector {
    UnitVector::new_unchecked(q.as_vec() / q.as_vec().norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Classical fourth-order Runge–Kutta in the Lie-algebra coordinates.
    Rk4,
    /// First-order Lie–Euler.
    Euler,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Retraction {
    /// Stages built with `exp` (Munthe-Kaas).
    Exponential,
    /// Ambient Runge–Kutta followed by projection onto the manifold.
    Project,
}

/// When the feedback law is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlUpdate {
    /// At every stage (continuous-time feedback).
    PerStage,
    /// Once per step, held over the step.
    Hold,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub retraction: Retraction,
    pub control: ControlUpdate,
    /// Remove round-off drift after every step.
    pub tidy: bool,
    /// Call the recorder every this many steps (the final step is always recorded).
    pub record_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 2e-3,
            horizon: 40.0,
            scheme: Scheme::Rk4,
            retraction: Retraction::Exponential,
            control: ControlUpdate::PerStage,
            tidy: true,
            record_every: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive (got {})", self.dt)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be non-negative (got {})", self.horizon)));
        }
        if self.horizon > 0.0 && self.dt > self.horizon {
            return Err(Error::InvalidArgument("dt exceeds the horizon".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// Open-loop or closed-loop dynamics in tangent coordinates.
pub trait Plant {
    type State: ManifoldState;
    /// Writes the tangent velocity of `x` under input `u`.
    fn velocity(&self, t: f64, x: &Self::State, u: &ControlInput, out: &mut [f64]) -> Result<()>;
}

/// A feedback law.
pub trait Feedback<S> {
    type Info;
    fn evaluate(&self, t: f64, x: &S) -> Result<(ControlInput, Self::Info)>;

    /// Called once per step, after the step, with the state and information
    /// at its start and the plant velocity produced by the applied input.
    fn observe(&self, _t: f64, _x: &S, _info: &Self::Info, _velocity: &[f64]) {}
}

/// Load acceleration read from a plant velocity.  Every concrete state
/// stores the load first, so the layout is shared.
pub fn load_accel_of(velocity: &[f64]) -> LoadAccel {
    LoadAccel { v_dot: v3(&velocity[3..]), omega_dot: v3(&velocity[9..]) }
}

/// Constant input.
#[derive(Clone, Copy, Debug)]
pub struct OpenLoop(pub ControlInput);

impl<S> Feedback<S> for OpenLoop {
    type Info = ();
    fn evaluate(&self, _t: f64, _x: &S) -> Result<(ControlInput, ())> {
        Ok((self.0, ()))
    }
}

/// Summary returned by [`simulate`].
#[derive(Clone, Debug)]
pub struct SimSummary<S> {
    pub steps: usize,
    pub final_time: f64,
    pub final_state: S,
}

/// Magnitude beyond which a state is treated as diverged.
const BLOWUP: f64 = 1e8;

struct Workspace {
    x0: Vec<f64>,
    xs: Vec<f64>,
    k: [Vec<f64>; 4],
    xi: Vec<f64>,
    amb: [Vec<f64>; 4],
    buf: Vec<f64>,
}

fn stage_velocity<P: Plant, F: Feedback<P::State>>(
    plant: &P,
    fb: &F,
    t: f64,
    x: &P::State,
    held: Option<&ControlInput>,
    out: &mut [f64],
) -> Result<()> {
    match held {
        Some(u) => plant.velocity(t, x, u, out),
        None => {
            let (u, _) = fb.evaluate(t, x)?;
            plant.velocity(t, x, &u, out)
        }
    }
}

/// Advances `x` by one step.  `u0` is the input evaluated at `(t, x)`.
fn step<P: Plant, F: Feedback<P::State>>(
    plant: &P,
    fb: &F,
    cfg: &IntegratorConfig,
    t: f64,
    x: &P::State,
    u0: &ControlInput,
    info: &F::Info,
    h: f64,
    ws: &mut Workspace,
) -> Result<P::State> {
    let layout = P::State::layout();
    ws.x0.clear();
    x.write_coords(&mut ws.x0);
    let held = match cfg.control {
        ControlUpdate::Hold => Some(u0),
        ControlUpdate::PerStage => None,
    };
    plant.velocity(t, x, u0, &mut ws.k[0])?;
    match (cfg.scheme, cfg.retraction) {
        (Scheme::Euler, Retraction::Exponential) => {
            for (d, s) in ws.xi.iter_mut().zip(&ws.k[0]) {
                *d = h * s;
            }
            retract(layout, &ws.x0, &ws.xi, &mut ws.xs);
        }
        (Scheme::Euler, Retraction::Project) => {
            ambient_rate(layout, &ws.x0, &ws.k[0], &mut ws.amb[0]);
            for i in 0..ws.xs.len() {
                ws.xs[i] = ws.x0[i] + h * ws.amb[0][i];
            }
            project_coords(layout, &mut ws.xs)?;
        }
        (Scheme::Rk4, Retraction::Exponential) => {
            let c = [0.5, 0.5, 1.0];
            for s in 0..3 {
                for (d, v) in ws.xi.iter_mut().zip(&ws.k[s]) {
                    *d = c[s] * h * v;
                }
                retract(layout, &ws.x0, &ws.xi, &mut ws.xs);
                let xs = P::State::read_coords(&ws.xs);
                let k = &mut ws.k[s + 1];
                stage_velocity(plant, fb, t + c[s] * h, &xs, held, k)?;
                dexp_inv(layout, &ws.xi, k);
            }
            for i in 0..ws.xi.len() {
                ws.xi[i] = h / 6.0 * (ws.k[0][i] + 2.0 * ws.k[1][i] + 2.0 * ws.k[2][i] + ws.k[3][i]);
            }
            retract(layout, &ws.x0, &ws.xi, &mut ws.xs);
        }
        (Scheme::Rk4, Retraction::Project) => {
            let c = [0.5, 0.5, 1.0];
            ambient_rate(layout, &ws.x0, &ws.k[0], &mut ws.amb[0]);
            for s in 0..3 {
                for i in 0..ws.xs.len() {
                    ws.xs[i] = ws.x0[i] + c[s] * h * ws.amb[s][i];
                }
                let xs = P::State::read_coords(&ws.xs);
                stage_velocity(plant, fb, t + c[s] * h, &xs, held, &mut ws.buf)?;
                ambient_rate(layout, &ws.xs, &ws.buf, &mut ws.amb[s + 1]);
            }
            for i in 0..ws.xs.len() {
                ws.xs[i] = ws.x0[i] + h / 6.0 * (ws.amb[0][i] + 2.0 * ws.amb[1][i] + 2.0 * ws.amb[2][i] + ws.amb[3][i]);
            }
            project_coords(layout, &mut ws.xs)?;
        }
    }
    fb.observe(t, x, info, &ws.k[0]);
    Ok(P::State::read_coords(&ws.xs))
}

/// Integrates the closed loop over `[t0, t0 + horizon]`.  The recorder sees
/// the state, the applied input and the feedback information at `t0` and
/// after every `record_every` steps.
pub fn simulate<P, F, R>(
    plant: &P,
    fb: &F,
    x0: &P::State,
    t0: f64,
    cfg: &IntegratorConfig,
    mut recorder: R,
) -> Result<SimSummary<P::State>>
where
    P: Plant,
    F: Feedback<P::State>,
    R: FnMut(f64, &P::State, &ControlInput, &F::Info) -> Result<()>,
{
    cfg.validate()?;
    let nc = coord_len::<P::State>();
    let nt = tangent_len::<P::State>();
    let mut ws = Workspace {
        x0: Vec::with_capacity(nc),
        xs: vec![0.0; nc],
        k: std::array::from_fn(|_| vec![0.0; nt]),
        xi: vec![0.0; nt],
        amb: std::array::from_fn(|_| vec![0.0; nc]),
        buf: vec![0.0; nt],
    };
    let n = cfg.steps();
    let mut x = x0.clone();
    let mut t = t0;
    let (mut u, mut info) = fb.evaluate(t, &x)?;
    recorder(t, &x, &u, &info)?;
    for i in 0..n {
        let mut next = step(plant, fb, cfg, t, &x, &u, &info, cfg.dt, &mut ws)?;
        if cfg.tidy {
            next.tidy();
        }
        t = t0 + (i + 1) as f64 * cfg.dt;
        ws.x0.clear();
        next.write_coords(&mut ws.x0);
        if !ws.x0.iter().all(|v| v.is_finite() && v.abs() < BLOWUP) {
            return Err(Error::NumericalBlowup { step: i + 1, time: t });
        }
        x = next;
        let eval = fb.evaluate(t, &x).map_err(|e| match e {
            Error::NumericalBlowup { .. } => Error::NumericalBlowup { step: i + 1, time: t },
            other => other,
        })?;
        u = eval.0;
        info = eval.1;
        if (i + 1) % cfg.record_every == 0 || i + 1 == n {
            recorder(t, &x, &u, &info)?;
        }
    }
    Ok(SimSummary { steps: n, final_time: t, final_state: x })
}

// ---------------------------------------------------------------------------
// Concrete states.


fn write_load(l: &LoadState, out: &mut Vec<f64>) {
    out.extend_from_slice(l.x.as_slice());
    out.extend_from_slice(l.v.as_slice());
    push_m3(out, l.r.matrix());
    out.extend_from_slice(l.omega.as_slice());
}

fn read_load(c: &[f64]) -> (LoadState, usize) {
    (
        LoadState {
            x: v3(c),
            v: v3(&c[3..]),
            r: RotationMatrix::new_unchecked(m3(&c[6..])),
            omega: v3(&c[15..]),
        },
        18,
    )
}

fn write_quads(q: &[QuadAttitude; N], out: &mut Vec<f64>) {
    for a in q {
        push_m3(out, a.r.matrix());
        out.extend_from_slice(a.omega.as_slice());
    }
}

fn read_quads(c: &[f64]) -> [QuadAttitude; N] {
    std::array::from_fn(|j| {
        let b = &c[12 * j..];
        QuadAttitude { r: RotationMatrix::new_unchecked(m3(b)), omega: v3(&b[9..]) }
    })
}

fn tidy_link(q: &mut UnitVector, w: &mut Vec3) {
    *q = renormalize(q);
    let qv = *q.as_vec();
    *w -= qv * qv.dot(w);
}

fn tidy_load_quads(load: &mut LoadState, quads: &mut [QuadAttitude; N]) {
    load.r = reorthonormalize(&load.r);
    for a in quads.iter_mut() {
        a.r = reorthonormalize(&a.r);
    }
}

static REDUCED_LAYOUT: [Slot; 4 + 2 * N + 2 * N] = {
    let mut l = [Slot::Vector; 4 + 4 * N];
    l[2] = Slot::Rotation;
    let mut j = 0;
    while j < N {
        l[4 + 2 * j] = Slot::Sphere;
        l[4 + 2 * N + 2 * j] = Slot::Rotation;
        j += 1;
    }
    l
};

impl ManifoldState for ReducedState {
    fn layout() -> &'static [Slot] {
        &REDUCED_LAYOUT
    }

    fn write_coords(&self, out: &mut Vec<f64>) {
        write_load(&self.load, out);
        for l in &self.links {
            out.extend_from_slice(l.q.as_vec().as_slice());
            out.extend_from_slice(l.omega.as_slice());
        }
        write_quads(&self.quads, out);
    }

    fn read_coords(c: &[f64]) -> Self {
        let (load, mut i) = read_load(c);
        let links = std::array::from_fn(|j| {
            let b = &c[i + 6 * j..];
            LinkState { q: UnitVector::new_unchecked(v3(b)), omega: v3(&b[3..]) }
        });
        i += 6 * N;
        Self { load, links, quads: read_quads(&c[i..]) }
    }

    fn tidy(&mut self) {
        tidy_load_quads(&mut self.load, &mut self.quads);
        for l in self.links.iter_mut() {
            tidy_link(&mut l.q, &mut l.omega);
        }
    }
}

static FULL_LAYOUT: [Slot; 4 + 4 * N + 2 * N] = {
    let mut l = [Slot::Vector; 4 + 6 * N];
    l[2] = Slot::Rotation;
    let mut j = 0;
    while j < N {
        l[4 + 4 * j] = Slot::Sphere;
        l[4 + 4 * j + 2] = Slot::Scalar;
        l[4 + 4 * j + 3] = Slot::Scalar;
        l[4 + 4 * N + 2 * j] = Slot::Rotation;
        j += 1;
    }
    l
};

impl ManifoldState for FullState {
    fn layout() -> &'static [Slot] {
        &FULL_LAYOUT
    }

    fn write_coords(&self, out: &mut Vec<f64>) {
        write_load(&self.load, out);
        for c in &self.cables {
            out.extend_from_slice(c.q.as_vec().as_slice());
            out.extend_from_slice(c.omega.as_slice());
            out.push(c.length);
            out.push(c.length_rate);
        }
        write_quads(&self.quads, out);
    }

    fn read_coords(c: &[f64]) -> Self {
        let (load, mut i) = read_load(c);
        let cables = std::array::from_fn(|j| {
            let b = &c[i + 8 * j..];
            CableState {
                q: UnitVector::new_unchecked(v3(b)),
                omega: v3(&b[3..]),
                length: b[6],
                length_rate: b[7],
            }
        });
        i += 8 * N;
        Self { load, cables, quads: read_quads(&c[i..]) }
    }

    fn tidy(&mut self) {
        tidy_load_quads(&mut self.load, &mut self.quads);
        for c in self.cables.iter_mut() {
            tidy_link(&mut c.q, &mut c.omega);
        }
    }
}

// ---------------------------------------------------------------------------
// Plants.

/// How commanded thrust vectors act on the airframes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ThrustModel {
    /// The commanded vector `u_j` is applied as is.
    #[default]
    Direct,
    /// Only the component along the body axis `R_j e3` is produced.
    BodyAxis,
}

fn applied_input(model: ThrustModel, quads: &[QuadAttitude; N], u: &ControlInput) -> ControlInput {
    match model {
        ThrustModel::Direct => *u,
        ThrustModel::BodyAxis => ControlInput {
            thrust: std::array::from_fn(|j| {
                let b3 = quads[j].r.column(2);
                b3 * b3.dot(&u.thrust[j])
            }),
            moment: u.moment,
        },
    }
}

fn write_load_velocity(l: &LoadState, v_dot: &Vec3, o_dot: &Vec3, out: &mut [f64]) {
    out[0..3].copy_from_slice(l.v.as_slice());
    out[3..6].copy_from_slice(v_dot.as_slice());
    out[6..9].copy_from_slice(l.omega.as_slice());
    out[9..12].copy_from_slice(o_dot.as_slice());
}

fn write_quad_velocity(quads: &[QuadAttitude; N], od: &[Vec3; N], out: &mut [f64]) {
    for j in 0..N {
        out[6 * j..6 * j + 3].copy_from_slice(quads[j].omega.as_slice());
        out[6 * j + 3..6 * j + 6].copy_from_slice(od[j].as_slice());
    }
}

/// Inelastic model, optionally with additive disturbances.
#[derive(Clone, Debug)]
pub struct ReducedPlant {
    pub params: PhysicalParams,
    pub disturbance: Option<DisturbanceSpec>,
    pub thrust_model: ThrustModel,
}

impl Plant for ReducedPlant {
    type State = ReducedState;

    fn velocity(&self, t: f64, x: &ReducedState, u: &ControlInput, out: &mut [f64]) -> Result<()> {
        let u = applied_input(self.thrust_model, &x.quads, u);
        let delta = self
            .disturbance
            .as_ref()
            .map(|d| d.sample(t))
            .unwrap_or_else(crate::dynamics_reduced::Perturbation::zero);
        let d = reduced_derivative_perturbed(x, &u, &self.params, &delta)?;
        write_load_velocity(&x.load, &d.load.v_dot, &d.load.omega_dot, out);
        for j in 0..N {
            let b = 12 + 6 * j;
            out[b..b + 3].copy_from_slice(x.links[j].omega.as_slice());
            out[b + 3..b + 6].copy_from_slice(d.link_omega_dot[j].as_slice());
        }
        write_quad_velocity(&x.quads, &d.quad_omega_dot, &mut out[12 + 6 * N..]);
        Ok(())
    }
}

/// Elastic-cable model.
#[derive(Clone, Debug)]
pub struct FullPlant {
    pub params: PhysicalParams,
    pub thrust_model: ThrustModel,
}

impl Plant for FullPlant {
    type State = FullState;

    fn velocity(&self, _t: f64, x: &FullState, u: &ControlInput, out: &mut [f64]) -> Result<()> {
        let u = applied_input(self.thrust_model, &x.quads, u);
        let d = full_accelerations(x, &u, &self.params)?;
        write_load_velocity(&x.load, &d.load.v_dot, &d.load.omega_dot, out);
        for j in 0..N {
            let b = 12 + 8 * j;
            let c = &x.cables[j];
            out[b..b + 3].copy_from_slice(c.omega.as_slice());
            out[b + 3..b + 6].copy_from_slice(d.cable_omega_dot[j].as_slice());
            out[b + 6] = c.length_rate;
            out[b + 7] = d.length_accel[j];
        }
        write_quad_velocity(&x.quads, &d.quad_omega_dot, &mut out[12 + 8 * N..]);
        Ok(())
    }
}
