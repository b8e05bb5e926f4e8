//! Lyapunov bounding matrices, the `W_j` dissipation blocks, nested Schur tests
//! and a constructive gain search.

use std::fmt;

use nalgebra::{Matrix2, Matrix4, Matrix6, SMatrix};

use crate::controller::{
    desired_cable_attitudes, mu_distribution, wrench_targets, AllocationGeometry, GainSet, TrackingErrors,
};
use crate::error::{Error, Result};
use crate::manifold::{Mat3, Vec3};
use crate::model::{LoadState, PhysicalParams, N};
use crate::trajectory::DesiredTrajectory;

/// User-chosen constants of the Lyapunov construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificateConstants {
    pub c_x: f64,
    pub c_q: f64,
    pub c_r: f64,
    pub psi_q: [f64; N],
    pub psi_r: f64,
    pub e_xmax: f64,
    /// Bound on the wrench feedforward along the desired trajectory.
    pub b: f64,
    /// `C_qj = 2 sup ‖ω̃_j‖`.
    pub c_qj: [f64; N],
}

impl CertificateConstants {
    pub fn validate(&self) -> Result<()> {
        let pos = [("c_x", self.c_x), ("c_q", self.c_q), ("c_r", self.c_r), ("e_xmax", self.e_xmax)];
        for (name, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive (got {v})")));
            }
        }
        for &p in self.psi_q.iter().chain(std::iter::once(&self.psi_r)) {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidArgument(format!("psi values must lie in (0, 1) (got {p})")));
            }
        }
        if !(self.b >= 0.0) || self.c_qj.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::InvalidArgument("B and C_q must be non-negative".into()));
        }
        Ok(())
    }
}

/// Quantities derived from the constants and the rig geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedConstants {
    pub alpha: [f64; N],
    pub alpha_l: f64,
    pub lambda_min_ppt: f64,
    pub gamma: f64,
    pub beta: f64,
    pub delta: [f64; N],
    pub sigma: [f64; N],
    pub lambda_min_j: f64,
    pub lambda_max_j: f64,
}

impl DerivedConstants {
    pub fn new(c: &CertificateConstants, p: &PhysicalParams) -> Result<Self> {
        let geom = AllocationGeometry::new(&p.attach)?;
        let lam = geom.lambda_min_ppt;
        let gamma = 1.0 / (p.m_load * lam);
        // ‖r̂‖₂ = ‖r‖.
        let delta = p.attach.map(|r| p.m_load * r.norm() / lam.sqrt());
        let eig = p.j_load.symmetric_eigenvalues();
        Ok(Self {
            alpha: c.psi_q.map(|s| (s * (2.0 - s)).sqrt()),
            alpha_l: (c.psi_r * (2.0 - c.psi_r)).sqrt(),
            lambda_min_ppt: lam,
            gamma,
            beta: p.m_load * gamma,
            delta,
            sigma: delta.map(|d| d / p.m_load),
            lambda_min_j: eig.min(),
            lambda_max_j: eig.max(),
        })
    }

    /// `ν_j = 1 − 4 α_j σ_j`.
    pub fn nu(&self, j: usize) -> f64 {
        1.0 - 4.0 * self.alpha[j] * self.sigma[j]
    }
}

/// Lower and upper quadratic bounding matrices of the Lyapunov candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PMatrices {
    pub x_lower: Matrix2<f64>,
    pub x_upper: Matrix2<f64>,
    pub r_lower: Matrix2<f64>,
    pub r_upper: Matrix2<f64>,
    pub q_lower: [Matrix2<f64>; N],
    pub q_upper: [Matrix2<f64>; N],
}

impl PMatrices {
    fn all(&self) -> impl Iterator<Item = &Matrix2<f64>> {
        [&self.x_lower, &self.x_upper, &self.r_lower, &self.r_upper]
            .into_iter()
            .chain(self.q_lower.iter())
            .chain(self.q_upper.iter())
    }

    /// Largest eigenvalue of the block-diagonal upper matrix.
    pub fn lambda_max_upper(&self) -> f64 {
        std::iter::once(&self.x_upper)
            .chain(std::iter::once(&self.r_upper))
            .chain(self.q_upper.iter())
            .map(|m| m.symmetric_eigenvalues().max())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest eigenvalue of the block-diagonal lower matrix.
    pub fn lambda_min_lower(&self) -> f64 {
        std::iter::once(&self.x_lower)
            .chain(std::iter::once(&self.r_lower))
            .chain(self.q_lower.iter())
            .map(|m| m.symmetric_eigenvalues().min())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn all_positive_definite(&self) -> bool {
        self.all().all(is_pd2)
    }
}

fn is_pd2(m: &Matrix2<f64>) -> bool {
    m[(0, 0)] > 0.0 && m.determinant() > 0.0
}

/// Bounding matrices exactly as in the stability lemma.
pub fn build_p_matrices(g: &GainSet, c: &CertificateConstants, j_load: &Mat3) -> PMatrices {
    let eig = j_load.symmetric_eigenvalues();
    let (jmin, jmax) = (eig.min(), eig.max());
    let half = |a: f64, b: f64, d: f64| 0.5 * Matrix2::new(a, b, b, d);
    PMatrices {
        x_lower: half(g.k_x, -c.c_x, 1.0),
        x_upper: half(g.k_x, c.c_x, 1.0),
        r_lower: half(2.0 * g.k_r, -c.c_r * jmax, jmin),
        r_upper: half(2.0 * g.k_r / (2.0 - c.psi_r), c.c_r * jmax, jmax),
        q_lower: [half(2.0 * g.k_q, -c.c_q, 1.0); N],
        q_upper: c.psi_q.map(|s| half(2.0 * g.k_q / (2.0 - s), c.c_q, 1.0)),
    }
}

/// Bounding matrices whose lower blocks are valid for the candidate.
///
/// `Ψ ≥ ½‖e‖²` on both SO(3) and S², so the attitude and cable lower blocks
/// carry `k` where the displayed matrices carry `2k`; the position block and
/// every upper block are unchanged.  The displayed lower blocks overstate
/// `V` near `Ψ → 0`.
pub fn build_sound_p_matrices(g: &GainSet, c: &CertificateConstants, j_load: &Mat3) -> PMatrices {
    let eig = j_load.symmetric_eigenvalues();
    let (jmin, jmax) = (eig.min(), eig.max());
    let half = |a: f64, b: f64, d: f64| 0.5 * Matrix2::new(a, b, b, d);
    PMatrices {
        r_lower: half(g.k_r, -c.c_r * jmax, jmin),
        q_lower: [half(g.k_q, -c.c_q, 1.0); N],
        ..build_p_matrices(g, c, j_load)
    }
}

/// Component blocks of `W_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WBlocks {
    pub x: Matrix2<f64>,
    pub r: Matrix2<f64>,
    pub q: Matrix2<f64>,
    pub xq: Matrix2<f64>,
    pub xr: Matrix2<f64>,
    pub qr: Matrix2<f64>,
}

impl WBlocks {
    /// `W_j` with the off-diagonal blocks as displayed (not symmetric).
    pub fn assemble(&self) -> Matrix6<f64> {
        let mut w = Matrix6::zeros();
        let mut put = |i: usize, k: usize, m: &Matrix2<f64>| w.fixed_view_mut::<2, 2>(2 * i, 2 * k).copy_from(m);
        put(0, 0, &self.x);
        put(1, 1, &self.r);
        put(2, 2, &self.q);
        put(0, 1, &(-0.5 * self.xr));
        put(1, 0, &(-0.5 * self.xr));
        put(0, 2, &(-0.5 * self.xq));
        put(2, 0, &(-0.5 * self.xq));
        put(1, 2, &(-0.5 * self.qr));
        put(2, 1, &(-0.5 * self.qr));
        w
    }
}

pub fn symmetric_part(w: &Matrix6<f64>) -> Matrix6<f64> {
    0.5 * (w + w.transpose())
}

/// Blocks of `W_j` for cable `j`.
pub fn build_w_blocks(g: &GainSet, c: &CertificateConstants, d: &DerivedConstants, j: usize) -> WBlocks {
    let (a, beta, gamma, delta, sigma) = (d.alpha[j], d.beta, d.gamma, d.delta[j], d.sigma[j]);
    let (cx, cq, cr, b) = (c.c_x, c.c_q, c.c_r, c.b);
    let x = 0.25
        * Matrix2::new(
            cx * g.k_x * (1.0 - 4.0 * a * beta),
            -0.5 * cx * g.k_v * (1.0 + 4.0 * a * beta),
            -0.5 * cx * g.k_v * (1.0 + 4.0 * a * beta),
            g.k_v * (1.0 - 4.0 * a * beta) - cx,
        );
    let off_r = -0.5 * cr * (g.k_omega + b + 4.0 * a * sigma);
    let r = 0.25
        * Matrix2::new(
            cr * g.k_r * (1.0 - 4.0 * a * sigma),
            off_r,
            off_r,
            g.k_omega * (1.0 - 4.0 * a * sigma) - 2.0 * cr * d.lambda_max_j,
        );
    let off_q = -0.5 * cq * (g.k_w + c.c_qj[j]);
    let q = Matrix2::new(cq * g.k_q, off_q, off_q, g.k_w - cq);
    let xq = Matrix2::new(cx * b, 0.0, beta * g.k_x * c.e_xmax + b, 0.0);
    let xr = a
        * Matrix2::new(
            gamma * cx * g.k_r + delta * cr * g.k_x,
            gamma * cx * g.k_omega + delta * g.k_x,
            gamma * g.k_r + delta * cr * g.k_v,
            gamma * g.k_omega + delta * g.k_v,
        );
    let qr = Matrix2::new(cr * b, 0.0, d.alpha_l * sigma * g.k_r + b, 0.0);
    WBlocks { x, r, q, xq, xr, qr }
}

/// `W_j` as displayed.
pub fn build_w(g: &GainSet, c: &CertificateConstants, d: &DerivedConstants, j: usize) -> Matrix6<f64> {
    build_w_blocks(g, c, d, j).assemble()
}

/// Outcome of the nested Schur-complement test on one symmetric `𝒲_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchurVerdict {
    pub positive: bool,
    /// Minimum eigenvalue of the matrices in conditions 1, 2, 3.
    pub condition_min_eig: [f64; 3],
    /// First failing condition (1-based), if any.
    pub failing_condition: Option<u8>,
    /// `min` over the three conditions.
    pub lambda_min_conditions: f64,
    /// Rigorous lower bound on `λ_min(𝒲_j)` from the block factorization.
    pub lambda_min_bound: f64,
}

fn block(m: &Matrix6<f64>, i: usize, k: usize) -> Matrix2<f64> {
    m.fixed_view::<2, 2>(2 * i, 2 * k).into_owned()
}

fn min_eig2(m: &Matrix2<f64>) -> f64 {
    let s = 0.5 * (m + m.transpose());
    s.symmetric_eigenvalues().min()
}

/// Largest singular value of `[I 0; K I]` is `(‖K‖ + √(‖K‖² + 4))/2`.
fn unit_lower_sigma_min(k_norm: f64) -> f64 {
    2.0 / (k_norm + (k_norm * k_norm + 4.0).sqrt())
}

/// Conditions (1)–(3): `W_q ≻ 0`, `W_R − ¼𝒲_qR W_q⁻¹ 𝒲_qR ≻ 0` and the
/// four-term residual on the position block.
pub fn schur_positivity(w: &Matrix6<f64>) -> Result<SchurVerdict> {
    let asym = (w - w.transpose()).abs().max();
    if asym > 1e-9 * w.abs().max().max(1.0) {
        return Err(Error::InvalidArgument(format!("matrix is not symmetric (asymmetry {asym:.3e})")));
    }
    let wx = block(w, 0, 0);
    let wr = block(w, 1, 1);
    let wq = block(w, 2, 2);
    // The stored off-diagonal blocks are −½ of the symmetric coupling blocks.
    let s_xr = -2.0 * block(w, 0, 1);
    let s_xq = -2.0 * block(w, 0, 2);
    let s_qr = -2.0 * block(w, 1, 2);

    let mut eigs = [f64::NEG_INFINITY; 3];
    eigs[0] = min_eig2(&wq);
    let fail = |eigs: [f64; 3], idx: u8| SchurVerdict {
        positive: false,
        condition_min_eig: eigs,
        failing_condition: Some(idx),
        lambda_min_conditions: eigs.iter().take(idx as usize).cloned().fold(f64::INFINITY, f64::min),
        lambda_min_bound: f64::NEG_INFINITY,
    };
    if !(eigs[0] > 0.0) {
        return Ok(fail(eigs, 1));
    }
    let wq_inv = wq.try_inverse().unwrap();
    let c2 = wr - 0.25 * s_qr * wq_inv * s_qr;
    eigs[1] = min_eig2(&c2);
    if !(eigs[1] > 0.0) {
        return Ok(fail(eigs, 2));
    }
    let c2_inv = c2.try_inverse().unwrap();
    let t1 = 0.25 * s_xq * wq_inv * s_xq;
    let t2 = 0.25 * s_xr * c2_inv * s_xr;
    let t3 = 0.125 * s_xr * c2_inv * s_qr * wq_inv * s_xq;
    let t4 = 0.125 * s_xq * wq_inv * s_qr * c2_inv * s_xr;
    let t5 = 0.0625 * s_xq * wq_inv * s_qr * c2_inv * s_qr * wq_inv * s_xq;
    let c3 = wx - t1 - t2 - t3 - t4 - t5;
    eigs[2] = min_eig2(&c3);
    if !(eigs[2] > 0.0) {
        return Ok(fail(eigs, 3));
    }
    let lam = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    // 𝒲 = L₁ᵀ diag(P − S Q⁻¹Sᵀ, Q) L₁ with L₁ = [I 0; Q⁻¹Sᵀ I], and the
    // inner complement factors the same way; the product of the smallest
    // singular values of the unit-triangular factors scales the bound.
    let p4: Matrix4<f64> = w.fixed_view::<4, 4>(0, 0).into_owned();
    let s4: SMatrix<f64, 4, 2> = w.fixed_view::<4, 2>(0, 4).into_owned();
    let k1 = wq_inv * s4.transpose();
    let pc = p4 - s4 * k1;
    let k2 = c2_inv * pc.fixed_view::<2, 2>(2, 0);
    let factor = unit_lower_sigma_min(norm_op_2xn(&k1)) * unit_lower_sigma_min(norm_op_2xn(&k2));
    Ok(SchurVerdict {
        positive: true,
        condition_min_eig: eigs,
        failing_condition: None,
        lambda_min_conditions: lam,
        lambda_min_bound: lam * factor * factor,
    })
}

/// Spectral norm of a matrix with two rows.
fn norm_op_2xn<const C: usize>(k: &SMatrix<f64, 2, C>) -> f64 {
    let kkt: Matrix2<f64> = k * k.transpose();
    kkt.symmetric_eigenvalues().max().max(0.0).sqrt()
}

/// Per-cable part of a certificate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CableCertificate {
    pub w: Matrix6<f64>,
    pub w_sym: Matrix6<f64>,
    pub schur: SchurVerdict,
    pub lambda_min_exact: f64,
    pub nu: f64,
}

/// Full certificate for one gain set.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub gains: GainSet,
    pub constants: CertificateConstants,
    pub derived: DerivedConstants,
    pub p: PMatrices,
    pub p_positive: bool,
    pub cables: [CableCertificate; N],
    pub verdict: bool,
    pub warnings: Vec<String>,
}

impl CertificateReport {
    /// Smallest rigorous lower bound on `λ_min(𝒲_j)` over the cables.
    pub fn lambda_min_bound(&self) -> f64 {
        self.cables.iter().map(|c| c.schur.lambda_min_bound).fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_min_exact(&self) -> f64 {
        self.cables.iter().map(|c| c.lambda_min_exact).fold(f64::INFINITY, f64::min)
    }

    /// Cable and condition index of the tightest failure, if any.
    pub fn tightest_failure(&self) -> Option<(usize, u8)> {
        self.cables.iter().enumerate().find_map(|(j, c)| c.schur.failing_condition.map(|k| (j, k)))
    }
}

/// Evaluates every matrix of the certificate for the given gains.
pub fn certify(g: &GainSet, c: &CertificateConstants, p: &PhysicalParams) -> Result<CertificateReport> {
    g.validate()?;
    c.validate()?;
    let d = DerivedConstants::new(c, p)?;
    let pm = build_p_matrices(g, c, &p.j_load);
    let mut warnings = Vec::new();
    let cables: [CableCertificate; N] = {
        let mut out = Vec::with_capacity(N);
        for j in 0..N {
            if 1.0 - 4.0 * d.alpha[j] * d.beta <= 0.0 {
                warnings.push(format!("cable {j}: 1 - 4 alpha beta <= 0"));
            }
            if d.nu(j) <= 0.0 {
                warnings.push(format!("cable {j}: 1 - 4 alpha sigma <= 0"));
            }
            let w = build_w(g, c, &d, j);
            let w_sym = symmetric_part(&w);
            let schur = schur_positivity(&w_sym)?;
            out.push(CableCertificate {
                w,
                w_sym,
                schur,
                lambda_min_exact: w_sym.symmetric_eigenvalues().min(),
                nu: d.nu(j),
            });
        }
        out.try_into().unwrap()
    };
    let p_positive = pm.all_positive_definite();
    let verdict = p_positive && cables.iter().all(|c| c.schur.positive);
    Ok(CertificateReport { gains: *g, constants: *c, derived: d, p: pm, p_positive, cables, verdict, warnings })
}

/// Options of the constructive gain search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainSearchOptions {
    /// Required lower bound on `λ_min(𝒲_j)`.
    pub margin: f64,
    /// Number of halvings of `(c_x, c_q, c_R)` attempted.
    pub max_levels: usize,
    /// Ceiling on `k_ω = k_R` at each level.
    pub max_gain: f64,
    /// Starting value for `k_ω = k_R`.
    pub initial_gain: f64,
    /// Bisection steps used to tighten the smallest certified gain.
    pub refine_steps: usize,
}

impl Default for GainSearchOptions {
    fn default() -> Self {
        Self { margin: 1e-3, max_levels: 12, max_gain: 1e7, initial_gain: 1.0, refine_steps: 30 }
    }
}

/// Gains of the recipe at a given scale `s = k_ω = k_R`.
fn recipe_gains(template: &GainSet, c: &CertificateConstants, d: &DerivedConstants, s: f64) -> GainSet {
    let nu = (0..N).map(|j| d.nu(j)).fold(f64::INFINITY, f64::min);
    GainSet {
        k_w: s,
        k_r: s,
        k_q: s / c.c_q,
        k_omega: c.c_r * s + 2.0 * c.c_r * d.lambda_max_j / nu,
        ..*template
    }
}

fn certified_with_margin(r: &CertificateReport, margin: f64) -> bool {
    r.verdict && r.lambda_min_bound() >= margin
}

/// Constructive search: keep `k_x, k_v` and the quadrotor gains of `template`,
/// shrink `(c_x, c_q, c_R)` by halves, and at each level grow `k_ω = k_R`
/// (with `k_q = k_ω/c_q` and `k_Ω = c_R k_R + 2 c_R λ_max(J_L)/ν`) until every
/// Schur condition holds with the requested margin.
pub fn gain_search(
    template: &GainSet,
    constants: &CertificateConstants,
    p: &PhysicalParams,
    opts: &GainSearchOptions,
) -> Result<CertificateReport> {
    constants.validate()?;
    template.validate()?;
    let d0 = DerivedConstants::new(constants, p)?;
    for j in 0..N {
        if d0.nu(j) <= 0.0 {
            return Err(Error::CertificationFailed(format!(
                "nu_j = 1 - 4 alpha_j sigma_j = {:.4} <= 0 on cable {j}; reduce psi_q",
                d0.nu(j)
            )));
        }
    }
    let mut c = *constants;
    let mut tightest: Option<(f64, String)> = None;
    for _level in 0..opts.max_levels {
        let d = DerivedConstants::new(&c, p)?;
        let nu = (0..N).map(|j| d.nu(j)).fold(f64::INFINITY, f64::min);
        if nu - 0.5 * c.c_r > 0.0 {
            let eval = |s: f64| certify(&recipe_gains(template, &c, &d, s), &c, p);
            let mut s = opts.initial_gain;
            let mut found = None;
            while s <= opts.max_gain {
                let r = eval(s)?;
                if certified_with_margin(&r, opts.margin) {
                    found = Some(s);
                    break;
                }
                let score = r
                    .cables
                    .iter()
                    .map(|k| k.lambda_min_exact)
                    .fold(f64::INFINITY, f64::min);
                if tightest.as_ref().map_or(true, |(best, _)| score > *best) {
                    let what = match r.tightest_failure() {
                        Some((j, k)) => format!("condition {k} on cable {j}"),
                        None if !r.p_positive => "bounding matrices not positive definite".to_string(),
                        None => "margin not reached".to_string(),
                    };
                    tightest = Some((score, format!("{what} (c_x = {:.3e}, k = {s:.3e})", c.c_x)));
                }
                s *= 2.0;
            }
            if let Some(hi) = found {
                let (mut lo, mut hi) = (if hi > opts.initial_gain { hi / 2.0 } else { hi }, hi);
                if lo < hi {
                    for _ in 0..opts.refine_steps {
                        let mid = 0.5 * (lo + hi);
                        if certified_with_margin(&eval(mid)?, opts.margin) {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                }
                return eval(hi);
            }
        }
        c.c_x *= 0.5;
        c.c_q *= 0.5;
        c.c_r *= 0.5;
    }
    Err(Error::CertificationFailed(match tightest {
        Some((score, what)) => format!("no certificate within budget; best lambda_min {score:.3e}: {what}"),
        None => "no certificate within budget".into(),
    }))
}

/// Lyapunov value and whether the errors lie in the certified domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovValue {
    pub v: f64,
    pub in_domain: bool,
}

/// The composite Lyapunov candidate.
pub fn lyapunov_value(e: &TrackingErrors, g: &GainSet, c: &CertificateConstants, j_load: &Mat3) -> LyapunovValue {
    let l = &e.load;
    let mut v = 0.5 * l.e_v.norm_squared() + 0.5 * g.k_x * l.e_x.norm_squared() + c.c_x * l.e_x.dot(&l.e_v);
    for j in 0..N {
        v += 0.5 * e.e_w[j].norm_squared() + g.k_q * e.psi_q[j] + c.c_q * e.e_q[j].dot(&e.e_w[j]);
    }
    let jw = j_load * l.e_omega;
    v += 0.5 * l.e_omega.dot(&jw) + g.k_r * l.psi_r + c.c_r * l.e_r.dot(&jw);
    let in_domain = l.e_x.norm() < c.e_xmax
        && l.psi_r < c.psi_r
        && (0..N).all(|j| e.psi_q[j] < c.psi_q[j]);
    LyapunovValue { v, in_domain }
}

/// Norm pairs `(‖e_x‖, ‖e_v‖)`, `(‖e_R‖, ‖e_Ω‖)`, `(‖e_qj‖, ‖e_ωj‖)`.
pub fn error_norm_pairs(e: &TrackingErrors) -> ([f64; 2], [f64; 2], [[f64; 2]; N]) {
    let l = &e.load;
    (
        [l.e_x.norm(), l.e_v.norm()],
        [l.e_r.norm(), l.e_omega.norm()],
        std::array::from_fn(|j| [e.e_q[j].norm(), e.e_w[j].norm()]),
    )
}

/// `Σ zᵀ P z` over the blocks, for the lower and the upper matrices.
pub fn quadratic_bounds(e: &TrackingErrors, pm: &PMatrices) -> (f64, f64) {
    let (zx, zr, zq) = error_norm_pairs(e);
    let quad = |m: &Matrix2<f64>, z: &[f64; 2]| {
        let v = nalgebra::Vector2::new(z[0], z[1]);
        v.dot(&(m * v))
    };
    let mut lo = quad(&pm.x_lower, &zx) + quad(&pm.r_lower, &zr);
    let mut hi = quad(&pm.x_upper, &zx) + quad(&pm.r_upper, &zr);
    for j in 0..N {
        lo += quad(&pm.q_lower[j], &zq[j]);
        hi += quad(&pm.q_upper[j], &zq[j]);
    }
    (lo, hi)
}

/// `B`: supremum over `[0, horizon]` of the translational feedforward norm
/// `‖m_L(ẍ_d + g e3)‖` plus the supremum of the moment feedforward norm
/// `‖Ω̃ × J Ω̃ + J Ω̃̇‖`.
pub fn trajectory_bound_b(traj: &dyn DesiredTrajectory, p: &PhysicalParams, horizon: f64, dt: f64) -> f64 {
    let (mut f, mut m) = (0.0_f64, 0.0_f64);
    for t in sample_times(horizon, dt) {
        let s = traj.sample(t);
        f = f.max((p.m_load * (s.a + Vec3::new(0.0, 0.0, p.gravity))).norm());
        m = m.max((s.omega.cross(&(p.j_load * s.omega)) + p.j_load * s.omega_dot).norm());
    }
    f + m
}

/// `C_qj = 2 sup ‖ω̃_j‖` along the feedforward-only desired motion (load
/// exactly on the desired trajectory).
pub fn cable_rate_bound(
    traj: &dyn DesiredTrajectory,
    p: &PhysicalParams,
    gains: &GainSet,
    horizon: f64,
    dt: f64,
) -> Result<[f64; N]> {
    let geom = AllocationGeometry::new(&p.attach)?;
    let q_at = |t: f64| -> Result<[Vec3; N]> {
        let s = traj.sample(t);
        let load = LoadState { x: s.x, v: s.v, r: s.r, omega: s.omega };
        let (f, m, _) = wrench_targets(&load, &s, gains, p);
        Ok(desired_cable_attitudes(&mu_distribution(&f, &m, &s.r, &geom), 1e-9)?.map(|q| q.into_inner()))
    };
    let h = 1e-5;
    let mut out = [0.0_f64; N];
    for t in sample_times(horizon, dt) {
        let (qm, q0, qp) = (q_at(t - h)?, q_at(t)?, q_at(t + h)?);
        for j in 0..N {
            let w = q0[j].cross(&((qp[j] - qm[j]) / (2.0 * h)));
            out[j] = out[j].max(2.0 * w.norm());
        }
    }
    Ok(out)
}

fn sample_times(horizon: f64, dt: f64) -> impl Iterator<Item = f64> {
    let n = (horizon / dt).round().max(0.0) as usize;
    (0..=n).map(move |i| i as f64 * dt)
}

impl fmt::Display for CertificateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.gains;
        let c = &self.constants;
        let d = &self.derived;
        writeln!(f, "verdict: {}", if self.verdict { "CERTIFIED" } else { "NOT CERTIFIED" })?;
        writeln!(
            f,
            "gains: k_x={:.6} k_v={:.6} k_R={:.6} k_Omega={:.6} k_q={:.6} k_w={:.6}",
            g.k_x, g.k_v, g.k_r, g.k_omega, g.k_q, g.k_w
        )?;
        writeln!(
            f,
            "constants: c_x={:.6} c_q={:.6} c_R={:.6} psi_q={:.3e} psi_R={:.3e} e_xmax={} B={:.6} C_q={:.6}",
            c.c_x, c.c_q, c.c_r, c.psi_q[0], c.psi_r, c.e_xmax, c.b, c.c_qj.iter().cloned().fold(0.0, f64::max)
        )?;
        writeln!(
            f,
            "derived: alpha={:.6} alpha_L={:.6} beta={:.6} gamma={:.6} sigma={:.6} delta={:.6} lambda_min(PP^T)={:.6}",
            d.alpha[0], d.alpha_l, d.beta, d.gamma, d.sigma[0], d.delta[0], d.lambda_min_ppt
        )?;
        writeln!(f, "bounding matrices positive definite: {}", self.p_positive)?;
        for (j, k) in self.cables.iter().enumerate() {
            let s = &k.schur;
            writeln!(
                f,
                "cable {j}: nu={:.6} conditions=[{:.6e}, {:.6e}, {:.6e}] failing={} lambda_min: conditions={:.6e} bound={:.6e} exact={:.6e}",
                k.nu,
                s.condition_min_eig[0],
                s.condition_min_eig[1],
                s.condition_min_eig[2],
                s.failing_condition.map_or("none".to_string(), |i| i.to_string()),
                s.lambda_min_conditions,
                s.lambda_min_bound,
                k.lambda_min_exact
            )?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}
