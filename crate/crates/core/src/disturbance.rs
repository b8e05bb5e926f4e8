//! Bounded disturbances on the reduced model and the ultimate-bound estimate.

use serde::{Deserialize, Serialize};

use crate::certificate::{build_sound_p_matrices, CertificateReport};
use crate::dynamics_reduced::{reduced_derivative_perturbed, Perturbation, ReducedDerivative};
use crate::error::{Error, Result};
use crate::manifold::Vec3;
use crate::model::{ControlInput, PhysicalParams, ReducedState, N};

/// One additive term of a scalar disturbance signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalTerm {
    Constant { value: f64 },
    /// `amp · sin(freq · t + phase)` with `freq` in rad/s.
    Sine { amp: f64, freq: f64, #[serde(default)] phase: f64 },
    /// `amp · e^{−rate · t}`, `rate ≥ 0`.
    Decay { amp: f64, rate: f64 },
}

impl SignalTerm {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            SignalTerm::Constant { value } => value,
            SignalTerm::Sine { amp, freq, phase } => amp * (freq * t + phase).sin(),
            SignalTerm::Decay { amp, rate } => amp * (-rate * t).exp(),
        }
    }

    /// Sup of `|term|` over `t ≥ 0`.
    pub fn sup(&self) -> f64 {
        match *self {
            SignalTerm::Constant { value } => value.abs(),
            SignalTerm::Sine { amp, .. } => amp.abs(),
            SignalTerm::Decay { amp, .. } => amp.abs(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SignalTerm::Constant { value } => value.is_finite(),
            SignalTerm::Sine { amp, freq, phase } => amp.is_finite() && freq.is_finite() && phase.is_finite(),
            SignalTerm::Decay { amp, rate } => amp.is_finite() && rate.is_finite() && rate >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("unbounded or non-finite disturbance term {self:?}")))
        }
    }
}

/// A vector signal: a sum of terms per component.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSignal {
    #[serde(default)]
    pub x: Vec<SignalTerm>,
    #[serde(default)]
    pub y: Vec<SignalTerm>,
    #[serde(default)]
    pub z: Vec<SignalTerm>,
}

impl VectorSignal {
    pub fn eval(&self, t: f64) -> Vec3 {
        let s = |terms: &[SignalTerm]| terms.iter().map(|k| k.eval(t)).sum::<f64>();
        Vec3::new(s(&self.x), s(&self.y), s(&self.z))
    }

    /// Norm of the componentwise sup bounds; an upper bound on `sup_t ‖Δ(t)‖`.
    pub fn sup_norm_bound(&self) -> f64 {
        let s = |terms: &[SignalTerm]| terms.iter().map(SignalTerm::sup).sum::<f64>();
        Vec3::new(s(&self.x), s(&self.y), s(&self.z)).norm()
    }

    fn validate(&self) -> Result<()> {
        self.x.iter().chain(&self.y).chain(&self.z).try_for_each(SignalTerm::validate)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_empty() && self.y.is_empty() && self.z.is_empty()
    }
}

/// Disturbances on the load force, load moment and each cable.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    #[serde(default)]
    pub force: VectorSignal,
    #[serde(default)]
    pub moment: VectorSignal,
    #[serde(default)]
    pub link: Vec<VectorSignal>,
}

impl DisturbanceSpec {
    /// The load force and moment disturbances of the reference experiment:
    /// `Δx = [0.5 sin 0.43t, 0.5 cos 0.21t, 0.2 sin 0.75t − e^{−t}]`,
    /// `ΔR = [0.2 + 0.45 sin 3t, 0.3 − 0.65 cos 1.4t, 0.05 sin 2.1t]`.
    pub fn reference() -> Self {
        use std::f64::consts::FRAC_PI_2;
        use SignalTerm::*;
        Self {
            force: VectorSignal {
                x: vec![Sine { amp: 0.5, freq: 0.43, phase: 0.0 }],
                y: vec![Sine { amp: 0.5, freq: 0.21, phase: FRAC_PI_2 }],
                z: vec![Sine { amp: 0.2, freq: 0.75, phase: 0.0 }, Decay { amp: -1.0, rate: 1.0 }],
            },
            moment: VectorSignal {
                x: vec![Constant { value: 0.2 }, Sine { amp: 0.45, freq: 3.0, phase: 0.0 }],
                y: vec![Constant { value: 0.3 }, Sine { amp: -0.65, freq: 1.4, phase: FRAC_PI_2 }],
                z: vec![Sine { amp: 0.05, freq: 2.1, phase: 0.0 }],
            },
            link: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.link.len() > N {
            return Err(Error::InvalidArgument(format!("at most {N} cable disturbances")));
        }
        self.force.validate()?;
        self.moment.validate()?;
        self.link.iter().try_for_each(VectorSignal::validate)
    }

    pub fn sample(&self, t: f64) -> Perturbation {
        let mut link = [Vec3::zeros(); N];
        for (j, s) in self.link.iter().enumerate().take(N) {
            link[j] = s.eval(t);
        }
        Perturbation { force: self.force.eval(t), moment: self.moment.eval(t), link }
    }

    /// Sup bounds `(x̄, R̄, q̄)`; `q̄` is the largest over the cables.
    pub fn bounds(&self) -> DisturbanceBounds {
        DisturbanceBounds {
            force: self.force.sup_norm_bound(),
            moment: self.moment.sup_norm_bound(),
            link: self.link.iter().map(VectorSignal::sup_norm_bound).fold(0.0, f64::max),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.force.is_zero() && self.moment.is_zero() && self.link.iter().all(VectorSignal::is_zero)
    }
}

/// Sup-norm bounds on the three disturbance channels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisturbanceBounds {
    pub force: f64,
    pub moment: f64,
    pub link: f64,
}

/// Reduced dynamics driven by the disturbance evaluated at time `t`.
pub fn perturbed_derivative(
    t: f64,
    state: &ReducedState,
    input: &ControlInput,
    p: &PhysicalParams,
    spec: &DisturbanceSpec,
) -> Result<ReducedDerivative> {
    reduced_derivative_perturbed(state, input, p, &spec.sample(t))
}

/// Normalizing scales of the bound vector `E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundScales {
    /// Reference mass `m_r`.
    pub mass: f64,
    /// Reference length of the rotational channel `L_r`.
    pub length_r: f64,
    /// Reference cable length `L_c`.
    pub length_c: f64,
}

impl BoundScales {
    pub fn from_params(p: &PhysicalParams) -> Self {
        Self { mass: p.m_load, length_r: 1.0, length_c: p.rest_length }
    }
}

/// Ultimate-bound estimate for a certified gain set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UltimateBoundReport {
    pub e: [f64; 6],
    pub lambda_max_p_upper: f64,
    pub lambda_min_w_star: f64,
    /// Bound on the Lyapunov value: `d₁ = λ_max(P̄)/λ_min(𝒲*) · ‖E‖²/(64 ε)`.
    pub d1: f64,
    /// Radius of the sublevel set in error-norm units, `√(d₁/λ_min(P̲))`.
    pub radius: f64,
}

/// `E = [c_x x̄/m_r, x̄/m_r, 3c_R R̄/(2m_r L_r), 3R̄/(2m_r L_r), c_q q̄/(m_Q L_c), q̄/(m_Q L_c)]`.
pub fn bound_vector(c_x: f64, c_r: f64, c_q: f64, m_quad: f64, b: &DisturbanceBounds, s: &BoundScales) -> [f64; 6] {
    let rx = b.force / s.mass;
    let rr = 1.5 * b.moment / (s.mass * s.length_r);
    let rq = b.link / (m_quad * s.length_c);
    [c_x * rx, rx, c_r * rr, rr, c_q * rq, rq]
}

/// `d₁` from its ingredients.
pub fn d1_from(lambda_max_p_upper: f64, lambda_min_w_star: f64, e: &[f64; 6], eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if !(lambda_min_w_star > 0.0) {
        return Err(Error::CertificationFailed(format!(
            "lambda_min(W*) = {lambda_min_w_star:.3e} is not positive"
        )));
    }
    let e2: f64 = e.iter().map(|x| x * x).sum();
    Ok(lambda_max_p_upper / lambda_min_w_star * e2 / (64.0 * eps))
}

/// Ultimate bound for the gains and constants of `report`, with Young's
/// inequality weight `eps` (so `𝒲* = 𝒲 − ε I`).
pub fn ultimate_bound(
    report: &CertificateReport,
    p: &PhysicalParams,
    bounds: &DisturbanceBounds,
    scales: &BoundScales,
    eps: f64,
) -> Result<UltimateBoundReport> {
    if !report.verdict {
        return Err(Error::CertificationFailed("gains are not certified".into()));
    }
    let c = &report.constants;
    let e = bound_vector(c.c_x, c.c_r, c.c_q, p.m_quad, bounds, scales);
    let lw = report.lambda_min_exact() - eps;
    let lp = report.p.lambda_max_upper();
    let d1 = d1_from(lp, lw, &e, eps)?;
    let lo = build_sound_p_matrices(&report.gains, c, &p.j_load).lambda_min_lower();
    let radius = if lo > 0.0 { (d1 / lo).sqrt() } else { f64::INFINITY };
    Ok(UltimateBoundReport { e, lambda_max_p_upper: lp, lambda_min_w_star: lw, d1, radius })
}
