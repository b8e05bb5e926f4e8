//! Scenario configuration.
//!
//! A scenario file is TOML.  The optional top-level `scenario` key names a
//! built-in scenario whose settings are used as the base; every other table
//! overrides the base key by key.  Unknown keys are rejected.

use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use quadcable::certificate::{CertificateConstants, GainSearchOptions};
use quadcable::controller::{ControllerConfig, GainSet};
use quadcable::disturbance::{BoundScales, DisturbanceSpec};
use quadcable::integrator::{ControlUpdate, IntegratorConfig, Retraction, Scheme, ThrustModel};
use quadcable::trajectory::{DesiredTrajectory, FigureEight, Hover};
use quadcable::{PhysicalParams, Vec3, N};
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::scenarios;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Rigid cables.
    Reduced,
    /// Elastic cables with `k = k̄/ε²`, `c = c̄/ε`.
    Full,
    /// Rigid cables with additive disturbances.
    Perturbed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub m_load: f64,
    /// Principal moments of the load inertia.
    pub j_load: [f64; 3],
    pub m_quad: f64,
    pub j_quad: [f64; 3],
    pub attach: [[f64; 3]; N],
    pub rest_length: f64,
    pub gravity: f64,
}

impl ParamsConfig {
    pub fn reference() -> Self {
        let p = PhysicalParams::reference();
        Self {
            m_load: p.m_load,
            j_load: diag(&p.j_load),
            m_quad: p.m_quad,
            j_quad: diag(&p.j_quad),
            attach: p.attach.map(|r| [r.x, r.y, r.z]),
            rest_length: p.rest_length,
            gravity: p.gravity,
        }
    }

    /// Rigid-cable parameters (zero stiffness and damping).
    pub fn physical(&self) -> PhysicalParams {
        PhysicalParams {
            m_load: self.m_load,
            j_load: Matrix3::from_diagonal(&Vector3::from(self.j_load)),
            m_quad: self.m_quad,
            j_quad: Matrix3::from_diagonal(&Vector3::from(self.j_quad)),
            attach: self.attach.map(Vec3::from),
            rest_length: self.rest_length,
            stiffness: 0.0,
            damping: 0.0,
            gravity: self.gravity,
        }
    }
}

fn diag(m: &Matrix3<f64>) -> [f64; 3] {
    [m[(0, 0)], m[(1, 1)], m[(2, 2)]]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticConfig {
    pub eps: f64,
    pub k_bar: f64,
    /// Defaults to critical damping of the boundary layer, `2√(k̄ m_Q)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_bar: Option<f64>,
}

impl ElasticConfig {
    pub fn c_bar_for(&self, m_quad: f64) -> f64 {
        self.c_bar.unwrap_or_else(|| 2.0 * (self.k_bar * m_quad).sqrt())
    }
}

/// Controller gains; the load attitude and cable gains may be left out, in
/// which case they are obtained from the certificate gain search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    pub k_x: f64,
    pub k_v: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_w: Option<f64>,
    pub k_r_quad: f64,
    pub k_omega_quad: f64,
    pub eps_att: f64,
}

impl GainsConfig {
    pub fn is_complete(&self) -> bool {
        self.k_r.is_some() && self.k_omega.is_some() && self.k_q.is_some() && self.k_w.is_some()
    }

    /// Gain set with missing entries set to one (the search template).
    pub fn template(&self) -> GainSet {
        GainSet {
            k_x: self.k_x,
            k_v: self.k_v,
            k_r: self.k_r.unwrap_or(1.0),
            k_omega: self.k_omega.unwrap_or(1.0),
            k_q: self.k_q.unwrap_or(1.0),
            k_w: self.k_w.unwrap_or(1.0),
            k_r_quad: self.k_r_quad,
            k_omega_quad: self.k_omega_quad,
            eps_att: self.eps_att,
        }
    }

    pub fn from_gains(g: &GainSet) -> Self {
        Self {
            k_x: g.k_x,
            k_v: g.k_v,
            k_r: Some(g.k_r),
            k_omega: Some(g.k_omega),
            k_q: Some(g.k_q),
            k_w: Some(g.k_w),
            k_r_quad: g.k_r_quad,
            k_omega_quad: g.k_omega_quad,
            eps_att: g.eps_att,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    pub c_x: f64,
    pub c_q: f64,
    pub c_r: f64,
    pub psi_q: f64,
    pub psi_r: f64,
    pub e_xmax: f64,
    /// Required lower bound on `λ_min(𝒲_j)` in the gain search.
    pub margin: f64,
    /// Sampling step for the trajectory constants `B` and `C_q`.
    pub sample_dt: f64,
    /// Young's inequality weight of the ultimate bound, as a fraction of `λ_min(𝒲)`.
    pub young_fraction: f64,
    /// Normalizing mass of the disturbance bound vector; defaults to `m_L`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_r: Option<f64>,
    /// Normalizing length of the rotational channel; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_r: Option<f64>,
    /// Normalizing cable length; defaults to `L`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_c: Option<f64>,
}

impl CertificateConfig {
    /// Constants with the trajectory-dependent `B` and `C_q` supplied.
    pub fn constants(&self, b: f64, c_qj: [f64; N]) -> CertificateConstants {
        CertificateConstants {
            c_x: self.c_x,
            c_q: self.c_q,
            c_r: self.c_r,
            psi_q: [self.psi_q; N],
            psi_r: self.psi_r,
            e_xmax: self.e_xmax,
            b,
            c_qj,
        }
    }

    pub fn search_options(&self) -> GainSearchOptions {
        GainSearchOptions { margin: self.margin, ..GainSearchOptions::default() }
    }

    pub fn scales(&self, p: &PhysicalParams) -> BoundScales {
        let d = BoundScales::from_params(p);
        BoundScales {
            mass: self.m_r.unwrap_or(d.mass),
            length_r: self.l_r.unwrap_or(d.length_r),
            length_c: self.l_c.unwrap_or(d.length_c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectoryConfig {
    /// `x = [a_x sin(2π f_x t), a_y cos(2π f_y t), h]`, heading along the velocity.
    FigureEight { amp_x: f64, freq_x: f64, amp_y: f64, freq_y: f64, height: f64 },
    Hover { position: [f64; 3] },
}

impl TrajectoryConfig {
    pub fn build(&self) -> std::sync::Arc<dyn DesiredTrajectory> {
        match *self {
            TrajectoryConfig::FigureEight { amp_x, freq_x, amp_y, freq_y, height } => {
                std::sync::Arc::new(FigureEight { amp_x, freq_x, amp_y, freq_y, height })
            }
            TrajectoryConfig::Hover { position } => std::sync::Arc::new(Hover { position: Vec3::from(position) }),
        }
    }

    fn validate(&self) -> SimResult<()> {
        match self {
            TrajectoryConfig::FigureEight { amp_x, freq_x, amp_y, freq_y, height } => {
                let all = [("amp_x", amp_x), ("freq_x", freq_x), ("amp_y", amp_y), ("freq_y", freq_y), ("height", height)];
                for (k, v) in all {
                    finite(&format!("trajectory.{k}"), *v)?;
                }
                if *amp_x == 0.0 || *freq_x == 0.0 {
                    return Err(SimError::Config(
                        "trajectory.amp_x and trajectory.freq_x must be non-zero (heading follows the velocity)".into(),
                    ));
                }
                Ok(())
            }
            TrajectoryConfig::Hover { position } => {
                position.iter().try_for_each(|v| finite("trajectory.position", *v))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub load_position: [f64; 3],
    pub load_velocity: [f64; 3],
    /// Rotation vector of the initial load attitude.
    pub load_rotation: [f64; 3],
    pub load_omega: [f64; 3],
    /// Initial cable directions; hanging straight down when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cable_directions: Option<[[f64; 3]; N]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThrustModelConfig {
    Direct,
    BodyAxis,
}

impl From<&ThrustModelConfig> for ThrustModel {
    fn from(t: &ThrustModelConfig) -> Self {
        match t {
            ThrustModelConfig::Direct => ThrustModel::Direct,
            ThrustModelConfig::BodyAxis => ThrustModel::BodyAxis,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSettings {
    pub mu_min: f64,
    pub fd_step: f64,
    pub yaw: f64,
    pub thrust_model: ThrustModelConfig,
    /// Time constant [s] of the filter on the measured-minus-predicted load
    /// acceleration; zero uses the raw one-step-lagged residual.
    #[serde(default = "default_accel_filter")]
    pub accel_filter: f64,
}

fn default_accel_filter() -> f64 {
    0.005
}

impl ControllerSettings {
    pub fn config(&self) -> ControllerConfig {
        ControllerConfig { mu_min: self.mu_min, fd_step: self.fd_step, yaw: self.yaw }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeConfig {
    Rk4,
    Euler,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetractionConfig {
    LieExp,
    Project,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlUpdateConfig {
    PerStage,
    Hold,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub horizon: f64,
    pub scheme: SchemeConfig,
    pub retraction: RetractionConfig,
    pub control: ControlUpdateConfig,
    pub tidy: bool,
    pub record_every: usize,
}

impl IntegratorSettings {
    pub fn config(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.dt,
            horizon: self.horizon,
            scheme: match self.scheme {
                SchemeConfig::Rk4 => Scheme::Rk4,
                SchemeConfig::Euler => Scheme::Euler,
            },
            retraction: match self.retraction {
                RetractionConfig::LieExp => Retraction::Exponential,
                RetractionConfig::Project => Retraction::Project,
            },
            control: match self.control {
                ControlUpdateConfig::PerStage => ControlUpdate::PerStage,
                ControlUpdateConfig::Hold => ControlUpdate::Hold,
            },
            tidy: self.tidy,
            record_every: self.record_every,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory, relative to the output root unless absolute.
    pub dir: String,
    pub csv: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
    pub dt: f64,
    /// Deviations are measured over `[settle, horizon]`.
    pub settle: f64,
    /// Spacing of the compared samples.
    pub sample_dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: ModelKind,
    pub params: ParamsConfig,
    pub elastic: ElasticConfig,
    pub gains: GainsConfig,
    pub certificate: CertificateConfig,
    pub trajectory: TrajectoryConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
    pub controller: ControllerSettings,
    pub integrator: IntegratorSettings,
    pub output: OutputConfig,
    pub sweep: SweepConfig,
}

fn finite(name: &str, v: f64) -> SimResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(SimError::Config(format!("{name} must be finite (got {v})")))
    }
}

fn positive(name: &str, v: f64) -> SimResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SimError::Config(format!("{name} must be positive (got {v})")))
    }
}

impl ScenarioConfig {
    /// Checks every field; errors name the offending key.
    pub fn validate(&self) -> SimResult<()> {
        let p = &self.params;
        positive("params.m_load", p.m_load)?;
        positive("params.m_quad", p.m_quad)?;
        positive("params.rest_length", p.rest_length)?;
        positive("params.gravity", p.gravity)?;
        for (k, v) in p.j_load.iter().enumerate() {
            positive(&format!("params.j_load[{k}]"), *v)?;
        }
        for (k, v) in p.j_quad.iter().enumerate() {
            positive(&format!("params.j_quad[{k}]"), *v)?;
        }
        for (j, r) in p.attach.iter().enumerate() {
            r.iter().try_for_each(|v| finite(&format!("params.attach[{j}]"), *v))?;
        }
        self.params.physical().validate().map_err(|e| SimError::Config(format!("params: {e}")))?;
        quadcable::controller::AllocationGeometry::new(&self.params.physical().attach)
            .map_err(|e| SimError::Config(format!("params.attach: {e}")))?;

        positive("elastic.eps", self.elastic.eps)?;
        positive("elastic.k_bar", self.elastic.k_bar)?;
        if let Some(c) = self.elastic.c_bar {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(SimError::Config(format!("elastic.c_bar must be non-negative (got {c})")));
            }
        }

        let g = &self.gains;
        let gains = [
            ("k_x", Some(g.k_x)),
            ("k_v", Some(g.k_v)),
            ("k_r", g.k_r),
            ("k_omega", g.k_omega),
            ("k_q", g.k_q),
            ("k_w", g.k_w),
            ("k_r_quad", Some(g.k_r_quad)),
            ("k_omega_quad", Some(g.k_omega_quad)),
            ("eps_att", Some(g.eps_att)),
        ];
        for (k, v) in gains {
            if let Some(v) = v {
                positive(&format!("gains.{k}"), v)?;
            }
        }

        let c = &self.certificate;
        for (k, v) in [("c_x", c.c_x), ("c_q", c.c_q), ("c_r", c.c_r), ("e_xmax", c.e_xmax), ("margin", c.margin), ("sample_dt", c.sample_dt)] {
            positive(&format!("certificate.{k}"), v)?;
        }
        for (k, v) in [("psi_q", c.psi_q), ("psi_r", c.psi_r), ("young_fraction", c.young_fraction)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(SimError::Config(format!("certificate.{k} must lie in (0, 1) (got {v})")));
            }
        }
        for (k, v) in [("m_r", c.m_r), ("l_r", c.l_r), ("l_c", c.l_c)] {
            if let Some(v) = v {
                positive(&format!("certificate.{k}"), v)?;
            }
        }

        self.trajectory.validate()?;

        let i = &self.initial;
        for (k, v) in [
            ("load_position", i.load_position),
            ("load_velocity", i.load_velocity),
            ("load_rotation", i.load_rotation),
            ("load_omega", i.load_omega),
        ] {
            v.iter().try_for_each(|x| finite(&format!("initial.{k}"), *x))?;
        }
        if let Some(q) = &i.cable_directions {
            for (j, d) in q.iter().enumerate() {
                let n = Vec3::from(*d).norm();
                if !(n > 1e-9 && n.is_finite()) {
                    return Err(SimError::Config(format!("initial.cable_directions[{j}] must be a non-zero vector")));
                }
            }
        }

        self.disturbance
            .validate()
            .map_err(|e| SimError::Config(format!("disturbance: {e}")))?;

        positive("controller.mu_min", self.controller.mu_min)?;
        positive("controller.fd_step", self.controller.fd_step)?;
        finite("controller.yaw", self.controller.yaw)?;
        if !(self.controller.accel_filter >= 0.0 && self.controller.accel_filter.is_finite()) {
            return Err(SimError::Config(format!(
                "controller.accel_filter must be non-negative (got {})",
                self.controller.accel_filter
            )));
        }

        let s = &self.integrator;
        positive("integrator.dt", s.dt)?;
        if !(s.horizon >= 0.0 && s.horizon.is_finite()) {
            return Err(SimError::Config(format!("integrator.horizon must be non-negative (got {})", s.horizon)));
        }
        if s.record_every == 0 {
            return Err(SimError::Config("integrator.record_every must be at least 1".into()));
        }

        if self.output.dir.is_empty() {
            return Err(SimError::Config("output.dir must not be empty".into()));
        }

        let w = &self.sweep;
        if w.eps.is_empty() {
            return Err(SimError::Config("sweep.eps must list at least one value".into()));
        }
        for (k, e) in w.eps.iter().enumerate() {
            positive(&format!("sweep.eps[{k}]"), *e)?;
        }
        positive("sweep.dt", w.dt)?;
        positive("sweep.sample_dt", w.sample_dt)?;
        if !(w.settle >= 0.0) {
            return Err(SimError::Config(format!("sweep.settle must be non-negative (got {})", w.settle)));
        }
        Ok(())
    }

    /// Parses a scenario document, merging it over its base scenario.
    pub fn from_toml_str(text: &str) -> SimResult<Self> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| SimError::Config(e.to_string()))?;
        let base_name = match doc.remove("scenario") {
            None => scenarios::DEFAULT.to_string(),
            Some(toml::Value::String(s)) => s,
            Some(other) => {
                return Err(SimError::Config(format!("scenario must be a string naming a built-in scenario (got {other})")))
            }
        };
        let base = scenarios::builtin(&base_name)
            .ok_or_else(|| SimError::Config(format!("unknown scenario `{base_name}`; see list-scenarios")))?;
        let mut merged = match toml::Value::try_from(&base).map_err(|e| SimError::Config(e.to_string()))? {
            toml::Value::Table(t) => t,
            _ => unreachable!("scenario serializes to a table"),
        };
        merge(&mut merged, doc);
        let cfg: ScenarioConfig =
            toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            SimError::Config(m) => SimError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> SimResult<String> {
        toml::to_string_pretty(self).map_err(|e| SimError::Config(e.to_string()))
    }

    /// Physical parameters of the simulated model, including cable elasticity
    /// for the full model.
    pub fn physical(&self) -> SimResult<PhysicalParams> {
        let p = self.params.physical();
        match self.model {
            ModelKind::Full => Ok(p.with_elastic_scaling(
                self.elastic.eps,
                self.elastic.k_bar,
                self.elastic.c_bar_for(self.params.m_quad),
            )?),
            _ => Ok(p),
        }
    }
}

/// Recursive table merge: tables merge key by key, everything else replaces.
/// Tagged tables (with a `kind` key) are replaced wholesale when the kind
/// changes so that stale variant fields do not leak into the result.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                if o.get("kind").is_some() && o.get("kind") != b.get("kind") {
                    *b = o;
                } else {
                    merge(b, o);
                }
            }
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
