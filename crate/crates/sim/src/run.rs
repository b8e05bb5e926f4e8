//! Running one scenario: gain resolution, integration, metrics and output files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use quadcable::certificate::{
    cable_rate_bound, certify, gain_search, lyapunov_value, trajectory_bound_b, CertificateConstants,
    CertificateReport,
};
use quadcable::controller::{ControlOutput, GainSet, GeometricController, MeasuredAccel};
use quadcable::disturbance::{ultimate_bound, UltimateBoundReport};
use quadcable::integrator::{simulate, FullPlant, IntegratorConfig, Plant, ReducedPlant};
use quadcable::manifold::so3_exp;
use quadcable::{
    ControlInput, FullState, LinkState, LoadState, Mat3, PhysicalParams, QuadAttitude, ReducedState, SlowView,
    UnitVector, Vec3, N,
};

use crate::config::{GainsConfig, ModelKind, ScenarioConfig};
use crate::error::{SimError, SimResult};
use crate::export::{self, CsvSink, LoggedState};

/// Environment variable naming the directory under which relative output
/// directories are created.
pub const OUTPUT_ROOT_ENV: &str = "QUADCABLE_OUTPUT_ROOT";

/// Name of the time-series file inside the output directory.
pub const CSV_NAME: &str = "timeseries.csv";

/// Controller, gains and certificate resolved from a scenario.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub config: ScenarioConfig,
    /// Rigid-cable parameters the controller and certificate are built on.
    pub design: PhysicalParams,
    pub constants: CertificateConstants,
    pub certificate: CertificateReport,
    pub controller: GeometricController,
}

impl Prepared {
    pub fn gains(&self) -> &GainSet {
        &self.controller.gains
    }

    /// The scenario with the resolved gains filled in.
    pub fn effective_config(&self) -> ScenarioConfig {
        let mut c = self.config.clone();
        c.gains = GainsConfig::from_gains(self.gains());
        c
    }
}

/// Trajectory-dependent constants `B` and `C_q` over the scenario horizon.
pub fn certificate_constants(cfg: &ScenarioConfig) -> SimResult<CertificateConstants> {
    let p = cfg.params.physical();
    let traj = cfg.trajectory.build();
    let horizon = cfg.integrator.horizon.max(cfg.certificate.sample_dt);
    let dt = cfg.certificate.sample_dt;
    let b = trajectory_bound_b(traj.as_ref(), &p, horizon, dt);
    let c_qj = cable_rate_bound(traj.as_ref(), &p, &cfg.gains.template(), horizon, dt)?;
    Ok(cfg.certificate.constants(b, c_qj))
}

/// Evaluates the certificate for fixed gains or runs the gain search when
/// some load/cable gains are left open.
pub fn resolve_certificate(cfg: &ScenarioConfig) -> SimResult<CertificateReport> {
    cfg.validate()?;
    let p = cfg.params.physical();
    let c = certificate_constants(cfg)?;
    let report = if cfg.gains.is_complete() {
        certify(&cfg.gains.template(), &c, &p)?
    } else {
        gain_search(&cfg.gains.template(), &c, &p, &cfg.certificate.search_options())?
    };
    Ok(report)
}

pub fn prepare(cfg: &ScenarioConfig) -> SimResult<Prepared> {
    let certificate = resolve_certificate(cfg)?;
    let design = cfg.params.physical();
    let controller = GeometricController::new(
        design.clone(),
        certificate.gains,
        cfg.controller.config(),
        cfg.trajectory.build(),
    )?;
    Ok(Prepared { config: cfg.clone(), design, constants: certificate.constants, certificate, controller })
}

/// Initial state of the inelastic model.
pub fn initial_state(cfg: &ScenarioConfig) -> SimResult<ReducedState> {
    let i = &cfg.initial;
    let load = LoadState {
        x: Vec3::from(i.load_position),
        v: Vec3::from(i.load_velocity),
        r: so3_exp(&Vec3::from(i.load_rotation)),
        omega: Vec3::from(i.load_omega),
    };
    let mut links = [LinkState::hanging(); N];
    if let Some(dirs) = &i.cable_directions {
        for (j, d) in dirs.iter().enumerate() {
            let q = UnitVector::normalize(Vec3::from(*d), 1e-12)
                .map_err(|e| SimError::Config(format!("initial.cable_directions[{j}]: {e}")))?;
            links[j] = LinkState { q, omega: Vec3::zeros() };
        }
    }
    Ok(ReducedState { load, links, quads: [QuadAttitude::default(); N] })
}

/// Where the output files of `cfg` go.  Relative directories are placed
/// under `root`, else under `$QUADCABLE_OUTPUT_ROOT`, else under `output/`.
pub fn output_dir(cfg: &ScenarioConfig, root: Option<&Path>) -> PathBuf {
    let dir = Path::new(&cfg.output.dir);
    if dir.is_absolute() {
        return dir.to_path_buf();
    }
    let root = match root {
        Some(r) => r.to_path_buf(),
        None => std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("output")),
    };
    root.join(dir)
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the output root; see [`output_dir`].
    pub output_root: Option<PathBuf>,
    /// Skip every file (the report is still returned).
    pub no_files: bool,
}

/// One recorded sample of the load error and the Lyapunov value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub e_x: Vec3,
    pub v: f64,
    pub in_domain: bool,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub name: String,
    pub model: ModelKind,
    pub gains: GainSet,
    pub certified: bool,
    pub steps: usize,
    pub final_time: f64,
    /// Recorded samples, including `t = 0`.
    pub samples: usize,
    /// Per-axis mean of `e_x²` over the recorded samples.
    pub mse: [f64; 3],
    pub final_position_error: f64,
    /// Largest `‖RᵀR − I‖` (max entry) over load and quadrotor attitudes.
    pub max_orthogonality_error: f64,
    /// Largest `|‖q_j‖ − 1|`.
    pub max_unit_error: f64,
    pub trace: Vec<TraceSample>,
    pub ultimate_bound: Option<UltimateBoundReport>,
    pub output_dir: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub wall_time: Duration,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.gains;
        writeln!(f, "scenario          {}", self.name)?;
        writeln!(f, "model             {:?}", self.model)?;
        writeln!(
            f,
            "gains             k_x={} k_v={} k_R={:.6e} k_Omega={:.6e} k_q={:.6e} k_w={:.6e}",
            g.k_x, g.k_v, g.k_r, g.k_omega, g.k_q, g.k_w
        )?;
        writeln!(f, "certified         {}", self.certified)?;
        writeln!(f, "steps             {} (t_f = {:.6})", self.steps, self.final_time)?;
        writeln!(f, "samples           {}", self.samples)?;
        writeln!(f, "mse e_x           [{:.6e}, {:.6e}, {:.6e}]", self.mse[0], self.mse[1], self.mse[2])?;
        writeln!(f, "final |e_x|       {:.6e}", self.final_position_error)?;
        writeln!(f, "max orth. error   {:.3e}", self.max_orthogonality_error)?;
        writeln!(f, "max unit error    {:.3e}", self.max_unit_error)?;
        if let Some(u) = &self.ultimate_bound {
            writeln!(f, "ultimate bound    d1 = {:.6e}, radius = {:.6e}", u.d1, u.radius)?;
        }
        if let Some(p) = &self.csv {
            writeln!(f, "csv               {}", p.display())?;
        }
        write!(f, "wall time         {:.3} s", self.wall_time.as_secs_f64())
    }
}

struct Recorded {
    steps: usize,
    final_time: f64,
    sum_sq: [f64; 3],
    last_e_x: Vec3,
    orth: f64,
    unit: f64,
    trace: Vec<TraceSample>,
}

trait Hygiene {
    fn hygiene(&self) -> (f64, f64);
}

impl<S: LoggedState> Hygiene for S {
    fn hygiene(&self) -> (f64, f64) {
        let orth = self
            .quads()
            .iter()
            .map(|q| q.r.orthogonality_error())
            .fold(self.load().r.orthogonality_error(), f64::max);
        let unit = (0..N).map(|j| (self.cable(j).0.norm() - 1.0).abs()).fold(0.0, f64::max);
        (orth, unit)
    }
}

fn integrate<P>(
    plant: &P,
    x0: &P::State,
    ctrl: &GeometricController,
    accel_filter: f64,
    constants: &CertificateConstants,
    icfg: &IntegratorConfig,
    mut sink: Option<&mut CsvSink>,
) -> SimResult<Recorded>
where
    P: Plant,
    P::State: LoggedState + SlowView,
{
    let j_load: Mat3 = ctrl.params.j_load;
    let mut rec = Recorded {
        steps: 0,
        final_time: 0.0,
        sum_sq: [0.0; 3],
        last_e_x: Vec3::zeros(),
        orth: 0.0,
        unit: 0.0,
        trace: Vec::with_capacity(icfg.steps() / icfg.record_every + 2),
    };
    let mut sink_error: Option<SimError> = None;
    let fb = MeasuredAccel::new(ctrl, accel_filter);
    let result = simulate(plant, &fb, x0, 0.0, icfg, |t, s: &P::State, u: &ControlInput, out: &ControlOutput| {
        let e = &out.errors;
        let lv = lyapunov_value(e, &ctrl.gains, constants, &j_load);
        let e_x = e.load.e_x;
        for k in 0..3 {
            rec.sum_sq[k] += e_x[k] * e_x[k];
        }
        rec.last_e_x = e_x;
        let (o, n) = s.hygiene();
        rec.orth = rec.orth.max(o);
        rec.unit = rec.unit.max(n);
        rec.trace.push(TraceSample { t, e_x, v: lv.v, in_domain: lv.in_domain });
        if let Some(w) = sink.as_deref_mut() {
            if let Err(err) = w.write(&export::row(t, s, u, &e_x, &e.load.e_r, lv.v)) {
                sink_error = Some(err);
                return Err(quadcable::Error::InvalidState("output write failed".into()));
            }
        }
        Ok(())
    });
    if let Some(e) = sink_error {
        return Err(e);
    }
    let summary = result?;
    rec.steps = summary.steps;
    rec.final_time = summary.final_time;
    Ok(rec)
}

/// Resolves gains, integrates the scenario and writes its output files.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> SimResult<RunReport> {
    let start = Instant::now();
    let prep = prepare(cfg)?;
    run_prepared(&prep, opts, start)
}

/// Like [`run_scenario`] with the controller already resolved.
pub fn run_prepared(prep: &Prepared, opts: &RunOptions, start: Instant) -> SimResult<RunReport> {
    let cfg = &prep.config;
    let dir = (!opts.no_files).then(|| output_dir(cfg, opts.output_root.as_deref()));
    if let Some(d) = &dir {
        std::fs::create_dir_all(d).map_err(|e| SimError::io(d, e))?;
        let path = d.join("effective_config.toml");
        std::fs::write(&path, prep.effective_config().to_toml_string()?).map_err(|e| SimError::io(&path, e))?;
        let path = d.join("certificate.txt");
        std::fs::write(&path, prep.certificate.to_string()).map_err(|e| SimError::io(&path, e))?;
    }
    let elastic = cfg.model == ModelKind::Full;
    let mut sink = match (&dir, cfg.output.csv) {
        (Some(d), true) => Some(CsvSink::create(&d.join(CSV_NAME), elastic)?),
        _ => None,
    };
    let icfg = cfg.integrator.config();
    let x0 = initial_state(cfg)?;
    let thrust_model = (&cfg.controller.thrust_model).into();
    let rec = match cfg.model {
        ModelKind::Reduced | ModelKind::Perturbed => {
            let disturbance = (cfg.model == ModelKind::Perturbed).then(|| cfg.disturbance.clone());
            let plant = ReducedPlant { params: prep.design.clone(), disturbance, thrust_model };
            integrate(&plant, &x0, &prep.controller, prep.config.controller.accel_filter, &prep.constants, &icfg, sink.as_mut())?
        }
        ModelKind::Full => {
            let params = cfg.physical()?;
            let plant = FullPlant { params: params.clone(), thrust_model };
            let x0 = FullState::from_reduced(&x0, params.rest_length);
            integrate(&plant, &x0, &prep.controller, prep.config.controller.accel_filter, &prep.constants, &icfg, sink.as_mut())?
        }
    };
    let csv = sink.map(CsvSink::finish).transpose()?;

    let ultimate = if cfg.model == ModelKind::Perturbed && prep.certificate.verdict {
        let eps = cfg.certificate.young_fraction * prep.certificate.lambda_min_exact();
        ultimate_bound(&prep.certificate, &prep.design, &cfg.disturbance.bounds(), &cfg.certificate.scales(&prep.design), eps)
            .ok()
    } else {
        None
    };

    let n = rec.trace.len().max(1) as f64;
    let report = RunReport {
        name: cfg.name.clone(),
        model: cfg.model,
        gains: *prep.gains(),
        certified: prep.certificate.verdict,
        steps: rec.steps,
        final_time: rec.final_time,
        samples: rec.trace.len(),
        mse: rec.sum_sq.map(|s| s / n),
        final_position_error: rec.last_e_x.norm(),
        max_orthogonality_error: rec.orth,
        max_unit_error: rec.unit,
        trace: rec.trace,
        ultimate_bound: ultimate,
        output_dir: dir.clone(),
        csv,
        wall_time: start.elapsed(),
    };
    if let Some(d) = &dir {
        let path = d.join("summary.txt");
        std::fs::write(&path, format!("{report}\n")).map_err(|e| SimError::io(&path, e))?;
    }
    Ok(report)
}
