//! Built-in scenarios.

use quadcable::disturbance::DisturbanceSpec;

use crate::config::*;

/// Base scenario of configuration files that do not name one.
pub const DEFAULT: &str = "paper_nominal";

pub const NAMES: [&str; 4] = ["paper_nominal", "paper_disturbed", "epsilon_sweep", "hover"];

pub fn describe(name: &str) -> &'static str {
    match name {
        "paper_nominal" => "figure-eight load tracking, rigid cables, 40 s at 2 ms",
        "paper_disturbed" => "paper_nominal with sinusoidal load force and moment disturbances",
        "epsilon_sweep" => "elastic cables; `sweep` compares eps in {0.1, 0.05, 0.025} with the rigid model",
        "hover" => "regulation to a fixed point from an offset, rigid cables, 10 s",
        _ => "",
    }
}

fn nominal() -> ScenarioConfig {
    ScenarioConfig {
        name: "paper_nominal".into(),
        model: ModelKind::Reduced,
        params: ParamsConfig::reference(),
        elastic: ElasticConfig { eps: 0.05, k_bar: 1.0e4, c_bar: None },
        gains: GainsConfig {
            k_x: 600.0,
            k_v: 600.0,
            k_r: None,
            k_omega: None,
            k_q: None,
            k_w: None,
            k_r_quad: 60.0,
            k_omega_quad: 5.0,
            eps_att: 1.0,
        },
        certificate: CertificateConfig {
            c_x: 1.0,
            c_q: 1.0,
            c_r: 1.0,
            psi_q: 1e-4,
            psi_r: 1e-4,
            e_xmax: 0.5,
            margin: 1e-3,
            sample_dt: 0.01,
            young_fraction: 0.5,
            m_r: None,
            l_r: None,
            l_c: None,
        },
        trajectory: TrajectoryConfig::FigureEight { amp_x: 1.2, freq_x: 0.2, amp_y: 4.2, freq_y: 0.1, height: 5.0 },
        initial: InitialConfig {
            load_position: [1.5, 2.5, 2.5],
            load_velocity: [0.0; 3],
            load_rotation: [0.0; 3],
            load_omega: [0.0; 3],
            cable_directions: None,
        },
        disturbance: DisturbanceSpec::default(),
        controller: ControllerSettings {
            mu_min: 1e-6,
            fd_step: 1e-4,
            yaw: 0.0,
            thrust_model: ThrustModelConfig::Direct,
            accel_filter: 0.005,
        },
        integrator: IntegratorSettings {
            dt: 2e-3,
            horizon: 40.0,
            scheme: SchemeConfig::Rk4,
            retraction: RetractionConfig::LieExp,
            control: ControlUpdateConfig::PerStage,
            tidy: true,
            record_every: 1,
        },
        output: OutputConfig { dir: "paper_nominal".into(), csv: true },
        sweep: SweepConfig { eps: vec![0.1, 0.05, 0.025], dt: 5e-5, settle: 1.0, sample_dt: 0.01 },
    }
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    let mut c = nominal();
    match name {
        "paper_nominal" => {}
        "paper_disturbed" => {
            c.name = name.into();
            c.model = ModelKind::Perturbed;
            c.disturbance = DisturbanceSpec::reference();
            c.output.dir = name.into();
        }
        "epsilon_sweep" => {
            c.name = name.into();
            c.model = ModelKind::Full;
            c.integrator.dt = c.sweep.dt;
            c.integrator.record_every = 200;
            c.output.dir = name.into();
        }
        "hover" => {
            c.name = name.into();
            c.trajectory = TrajectoryConfig::Hover { position: [0.0, 0.0, 2.0] };
            c.initial.load_position = [0.5, -0.3, 1.6];
            c.integrator.horizon = 10.0;
            c.output.dir = name.into();
        }
        _ => return None,
    }
    Some(c)
}
