//! Scenario files, runs, ε-sweeps and CSV export on top of `quadcable`.

pub mod config;
pub mod error;
pub mod export;
pub mod run;
pub mod scenarios;
pub mod sweep;

pub use config::{ModelKind, ScenarioConfig};
pub use error::{SimError, SimResult};
pub use run::{run_scenario, RunOptions, RunReport};
pub use sweep::{epsilon_sweep, SweepReport};

/// Loads a scenario from a file path or, failing that, a built-in name.
pub fn resolve_scenario(arg: &str) -> SimResult<ScenarioConfig> {
    let path = std::path::Path::new(arg);
    if path.exists() {
        return ScenarioConfig::load(path);
    }
    scenarios::builtin(arg).ok_or_else(|| {
        SimError::Config(format!(
            "{arg}: no such file or built-in scenario (built-ins: {})",
            scenarios::NAMES.join(", ")
        ))
    })
}
