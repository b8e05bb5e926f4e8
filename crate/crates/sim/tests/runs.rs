use quadcable_sim::config::ModelKind;
use quadcable_sim::export::read;
use quadcable_sim::run::{initial_state, output_dir, prepare, RunOptions, CSV_NAME};
use quadcable_sim::sweep::{loglog_slope, slow_distance};
use quadcable_sim::{epsilon_sweep, run_scenario, scenarios, ScenarioConfig};

fn short(name: &str, horizon: f64) -> ScenarioConfig {
    let mut c = scenarios::builtin(name).unwrap();
    c.integrator.horizon = horizon;
    c
}

fn opts(dir: &tempfile::TempDir) -> RunOptions {
    RunOptions { output_root: Some(dir.path().to_path_buf()), no_files: false }
}

#[test]
fn mse_agrees_with_the_written_time_series() {
    let dir = tempfile::tempdir().unwrap();
    let rep = run_scenario(&short("hover", 1.0), &opts(&dir)).unwrap();
    let (h, rows) = read(rep.csv.as_ref().unwrap()).unwrap();
    assert_eq!(rows.len(), rep.samples);
    assert_eq!(rep.samples, rep.steps + 1);
    for (k, axis) in ["exL_x", "exL_y", "exL_z"].iter().enumerate() {
        let c = h.iter().position(|x| x == axis).unwrap();
        let mse = rows.iter().map(|r| r[c] * r[c]).sum::<f64>() / rows.len() as f64;
        assert!((mse - rep.mse[k]).abs() <= 1e-12 * mse.max(1e-300), "{mse} vs {}", rep.mse[k]);
    }
    let v = h.iter().position(|x| x == "V").unwrap();
    for (r, s) in rows.iter().zip(&rep.trace) {
        assert_eq!(r[0], s.t);
        assert_eq!(r[v], s.v);
    }
}

#[test]
fn output_directory_holds_config_certificate_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let rep = run_scenario(&short("hover", 0.2), &opts(&dir)).unwrap();
    let out = rep.output_dir.clone().unwrap();
    assert_eq!(out, dir.path().join("hover"));
    for f in ["effective_config.toml", "certificate.txt", "summary.txt", CSV_NAME] {
        assert!(out.join(f).exists(), "{f}");
    }
    // The echoed configuration carries the resolved gains and reproduces the run.
    let echo = ScenarioConfig::load(&out.join("effective_config.toml")).unwrap();
    assert!(echo.gains.is_complete());
    assert_eq!(echo.gains.template(), rep.gains);
    let again = run_scenario(&echo, &RunOptions { no_files: true, ..RunOptions::default() }).unwrap();
    assert_eq!(again.mse, rep.mse);
}

#[test]
fn runs_are_deterministic() {
    let c = short("paper_nominal", 0.5);
    let o = RunOptions { no_files: true, ..RunOptions::default() };
    let a = run_scenario(&c, &o).unwrap();
    let b = run_scenario(&c, &o).unwrap();
    assert_eq!(a.mse, b.mse);
    assert_eq!(a.trace, b.trace);
}

#[test]
fn no_files_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let rep = run_scenario(&short("hover", 0.1), &RunOptions { output_root: Some(dir.path().into()), no_files: true })
        .unwrap();
    assert!(rep.csv.is_none());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn absolute_output_dir_ignores_the_root() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = short("hover", 0.1);
    c.output.dir = dir.path().join("abs").to_string_lossy().into_owned();
    assert_eq!(output_dir(&c, Some(std::path::Path::new("/elsewhere"))), dir.path().join("abs"));
}

#[test]
fn elastic_run_logs_cable_lengths() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = short("epsilon_sweep", 0.05);
    c.integrator.record_every = 100;
    let rep = run_scenario(&c, &opts(&dir)).unwrap();
    let (h, rows) = read(rep.csv.as_ref().unwrap()).unwrap();
    assert!(h.iter().any(|x| x == "ldot4"));
    let l1 = h.iter().position(|x| x == "l1").unwrap();
    assert_eq!(rows[0][l1], c.params.rest_length);
    assert!(rows.iter().all(|r| (r[l1] - 1.0).abs() < 0.05));
}

#[test]
fn perturbed_run_reports_an_ultimate_bound() {
    let rep = run_scenario(&short("paper_disturbed", 0.2), &RunOptions { no_files: true, ..RunOptions::default() })
        .unwrap();
    assert_eq!(rep.model, ModelKind::Perturbed);
    let u = rep.ultimate_bound.unwrap();
    assert!(u.d1 > 0.0 && u.radius.is_finite());
}

#[test]
fn explicit_gains_skip_the_search() {
    let c = short("hover", 0.1);
    let p = prepare(&c).unwrap();
    let mut fixed = c.clone();
    fixed.gains = quadcable_sim::config::GainsConfig::from_gains(p.gains());
    let q = prepare(&fixed).unwrap();
    assert_eq!(p.gains(), q.gains());
    assert!(q.certificate.verdict);
}

#[test]
fn initial_cable_directions_are_normalized() {
    let mut c = short("hover", 0.1);
    c.initial.cable_directions = Some([[0.0, 0.0, -2.0], [0.1, 0.0, -1.0], [0.0, 0.1, -1.0], [0.0, 0.0, -0.5]]);
    let s = initial_state(&c).unwrap();
    for l in &s.links {
        assert!((l.q.as_vec().norm() - 1.0).abs() < 1e-15);
    }
    c.initial.cable_directions = Some([[0.0; 3]; 4]);
    assert!(c.validate().is_err());
}

#[test]
fn numerical_failure_is_reported() {
    let mut c = short("epsilon_sweep", 0.5);
    c.integrator.dt = 1e-2;
    c.integrator.record_every = 1;
    let e = run_scenario(&c, &RunOptions { no_files: true, ..RunOptions::default() }).unwrap_err();
    assert_eq!(e.exit_code(), 2, "{e}");
}

#[test]
fn builtins_run_to_completion() {
    let o = RunOptions { no_files: true, ..RunOptions::default() };
    for name in scenarios::NAMES {
        let c = scenarios::builtin(name).unwrap();
        let rep = run_scenario(&c, &o).unwrap();
        assert!((rep.final_time - c.integrator.horizon).abs() < 1e-9, "{name}");
        assert!(rep.mse.iter().all(|m| m.is_finite()), "{name}");
    }
}

#[test]
fn single_eps_sweep_has_no_order() {
    let mut c = short("epsilon_sweep", 0.2);
    c.sweep.settle = 0.1;
    let r = epsilon_sweep(&c, Some(&[0.1]), &RunOptions { no_files: true, ..RunOptions::default() }).unwrap();
    assert_eq!(r.members.len(), 1);
    assert!(r.members[0].deviation.unwrap() > 0.0);
    assert!(r.order.is_none());
    assert!(r.to_string().contains("N/A"));
}

#[test]
fn sweep_rejects_bad_eps() {
    let c = short("epsilon_sweep", 0.1);
    let o = RunOptions { no_files: true, ..RunOptions::default() };
    assert!(epsilon_sweep(&c, Some(&[]), &o).is_err());
    assert!(epsilon_sweep(&c, Some(&[0.1, -0.1]), &o).is_err());
}

#[test]
fn slope_of_power_laws() {
    let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|e| (*e, 3.0 * e * e)).collect();
    assert!((loglog_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
    assert!(loglog_slope(&pts[..1]).is_none());
}

#[test]
fn slow_distance_is_a_metric_on_samples() {
    let a = quadcable::ReducedState::hover(quadcable::Vec3::zeros());
    let mut b = a;
    b.load.x.x = 3.0;
    b.load.v.y = 4.0;
    assert_eq!(slow_distance(&a, &a), 0.0);
    assert!((slow_distance(&a, &b) - 5.0).abs() < 1e-15);
    // Quadrotor attitudes are not part of the comparison.
    b = a;
    b.quads[0].omega.x = 1.0;
    assert_eq!(slow_distance(&a, &b), 0.0);
}
