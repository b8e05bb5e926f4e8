//! Elastic-versus-inelastic comparison over a list of `ε`.
//!
//! The inelastic model is integrated once; each `ε` integrates the elastic
//! model with `k = k̄/ε²`, `c = c̄/ε` from the same initial slow state under the
//! same controller.  The deviation is the supremum over `t ≥ settle` of the
//! Euclidean norm of the stacked difference of the load and cable states
//! `(x, v, R, Ω, q_j, ω_j)` (`R` in Frobenius norm).  Quadrotor attitudes are
//! left out: they only see the cables through the commanded thrust.

use std::fmt;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use quadcable::controller::MeasuredAccel;
use quadcable::integrator::{simulate, FullPlant, IntegratorConfig, Plant, ReducedPlant};
use quadcable::{FullState, ReducedState, SlowView, N};
use rayon::prelude::*;

use crate::config::{ModelKind, ScenarioConfig};
use crate::error::{SimError, SimResult};
use crate::run::{initial_state, output_dir, prepare, Prepared, RunOptions};

/// `‖a − b‖` over the load and cable variables.
pub fn slow_distance(a: &ReducedState, b: &ReducedState) -> f64 {
    let mut s = (a.load.x - b.load.x).norm_squared()
        + (a.load.v - b.load.v).norm_squared()
        + (a.load.r.matrix() - b.load.r.matrix()).norm_squared()
        + (a.load.omega - b.load.omega).norm_squared();
    for j in 0..N {
        s += (a.links[j].q.as_vec() - b.links[j].q.as_vec()).norm_squared()
            + (a.links[j].omega - b.links[j].omega).norm_squared();
    }
    s.sqrt()
}

#[derive(Clone, Debug)]
pub struct SweepMember {
    pub eps: f64,
    /// `None` when the run failed.
    pub deviation: Option<f64>,
    /// Time at which the supremum is attained.
    pub argmax: f64,
    pub error: Option<String>,
    pub wall_time: Duration,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub members: Vec<SweepMember>,
    /// Log-log slope of deviation against `ε`; `None` with fewer than two
    /// successful members.
    pub order: Option<f64>,
    /// Deviations strictly decrease as `ε` decreases.
    pub strictly_decreasing: bool,
    pub output_dir: Option<PathBuf>,
    pub wall_time: Duration,
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>10}  {:>14}  {:>10}  {:>9}", "eps", "deviation", "t_max", "wall [s]")?;
        for m in &self.members {
            match (m.deviation, &m.error) {
                (Some(d), _) => writeln!(
                    f,
                    "{:>10.4e}  {:>14.6e}  {:>10.4}  {:>9.2}",
                    m.eps,
                    d,
                    m.argmax,
                    m.wall_time.as_secs_f64()
                )?,
                (None, e) => writeln!(f, "{:>10.4e}  failed: {}", m.eps, e.as_deref().unwrap_or("unknown"))?,
            }
        }
        match self.order {
            Some(o) => writeln!(f, "order (log-log slope)  {o:.4}")?,
            None => writeln!(f, "order (log-log slope)  N/A")?,
        }
        writeln!(f, "strictly decreasing    {}", self.strictly_decreasing)?;
        write!(f, "wall time              {:.2} s", self.wall_time.as_secs_f64())
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

fn slow_samples<P>(plant: &P, x0: &P::State, prep: &Prepared, icfg: &IntegratorConfig) -> SimResult<Vec<(f64, ReducedState)>>
where
    P: Plant,
    P::State: SlowView,
{
    let mut out = Vec::with_capacity(icfg.steps() / icfg.record_every + 2);
    simulate(plant, &MeasuredAccel::new(&prep.controller, prep.config.controller.accel_filter), x0, 0.0, icfg, |t, s: &P::State, _, _| {
        out.push((t, s.slow()));
        Ok(())
    })?;
    Ok(out)
}

fn sweep_integrator(cfg: &ScenarioConfig) -> IntegratorConfig {
    let mut icfg = cfg.integrator.config();
    icfg.dt = cfg.sweep.dt;
    icfg.record_every = ((cfg.sweep.sample_dt / cfg.sweep.dt).round() as usize).max(1);
    icfg
}

/// Runs the sweep.  `eps` overrides `cfg.sweep.eps` when given.
pub fn epsilon_sweep(cfg: &ScenarioConfig, eps: Option<&[f64]>, opts: &RunOptions) -> SimResult<SweepReport> {
    let start = Instant::now();
    let eps: Vec<f64> = eps.map(<[f64]>::to_vec).unwrap_or_else(|| cfg.sweep.eps.clone());
    if eps.is_empty() {
        return Err(SimError::Config("sweep.eps must not be empty".into()));
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(SimError::Config(format!("sweep.eps entries must be positive (got {e})")));
    }
    let mut base = cfg.clone();
    base.model = ModelKind::Reduced;
    let prep = prepare(&base)?;
    let icfg = sweep_integrator(cfg);
    icfg.validate()?;
    let x0 = initial_state(cfg)?;
    let thrust_model = (&cfg.controller.thrust_model).into();
    let settle = cfg.sweep.settle;

    let (reference, members) = rayon::join(
        || {
            let plant = ReducedPlant { params: prep.design.clone(), disturbance: None, thrust_model };
            slow_samples(&plant, &x0, &prep, &icfg)
        },
        || {
            eps.par_iter()
                .map(|&e| {
                    let t0 = Instant::now();
                    let res = (|| -> SimResult<Vec<(f64, ReducedState)>> {
                        let params = prep.design.clone().with_elastic_scaling(
                            e,
                            cfg.elastic.k_bar,
                            cfg.elastic.c_bar_for(cfg.params.m_quad),
                        )?;
                        let x0 = FullState::from_reduced(&x0, params.rest_length);
                        let plant = FullPlant { params, thrust_model };
                        slow_samples(&plant, &x0, &prep, &icfg)
                    })();
                    (e, res, t0.elapsed())
                })
                .collect::<Vec<_>>()
        },
    );
    let reference = reference?;

    let mut out = Vec::with_capacity(members.len());
    let mut series = Vec::new();
    for (e, res, wall) in members {
        match res {
            Ok(samples) => {
                let dev: Vec<(f64, f64)> =
                    samples.iter().zip(&reference).map(|((t, a), (_, b))| (*t, slow_distance(a, b))).collect();
                let (argmax, sup) = dev
                    .iter()
                    .filter(|(t, _)| *t >= settle - 1e-12)
                    .fold((f64::NAN, 0.0_f64), |acc, &(t, d)| if d > acc.1 || acc.0.is_nan() { (t, d) } else { acc });
                out.push(SweepMember { eps: e, deviation: Some(sup), argmax, error: None, wall_time: wall });
                series.push((e, dev));
            }
            Err(err) => {
                out.push(SweepMember { eps: e, deviation: None, argmax: f64::NAN, error: Some(err.to_string()), wall_time: wall })
            }
        }
    }

    let ok: Vec<(f64, f64)> = out.iter().filter_map(|m| m.deviation.map(|d| (m.eps, d))).collect();
    let order = loglog_slope(&ok);
    let mut sorted = ok.clone();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let strictly_decreasing = ok.len() == out.len() && sorted.windows(2).all(|w| w[1].1 < w[0].1);

    let dir = (!opts.no_files).then(|| output_dir(cfg, opts.output_root.as_deref()));
    let report = SweepReport { members: out, order, strictly_decreasing, output_dir: dir.clone(), wall_time: start.elapsed() };
    if let Some(d) = &dir {
        write_outputs(d, &report, &series)?;
    }
    Ok(report)
}

fn write_outputs(dir: &std::path::Path, report: &SweepReport, series: &[(f64, Vec<(f64, f64)>)]) -> SimResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let path = dir.join("sweep.txt");
    std::fs::write(&path, format!("{report}\n")).map_err(|e| SimError::io(&path, e))?;
    for (e, dev) in series {
        let sub = dir.join(format!("eps_{e}"));
        std::fs::create_dir_all(&sub).map_err(|e| SimError::io(&sub, e))?;
        let path = sub.join("deviation.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| SimError::Csv { path: path.clone(), source: e })?;
        let wrap = |e| SimError::Csv { path: path.clone(), source: e };
        w.write_record(["t", "deviation"]).map_err(wrap)?;
        for (t, d) in dev {
            w.write_record([format!("{t:.16e}"), format!("{d:.16e}")]).map_err(wrap)?;
        }
        w.flush().map_err(|e| SimError::io(&path, e))?;
    }
    Ok(())
}
