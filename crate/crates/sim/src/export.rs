//! CSV time series.
//!
//! One row per recorded sample: `t`, load pose and twist (`R_L` row-major),
//! per-cable direction and angular velocity (plus length and length rate for
//! the elastic model), per-quadrotor attitude, angular velocity, thrust and
//! moment, then the load position and attitude errors and the Lyapunov value.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use quadcable::{ControlInput, FullState, LoadState, QuadAttitude, ReducedState, Vec3, N};

use crate::error::{SimError, SimResult};

/// States that can be written as CSV rows.
pub trait LoggedState {
    /// Whether cable length and length rate columns are present.
    const ELASTIC: bool;
    fn load(&self) -> &LoadState;
    fn quads(&self) -> &[QuadAttitude; N];
    /// Direction, angular velocity and, for elastic cables, `(l, l̇)`.
    fn cable(&self, j: usize) -> (Vec3, Vec3, Option<(f64, f64)>);
}

impl LoggedState for ReducedState {
    const ELASTIC: bool = false;
    fn load(&self) -> &LoadState {
        &self.load
    }
    fn quads(&self) -> &[QuadAttitude; N] {
        &self.quads
    }
    fn cable(&self, j: usize) -> (Vec3, Vec3, Option<(f64, f64)>) {
        (*self.links[j].q.as_vec(), self.links[j].omega, None)
    }
}

impl LoggedState for FullState {
    const ELASTIC: bool = true;
    fn load(&self) -> &LoadState {
        &self.load
    }
    fn quads(&self) -> &[QuadAttitude; N] {
        &self.quads
    }
    fn cable(&self, j: usize) -> (Vec3, Vec3, Option<(f64, f64)>) {
        let c = &self.cables[j];
        (*c.q.as_vec(), c.omega, Some((c.length, c.length_rate)))
    }
}

const XYZ: [&str; 3] = ["x", "y", "z"];

fn vec_cols(out: &mut Vec<String>, name: &str) {
    out.extend(XYZ.iter().map(|a| format!("{name}_{a}")));
}

fn mat_cols(out: &mut Vec<String>, name: &str) {
    for r in 1..=3 {
        for c in 1..=3 {
            out.push(format!("{name}_{r}{c}"));
        }
    }
}

/// Column names, in order.
pub fn header(elastic: bool) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    vec_cols(&mut h, "xL");
    vec_cols(&mut h, "vL");
    mat_cols(&mut h, "RL");
    vec_cols(&mut h, "OmegaL");
    for j in 1..=N {
        vec_cols(&mut h, &format!("q{j}"));
        vec_cols(&mut h, &format!("w{j}"));
        if elastic {
            h.push(format!("l{j}"));
            h.push(format!("ldot{j}"));
        }
    }
    for j in 1..=N {
        mat_cols(&mut h, &format!("R{j}"));
        vec_cols(&mut h, &format!("Omega{j}"));
        vec_cols(&mut h, &format!("u{j}"));
        vec_cols(&mut h, &format!("M{j}"));
    }
    vec_cols(&mut h, "exL");
    vec_cols(&mut h, "eRL");
    h.push("V".into());
    h
}

/// Number of columns.
pub fn width(elastic: bool) -> usize {
    1 + 18 + N * (6 + if elastic { 2 } else { 0 }) + N * 18 + 7
}

/// Builds one row.
pub fn row<S: LoggedState>(t: f64, s: &S, u: &ControlInput, e_x: &Vec3, e_r: &Vec3, v: f64) -> Vec<f64> {
    let mut r = Vec::with_capacity(width(S::ELASTIC));
    r.push(t);
    let l = s.load();
    r.extend_from_slice(l.x.as_slice());
    r.extend_from_slice(l.v.as_slice());
    push_rows(&mut r, l.r.matrix());
    r.extend_from_slice(l.omega.as_slice());
    for j in 0..N {
        let (q, w, len) = s.cable(j);
        r.extend_from_slice(q.as_slice());
        r.extend_from_slice(w.as_slice());
        if let Some((l, ld)) = len {
            r.push(l);
            r.push(ld);
        }
    }
    for (j, qa) in s.quads().iter().enumerate() {
        push_rows(&mut r, qa.r.matrix());
        r.extend_from_slice(qa.omega.as_slice());
        r.extend_from_slice(u.thrust[j].as_slice());
        r.extend_from_slice(u.moment[j].as_slice());
    }
    r.extend_from_slice(e_x.as_slice());
    r.extend_from_slice(e_r.as_slice());
    r.push(v);
    r
}

fn push_rows(out: &mut Vec<f64>, m: &quadcable::Mat3) {
    for i in 0..3 {
        for k in 0..3 {
            out.push(m[(i, k)]);
        }
    }
}

/// Streaming CSV writer.  The header is written on creation, so a run that
/// records nothing still leaves a header-only file.
pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
    width: usize,
    rows: usize,
}

impl CsvSink {
    pub fn create(path: &Path, elastic: bool) -> SimResult<Self> {
        let file = File::create(path).map_err(|e| SimError::io(path, e))?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        writer.write_record(header(elastic)).map_err(|e| csv_err(path, e))?;
        Ok(Self { path: path.to_path_buf(), writer, width: width(elastic), rows: 0 })
    }

    pub fn write(&mut self, row: &[f64]) -> SimResult<()> {
        if row.len() != self.width {
            return Err(SimError::Config(format!("row has {} columns, expected {}", row.len(), self.width)));
        }
        self.writer
            .write_record(row.iter().map(|v| format!("{v:.16e}")))
            .map_err(|e| csv_err(&self.path, e))?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(mut self) -> SimResult<PathBuf> {
        self.writer.flush().map_err(|e| SimError::io(&self.path, e))?;
        Ok(self.path)
    }
}

fn csv_err(path: &Path, e: csv::Error) -> SimError {
    SimError::Csv { path: path.to_path_buf(), source: e }
}

/// Reads a file written by [`CsvSink`].
pub fn read(path: &Path) -> SimResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = rd.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| SimError::Config(format!("{}: bad number {s:?}: {e}", path.display()))))
            .collect::<SimResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
