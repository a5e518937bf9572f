//! Time-series and snapshot writers.
//!
//! Time series are comma-separated with a header row. Snapshots are raw
//! little-endian `f64`, node-major with the variables of a node stored
//! together, next to a `.txt` sidecar describing the layout.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::coupling::{CoupledState, TrajectoryRow};
use crate::error::Result;
use crate::geometry::Mesh;

/// Column names of the time-series file.
pub fn series_header(dim: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["t", "E0", "E1", "bc_mismatch", "vort_res", "ent_res"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let axes = ["x", "y", "z"];
    for a in &axes[..dim] {
        cols.push(format!("l_{a}"));
    }
    if dim == 2 {
        cols.push("omega_z".into());
    } else {
        for a in &axes {
            cols.push(format!("omega_{a}"));
        }
    }
    for a in &axes[..dim] {
        cols.push(format!("h_{a}"));
    }
    cols.push("picard_iters".into());
    cols
}

/// One time-series row, with fields in header order.
pub fn series_row(row: &TrajectoryRow, dim: usize) -> String {
    let r = &row.record;
    let mut vals = vec![r.t, r.e0, r.e1, r.bc_mismatch, r.vort_res, r.ent_res];
    vals.extend(row.theta.l_bar.iter().take(dim));
    if dim == 2 {
        vals.push(row.theta.omega_bar.z);
    } else {
        vals.extend(row.theta.omega_bar.iter());
    }
    vals.extend(row.h.iter().take(dim));
    let mut line = vals.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(",");
    line.push_str(&format!(",{}", row.picard_iters));
    line
}

/// Streaming time-series writer.
pub struct SeriesWriter {
    out: BufWriter<File>,
    dim: usize,
}

impl SeriesWriter {
    pub fn create(path: impl AsRef<Path>, dim: usize) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", series_header(dim).join(","))?;
        Ok(Self { out, dim })
    }

    pub fn push(&mut self, row: &TrajectoryRow) -> Result<()> {
        writeln!(self.out, "{}", series_row(row, self.dim))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Write `rows` to a CSV file in one go.
pub fn write_series(path: impl AsRef<Path>, rows: &[TrajectoryRow], dim: usize) -> Result<()> {
    let mut w = SeriesWriter::create(path, dim)?;
    for row in rows {
        w.push(row)?;
    }
    w.finish()
}

/// Variable names stored per node in a snapshot.
pub fn snapshot_variables(dim: usize) -> Vec<&'static str> {
    let mut v = vec!["p"];
    v.extend(["u_x", "u_y", "u_z"].iter().take(dim));
    v.push("s");
    v
}

/// Write the fluid state as `<stem>.bin` plus `<stem>.txt`; returns the
/// binary path.
pub fn write_snapshot(dir: impl AsRef<Path>, stem: &str, state: &CoupledState, mesh: &Mesh) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let dim = mesh.dim();
    let data = state.u.interleaved(dim);
    let bin = dir.join(format!("{stem}.bin"));
    let mut out = BufWriter::new(File::create(&bin)?);
    for v in &data {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;

    let res = mesh.resolution();
    let vars = snapshot_variables(dim);
    let shape = if dim == 2 {
        format!("{} x {}", mesh.radial_layers(), res.n_theta)
    } else {
        format!("{} x {} x {}", mesh.radial_layers(), res.n_theta, res.n_phi)
    };
    let order = if dim == 2 {
        "n = i + (N_r + 1) * j, i radial, j angular"
    } else {
        "n = i + (N_r + 1) * (j + N_theta * k), i radial, j polar-angle, k azimuth"
    };
    let mut side = BufWriter::new(File::create(dir.join(format!("{stem}.txt")))?);
    writeln!(side, "file = {stem}.bin")?;
    writeln!(side, "dtype = float64")?;
    writeln!(side, "endianness = little")?;
    writeln!(side, "t = {:.17e}", state.t)?;
    writeln!(side, "dim = {dim}")?;
    writeln!(side, "nodes = {}", mesh.num_nodes())?;
    writeln!(side, "grid = {shape} (radial index fastest)")?;
    writeln!(side, "node_order = {order}")?;
    writeln!(side, "variables_per_node = {}", vars.len())?;
    writeln!(side, "variables = {}", vars.join(", "))?;
    writeln!(side, "layout = node-major, offset(n, v) = n * {} + v", vars.len())?;
    writeln!(side, "frame = fixed reference domain (pulled-back fields)")?;
    side.flush()?;
    Ok(bin)
}

/// Read back a snapshot written by [`write_snapshot`].
pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}
