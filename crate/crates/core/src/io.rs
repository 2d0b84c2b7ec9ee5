//! Text formats for states, traces and finished sweeps.
//!
//! Every float is written with 17 significant digits so that reading a file
//! back reproduces the in-memory values bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ancient::SweepRun;
use crate::error::{FlowError, Result};
use crate::flow::FlowTrace;
use crate::geometry::{CurveState, Diagnostics};
use crate::grid::{d1_into, ThetaGrid};

pub const TRACE_HEADER: &str = "t,ell,ell_minus,h,area,kappa_tip,L";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RUN_FILE: &str = "run.json";
pub const REPORT_FILE: &str = "report.json";

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| FlowError::Parse(format!("bad {what}: {s:?}")))
}

/// Snapshot text: header `theta_nodes=<n> alpha=<alpha> t=<t>`, then one
/// `theta h r x y` row per node.
pub fn snapshot_to_string(state: &CurveState, alpha: f64) -> String {
    let g = &state.grid;
    let r = state.radius_of_curvature();
    let mut dh = vec![0.0; g.n()];
    d1_into(&state.h, g.dtheta(), &mut dh);
    let mut out = format!(
        "theta_nodes={} alpha={alpha:.16e} t={:.16e}\n",
        g.n(),
        state.t
    );
    for i in 0..g.n() {
        let (s, c) = (g.sin()[i], g.cos()[i]);
        let h = state.h[i];
        let x = h * s + dh[i] * c;
        let y = -h * c + dh[i] * s;
        writeln!(
            out,
            "{:.16e} {h:.16e} {:.16e} {x:.16e} {y:.16e}",
            g.theta(i),
            r[i]
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Parse snapshot text back into the state and its flow exponent.
pub fn snapshot_from_str(text: &str) -> Result<(CurveState, f64)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| FlowError::Parse("empty snapshot".into()))?;
    let mut n = None;
    let mut alpha = None;
    let mut t = None;
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("theta_nodes", v)) => {
                n = Some(
                    v.parse::<usize>()
                        .map_err(|_| FlowError::Parse(format!("bad node count {v:?}")))?,
                )
            }
            Some(("alpha", v)) => alpha = Some(parse_f64(v, "alpha")?),
            Some(("t", v)) => t = Some(parse_f64(v, "time")?),
            _ => return Err(FlowError::Parse(format!("unknown header field {field:?}"))),
        }
    }
    let (Some(n), Some(alpha), Some(t)) = (n, alpha, t) else {
        return Err(FlowError::Parse(format!(
            "incomplete snapshot header {header:?}"
        )));
    };
    let grid = ThetaGrid::new(n)?;
    let mut h = Vec::with_capacity(n);
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 5 {
            return Err(FlowError::Parse(format!(
                "snapshot row needs 5 columns: {line:?}"
            )));
        }
        h.push(parse_f64(cols[1], "support value")?);
    }
    Ok((CurveState::new(grid, h, t)?, alpha))
}

pub fn write_snapshot(path: &Path, state: &CurveState, alpha: f64) -> Result<()> {
    fs::write(path, snapshot_to_string(state, alpha))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(CurveState, f64)> {
    snapshot_from_str(&fs::read_to_string(path)?)
}

pub fn snapshot_file_name(index: usize, t: f64) -> String {
    format!("snap_{index:05}_t={t}.snap")
}

pub fn trace_to_csv(times: &[f64], diags: &[Diagnostics]) -> String {
    let mut out = String::with_capacity(128 * times.len());
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (t, d) in times.iter().zip(diags) {
        writeln!(
            out,
            "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            d.ell, d.ell_minus, d.width_h, d.area, d.tip_curvature, d.height
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Rows of a trace file. The leftmost extent is not part of the format and
/// comes back as NaN.
pub fn trace_from_csv(text: &str) -> Result<(Vec<f64>, Vec<Diagnostics>)> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_HEADER => {}
        other => {
            return Err(FlowError::Parse(format!(
                "unexpected trace header {other:?}"
            )))
        }
    }
    let mut times = Vec::new();
    let mut diags = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let v = line
            .split(',')
            .map(|c| parse_f64(c, "trace value"))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != 7 {
            return Err(FlowError::Parse(format!(
                "trace row needs 7 columns: {line:?}"
            )));
        }
        times.push(v[0]);
        diags.push(Diagnostics {
            ell: v[1],
            ell_minus: v[2],
            width_h: v[3],
            width_h_minus: f64::NAN,
            area: v[4],
            tip_curvature: v[5],
            height: v[6],
        });
    }
    Ok((times, diags))
}

/// Scalar results of one run, stored next to its trace and snapshots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Cap depth, or `None` for runs not started from a doubled cap.
    pub depth: Option<f64>,
    pub eps: f64,
    pub n: usize,
    pub t_extinction: f64,
    pub extinction_point: [f64; 2],
    pub fit_residual: f64,
    pub steps: usize,
    pub rejections: usize,
    pub min_dt: f64,
    pub max_dt: f64,
    pub complete: bool,
    pub trace_file: String,
    pub snapshot_dir: String,
}

/// Manifest of a single flow run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowManifest {
    pub alpha: f64,
    pub run: RunManifest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub alpha: f64,
    pub n: usize,
    pub comparison_times: Vec<f64>,
    pub tip_times: Vec<f64>,
    pub runs: Vec<RunManifest>,
}

/// Write trace CSV, snapshots and return the manifest entry of one run.
/// File names are relative to `dir`.
pub fn write_trace(
    dir: &Path,
    stem: &str,
    trace: &FlowTrace,
    depth: Option<f64>,
    eps: f64,
) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    let trace_file = format!("trace_{stem}.csv");
    fs::write(
        dir.join(&trace_file),
        trace_to_csv(&trace.times, &trace.diagnostics),
    )?;
    let snapshot_dir = format!("snaps_{stem}");
    let snap_path = dir.join(&snapshot_dir);
    if snap_path.exists() {
        fs::remove_dir_all(&snap_path)?;
    }
    fs::create_dir_all(&snap_path)?;
    for (i, s) in trace.snapshots.iter().enumerate() {
        write_snapshot(&snap_path.join(snapshot_file_name(i, s.t)), s, trace.alpha)?;
    }
    let n = trace.snapshots.first().map_or(0, |s| s.grid.n());
    Ok(RunManifest {
        depth,
        eps,
        n,
        t_extinction: trace.t_extinction,
        extinction_point: trace.extinction_point,
        fit_residual: trace.fit_residual,
        steps: trace.steps,
        rejections: trace.rejections,
        min_dt: trace.min_dt,
        max_dt: trace.max_dt,
        complete: trace.complete,
        trace_file,
        snapshot_dir,
    })
}

fn sorted_snapshot_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "snap"))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Rebuild a trace from the files named in `manifest`.
pub fn read_trace(dir: &Path, manifest: &RunManifest, alpha: f64) -> Result<FlowTrace> {
    let (times, diagnostics) =
        trace_from_csv(&fs::read_to_string(dir.join(&manifest.trace_file))?)?;
    let mut snapshots = Vec::new();
    for p in sorted_snapshot_paths(&dir.join(&manifest.snapshot_dir))? {
        let (s, a) = read_snapshot(&p)?;
        if a != alpha {
            return Err(FlowError::Parse(format!(
                "{} was written for alpha {a}, expected {alpha}",
                p.display()
            )));
        }
        snapshots.push(s);
    }
    Ok(FlowTrace {
        alpha,
        times,
        diagnostics,
        snapshots,
        t_extinction: manifest.t_extinction,
        extinction_point: manifest.extinction_point,
        fit_residual: manifest.fit_residual,
        steps: manifest.steps,
        rejections: manifest.rejections,
        min_dt: manifest.min_dt,
        max_dt: manifest.max_dt,
        complete: manifest.complete,
    })
}

pub fn depth_stem(depth: f64) -> String {
    format!("R={depth}")
}

/// Write every run of a sweep and its manifest.
pub fn write_sweep(
    dir: &Path,
    alpha: f64,
    n: usize,
    comparison_times: &[f64],
    tip_times: &[f64],
    runs: &[SweepRun],
) -> Result<SweepManifest> {
    let mut entries = Vec::with_capacity(runs.len());
    for run in runs {
        entries.push(write_trace(
            dir,
            &depth_stem(run.depth),
            &run.trace,
            Some(run.depth),
            run.eps,
        )?);
    }
    let manifest = SweepManifest {
        alpha,
        n,
        comparison_times: comparison_times.to_vec(),
        tip_times: tip_times.to_vec(),
        runs: entries,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn read_sweep(dir: &Path) -> Result<(SweepManifest, Vec<SweepRun>)> {
    let manifest: SweepManifest = read_json(&dir.join(MANIFEST_FILE))?;
    let mut runs = Vec::with_capacity(manifest.runs.len());
    for m in &manifest.runs {
        let depth = m
            .depth
            .ok_or_else(|| FlowError::Parse(format!("run {} has no cap depth", m.trace_file)))?;
        runs.push(SweepRun {
            depth,
            eps: m.eps,
            trace: read_trace(dir, m, manifest.alpha)?,
        });
    }
    Ok((manifest, runs))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| FlowError::Parse(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| FlowError::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{flow_to_extinction, FlowParams};

    fn oval(n: usize) -> CurveState {
        let g = ThetaGrid::new(n).unwrap();
        let h = g.sample(|t| 1.0 + 0.1 * (2.0 * t).cos() + 0.02 * (3.0 * t).sin());
        CurveState::new(g, h, -0.37).unwrap()
    }

    #[test]
    fn snapshot_round_trip_is_exact() {
        let s = oval(128);
        let text = snapshot_to_string(&s, 0.75);
        assert!(text.starts_with("theta_nodes=128 alpha="));
        assert_eq!(text.lines().count(), 129);
        let (back, alpha) = snapshot_from_str(&text).unwrap();
        assert_eq!(alpha, 0.75);
        assert_eq!(back, s);
    }

    #[test]
    fn snapshot_points_match_polyline() {
        let s = oval(128);
        let pts = s.reconstruct_polyline().unwrap();
        let text = snapshot_to_string(&s, 1.0);
        for (line, p) in text.lines().skip(1).zip(&pts) {
            let cols: Vec<f64> = line.split(' ').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols[3], p[0]);
            assert_eq!(cols[4], p[1]);
        }
    }

    #[test]
    fn malformed_snapshots_are_rejected() {
        assert!(snapshot_from_str("").is_err());
        assert!(snapshot_from_str("theta_nodes=128 alpha=1\n").is_err());
        assert!(snapshot_from_str("theta_nodes=128 alpha=1 t=0 extra=2\n").is_err());
        let short = "theta_nodes=128 alpha=1 t=0\n0 1 1 0 -1\n";
        assert!(snapshot_from_str(short).is_err());
    }

    #[test]
    fn trace_round_trip() {
        let mut p = FlowParams::new(1.0);
        p.snapshot_interval = 0.1;
        let trace = flow_to_extinction(&oval(128), &p).unwrap();
        let csv = trace_to_csv(&trace.times, &trace.diagnostics);
        assert!(csv.starts_with("t,ell,ell_minus,h,area,kappa_tip,L\n"));
        let (t, d) = trace_from_csv(&csv).unwrap();
        assert_eq!(t, trace.times);
        for (a, b) in d.iter().zip(&trace.diagnostics) {
            assert_eq!(
                (a.ell, a.area, a.tip_curvature, a.height),
                (b.ell, b.area, b.tip_curvature, b.height)
            );
        }
        assert!(trace_from_csv("t,x\n").is_err());
    }

    #[test]
    fn trace_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = FlowParams::new(0.75);
        p.snapshot_interval = 0.1;
        let trace = flow_to_extinction(&oval(128), &p).unwrap();
        let m = write_trace(dir.path(), "oval", &trace, None, 0.0).unwrap();
        let back = read_trace(dir.path(), &m, 0.75).unwrap();
        assert_eq!(back.snapshots, trace.snapshots);
        assert_eq!(back.times, trace.times);
        assert_eq!(back.t_extinction, trace.t_extinction);
        assert!(read_trace(dir.path(), &m, 1.0).is_err());
    }
}
