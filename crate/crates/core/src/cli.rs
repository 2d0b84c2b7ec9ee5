//! Command-line front end.
//!
//! Every command produces a list of check reports. They are printed one per
//! line, written to `report.json` when an output directory is given, and the
//! process exits with status 0 only if all of them pass.
//!
//! A flat `key = value` file given with `--config` supplies defaults for the
//! long flags of the chosen command; flags on the command line win.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ancient;
use crate::ancient::{assemble, run_sweep, sweep_reports, EpsPolicy, SweepRun, SweepSpec};
use crate::error::{FlowError, Result};
use crate::flow::{
    circle_oracle, flow_to_extinction, kappa_gauge_residual, FlowParams, FlowTrace, Integrator,
};
use crate::geometry::CurveState;
use crate::grid::ThetaGrid;
use crate::initcurve::{build_doubled_cap, check_construction, default_eps, DoubledCapSpec};
use crate::io::{
    depth_stem, read_json, read_sweep, read_trace, write_json, write_snapshot, write_sweep,
    write_trace, FlowManifest, MANIFEST_FILE, REPORT_FILE, RUN_FILE,
};
use crate::report::{to_json, CheckReport};
use crate::translator::{translator_checks, TranslatorProfile};

/// Exit status when every check passes.
pub const EXIT_PASS: i32 = 0;
/// Exit status when a check fails.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for usage, input and numerical errors.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "alphaflow",
    version,
    about = "Flow convex curves by a power kappa^alpha of their curvature and build ancient ovals from doubled translator caps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Translator identities: slab width two ways, depth/cut-angle inversion.
    Translator(TranslatorArgs),
    /// Build one doubled cap and write it as a snapshot.
    Construct(ConstructArgs),
    /// Flow a doubled cap or a circle to extinction.
    Flow(FlowArgs),
    /// Flow a ladder of cap depths and compare the runs.
    Sweep(SweepArgs),
    /// Recompute the report of a finished flow or sweep from its files.
    Verify(VerifyArgs),
    /// Shrinking unit circle against its exact radius law.
    CircleOracle(CircleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum IntegratorArg {
    Euler,
    Midpoint,
}

impl From<IntegratorArg> for Integrator {
    fn from(v: IntegratorArg) -> Self {
        match v {
            IntegratorArg::Euler => Integrator::ForwardEuler,
            IntegratorArg::Midpoint => Integrator::Midpoint,
        }
    }
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Flat `key = value` file of defaults for the long flags; command-line flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlowOpts {
    /// Exponent alpha in (1/2, 1] of the normal speed kappa^alpha.
    #[arg(long)]
    pub alpha: f64,
    /// Turning-angle nodes; a multiple of 4, at least 128.
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Safety factor in (0, 1) on the explicit step dtheta^2 / (2 alpha max kappa^(alpha+1)).
    #[arg(long, default_value_t = 0.4)]
    pub cfl: f64,
    /// Stop once the area drops below this fraction of the initial area; extinction is extrapolated from the tail.
    #[arg(long, default_value_t = 1e-3)]
    pub area_stop: f64,
    /// Flow time between stored snapshots.
    #[arg(long, default_value_t = 0.5)]
    pub snapshot_interval: f64,
    /// Flow time between rows of the diagnostics trace.
    #[arg(long, default_value_t = 0.05)]
    pub record_interval: f64,
    /// Step budget per run.
    #[arg(long, default_value_t = 50_000_000)]
    pub max_steps: usize,
    /// Time integrator of the semi-discrete system h_t = -(h'' + h)^(-alpha).
    #[arg(long, value_enum, default_value_t = IntegratorArg::Euler)]
    pub integrator: IntegratorArg,
}

impl FlowOpts {
    pub fn params(&self) -> Result<FlowParams> {
        let p = FlowParams {
            alpha: self.alpha,
            cfl_safety: self.cfl,
            area_stop_fraction: self.area_stop,
            snapshot_interval: self.snapshot_interval,
            record_interval: self.record_interval,
            max_steps: self.max_steps,
            integrator: self.integrator.into(),
        };
        p.validate()?;
        ThetaGrid::new(self.n)?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct TranslatorArgs {
    /// Exponent alpha in (1/2, 1]; the translator solves kappa^alpha = cos(theta).
    #[arg(long)]
    pub alpha: f64,
    /// Write the profile `theta,kappa,X,Y` sampled at this many angles.
    #[arg(long, value_name = "FILE")]
    pub emit: Option<PathBuf>,
    /// Number of profile samples strictly inside (-pi/2, pi/2).
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Directory for report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ConstructArgs {
    /// Exponent alpha in (1/2, 1].
    #[arg(long)]
    pub alpha: f64,
    /// Cap depth R: the tip lies R below the cut line.
    #[arg(long)]
    pub depth: f64,
    /// Corner radius eps in (0, 1/2); defaults to 10 dtheta.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Turning-angle nodes; a multiple of 4, at least 128.
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Snapshot file for the built cap.
    #[arg(long, value_name = "FILE")]
    pub emit: PathBuf,
    /// Directory for report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct FlowArgs {
    #[command(flatten)]
    pub flow: FlowOpts,
    /// Start from the doubled cap of this depth.
    #[arg(
        long,
        conflicts_with = "circle_radius",
        required_unless_present = "circle_radius"
    )]
    pub depth: Option<f64>,
    /// Start from a centered circle of this radius instead.
    #[arg(long)]
    pub circle_radius: Option<f64>,
    /// Corner radius of the doubled cap; defaults to 10 dtheta.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Output directory: trace CSV, snapshots, run.json, report.json.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SweepArgs {
    #[command(flatten)]
    pub flow: FlowOpts,
    /// Nondecreasing cap depths, at least three.
    #[arg(long, value_delimiter = ',', required = true)]
    pub depths: Vec<f64>,
    /// Negative times at which the runs are compared; each must follow the start of every run.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub times: Vec<f64>,
    /// Times for the tip comparison with the translator; defaults to --times.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub tip_times: Option<Vec<f64>>,
    /// Corner radius as a multiple of dtheta.
    #[arg(long, default_value_t = 10.0, conflicts_with = "eps")]
    pub eps_factor: f64,
    /// Fixed corner radius for every depth.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct VerifyArgs {
    /// Directory written by `flow` or `sweep`.
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    /// Write the recomputed report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub emit: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct CircleArgs {
    /// Exponent alpha in (1/2, 1]; the radius obeys rho' = -rho^(-alpha).
    #[arg(long)]
    pub alpha: f64,
    /// Turning-angle nodes.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = IntegratorArg::Euler)]
    pub integrator: IntegratorArg,
    /// Safety factor on the explicit step.
    #[arg(long, default_value_t = 0.4)]
    pub cfl: f64,
    /// Directory for report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

/// Expand `--config FILE` into flags placed before the command-line flags,
/// so that the latter override the file.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let strs: Vec<Option<&str>> = args.iter().map(|a| a.to_str()).collect();
    for (i, a) in strs.iter().enumerate() {
        match a {
            Some("--config") => {
                path = strs
                    .get(i + 1)
                    .copied()
                    .flatten()
                    .map(str::to_owned)
                    .or(Some(String::new()))
            }
            Some(s) if s.starts_with("--config=") => path = Some(s["--config=".len()..].to_owned()),
            _ => {}
        }
    }
    let Some(path) = path else { return Ok(args) };
    if path.is_empty() {
        return Err(FlowError::Usage("--config needs a file".into()));
    }
    let text = fs::read_to_string(&path).map_err(|e| FlowError::Io(format!("{path}: {e}")))?;
    let mut extra = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| FlowError::Usage(format!("{path}:{}: expected key = value", no + 1)))?;
        let key = k.trim().replace('_', "-");
        if key == "config" {
            return Err(FlowError::Usage(format!(
                "{path}:{}: config files do not nest",
                no + 1
            )));
        }
        extra.push(OsString::from(format!("--{key}")));
        extra.push(OsString::from(v.trim()));
    }
    // program name and subcommand come first
    let split = args.len().min(2);
    let mut out: Vec<OsString> = args[..split].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[split..]);
    Ok(out)
}

/// Execute a parsed command and return its reports.
pub fn run(cli: Cli) -> Result<Vec<CheckReport>> {
    match cli.command {
        Command::Translator(a) => cmd_translator(&a),
        Command::Construct(a) => cmd_construct(&a),
        Command::Flow(a) => cmd_flow(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::CircleOracle(a) => cmd_circle(&a),
    }
}

fn write_report(dir: Option<&Path>, reports: &[CheckReport]) -> Result<()> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(REPORT_FILE), to_json(reports))?;
    }
    Ok(())
}

fn cmd_translator(a: &TranslatorArgs) -> Result<Vec<CheckReport>> {
    let reports = translator_checks(a.alpha)?;
    if let Some(path) = &a.emit {
        let profile = TranslatorProfile::new(a.alpha)?;
        let mut text = String::from("theta,kappa,X,Y\n");
        for s in profile.table(a.samples)? {
            text.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                s.theta, s.kappa, s.x, s.y
            ));
        }
        fs::write(path, text)?;
    }
    write_report(a.out.as_deref(), &reports)?;
    Ok(reports)
}

fn cap_spec(alpha: f64, depth: f64, eps: Option<f64>, n: usize) -> Result<DoubledCapSpec> {
    let grid = ThetaGrid::new(n)?;
    let eps = eps.unwrap_or_else(|| default_eps(&grid));
    let spec = DoubledCapSpec {
        depth,
        alpha,
        eps,
        grid,
    };
    spec.validate()?;
    Ok(spec)
}

fn cmd_construct(a: &ConstructArgs) -> Result<Vec<CheckReport>> {
    let spec = cap_spec(a.alpha, a.depth, a.eps, a.n)?;
    let state = build_doubled_cap(&spec)?;
    write_snapshot(&a.emit, &state, a.alpha)?;
    let reports = vec![check_construction(&spec, &state)?];
    write_report(a.out.as_deref(), &reports)?;
    Ok(reports)
}

fn cmd_flow(a: &FlowArgs) -> Result<Vec<CheckReport>> {
    let params = a.flow.params()?;
    let grid = ThetaGrid::new(a.flow.n)?;
    let (state, depth, eps) = match (a.depth, a.circle_radius) {
        (Some(depth), _) => {
            let spec = cap_spec(a.flow.alpha, depth, a.eps, a.flow.n)?;
            (build_doubled_cap(&spec)?, Some(depth), spec.eps)
        }
        (None, Some(rho)) if rho > 0.0 && rho.is_finite() => {
            (CurveState::circle(grid, rho), None, 0.0)
        }
        (None, Some(rho)) => {
            return Err(FlowError::Usage(format!(
                "circle radius must be positive, got {rho}"
            )))
        }
        (None, None) => return Err(FlowError::Usage("give --depth or --circle-radius".into())),
    };
    let trace = flow_to_extinction(&state, &params)?;
    let stem = depth.map_or_else(|| "circle".to_owned(), depth_stem);
    let run = write_trace(&a.out, &stem, &trace, depth, eps)?;
    write_json(
        &a.out.join(RUN_FILE),
        &FlowManifest {
            alpha: params.alpha,
            run,
        },
    )?;
    // the report is computed from the files, exactly as `verify` does
    let reports = verify_dir(&a.out)?;
    write_report(Some(&a.out), &reports)?;
    Ok(reports)
}

fn sweep_spec(a: &SweepArgs) -> SweepSpec {
    SweepSpec {
        alpha: a.flow.alpha,
        depths: a.depths.clone(),
        eps: match a.eps {
            Some(e) => EpsPolicy::Fixed(e),
            None => EpsPolicy::GridMultiple(a.eps_factor),
        },
        n: a.flow.n,
        comparison_times: a.times.clone(),
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<Vec<CheckReport>> {
    let params = a.flow.params()?;
    let spec = sweep_spec(a);
    spec.validate()?;
    let grid = ThetaGrid::new(spec.n)?;
    for &depth in &spec.depths {
        cap_spec(spec.alpha, depth, Some(spec.eps.eps(&grid)), spec.n)?;
    }
    let tip_times = a.tip_times.clone().unwrap_or_else(|| a.times.clone());
    if tip_times.iter().any(|t| !(*t < 0.0)) {
        return Err(FlowError::Usage(format!(
            "tip times must be negative, got {tip_times:?}"
        )));
    }
    let set = run_sweep(&spec, &params)?;
    write_sweep(
        &a.out,
        spec.alpha,
        spec.n,
        &spec.comparison_times,
        &tip_times,
        &set.runs,
    )?;
    let reports = verify_dir(&a.out)?;
    write_report(Some(&a.out), &reports)?;
    Ok(reports)
}

/// Reports of a single flow run read back from disk.
fn flow_reports(trace: &FlowTrace, depth: Option<f64>, eps: f64) -> Result<Vec<CheckReport>> {
    let mut rep = CheckReport::new(
        "flow_run",
        "area decreases monotonically and the run reaches the extinction regime",
    );
    rep.require(if trace.complete { 0.0 } else { -1.0 }, 0.0);
    let rise = trace
        .diagnostics
        .windows(2)
        .map(|p| p[1].area - p[0].area)
        .fold(f64::NEG_INFINITY, f64::max);
    rep.require(-rise.max(0.0), 0.0);
    rep.set("t_extinction", trace.t_extinction);
    rep.set("extinction_x", trace.extinction_point[0]);
    rep.set("extinction_y", trace.extinction_point[1]);
    rep.set("fit_residual", trace.fit_residual);
    rep.set("steps", trace.steps as f64);
    if trace.snapshots.len() >= 2 {
        rep.set("kappa_gauge_residual", kappa_gauge_residual(trace)?);
    }
    let mut out = vec![rep];
    if let Some(depth) = depth {
        let run = SweepRun {
            depth,
            eps,
            trace: trace.clone(),
        };
        out.extend(ancient::property_suite(&run)?);
        out.push(ancient::check_symmetry(&run, ancient::SYMMETRY_TOL));
    }
    Ok(out)
}

/// Recompute the report of a `flow` or `sweep` output directory.
pub fn verify_dir(dir: &Path) -> Result<Vec<CheckReport>> {
    if dir.join(MANIFEST_FILE).exists() {
        let (manifest, runs) = read_sweep(dir)?;
        let set = assemble(manifest.alpha, runs, &manifest.comparison_times)?;
        sweep_reports(&set, &manifest.tip_times)
    } else if dir.join(RUN_FILE).exists() {
        let m: FlowManifest = read_json(&dir.join(RUN_FILE))?;
        let trace = read_trace(dir, &m.run, m.alpha)?;
        flow_reports(&trace, m.run.depth, m.run.eps)
    } else {
        Err(FlowError::Usage(format!(
            "{} holds neither {MANIFEST_FILE} nor {RUN_FILE}",
            dir.display()
        )))
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<Vec<CheckReport>> {
    let reports = verify_dir(&a.input)?;
    match &a.emit {
        Some(path) => fs::write(path, to_json(&reports))?,
        None => print!("{}", to_json(&reports)),
    }
    Ok(reports)
}

fn cmd_circle(a: &CircleArgs) -> Result<Vec<CheckReport>> {
    let mut params = FlowParams::new(a.alpha);
    params.cfl_safety = a.cfl;
    params.integrator = a.integrator.into();
    params.validate()?;
    let reports = vec![circle_oracle(a.n, &params)?];
    write_report(a.out.as_deref(), &reports)?;
    Ok(reports)
}

/// Parse, run and report; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    let verify = matches!(cli.command, Command::Verify(_));
    match run(cli) {
        Ok(reports) => {
            let failed: Vec<&str> = reports
                .iter()
                .filter(|r| !r.pass)
                .map(|r| r.name.as_str())
                .collect();
            for r in &reports {
                let line = format!(
                    "{} {} min_margin={:.6e}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.name,
                    r.min_margin()
                );
                // keep stdout clean for the JSON that verify prints
                if verify {
                    eprintln!("{line}");
                } else {
                    println!("{line}");
                }
            }
            if failed.is_empty() {
                EXIT_PASS
            } else {
                eprintln!("{}", serde_json::json!({ "failed": failed }));
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(args)
    }

    #[test]
    fn flow_defaults() {
        let cli = parse(&[
            "alphaflow",
            "flow",
            "--alpha",
            "0.75",
            "--n",
            "512",
            "--depth",
            "20",
            "--out",
            "x",
        ])
        .unwrap();
        let Command::Flow(a) = cli.command else {
            panic!()
        };
        let p = a.flow.params().unwrap();
        assert_eq!(p.cfl_safety, 0.4);
        assert_eq!(p.area_stop_fraction, 1e-3);
        assert_eq!(p.integrator, Integrator::ForwardEuler);
    }

    #[test]
    fn alpha_out_of_range_names_the_interval() {
        let cli = parse(&[
            "alphaflow",
            "flow",
            "--alpha",
            "0.4",
            "--depth",
            "20",
            "--out",
            "x",
        ])
        .unwrap();
        let Command::Flow(a) = cli.command else {
            panic!()
        };
        let err = a.flow.params().unwrap_err().to_string();
        assert!(err.contains("(1/2, 1]"), "{err}");
    }

    #[test]
    fn sweep_lists() {
        let cli = parse(&[
            "alphaflow",
            "sweep",
            "--alpha",
            "0.75",
            "--depths",
            "20,40,80",
            "--times",
            "-5,-10",
            "--out",
            "d",
        ])
        .unwrap();
        let Command::Sweep(a) = cli.command else {
            panic!()
        };
        assert_eq!(a.depths, vec![20.0, 40.0, 80.0]);
        assert_eq!(a.times, vec![-5.0, -10.0]);
        assert!(a.tip_times.is_none());
    }

    #[test]
    fn unknown_flag_is_rejected() {
        assert!(parse(&["alphaflow", "flow", "--alpha", "1", "--bogus", "3"]).is_err());
        assert!(parse(&["alphaflow", "flow", "--alpha", "1", "--out", "x"]).is_err());
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(
            &cfg,
            "# defaults\nalpha = 0.6\nn = 256\nsnapshot_interval = 0.25\n",
        )
        .unwrap();
        let args: Vec<OsString> = [
            "alphaflow",
            "flow",
            "--config",
            cfg.to_str().unwrap(),
            "--n",
            "128",
            "--depth",
            "3",
            "--out",
            "x",
        ]
        .iter()
        .map(OsString::from)
        .collect();
        let cli = Cli::try_parse_from(expand_config(args).unwrap()).unwrap();
        let Command::Flow(a) = cli.command else {
            panic!()
        };
        assert_eq!(a.flow.alpha, 0.6);
        assert_eq!(a.flow.n, 128);
        assert_eq!(a.flow.snapshot_interval, 0.25);
    }

    #[test]
    fn bad_config_lines() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.cfg");
        fs::write(&cfg, "alpha 0.6\n").unwrap();
        let args: Vec<OsString> = ["alphaflow", "flow", "--config", cfg.to_str().unwrap()]
            .iter()
            .map(OsString::from)
            .collect();
        assert!(expand_config(args).is_err());
    }
}
