use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use stereoskew::io::{
    atomic_write, check_writable, json_bytes, read_cells_csv, render_svg, rounded_json,
    summary_json, write_gap_csv, HeatmapSpec, Plane, RunConfig,
};
use stereoskew::sweep::Mode;
use stereoskew::{
    angles_from_point_2d, angles_from_point_3d, compare_exact_vs_approx, displacement_from_motion,
    localization_error_2d, localization_error_3d, point_from_angles_2d, point_from_angles_3d,
    AngleSet2, AngleSet3, CameraRig, Displacement, Error, MotionSpec, Point2, Point3,
    ReferenceConvention, SweepSummary,
};

const EXIT_USAGE: u8 = 1;
const EXIT_GEOMETRY: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;

/// Stereo marker triangulation and capture-timing skew error simulator.
#[derive(Debug, Parser)]
#[command(name = "stereoskew", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert between a point and the angles each camera reports.
    #[command(subcommand)]
    Locate(Locate),
    /// Localization error for one point and one displacement, as JSON.
    Error(ErrorArgs),
    /// Run a sweep described by a TOML config and write its outputs.
    Sweep(SweepArgs),
    /// Compare exact and first-order errors over a grid.
    ApproxCheck(ApproxArgs),
    /// Rebuild summary and heatmap from an existing cells CSV.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
enum Locate {
    /// Point to angles. Two coordinates give the planar pair, three give all six.
    Angles {
        #[arg(long)]
        d: f64,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        point: Coords,
    },
    /// Angles to point. Giving the beta and gamma angles selects the 3D form.
    Point(LocatePoint),
}

#[derive(Debug, Args)]
struct LocatePoint {
    #[arg(long)]
    d: f64,
    #[arg(long, allow_hyphen_values = true)]
    alpha1: f64,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: f64,
    #[arg(long, allow_hyphen_values = true, requires_all = ["gamma1", "beta2", "gamma2"])]
    beta1: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "beta1")]
    gamma1: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "beta1")]
    beta2: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "beta1")]
    gamma2: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("movement").required(true).args(["disp", "motion"]))]
struct ErrorArgs {
    #[arg(long)]
    d: f64,
    /// x,y or x,y,z in cm.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    point: Coords,
    /// Displacement between captures, dx,dy[,dz] in cm.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    disp: Option<Coords>,
    /// Marker velocity, vx,vy[,vz] in cm/s; needs --dt.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point, requires = "dt")]
    motion: Option<Coords>,
    /// Capture skew in seconds.
    #[arg(long, requires = "motion")]
    dt: Option<f64>,
    #[arg(long, default_value = "midpoint")]
    conv: ReferenceConvention,
}

/// Flags that override keys of a run config.
#[derive(Debug, Args)]
struct Overrides {
    #[arg(long)]
    d: Option<f64>,
    /// dx,dy[,dz] in cm; replaces any displacement or motion in the config.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    disp: Option<Coords>,
    #[arg(long)]
    conv: Option<ReferenceConvention>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct ApproxArgs {
    /// Run config; without one the default operating range is used and
    /// --disp is required.
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    /// Largest acceptable relative gap.
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    /// Write the per-cell gap table here.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    cells: PathBuf,
    /// Summary JSON path; printed to stdout when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    heatmap: Option<PathBuf>,
    /// Heatmap plane, e.g. xy or xz.
    #[arg(long)]
    plane: Option<String>,
    #[arg(long, default_value_t = 800)]
    width: u32,
    #[arg(long, default_value_t = 600)]
    height: u32,
}

/// Two or three comma-separated numbers.
#[derive(Debug, Clone)]
struct Coords(Vec<f64>);

fn parse_point(s: &str) -> Result<Coords, String> {
    let values = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{v}' is not a number"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if !(2..=3).contains(&values.len()) {
        return Err(format!(
            "expected 2 or 3 comma-separated values, got {}",
            values.len()
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(Coords(values))
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s.to_ascii_lowercase().as_str() {
        "2d" | "planar" => Ok(Mode::Planar),
        "3d" | "spatial" => Ok(Mode::Spatial),
        _ => Err(format!("mode must be 2d or 3d, got '{s}'")),
    }
}

fn displacement(v: &[f64]) -> Displacement {
    Displacement::new(v[0], v[1], v.get(2).copied().unwrap_or(0.0))
}

/// Nine significant digits relative to the largest coordinate, trailing
/// zeros dropped.
fn fmt_coords(values: &[f64]) -> String {
    let largest = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let int_digits = if largest >= 1.0 {
        largest.log10().floor() as i32 + 1
    } else {
        1
    };
    let decimals = (9 - int_digits).clamp(0, 15) as usize;
    values
        .iter()
        .map(|v| {
            let s = format!("{v:.decimals$}");
            let s = if s.contains('.') {
                s.trim_end_matches('0').trim_end_matches('.')
            } else {
                &s
            };
            if s == "-0" {
                "0".to_string()
            } else {
                s.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn print_json(value: &serde_json::Value) -> Result<(), Error> {
    let bytes = json_bytes(value)?;
    std::io::stdout()
        .write_all(&bytes)
        .map_err(|e| Error::InvalidInput(format!("stdout: {e}")))
}

fn locate(cmd: Locate) -> Result<(), Error> {
    match cmd {
        Locate::Angles { d, point } => {
            let rig = CameraRig::new(d)?;
            if let [x, y] = point.0[..] {
                let a = angles_from_point_2d(rig, Point2::new(x, y))?;
                println!("alpha1={:.9}, alpha2={:.9}", a.alpha1, a.alpha2);
            } else {
                let a = angles_from_point_3d(rig, Point3::new(point.0[0], point.0[1], point.0[2]))?;
                println!(
                    "alpha1={:.9}, beta1={:.9}, gamma1={:.9}, alpha2={:.9}, beta2={:.9}, gamma2={:.9}",
                    a.alpha1, a.beta1, a.gamma1, a.alpha2, a.beta2, a.gamma2
                );
            }
        }
        Locate::Point(args) => {
            let rig = CameraRig::new(args.d)?;
            match (args.beta1, args.gamma1, args.beta2, args.gamma2) {
                (Some(beta1), Some(gamma1), Some(beta2), Some(gamma2)) => {
                    let p = point_from_angles_3d(
                        rig,
                        AngleSet3 {
                            alpha1: args.alpha1,
                            beta1,
                            gamma1,
                            alpha2: args.alpha2,
                            beta2,
                            gamma2,
                        },
                    )?;
                    println!("{}", fmt_coords(&[p.x, p.y, p.z]));
                }
                _ => {
                    let p = point_from_angles_2d(
                        rig,
                        AngleSet2::from_alphas(args.alpha1, args.alpha2),
                    )?;
                    println!("{}", fmt_coords(&[p.x, p.y]));
                }
            }
        }
    }
    Ok(())
}

fn error(args: ErrorArgs) -> Result<(), Error> {
    let rig = CameraRig::new(args.d)?;
    let disp = match (&args.disp, &args.motion, args.dt) {
        (Some(v), _, _) => displacement(&v.0),
        (None, Some(v), Some(dt)) => {
            let v = displacement(&v.0);
            displacement_from_motion(MotionSpec::new([v.dx, v.dy, v.dz], dt)?)
        }
        _ => unreachable!("clap enforces --disp or --motion with --dt"),
    };
    let report = match args.point.0[..] {
        [x, y] => localization_error_2d(rig, Point2::new(x, y), disp, args.conv)?,
        [x, y, z] => localization_error_3d(rig, Point3::new(x, y, z), disp, args.conv)?,
        _ => unreachable!("parse_point yields 2 or 3 values"),
    };
    print_json(&rounded_json(&report)?)
}

fn apply(mut cfg: RunConfig, o: &Overrides) -> RunConfig {
    if let Some(d) = o.d {
        cfg.rig.d_cm = d;
    }
    if let Some(v) = &o.disp {
        cfg.displacement = Some(displacement(&v.0).into());
        cfg.motion = None;
    }
    if let Some(conv) = o.conv {
        cfg.convention = Some(conv);
    }
    if let Some(step) = o.step {
        cfg.range.step_cm = Some(step);
    }
    if let Some(mode) = o.mode {
        cfg.mode = Some(mode);
    }
    cfg
}

fn sweep(args: SweepArgs) -> Result<(), Error> {
    let cfg = apply(RunConfig::from_path(&args.config)?, &args.overrides);
    let run = cfg.resolve()?;
    let (result, written) = stereoskew::io::execute(&run)?;
    for path in &written {
        log::info!("wrote {}", path.display());
    }
    print_json(&summary_json(
        &result.summary,
        Some(run.sweep.displacement),
        Some(&run.echo),
        Vec::new(),
    )?)
}

/// Returns whether the worst gap is within tolerance.
fn approx_check(args: ApproxArgs) -> Result<bool, Error> {
    if !(args.tolerance.is_finite() && args.tolerance >= 0.0) {
        return Err(Error::InvalidInput(
            "tolerance must be a non-negative number".into(),
        ));
    }
    let base = match &args.config {
        Some(path) => RunConfig::from_path(path)?,
        None => {
            let Some(v) = &args.overrides.disp else {
                return Err(Error::InvalidInput(
                    "--disp is required without a config".into(),
                ));
            };
            let disp = displacement(&v.0);
            let mut cfg = RunConfig::with_displacement(25.0, disp);
            if disp.dz != 0.0 {
                cfg.mode = Some(Mode::Spatial);
            }
            cfg
        }
    };
    let run = apply(base, &args.overrides).resolve()?;
    if let Some(table) = &args.table {
        check_writable([table.as_path()])?;
    }
    let cmp = compare_exact_vs_approx(&run.sweep, args.tolerance)?;
    if let Some(table) = &args.table {
        let mut buf = Vec::new();
        write_gap_csv(&mut buf, &cmp)?;
        atomic_write(table, &buf)?;
    }
    let within = cmp.worst_gap <= args.tolerance;
    print_json(&rounded_json(&json!({
        "worst_gap": cmp.worst_gap,
        "worst_point_cm": cmp.worst_point.map(|p| p.to_array()),
        "tolerance": args.tolerance,
        "cells_compared": cmp.rows.len(),
        "cells_over_tolerance": cmp.offenders.len(),
        "within_tolerance": within,
    }))?)?;
    Ok(within)
}

fn report(args: ReportArgs) -> Result<(), Error> {
    let file = fs::File::open(&args.cells)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", args.cells.display())))?;
    let cells = read_cells_csv(file)?;
    let summary = SweepSummary::from_cells(&cells)?;
    let heatmap = match &args.heatmap {
        Some(path) => {
            let flat = cells.iter().all(|c| c.point.z == cells[0].point.z);
            let plane: Plane = match &args.plane {
                Some(p) => p.parse()?,
                None if flat => "xy".parse()?,
                None => "xz".parse()?,
            };
            let mut spec = HeatmapSpec::new(plane);
            spec.width = args.width;
            spec.height = args.height;
            let title = format!("Location error from {}", file_name(&args.cells));
            Some((path, render_svg(&cells, &spec, &title)?))
        }
        None => None,
    };
    let doc = summary_json(
        &summary,
        None,
        None,
        vec![format!("regenerated from {}", file_name(&args.cells))],
    )?;
    check_writable(
        args.summary
            .iter()
            .chain(args.heatmap.iter())
            .map(PathBuf::as_path),
    )?;
    if let Some((path, svg)) = heatmap {
        atomic_write(path, svg.as_bytes())?;
    }
    match &args.summary {
        Some(path) => atomic_write(path, &json_bytes(&doc)?),
        None => print_json(&doc),
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Locate(cmd) => locate(cmd),
        Command::Error(args) => error(args),
        Command::Sweep(args) => sweep(args),
        Command::ApproxCheck(args) => match approx_check(args) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(EXIT_TOLERANCE),
            Err(e) => Err(e),
        },
        Command::Report(args) => report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_geometry() {
                ExitCode::from(EXIT_GEOMETRY)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}
