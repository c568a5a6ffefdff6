//! CSV and JSON serialization of sweep results, and atomic file writes.
//!
//! Every float is rounded to nine significant digits and then printed as the
//! shortest decimal that round-trips, so identical runs give identical bytes.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::io::config::{OutputKind, ResolvedRun, RunConfig};
use crate::sweep::{ApproxComparison, GridCell, Mode, SweepOutput, SweepSummary};
use crate::timing::Displacement;

pub const CELLS_HEADER: [&str; 8] = [
    "x_cm",
    "y_cm",
    "z_cm",
    "exact_err_cm",
    "approx_err_cm",
    "ex_cm",
    "ey_cm",
    "ez_cm",
];

pub const GAP_HEADER: [&str; 6] = [
    "x_cm",
    "y_cm",
    "z_cm",
    "exact_err_cm",
    "approx_err_cm",
    "rel_gap",
];

/// Rounds to nine significant digits. Negative zero becomes zero.
pub fn round_sig9(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{v:.8e}").parse::<f64>().unwrap_or(v) + 0.0
}

pub fn fmt_num(v: f64) -> String {
    format!("{}", round_sig9(v))
}

pub fn write_cells_csv<W: Write>(writer: W, cells: &[GridCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CELLS_HEADER)?;
    for c in cells {
        let e = c.error_vector;
        w.write_record(
            [
                c.point.x,
                c.point.y,
                c.point.z,
                c.exact_error,
                c.approx_error,
                e.x,
                e.y,
                e.z,
            ]
            .map(fmt_num),
        )?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn cells_csv_bytes(cells: &[GridCell]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_cells_csv(&mut buf, cells)?;
    Ok(buf)
}

/// Reads a cells CSV back. The base-point error is not stored there, so it
/// comes back as `None`.
pub fn read_cells_csv<R: Read>(reader: R) -> Result<Vec<GridCell>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CELLS_HEADER {
        return Err(Error::InvalidInput(format!(
            "unexpected cells header {header:?}, expected {CELLS_HEADER:?}"
        )));
    }
    let mut cells = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let mut v = [0.0; 8];
        for (slot, field) in v.iter_mut().zip(record.iter()) {
            *slot = field.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("row {}: '{field}' is not a number", line + 2))
            })?;
        }
        cells.push(GridCell {
            point: Point3::new(v[0], v[1], v[2]),
            exact_error: v[3],
            approx_error: v[4],
            error_vector: Point3::new(v[5], v[6], v[7]),
            base_error: None,
        });
    }
    Ok(cells)
}

pub fn write_gap_csv<W: Write>(writer: W, comparison: &ApproxComparison) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(GAP_HEADER)?;
    for row in &comparison.rows {
        w.write_record(
            [
                row.point.x,
                row.point.y,
                row.point.z,
                row.exact,
                row.approx,
                row.gap,
            ]
            .map(fmt_num),
        )?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Serializes `value` with every float passed through [`round_sig9`].
pub fn rounded_json<T: Serialize>(value: &T) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    round_in_place(&mut v);
    Ok(v)
}

fn round_in_place(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(f) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig9(f)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_in_place),
        Value::Object(map) => map.values_mut().for_each(round_in_place),
        _ => {}
    }
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes(value: &Value) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    max_error_cm: f64,
    argmax_points_cm: Vec<[f64; 3]>,
    min_error_cm: f64,
    mean_error_cm: f64,
    cell_count: usize,
    max_approx_vs_exact_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    displacement_cm: Option<Displacement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a RunConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

/// The summary JSON document. `config` is the resolved run echoed back so
/// the file describes itself.
pub fn summary_json(
    summary: &SweepSummary,
    displacement: Option<Displacement>,
    config: Option<&RunConfig>,
    notes: Vec<String>,
) -> Result<Value> {
    rounded_json(&SummaryDocument {
        max_error_cm: summary.max_error,
        argmax_points_cm: summary.argmax_points.iter().map(|p| p.to_array()).collect(),
        min_error_cm: summary.min_error,
        mean_error_cm: summary.mean_error,
        cell_count: summary.cell_count,
        max_approx_vs_exact_gap: summary.max_approx_vs_exact_gap,
        displacement_cm: displacement,
        config,
        notes,
    })
}

/// Writes through a temporary file in the same directory, then renames.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = parent_dir(path);
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Fails unless every output's directory exists and accepts new files.
pub fn check_writable<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Result<()> {
    for path in paths {
        let dir = parent_dir(path);
        if !dir.is_dir() {
            return Err(Error::io(
                &dir,
                std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    "output directory does not exist",
                ),
            ));
        }
        let probe = dir.join(format!(".stereoskew-probe-{}", std::process::id()));
        fs::File::create(&probe).map_err(|e| Error::io(&dir, e))?;
        let _ = fs::remove_file(&probe);
    }
    Ok(())
}

/// Renders every configured output and writes them. If any write fails the
/// files already written by this call are removed.
pub fn write_run_outputs(run: &ResolvedRun, result: &SweepOutput) -> Result<Vec<PathBuf>> {
    let mut rendered = Vec::with_capacity(run.outputs.len());
    for out in &run.outputs {
        let bytes = match out.kind {
            OutputKind::Cells => cells_csv_bytes(&result.cells)?,
            OutputKind::Summary => json_bytes(&summary_json(
                &result.summary,
                Some(run.sweep.displacement),
                Some(&run.echo),
                Vec::new(),
            )?)?,
            OutputKind::Heatmap => {
                let spec = out.heatmap_spec(run.sweep.mode)?;
                let title = heatmap_title(run);
                crate::io::heatmap::render_svg(&result.cells, &spec, &title)?.into_bytes()
            }
        };
        rendered.push((out.path.clone(), bytes));
    }
    let mut written = Vec::new();
    for (path, bytes) in rendered {
        if let Err(e) = atomic_write(&path, &bytes) {
            for done in &written {
                let _ = fs::remove_file(done);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(written)
}

fn heatmap_title(run: &ResolvedRun) -> String {
    let d = run.sweep.displacement;
    let dim = match run.sweep.mode {
        Mode::Planar => "2D",
        Mode::Spatial => "3D",
    };
    format!(
        "{dim} location error, d = {} cm, displacement ({}, {}, {}) cm, {}",
        fmt_num(run.sweep.rig.half_separation()),
        fmt_num(d.dx),
        fmt_num(d.dy),
        fmt_num(d.dz),
        run.sweep.convention
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(240.0), "240");
        assert_eq!(fmt_num(0.050010282065736), "0.0500102821");
        assert_eq!(fmt_num(-70.0), "-70");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333");
    }

    #[test]
    fn csv_round_trip_keeps_nine_digits() {
        let cells = vec![GridCell {
            point: Point3::new(-70.0, 90.0, 0.0),
            exact_error: 0.016921030158980794,
            approx_error: 0.0169,
            error_vector: Point3::new(1e-3, -2e-3, 0.0),
            base_error: Some(0.02),
        }];
        let bytes = cells_csv_bytes(&cells).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("x_cm,y_cm,z_cm,exact_err_cm,approx_err_cm,ex_cm,ey_cm,ez_cm\n"));
        let back = read_cells_csv(bytes.as_slice()).unwrap();
        assert_eq!(back[0].point, cells[0].point);
        assert_eq!(back[0].exact_error, 0.0169210302);
        assert_eq!(back[0].base_error, None);
    }

    #[test]
    fn rejects_foreign_csv() {
        assert!(read_cells_csv("a,b\n1,2\n".as_bytes()).is_err());
        let bad = format!("{}\n1,2,3,x,5,6,7,8\n", CELLS_HEADER.join(","));
        assert!(read_cells_csv(bad.as_bytes()).is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        atomic_write(&path, b"one").unwrap();
        atomic_write(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn missing_directory_is_not_writable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nope").join("a.csv");
        assert!(check_writable([path.as_path()]).is_err());
        let ok = dir.path().join("a.csv");
        assert!(check_writable([ok.as_path()]).is_ok());
    }

    proptest! {
        #[test]
        fn rounding_is_idempotent_and_tight(v in -1e6f64..1e6) {
            let r = round_sig9(v);
            prop_assert_eq!(round_sig9(r), r);
            prop_assert_eq!(fmt_num(r).parse::<f64>().unwrap(), r);
            if v != 0.0 {
                prop_assert!(((r - v) / v).abs() <= 5e-9);
            }
        }
    }
}
