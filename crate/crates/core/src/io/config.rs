//! Declarative run configuration, read from TOML.
//!
//! ```toml
//! mode = "3d"
//! convention = "midpoint"
//!
//! [rig]
//! d_cm = 25.0
//!
//! [range]
//! step_cm = 1.0
//! x = { min = -70.0, max = 70.0 }
//! y = { min = 90.0, max = 240.0 }
//! z = { min = -65.0, max = 65.0 }
//!
//! [displacement]
//! dx_cm = 0.01
//! dy_cm = 0.0
//!
//! [[outputs]]
//! kind = "summary"
//! path = "summary.json"
//! ```
//!
//! Exactly one of `[displacement]` and `[motion]` must be present.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CameraRig;
use crate::io::heatmap::{ColorScale, HeatmapSpec, Plane};
use crate::sweep::{AxisRange, Mode, OperatingRange, Slice, SweepConfig};
use crate::timing::{displacement_from_motion, Displacement, MotionSpec, ReferenceConvention};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<ReferenceConvention>,
    pub rig: RigConfig,
    #[serde(default)]
    pub range: RangeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub displacement: Option<DisplacementConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<MotionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<Slice>,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigConfig {
    pub d_cm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<AxisRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<AxisRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<AxisRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_cm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisplacementConfig {
    #[serde(default)]
    pub dx_cm: f64,
    #[serde(default)]
    pub dy_cm: f64,
    #[serde(default)]
    pub dz_cm: f64,
}

impl From<Displacement> for DisplacementConfig {
    fn from(d: Displacement) -> Self {
        Self {
            dx_cm: d.dx,
            dy_cm: d.dy,
            dz_cm: d.dz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionConfig {
    #[serde(default)]
    pub vx_cm_s: f64,
    #[serde(default)]
    pub vy_cm_s: f64,
    #[serde(default)]
    pub vz_cm_s: f64,
    pub dt_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Cells,
    Summary,
    Heatmap,
}

impl OutputKind {
    pub fn default_format(self) -> &'static str {
        match self {
            OutputKind::Cells => "csv",
            OutputKind::Summary => "json",
            OutputKind::Heatmap => "svg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub kind: OutputKind,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    /// Heatmap only: two axis letters, horizontal first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_min_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_max_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_px: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
}

impl OutputSpec {
    pub fn new(kind: OutputKind, path: impl Into<PathBuf>) -> Self {
        Self {
            kind,
            path: path.into(),
            format: None,
            plane: None,
            scale_min_cm: None,
            scale_max_cm: None,
            cell_px: None,
            width: None,
            height: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let expected = self.kind.default_format();
        if let Some(format) = &self.format {
            if !format.eq_ignore_ascii_case(expected) {
                return Err(Error::Config(format!(
                    "{:?} output supports format '{expected}', got '{format}'",
                    self.kind
                )));
            }
        }
        if self.kind == OutputKind::Heatmap {
            self.heatmap_spec(Mode::Spatial)?;
        }
        Ok(())
    }

    /// Heatmap layout for this output; the default plane is X-Y in 2D and
    /// X-Z in 3D.
    pub fn heatmap_spec(&self, mode: Mode) -> Result<HeatmapSpec> {
        let plane = match &self.plane {
            Some(p) => p.parse::<Plane>()?,
            None if mode == Mode::Planar => "xy".parse()?,
            None => "xz".parse()?,
        };
        let scale = match (self.scale_min_cm, self.scale_max_cm) {
            (None, None) => ColorScale::Auto,
            (Some(min), Some(max)) if min < max => ColorScale::Fixed { min, max },
            _ => {
                return Err(Error::Config(
                    "heatmap needs both scale_min_cm < scale_max_cm, or neither".into(),
                ))
            }
        };
        let mut spec = HeatmapSpec::new(plane);
        spec.scale = scale;
        spec.cell_px = self.cell_px;
        if let Some(w) = self.width {
            spec.width = w;
        }
        if let Some(h) = self.height {
            spec.height = h;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// A configuration with defaults filled in, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub sweep: SweepConfig,
    pub outputs: Vec<OutputSpec>,
    /// The configuration with every default made explicit, for echoing into
    /// summaries.
    pub echo: RunConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// A 2d run over the standard range with only a displacement set.
    pub fn with_displacement(d_cm: f64, disp: Displacement) -> Self {
        Self {
            mode: None,
            convention: None,
            rig: RigConfig { d_cm },
            range: RangeConfig::default(),
            displacement: Some(disp.into()),
            motion: None,
            slice: None,
            outputs: Vec::new(),
        }
    }

    pub fn resolved_displacement(&self) -> Result<Displacement> {
        match (&self.displacement, &self.motion) {
            (Some(d), None) => Ok(Displacement::new(d.dx_cm, d.dy_cm, d.dz_cm)),
            (None, Some(m)) => {
                let spec = MotionSpec::new([m.vx_cm_s, m.vy_cm_s, m.vz_cm_s], m.dt_s)?;
                Ok(displacement_from_motion(spec))
            }
            (Some(_), Some(_)) => Err(Error::Config(
                "give either [displacement] or [motion], not both".into(),
            )),
            (None, None) => Err(Error::Config(
                "one of [displacement] or [motion] is required".into(),
            )),
        }
    }

    /// Fills defaults and validates. Does not touch the filesystem.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        let mode = self.mode.unwrap_or(Mode::Planar);
        let defaults = match mode {
            Mode::Planar => OperatingRange::planar_default(),
            Mode::Spatial => OperatingRange::volume_default(),
        };
        let range = OperatingRange {
            x: self.range.x.unwrap_or(defaults.x),
            y: self.range.y.unwrap_or(defaults.y),
            z: match mode {
                Mode::Planar => AxisRange::fixed(0.0),
                Mode::Spatial => self.range.z.unwrap_or(defaults.z),
            },
            step: self.range.step_cm.unwrap_or(defaults.step),
        };
        if mode == Mode::Planar && self.range.z.is_some_and(|z| z != AxisRange::fixed(0.0)) {
            return Err(Error::Config("2d runs cannot set range.z".into()));
        }
        let rig = CameraRig::new(self.rig.d_cm)?;
        let displacement = self.resolved_displacement()?;
        let sweep = SweepConfig {
            rig,
            range,
            displacement,
            convention: self.convention.unwrap_or(ReferenceConvention::Midpoint),
            mode,
            slice: self.slice,
        };
        sweep.validate()?;
        for out in &self.outputs {
            out.validate()?;
        }
        let echo = RunConfig {
            mode: Some(mode),
            convention: Some(sweep.convention),
            rig: self.rig,
            range: RangeConfig {
                x: Some(range.x),
                y: Some(range.y),
                z: Some(range.z),
                step_cm: Some(range.step),
            },
            displacement: self.displacement,
            motion: self.motion,
            slice: self.slice,
            outputs: self.outputs.clone(),
        };
        Ok(ResolvedRun {
            sweep,
            outputs: self.outputs.clone(),
            echo,
        })
    }
}
