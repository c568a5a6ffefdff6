//! SVG heatmaps of a sweep, one rectangle per grid position in the chosen
//! plane. When the sweep spans the third axis, each pixel shows the largest
//! error along it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io::output::fmt_num;
use crate::sweep::{Axis, GridCell};

/// Nine-stop approximation of the viridis ramp, low to high.
const RAMP: [&str; 9] = [
    "#440154", "#472d7b", "#3b528b", "#2c728e", "#21918c", "#28ae80", "#5ec962", "#addc30",
    "#fde725",
];

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 110.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plane {
    horizontal: Axis,
    vertical: Axis,
}

impl Plane {
    pub fn new(horizontal: Axis, vertical: Axis) -> Result<Self> {
        if horizontal == vertical {
            return Err(Error::Config(format!(
                "heatmap plane needs two distinct axes, got {horizontal:?} twice"
            )));
        }
        Ok(Self {
            horizontal,
            vertical,
        })
    }

    pub fn horizontal(&self) -> Axis {
        self.horizontal
    }

    pub fn vertical(&self) -> Axis {
        self.vertical
    }
}

impl FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axis = |c: char| match c.to_ascii_lowercase() {
            'x' => Ok(Axis::X),
            'y' => Ok(Axis::Y),
            'z' => Ok(Axis::Z),
            _ => Err(Error::Config(format!("unknown axis '{c}' in plane '{s}'"))),
        };
        let chars: Vec<char> = s.chars().filter(|c| *c != '-').collect();
        match chars.as_slice() {
            [h, v] => Plane::new(axis(*h)?, axis(*v)?),
            _ => Err(Error::Config(format!(
                "plane must name two axes, e.g. 'xy', got '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColorScale {
    /// Stretch the ramp over the data's own min and max.
    Auto,
    Fixed {
        min: f64,
        max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapSpec {
    pub plane: Plane,
    pub scale: ColorScale,
    /// Side of one cell in pixels; by default the cells fill the plot area.
    pub cell_px: Option<f64>,
    pub width: u32,
    pub height: u32,
}

impl HeatmapSpec {
    pub fn new(plane: Plane) -> Self {
        Self {
            plane,
            scale: ColorScale::Auto,
            cell_px: None,
            width: 800,
            height: 600,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 200 || self.height < 150 {
            return Err(Error::Config(format!(
                "heatmap must be at least 200x150 px, got {}x{}",
                self.width, self.height
            )));
        }
        if let Some(px) = self.cell_px {
            if !(px.is_finite() && px > 0.0) {
                return Err(Error::Config(format!("cell_px must be positive, got {px}")));
            }
        }
        if let ColorScale::Fixed { min, max } = self.scale {
            if min.is_nan() || max.is_nan() || min >= max {
                return Err(Error::Config("color scale needs min < max".into()));
            }
        }
        Ok(())
    }
}

fn coord(p: &crate::geometry::Point3, axis: Axis) -> f64 {
    match axis {
        Axis::X => p.x,
        Axis::Y => p.y,
        Axis::Z => p.z,
    }
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::X => "X",
        Axis::Y => "Y",
        Axis::Z => "Z",
    }
}

/// Grouping key; `-0.0` and `0.0` share one.
fn key(v: f64) -> u64 {
    (v + 0.0).to_bits()
}

pub fn render_svg(cells: &[GridCell], spec: &HeatmapSpec, title: &str) -> Result<String> {
    spec.validate()?;
    if cells.is_empty() {
        return Err(Error::EmptySweep);
    }
    let (h_axis, v_axis) = (spec.plane.horizontal, spec.plane.vertical);

    // Max over the collapsed axis.
    let mut grid: BTreeMap<(u64, u64), (f64, f64, f64)> = BTreeMap::new();
    for c in cells {
        let (h, v) = (coord(&c.point, h_axis), coord(&c.point, v_axis));
        grid.entry((key(h), key(v)))
            .and_modify(|e| e.2 = e.2.max(c.exact_error))
            .or_insert((h + 0.0, v + 0.0, c.exact_error));
    }
    let mut hs: Vec<f64> = grid.values().map(|e| e.0).collect();
    let mut vs: Vec<f64> = grid.values().map(|e| e.1).collect();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    vs.sort_by(f64::total_cmp);
    vs.dedup();

    let (lo, hi) = match spec.scale {
        ColorScale::Fixed { min, max } => (min, max),
        ColorScale::Auto => grid.values().fold((f64::MAX, f64::MIN), |(lo, hi), e| {
            (lo.min(e.2), hi.max(e.2))
        }),
    };

    let plot_w = spec.width as f64 - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = spec.height as f64 - MARGIN_TOP - MARGIN_BOTTOM;
    let (cw, ch) = match spec.cell_px {
        Some(px) => (px, px),
        None => (plot_w / hs.len() as f64, plot_h / vs.len() as f64),
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = spec.width,
        h = spec.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16">{}</text>"#,
        MARGIN_LEFT,
        escape(title)
    );
    let _ = writeln!(svg, r#"<g shape-rendering="crispEdges">"#);
    for &(h, v, err) in grid.values() {
        let i = hs.partition_point(|x| *x < h);
        let j = vs.partition_point(|x| *x < v);
        // Vertical axis grows upward.
        let px = MARGIN_LEFT + i as f64 * cw;
        let py = MARGIN_TOP + plot_h - (j + 1) as f64 * ch;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            fmt_px(px),
            fmt_px(py),
            fmt_px(cw),
            fmt_px(ch),
            color(err, lo, hi)
        );
    }
    let _ = writeln!(svg, "</g>");

    let bottom = MARGIN_TOP + plot_h;
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{} = {} .. {} cm</text>"#,
        MARGIN_LEFT,
        fmt_px(bottom + 30.0),
        axis_name(h_axis),
        fmt_num(hs[0]),
        fmt_num(hs[hs.len() - 1])
    );
    let _ = writeln!(
        svg,
        r#"<text x="12" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 12 {})">{} = {} .. {} cm</text>"#,
        fmt_px(bottom),
        fmt_px(bottom),
        axis_name(v_axis),
        fmt_num(vs[0]),
        fmt_num(vs[vs.len() - 1])
    );

    // Legend, high at the top.
    let lx = spec.width as f64 - MARGIN_RIGHT + 20.0;
    let band = plot_h / RAMP.len() as f64;
    for (k, c) in RAMP.iter().rev().enumerate() {
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="20" height="{}" fill="{}"/>"#,
            fmt_px(lx),
            fmt_px(MARGIN_TOP + k as f64 * band),
            fmt_px(band),
            c
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">max {} cm</text>"#,
        fmt_px(lx),
        fmt_px(MARGIN_TOP - 6.0),
        fmt_num(hi)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">min {} cm</text>"#,
        fmt_px(lx),
        fmt_px(bottom + 16.0),
        fmt_num(lo)
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn color(value: f64, lo: f64, hi: f64) -> &'static str {
    let t = if hi > lo {
        (value - lo) / (hi - lo)
    } else {
        0.0
    };
    let idx = (t.clamp(0.0, 1.0) * RAMP.len() as f64).floor() as usize;
    RAMP[idx.min(RAMP.len() - 1)]
}

fn fmt_px(v: f64) -> String {
    format!("{:.3}", v)
        .trim_end_matches('0')
        .trim_end_matches('.')
        .to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
