//! Static SVG scatter plots of 2-D (or paneled 3-D) projections.
//!
//! The fixed axis is drawn vertically; classes become fill colors assigned in
//! sorted label order so the same label set always gets the same palette.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::init::Embedding;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];
const UNLABELLED: &str = "#4c72b0";
const MARGIN: f64 = 50.0;
const LEGEND_WIDTH: f64 = 140.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width: f64,
    pub height: f64,
    pub point_radius: f64,
    /// `(horizontal, vertical)` axis titles.
    pub axis_labels: (String, String),
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            width: 640.0,
            height: 480.0,
            point_radius: 3.0,
            axis_labels: ("dim0".into(), "dim1".into()),
        }
    }
}

impl PlotSpec {
    fn validate(&self) -> Result<()> {
        if [self.width, self.height, self.point_radius]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
        {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "plot width, height and point radius must be positive".into(),
            ))
        }
    }
}

/// Label → color, in sorted label order.
pub fn color_map(labels: &[String]) -> BTreeMap<&str, &'static str> {
    let mut map: BTreeMap<&str, &'static str> = labels.iter().map(|l| (l.as_str(), "")).collect();
    for (k, color) in map.values_mut().enumerate() {
        *color = PALETTE[k % PALETTE.len()];
    }
    map
}

/// Affine map from a padded data interval onto a pixel interval.
#[derive(Debug, Clone, Copy)]
struct AxisMap {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl AxisMap {
    fn new(values: impl Iterator<Item = f64>, px_lo: f64, px_hi: f64) -> Self {
        let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        let span = max - min;
        let (lo, hi) = if span > 0.0 {
            (min - 0.05 * span, max + 0.05 * span)
        } else {
            (min - 0.5, max + 0.5)
        };
        Self {
            lo,
            hi,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Draws one scatter panel of axes `(ax, ay)` at the origin of the current group.
fn panel(
    out: &mut String,
    e: &Embedding,
    ax: usize,
    ay: usize,
    labels: Option<&[String]>,
    colors: &BTreeMap<&str, &'static str>,
    spec: &PlotSpec,
    titles: (&str, &str),
) {
    let left = MARGIN;
    let right = spec.width - MARGIN;
    let top = MARGIN;
    let bottom = spec.height - MARGIN;
    let xs = AxisMap::new((0..e.n_points()).map(|i| e.point(i)[ax]), left, right);
    // screen y grows downward, so the data minimum maps to the bottom edge
    let ys = AxisMap::new((0..e.n_points()).map(|i| e.point(i)[ay]), bottom, top);

    let _ = writeln!(
        out,
        r##"<rect x="{left:.3}" y="{top:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#444444"/>"##,
        right - left,
        bottom - top
    );
    for t in 0..TICKS {
        let f = t as f64 / (TICKS - 1) as f64;
        let xv = xs.lo + f * (xs.hi - xs.lo);
        let px = xs.map(xv);
        let _ = writeln!(
            out,
            r##"<line x1="{px:.3}" y1="{bottom:.3}" x2="{px:.3}" y2="{:.3}" stroke="#444444"/><text x="{px:.3}" y="{:.3}" font-size="10" text-anchor="middle">{xv:.3}</text>"##,
            bottom + 4.0,
            bottom + 16.0
        );
        let yv = ys.lo + f * (ys.hi - ys.lo);
        let py = ys.map(yv);
        let _ = writeln!(
            out,
            r##"<line x1="{:.3}" y1="{py:.3}" x2="{left:.3}" y2="{py:.3}" stroke="#444444"/><text x="{:.3}" y="{:.3}" font-size="10" text-anchor="end">{yv:.3}</text>"##,
            left - 4.0,
            left - 6.0,
            py + 3.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.3}" y="{:.3}" font-size="12" text-anchor="middle">{}</text>"#,
        0.5 * (left + right),
        spec.height - 12.0,
        escape(titles.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.3}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.3})">{}</text>"#,
        0.5 * (top + bottom),
        0.5 * (top + bottom),
        escape(titles.1)
    );

    for i in 0..e.n_points() {
        let p = e.point(i);
        let fill = labels.map_or(UNLABELLED, |l| colors[l[i].as_str()]);
        let _ = writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{}" fill="{fill}" fill-opacity="0.8"/>"#,
            xs.map(p[ax]),
            ys.map(p[ay]),
            spec.point_radius
        );
    }
}

fn legend(out: &mut String, x: f64, colors: &BTreeMap<&str, &'static str>) {
    let _ = writeln!(out, r#"<g class="legend">"#);
    for (k, (label, color)) in colors.iter().enumerate() {
        let y = MARGIN + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<g class="legend-entry"><rect x="{x:.3}" y="{:.3}" width="10" height="10" fill="{color}"/><text x="{:.3}" y="{:.3}" font-size="11">{}</text></g>"#,
            y,
            x + 16.0,
            y + 9.0,
            escape(label)
        );
    }
    let _ = writeln!(out, "</g>");
}

fn check(e: &Embedding, labels: Option<&[String]>, spec: &PlotSpec) -> Result<()> {
    spec.validate()?;
    if let Some(l) = labels {
        if l.len() != e.n_points() {
            return Err(Error::LengthMismatch {
                expected: e.n_points(),
                found: l.len(),
            });
        }
    }
    Ok(())
}

/// Standalone SVG for a 2-D embedding, one circle per point.
pub fn render_scatter(e: &Embedding, labels: Option<&[String]>, spec: &PlotSpec) -> Result<String> {
    if e.dims() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "scatter needs a 2-D embedding, got {} dimensions (use panels for 3-D)",
            e.dims()
        )));
    }
    check(e, labels, spec)?;
    let colors = labels.map(color_map).unwrap_or_default();
    let total_width = spec.width + if labels.is_some() { LEGEND_WIDTH } else { 0.0 };

    let mut out = header(total_width, spec.height);
    let titles = (spec.axis_labels.0.as_str(), spec.axis_labels.1.as_str());
    panel(&mut out, e, 0, 1, labels, &colors, spec, titles);
    if labels.is_some() {
        legend(&mut out, spec.width, &colors);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Three side-by-side panels (0,1), (0,2), (1,2) for a 3-D embedding.
pub fn render_panels(e: &Embedding, labels: Option<&[String]>, spec: &PlotSpec) -> Result<String> {
    if e.dims() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "panel plot needs a 3-D embedding, got {} dimensions",
            e.dims()
        )));
    }
    check(e, labels, spec)?;
    let colors = labels.map(color_map).unwrap_or_default();
    let total_width = 3.0 * spec.width + if labels.is_some() { LEGEND_WIDTH } else { 0.0 };

    let mut out = header(total_width, spec.height);
    let names = ["dim0", "dim1", "dim2"];
    for (k, (ax, ay)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<g class="panel" transform="translate({:.3},0)">"#,
            k as f64 * spec.width
        );
        panel(
            &mut out,
            e,
            ax,
            ay,
            labels,
            &colors,
            spec,
            (names[ax], names[ay]),
        );
        out.push_str("</g>\n");
    }
    if labels.is_some() {
        legend(&mut out, 3.0 * spec.width, &colors);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn header(width: f64, height: f64) -> String {
    format!(
        concat!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n",
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" ",
            "width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        ),
        w = width,
        h = height
    )
}
