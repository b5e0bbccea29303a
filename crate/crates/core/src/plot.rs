//! Deterministic SVG line plots of spectrum tables.
//!
//! Output depends only on the input values: coordinates are printed with a
//! fixed number of decimals and nothing is read from the environment.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::SpectrumTable;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const DASHES: [&str; 3] = ["", "6 3", "2 2"];
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub width: u32,
    pub height: u32,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            title: String::new(),
            x_label: "k_parallel".into(),
            y_label: "f".into(),
            log_y: false,
            width: 800,
            height: 500,
        }
    }
}

/// Renders one polyline per table with a legend built from method tags.
///
/// With `log_y`, non-positive values break the line instead of being drawn.
pub fn render_plot(tables: &[SpectrumTable], style: &PlotStyle) -> Result<String> {
    if tables.is_empty() || tables.iter().any(SpectrumTable::is_empty) {
        return Err(Error::InvalidInput("cannot plot an empty table".into()));
    }
    if style.width < 200 || style.height < 150 {
        return Err(Error::InvalidInput("plot must be at least 200x150".into()));
    }
    let transform = |y: f64| if style.log_y { (y > 0.0).then(|| y.log10()) } else { Some(y) };

    let xs = tables.iter().flat_map(|t| t.rows.iter().map(|r| r.k_parallel));
    let (x_min, x_max) = bounds(xs).expect("tables are nonempty");
    let ys = tables.iter().flat_map(|t| t.rows.iter().filter_map(|r| transform(r.f)));
    let Some((y_lo, y_hi)) = bounds(ys) else {
        return Err(Error::InvalidInput("no positive values to draw on a log axis".into()));
    };
    let (x_min, x_max) = padded(x_min, x_max, 0.0);
    let (y_min, y_max) = padded(y_lo, y_hi, 0.05);

    let w = f64::from(style.width);
    let h = f64::from(style.height);
    let plot_w = w - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = h - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        MARGIN_LEFT, MARGIN_TOP, plot_w, plot_h
    );

    for x in ticks(x_min, x_max) {
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle">{4}</text>"#,
            px(x),
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0,
            MARGIN_TOP + plot_h + 18.0,
            tick_label(x)
        );
    }
    let y_ticks = if style.log_y { decade_ticks(y_min, y_max) } else { ticks(y_min, y_max) };
    for y in y_ticks {
        let label = if style.log_y { format!("1e{}", y.round() as i64) } else { tick_label(y) };
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{2:.2}" x2="{1:.2}" y2="{2:.2}" stroke="black"/><text x="{3:.2}" y="{4:.2}" text-anchor="end">{5}</text>"#,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT,
            py(y),
            MARGIN_LEFT - 8.0,
            py(y) + 4.0,
            label
        );
    }

    for (i, table) in tables.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = DASHES[(i / PALETTE.len()) % DASHES.len()];
        let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for r in &table.rows {
            match transform(r.f) {
                Some(y) => segments.last_mut().expect("never empty").push((px(r.k_parallel), py(y))),
                None if !segments.last().expect("never empty").is_empty() => segments.push(Vec::new()),
                None => {}
            }
        }
        for seg in segments.iter().filter(|s| !s.is_empty()) {
            let mut points = String::new();
            for (j, (x, y)) in seg.iter().enumerate() {
                let sep = if j == 0 { "" } else { " " };
                let _ = write!(points, "{sep}{x:.2},{y:.2}");
            }
            let dash_attr = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{points}"/>"#
            );
        }
    }

    for (i, label) in legend_labels(tables).iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 15.0 + 16.0 * i as f64;
        let x = MARGIN_LEFT + plot_w - 130.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x,
            x + 25.0,
            x + 30.0,
            y + 4.0,
            escape(label)
        );
    }

    if !style.title.is_empty() {
        let _ = writeln!(svg, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#, w / 2.0, escape(&style.title));
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        h - 10.0,
        escape(&style.x_label)
    );
    let y_label = if style.log_y { format!("{} (log scale)", style.y_label) } else { style.y_label.clone() };
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0:.2}" text-anchor="middle" transform="rotate(-90 16 {0:.2})">{1}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        escape(&y_label)
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Method tags, numbered when a tag repeats.
fn legend_labels(tables: &[SpectrumTable]) -> Vec<String> {
    let tags: Vec<String> = tables
        .iter()
        .map(|t| t.methods().iter().map(|m| m.as_str()).collect::<Vec<_>>().join("+"))
        .collect();
    tags.iter()
        .enumerate()
        .map(|(i, tag)| {
            let total = tags.iter().filter(|t| *t == tag).count();
            if total == 1 {
                tag.clone()
            } else {
                let nth = tags[..=i].iter().filter(|t| *t == tag).count();
                format!("{tag} #{nth}")
            }
        })
        .collect()
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| Some(acc.map_or((v, v), |(lo, hi): (f64, f64)| (lo.min(v), hi.max(v)))))
}

/// Widens a range by a fraction of its span; a degenerate range gets unit width.
fn padded(lo: f64, hi: f64, frac: f64) -> (f64, f64) {
    if hi > lo {
        let pad = (hi - lo) * frac;
        (lo - pad, hi + pad)
    } else {
        let half = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        (lo - half, hi + half)
    }
}

/// Roughly five round-number ticks inside `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn decade_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (first, last) = (lo.ceil() as i64, hi.floor() as i64);
    let stride = ((last - first) / 8).max(1);
    (first..=last).step_by(stride as usize).map(|d| d as f64).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if (1e-3..1e4).contains(&v.abs()) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
