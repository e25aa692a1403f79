//! Minimal deterministic SVG plots.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
/// Largest number of x columns drawn in a heatmap.
const HEATMAP_COLUMNS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    Heatmap,
    Lines,
    /// Magnitudes on a log10 axis.
    Spectrum,
    /// Values that are already base-10 logarithms (growth rates).
    Gamma,
    Dispersion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlotInput {
    Curves {
        title: String,
        x_label: String,
        y_label: String,
        series: Vec<Series>,
    },
    /// `values[i][j]` is the field at `times[i]`, `x[j]`.
    Field {
        title: String,
        x: Vec<f64>,
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

fn log_axis(kind: PlotKind) -> bool {
    matches!(kind, PlotKind::Spectrum | PlotKind::Gamma)
}

fn to_axis(kind: PlotKind, y: f64) -> f64 {
    match kind {
        PlotKind::Spectrum => y.abs().max(1e-300).log10(),
        _ => y,
    }
}

fn curves(kind: PlotKind, input: &PlotInput) -> Result<Vec<(String, Vec<(f64, f64)>)>> {
    match input {
        PlotInput::Curves { series, .. } => {
            let out: Vec<_> = series
                .iter()
                .map(|s| {
                    let pts = s
                        .points
                        .iter()
                        .map(|&(x, y)| (x, to_axis(kind, y)))
                        .filter(|(x, y)| x.is_finite() && y.is_finite())
                        .collect::<Vec<_>>();
                    (s.label.clone(), pts)
                })
                .collect();
            if out.iter().all(|(_, p)| p.is_empty()) {
                return Err(Error::config("plot", "no finite points to draw"));
            }
            Ok(out)
        }
        PlotInput::Field { .. } => Err(Error::config("plot", format!("{kind:?} plots need curve input"))),
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Vertical data range in axis units (log10 for spectrum and gamma plots).
pub fn vertical_range(kind: PlotKind, input: &PlotInput) -> Result<(f64, f64)> {
    match (kind, input) {
        (PlotKind::Heatmap, PlotInput::Field { times, .. }) => {
            if times.is_empty() {
                return Err(Error::config("plot", "heatmap needs at least one time"));
            }
            Ok(bounds(times.iter().copied()))
        }
        (PlotKind::Heatmap, _) => Err(Error::config("plot", "heatmap needs field input")),
        _ => Ok(bounds(curves(kind, input)?.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)))),
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn tick_label(v: f64, log: bool) -> String {
    if log && (v - v.round()).abs() < 1e-9 {
        format!("1e{}", v.round() as i64)
    } else if log {
        format!("1e{v:.2}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".to_string() } else { s.to_string() }
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }
    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn axes(svg: &mut String, f: &Frame, title: &str, x_label: &str, y_label: &str, log: bool) {
    let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000"/>"##,
        num(l),
        num(t),
        num(r - l),
        num(b - t)
    );
    for i in 0..=4 {
        let xv = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let x = f.px(xv);
        let _ = writeln!(
            svg,
            r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#000"/><text x="{0}" y="{3}" font-size="12" text-anchor="middle">{4}</text>"##,
            num(x),
            num(b),
            num(b + 5.0),
            num(b + 20.0),
            tick_label(xv, false)
        );
        let yv = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let y = f.py(yv);
        let _ = writeln!(
            svg,
            r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#000"/><text x="{3}" y="{4}" font-size="12" text-anchor="end">{5}</text>"##,
            num(l - 5.0),
            num(y),
            num(l),
            num(l - 8.0),
            num(y + 4.0),
            tick_label(yv, log)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
        num((l + r) / 2.0),
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        num((l + r) / 2.0),
        num(HEIGHT - 15.0),
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{0}" font-size="13" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        num((t + b) / 2.0),
        escape(y_label)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(kind: PlotKind, range: (f64, f64)) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" data-kind=\"{}\" data-ymin=\"{:e}\" data-ymax=\"{:e}\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n",
        WIDTH,
        HEIGHT,
        WIDTH,
        HEIGHT,
        format!("{kind:?}").to_lowercase(),
        range.0,
        range.1
    )
}

fn diverging(v: f64, scale: f64) -> String {
    let s = if scale > 0.0 { (v / scale).clamp(-1.0, 1.0) } else { 0.0 };
    let (r, g, b) = if s >= 0.0 {
        (255.0, 255.0 * (1.0 - s), 255.0 * (1.0 - s))
    } else {
        (255.0 * (1.0 + s), 255.0 * (1.0 + s), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

pub fn render_svg(kind: PlotKind, input: &PlotInput) -> Result<String> {
    let range = vertical_range(kind, input)?;
    let mut svg = header(kind, range);
    match input {
        PlotInput::Field { title, x, times, values } => {
            if x.is_empty() || values.len() != times.len() || values.iter().any(|v| v.len() != x.len()) {
                return Err(Error::config("plot", "field values do not match the x/time axes"));
            }
            let (x0, x1) = bounds(x.iter().copied());
            let f = Frame {
                x0,
                x1,
                y0: range.0,
                y1: range.1,
            };
            let scale = values.iter().flatten().map(|v| v.abs()).filter(|v| v.is_finite()).fold(0.0, f64::max);
            let stride = x.len().div_ceil(HEATMAP_COLUMNS);
            let cols: Vec<usize> = (0..x.len()).step_by(stride).collect();
            let cell_w = (WIDTH - LEFT - RIGHT) / cols.len() as f64;
            let cell_h = (HEIGHT - TOP - BOTTOM) / times.len() as f64;
            for (i, row) in values.iter().enumerate() {
                let y = HEIGHT - BOTTOM - (i + 1) as f64 * cell_h;
                for (c, &j) in cols.iter().enumerate() {
                    let _ = writeln!(
                        svg,
                        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                        num(LEFT + c as f64 * cell_w),
                        num(y),
                        num(cell_w + 0.05),
                        num(cell_h + 0.05),
                        diverging(row[j], scale)
                    );
                }
            }
            axes(&mut svg, &f, title, "x", "t", false);
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" font-size="12">|psi| max {}</text>"#,
                num(WIDTH - RIGHT + 10.0),
                num(TOP + 12.0),
                num(scale)
            );
        }
        PlotInput::Curves { title, x_label, y_label, .. } => {
            let data = curves(kind, input)?;
            let (x0, x1) = bounds(data.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
            let f = Frame {
                x0,
                x1,
                y0: range.0,
                y1: range.1,
            };
            let y_label = match kind {
                PlotKind::Spectrum => format!("{y_label} (log10)"),
                _ => y_label.clone(),
            };
            axes(&mut svg, &f, title, x_label, &y_label, log_axis(kind));
            for (i, (label, pts)) in data.iter().enumerate() {
                let colour = PALETTE[i % PALETTE.len()];
                let path: Vec<String> = pts
                    .iter()
                    .enumerate()
                    .map(|(n, &(x, y))| format!("{}{} {}", if n == 0 { "M" } else { "L" }, num(f.px(x)), num(f.py(y))))
                    .collect();
                let _ = writeln!(
                    svg,
                    r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                    path.join(" "),
                    colour
                );
                let ly = TOP + 12.0 + 18.0 * i as f64;
                let _ = writeln!(
                    svg,
                    r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{3}" stroke-width="2"/><text x="{4}" y="{5}" font-size="12">{6}</text>"#,
                    num(WIDTH - RIGHT + 10.0),
                    num(ly),
                    num(WIDTH - RIGHT + 30.0),
                    colour,
                    num(WIDTH - RIGHT + 35.0),
                    num(ly + 4.0),
                    escape(label)
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_plot(kind: PlotKind, input: &PlotInput, path: &Path) -> Result<()> {
    let svg = render_svg(kind, input)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: Vec<(f64, f64)>) -> PlotInput {
        PlotInput::Curves {
            title: "t".into(),
            x_label: "k".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "a".into(),
                points,
            }],
        }
    }

    #[test]
    fn spectrum_axis_is_logarithmic() {
        let input = curve(vec![(0.0, 1.0), (1.0, 1e-12), (2.0, 0.0)]);
        let (lo, hi) = vertical_range(PlotKind::Spectrum, &input).unwrap();
        assert_eq!(hi, 0.0);
        assert!(lo < -12.0);
        let svg = render_svg(PlotKind::Spectrum, &input).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains(">1e0<"));
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(render_svg(PlotKind::Lines, &curve(vec![])).is_err());
        let field = PlotInput::Field {
            title: "f".into(),
            x: vec![],
            times: vec![],
            values: vec![],
        };
        assert!(render_svg(PlotKind::Heatmap, &field).is_err());
        assert!(render_svg(PlotKind::Lines, &field).is_err());
        assert!(render_svg(PlotKind::Heatmap, &curve(vec![(0.0, 1.0)])).is_err());
    }

    #[test]
    fn rendering_is_deterministic() {
        let input = PlotInput::Field {
            title: "psi".into(),
            x: (0..300).map(|j| j as f64 * 0.1).collect(),
            times: vec![0.0, 1.0],
            values: vec![(0..300).map(|j| (j as f64 * 0.1).sin()).collect(); 2],
        };
        let a = render_svg(PlotKind::Heatmap, &input).unwrap();
        let b = render_svg(PlotKind::Heatmap, &input).unwrap();
        assert_eq!(a, b);
    }
}
