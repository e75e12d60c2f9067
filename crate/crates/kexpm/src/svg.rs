//! Log-scale line charts written directly as SVG.

use std::fmt::Write as _;
use std::path::Path;

use kexpm_core::bounds::ConvergenceRecord;

/// Exponent range of the y axis.
pub const Y_RANGE: (f64, f64) = (-16.0, 16.0);

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 580.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 430.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Solid,
    Plus,
    Dashed,
    Dotted,
    Cross,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub style: Style,
    pub color: &'static str,
    /// One entry per grid point; `None` and non-finite values are skipped.
    pub values: Vec<Option<f64>>,
}

/// The standard series of a convergence history.
pub fn series_from_records(records: &[ConvergenceRecord]) -> (Vec<usize>, Vec<Series>) {
    let ks = records.iter().map(|r| r.k).collect();
    let make = |label: &str, style, color, f: &dyn Fn(&ConvergenceRecord) -> Option<f64>| Series {
        label: label.to_string(),
        style,
        color,
        values: records.iter().map(f).collect(),
    };
    let mut series = vec![
        make("error", Style::Solid, "#000000", &|r| r.err_true),
        make("a posteriori", Style::Plus, "#d62728", &|r| Some(r.est_post)),
        make("a priori", Style::Dashed, "#1f77b4", &|r| Some(r.bnd_prior)),
        make("Hochbruck-Lubich", Style::Dotted, "#2ca02c", &|r| r.bnd_hl),
        make("Saad", Style::Cross, "#9467bd", &|r| r.bnd_saad),
    ];
    series.retain(|s| s.values.iter().any(Option::is_some));
    (ks, series)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn y_of(value: f64) -> Option<f64> {
    if !value.is_finite() || value < 0.0 {
        return None;
    }
    let e = value.log10().clamp(Y_RANGE.0, Y_RANGE.1);
    Some(BOTTOM - (e - Y_RANGE.0) / (Y_RANGE.1 - Y_RANGE.0) * (BOTTOM - TOP))
}

fn runs(points: &[Option<(f64, f64)>]) -> Vec<Vec<(f64, f64)>> {
    let mut out: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    for p in points {
        match p {
            Some(xy) => out.last_mut().expect("nonempty").push(*xy),
            None if out.last().is_some_and(|r| !r.is_empty()) => out.push(Vec::new()),
            None => {}
        }
    }
    out.retain(|r| !r.is_empty());
    out
}

fn marker(svg: &mut String, style: Style, x: f64, y: f64, color: &str) {
    let d = match style {
        Style::Plus => format!("M{:.2} {y:.2}h8M{x:.2} {:.2}v8", x - 4.0, y - 4.0),
        _ => format!("M{:.2} {:.2}l7 7M{:.2} {:.2}l-7 7", x - 3.5, y - 3.5, x + 3.5, y - 3.5),
    };
    let _ = writeln!(svg, r#"<path d="{d}" stroke="{color}" stroke-width="1.2" fill="none"/>"#);
}

fn dash(style: Style) -> &'static str {
    match style {
        Style::Dashed => r#" stroke-dasharray="7 4""#,
        Style::Dotted => r#" stroke-dasharray="1.5 3""#,
        _ => "",
    }
}

/// Renders the chart. Every series must have one value per entry of `ks`.
pub fn render_svg(title: &str, ks: &[usize], series: &[Series]) -> String {
    let (k_lo, k_hi) = match (ks.iter().min(), ks.iter().max()) {
        (Some(&lo), Some(&hi)) if hi > lo => (lo as f64, hi as f64),
        (Some(&lo), _) => (lo as f64 - 1.0, lo as f64 + 1.0),
        _ => (0.0, 1.0),
    };
    let x_of = |k: usize| LEFT + (k as f64 - k_lo) / (k_hi - k_lo) * (RIGHT - LEFT);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#, (LEFT + RIGHT) / 2.0, escape(title));

    let mut e = Y_RANGE.0;
    while e <= Y_RANGE.1 {
        let y = y_of(10f64.powf(e)).expect("in range");
        let _ = writeln!(svg, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{RIGHT}" y2="{y:.2}" stroke="#e0e0e0"/>"##);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">1e{e}</text>"#, LEFT - 6.0, y + 4.0);
        e += 4.0;
    }
    let step = ((k_hi - k_lo) / 8.0).ceil().max(1.0) as usize;
    let mut k = k_lo.ceil() as usize;
    while k as f64 <= k_hi {
        let x = x_of(k);
        let _ = writeln!(svg, r##"<line x1="{x:.2}" y1="{BOTTOM}" x2="{x:.2}" y2="{:.1}" stroke="#000000"/>"##, BOTTOM + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{k}</text>"#, BOTTOM + 18.0);
        k += step;
    }
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="#000000"/>"##,
        RIGHT - LEFT,
        BOTTOM - TOP
    );
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">k</text>"#, (LEFT + RIGHT) / 2.0, HEIGHT - 12.0);

    for s in series {
        let points: Vec<Option<(f64, f64)>> = ks
            .iter()
            .zip(&s.values)
            .map(|(&k, v)| v.and_then(y_of).map(|y| (x_of(k), y)))
            .collect();
        match s.style {
            Style::Plus | Style::Cross => {
                for (x, y) in points.iter().flatten() {
                    marker(&mut svg, s.style, *x, *y, s.color);
                }
            }
            _ => {
                for run in runs(&points) {
                    let coords: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                    let _ = writeln!(
                        svg,
                        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{}/>"#,
                        coords.join(" "),
                        s.color,
                        dash(s.style)
                    );
                }
            }
        }
    }

    for (i, s) in series.iter().enumerate() {
        let y = TOP + 12.0 + 20.0 * i as f64;
        let x = RIGHT + 16.0;
        match s.style {
            Style::Plus | Style::Cross => marker(&mut svg, s.style, x + 12.0, y, s.color),
            _ => {
                let _ = writeln!(
                    svg,
                    r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="1.5"{}/>"#,
                    x + 24.0,
                    s.color,
                    dash(s.style)
                );
            }
        }
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}">{}</text>"#, x + 30.0, y + 4.0, escape(&s.label));
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_svg(title: &str, ks: &[usize], series: &[Series], path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render_svg(title, ks, series))
}
