//! CSV and SVG emission. Everything is formatted deterministically so
//! reruns with the same config and seed produce byte-identical files.

use anyhow::{Context, Result};
use deepapprox::BuildReport;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const REPORT_HEADER: &str =
    "function,epsilon,depth,relu,step,total,strict_total,bound,measured,grid,seed";

pub fn report_row(r: &BuildReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.builder,
        r.epsilon.map(|e| e.to_string()).unwrap_or_default(),
        r.counts.depth,
        r.counts.relu,
        r.counts.step,
        r.counts.total,
        r.strict_total,
        r.bound,
        r.measured,
        r.grid,
        r.seed.map(|s| s.to_string()).unwrap_or_default(),
    )
}

/// Append `rows` to a CSV file, writing the header when the file is new.
pub fn append_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = if path.exists() {
        fs::read_to_string(path)?
    } else {
        format!("{header}\n")
    };
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = format!("{header}\n");
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    pub color: &'a str,
}

/// Minimal hand-rolled SVG line chart: one polyline per series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        x0 = 0.0;
        x1 = 1.0;
    }
    if (x1 - x0).abs() < 1e-12 {
        x1 = x0 + 1.0;
    }
    if (y1 - y0).abs() < 1e-12 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" font-size="16" text-anchor="middle">{title}</text>"#,
        W / 2.0
    );
    // axes
    let _ = writeln!(
        svg,
        r#"<line x1="{M}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        H - M,
        W - M,
        H - M
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{:.2}" stroke="black"/>"#,
        H - M
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{x_label}</text>"#,
        W / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">{y_label}</text>"#,
        H / 2.0,
        H / 2.0
    );
    // axis extremes
    let _ = writeln!(
        svg,
        r#"<text x="{M}" y="{:.2}" font-size="10" text-anchor="middle">{x0}</text>"#,
        H - M + 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{x1}</text>"#,
        W - M,
        H - M + 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{y0}</text>"#,
        M - 6.0,
        H - M
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{y1}</text>"#,
        M - 6.0,
        M + 4.0
    );

    for (i, s) in series.iter().enumerate() {
        let mut pts = String::new();
        for &(x, y) in &s.points {
            let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            s.color,
            pts.trim_end()
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" fill="{}">{}</text>"#,
            W - M + 4.0,
            M + 16.0 * i as f64,
            s.color,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}
