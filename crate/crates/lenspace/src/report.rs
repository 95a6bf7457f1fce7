//! Report emission: atomic file writes, versioned CSV tables, JSON reports
//! and minimal SVG plots. All writers are deterministic byte-for-byte given
//! the same inputs.

use std::path::Path;

use crate::error::Result;
use crate::geom::{Curve, Rect};

/// Write-temp-then-rename, so partially written reports are never visible.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    write_atomic(path, &out)
}

/// CSV with a versioned `#` header comment naming the columns.
pub fn write_csv(path: &Path, version_tag: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# {version_tag}\n"));
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 640.0;
const PALETTE: [&str; 6] = ["#1b6ca8", "#c23b22", "#2e8540", "#8a5acc", "#c77d1e", "#3b3b3b"];

fn map_x(view: Rect, x: f64) -> f64 {
    40.0 + (x - view.x1_lo) / view.width() * (SVG_W - 60.0)
}

fn map_y(view: Rect, y: f64) -> f64 {
    // svg y grows downward
    SVG_H - 40.0 - (y - view.x2_lo) / view.height() * (SVG_H - 60.0)
}

fn polyline_tag(view: Rect, pts: &[(f64, f64)], color: &str) -> String {
    let coords: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", map_x(view, x), map_y(view, y)))
        .collect();
    format!(
        "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        coords.join(" ")
    )
}

/// Plot labeled curves over a rectangle viewport.
pub fn svg_curves(path: &Path, view: Rect, curves: &[(String, &Curve)]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#999\"/>\n",
        map_x(view, view.x1_lo),
        map_y(view, view.x2_hi),
        SVG_W - 60.0,
        SVG_H - 60.0,
    ));
    for (k, (label, curve)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = curve.samples().iter().map(|&(_, p)| (p.x1, p.x2)).collect();
        out.push_str(&polyline_tag(view, &pts, color));
        out.push_str(&format!(
            "  <text x=\"46\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{label}</text>\n",
            18 + 14 * k
        ));
    }
    out.push_str("</svg>\n");
    write_atomic(path, out.as_bytes())
}

/// Plot labeled numeric series against an integer axis (margins vs n).
pub fn svg_series(path: &Path, series: &[(String, Vec<(f64, f64)>)]) -> Result<()> {
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_hi: f64 = 1e-12;
    for (_, pts) in series {
        for &(x, y) in pts {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_hi = y_hi.max(y);
        }
    }
    if !x_lo.is_finite() || x_hi <= x_lo {
        x_lo = 0.0;
        x_hi = 1.0;
    }
    let view = Rect { x1_lo: x_lo, x1_hi: x_hi, x2_lo: 0.0, x2_hi: y_hi * 1.1 };
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#999\"/>\n",
        map_x(view, view.x1_lo),
        map_y(view, view.x2_hi),
        SVG_W - 60.0,
        SVG_H - 60.0,
    ));
    for (k, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        out.push_str(&polyline_tag(view, pts, color));
        out.push_str(&format!(
            "  <text x=\"46\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{label}</text>\n",
            18 + 14 * k
        ));
    }
    out.push_str("</svg>\n");
    write_atomic(path, out.as_bytes())
}
