//! Artifact emission: CSV tables with a fixed header row, pretty-printed
//! JSON with sorted keys, and minimal hand-emitted SVG line charts. All
//! numeric output uses shortest round-trip decimal formatting, so identical
//! inputs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// Writes a CSV table: one header row, then the given data rows.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut text = String::with_capacity(header.len() + rows.iter().map(|r| r.len() + 1).sum::<usize>() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes pretty-printed JSON with alphabetically sorted keys.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let sorted = serde_json::to_value(value)
        .map_err(|e| CliError::Precondition(format!("cannot serialize report: {e}")))?;
    let text = serde_json::to_string_pretty(&sorted)
        .map_err(|e| CliError::Precondition(format!("cannot serialize report: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 620.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 420.0;

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
    (lo - 0.05 * span, hi + 0.05 * span)
}

/// Renders a minimal line chart: white canvas, axes with five labeled ticks
/// per side, a polyline through the points, and a circle marker per point.
/// The first line inside the document is a comment with the emitting tool
/// and version.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let (x_lo, x_hi) = padded_range(points.iter().map(|p| p.0));
    let (y_lo, y_hi) = padded_range(points.iter().map(|p| p.1));
    let map_x = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * (RIGHT - LEFT);
    let map_y = |y: f64| BOTTOM - (y - y_lo) / (y_hi - y_lo) * (BOTTOM - TOP);

    let mut svg = String::with_capacity(4096);
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<!-- fblab {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>",
        0.5 * (LEFT + RIGHT)
    );

    // Axes.
    let _ = writeln!(
        svg,
        "<line x1=\"{LEFT}\" y1=\"{BOTTOM}\" x2=\"{RIGHT}\" y2=\"{BOTTOM}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{BOTTOM}\" stroke=\"black\"/>"
    );

    // Ticks and labels.
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let x_val = x_lo + t * (x_hi - x_lo);
        let px = map_x(x_val);
        let _ = writeln!(
            svg,
            "<line x1=\"{px:.1}\" y1=\"{BOTTOM}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
            BOTTOM + 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x_val:.4}</text>",
            BOTTOM + 20.0
        );
        let y_val = y_lo + t * (y_hi - y_lo);
        let py = map_y(y_val);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{LEFT}\" y2=\"{py:.1}\" stroke=\"black\"/>",
            LEFT - 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{y_val:.4}</text>",
            LEFT - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x_label}</text>",
        0.5 * (LEFT + RIGHT),
        HEIGHT - 14.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{y_label}</text>",
        0.5 * (TOP + BOTTOM),
        0.5 * (TOP + BOTTOM)
    );

    // Data.
    if !points.is_empty() {
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", map_x(x), map_y(y)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"1.5\" points=\"{}\"/>",
            coords.join(" ")
        );
        for &(x, y) in points {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#1f6feb\"/>",
                map_x(x),
                map_y(y)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes a rendered chart (or any text artifact) to disk.
pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, "a,b", &["1,2".into(), "3,4".into()]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n1,2\n3,4\n");
    }

    #[test]
    fn json_keys_are_sorted() {
        #[derive(Serialize)]
        struct Report {
            zulu: f64,
            alpha: u32,
            mike: &'static str,
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        write_json(
            &path,
            &Report {
                zulu: 1.5,
                alpha: 2,
                mike: "x",
            },
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let alpha = text.find("\"alpha\"").unwrap();
        let mike = text.find("\"mike\"").unwrap();
        let zulu = text.find("\"zulu\"").unwrap();
        assert!(alpha < mike && mike < zulu, "keys not sorted: {text}");
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn chart_contains_polyline_markers_and_version() {
        let svg = line_chart("gap vs theta", "log10(theta)", "log10(gap)", &[
            (-1.0, -3.68),
            (-0.7, -3.08),
            (-0.4, -2.48),
        ]);
        assert!(svg.starts_with("<svg "));
        assert!(svg.contains(&format!("<!-- fblab {} -->", env!("CARGO_PKG_VERSION"))));
        assert!(svg.contains("<polyline"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("gap vs theta"));
        assert!(svg.contains("log10(theta)"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn degenerate_charts_render() {
        // Empty data and a single point must still give a valid document.
        let empty = line_chart("empty", "x", "y", &[]);
        assert!(empty.contains("</svg>"));
        assert!(!empty.contains("<polyline"));
        let single = line_chart("one", "x", "y", &[(0.3, 0.3)]);
        assert!(single.contains("<circle"));
    }
}
