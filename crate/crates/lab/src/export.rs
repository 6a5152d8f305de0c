//! CSV and SVG output for phase grids.
//!
//! The heatmap maps MR linearly onto an 8-stop viridis ramp over `[0, 0.5]`; values
//! above 0.5 take the top color and cells without an estimate are grey. Boundary curves
//! whose plane matches the grid axes are drawn on top.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{LabError, Result};
use crate::phase::{CellResult, PhaseResult};

pub const CSV_HEADER: &str = "axis1,axis2,classifier,p,mr,se,reps_ok,reps_failed,region";

const VIRIDIS: [(u8, u8, u8); 8] = [
    (0x44, 0x01, 0x54),
    (0x46, 0x32, 0x7e),
    (0x36, 0x5c, 0x8d),
    (0x27, 0x7f, 0x8e),
    (0x1f, 0xa1, 0x87),
    (0x4a, 0xc1, 0x6d),
    (0xa0, 0xda, 0x39),
    (0xfd, 0xe7, 0x25),
];

/// MR at the top of the color ramp.
pub const MR_CEILING: f64 = 0.5;

/// Hex color for an MR value.
pub fn ramp(mr: f64) -> String {
    let u = (mr / MR_CEILING).clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let k = (u.floor() as usize).min(VIRIDIS.len() - 2);
    let f = u - k as f64;
    let (a, b) = (VIRIDIS[k], VIRIDIS[k + 1]);
    let mix = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * f).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub fn csv_string(result: &PhaseResult) -> String {
    let mut s = String::with_capacity(64 * (result.cells.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for c in &result.cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            c.axis1,
            c.axis2,
            c.classifier,
            c.p,
            opt(c.mr),
            opt(c.se),
            c.reps_ok,
            c.reps_failed,
            c.region
        );
    }
    s
}

const PANEL: f64 = 300.0;
const MARGIN: f64 = 50.0;
const GAP: f64 = 30.0;
const TITLE: f64 = 24.0;

pub fn svg_string(result: &PhaseResult) -> String {
    let (a1, a2) = (result.axis1, result.axis2);
    let cols = result.p_list.len();
    let rows = result.classifiers.len();
    let w = MARGIN + cols as f64 * (PANEL + GAP + MARGIN) + 80.0;
    let h = rows as f64 * (PANEL + TITLE + GAP + MARGIN) + MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let cw = PANEL / a1.steps as f64;
    let ch = PANEL / a2.steps as f64;
    for (ri, variant) in result.classifiers.iter().enumerate() {
        for (ci, &p) in result.p_list.iter().enumerate() {
            let x0 = MARGIN + ci as f64 * (PANEL + GAP + MARGIN);
            let y0 = MARGIN + ri as f64 * (PANEL + TITLE + GAP + MARGIN) + TITLE;
            let id = format!("clip{ri}_{ci}");
            let _ = writeln!(s, r#"<g>"#);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="13">{variant}, p = {p}</text>"#,
                x0,
                y0 - 8.0
            );
            let _ = writeln!(
                s,
                r#"<clipPath id="{id}"><rect x="{x0:.2}" y="{y0:.2}" width="{PANEL:.2}" height="{PANEL:.2}"/></clipPath>"#
            );
            let panel: Vec<&CellResult> = result
                .cells
                .iter()
                .filter(|c| c.classifier == *variant && c.p == p)
                .collect();
            for c in panel {
                let fill = c.mr.map_or_else(|| "#bdbdbd".to_string(), ramp);
                let x = x0 + c.i as f64 * cw;
                let y = y0 + (a2.steps - 1 - c.j) as f64 * ch;
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="{fill}"><title>{}={}, {}={}: mr={}</title></rect>"#,
                    a1.name,
                    c.axis1,
                    a2.name,
                    c.axis2,
                    opt(c.mr)
                );
            }
            // Cell centers sit at the axis values.
            let px = |v: f64| x0 + cw / 2.0 + (v - a1.min) / (a1.max - a1.min) * (PANEL - cw);
            let py =
                |v: f64| y0 + PANEL - ch / 2.0 - (v - a2.min) / (a2.max - a2.min) * (PANEL - ch);
            for curve in &result.boundaries {
                let pts: Vec<(f64, f64)> = if curve.x == a1.name && curve.y == a2.name {
                    curve.points.clone()
                } else if curve.x == a2.name && curve.y == a1.name {
                    curve.points.iter().map(|&(x, y)| (y, x)).collect()
                } else {
                    continue;
                };
                if pts.len() < 2 {
                    continue;
                }
                let mut line = String::new();
                for (x, y) in pts {
                    let _ = write!(line, "{:.2},{:.2} ", px(x), py(y));
                }
                let _ = writeln!(
                    s,
                    r#"<polyline clip-path="url(#{id})" fill="none" stroke="white" stroke-width="2" stroke-dasharray="6 3" points="{}"><title>{}</title></polyline>"#,
                    line.trim_end(),
                    curve.name.name()
                );
            }
            let _ = writeln!(
                s,
                r#"<rect x="{x0:.2}" y="{y0:.2}" width="{PANEL:.2}" height="{PANEL:.2}" fill="none" stroke="black"/>"#
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                x0 + PANEL / 2.0,
                y0 + PANEL + 30.0,
                a1.name
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
                x0 - 30.0,
                y0 + PANEL / 2.0,
                x0 - 30.0,
                y0 + PANEL / 2.0,
                a2.name
            );
            for (v, anchor) in [(a1.min, "start"), (a1.max, "end")] {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{v}</text>"#,
                    if anchor == "start" { x0 } else { x0 + PANEL },
                    y0 + PANEL + 14.0
                );
            }
            for (v, y) in [(a2.min, y0 + PANEL), (a2.max, y0 + 10.0)] {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{y:.2}" text-anchor="end">{v}</text>"#,
                    x0 - 4.0
                );
            }
            let _ = writeln!(s, "</g>");
        }
    }
    // Legend.
    let lx = w - 60.0;
    let steps = 50;
    for k in 0..steps {
        let v = MR_CEILING * (steps - 1 - k) as f64 / (steps - 1) as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="16" height="4.2" fill="{}"/>"#,
            MARGIN + TITLE + k as f64 * 4.0,
            ramp(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}">MR {MR_CEILING}+</text>"#,
        lx - 4.0,
        MARGIN + TITLE - 4.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}">0</text>"#,
        lx + 20.0,
        MARGIN + TITLE + 200.0
    );
    s.push_str("</svg>\n");
    s
}

/// Write both files. Nothing is written for an empty result, and the CSV is removed
/// again if the SVG cannot be written.
pub fn export_results(result: &PhaseResult, path_csv: &Path, path_svg: &Path) -> Result<()> {
    if result.cells.is_empty() {
        return Err(LabError::data("phase result has no cells"));
    }
    let csv = csv_string(result);
    let svg = svg_string(result);
    std::fs::write(path_csv, csv).map_err(|e| LabError::io(path_csv, e))?;
    if let Err(e) = std::fs::write(path_svg, svg) {
        let _ = std::fs::remove_file(path_csv);
        return Err(LabError::io(path_svg, e));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#440154");
        assert_eq!(ramp(0.5), "#fde725");
        assert_eq!(ramp(0.9), "#fde725");
        assert_eq!(ramp(-1.0), "#440154");
        assert_eq!(ramp(0.5 / 7.0), "#46327e");
    }
}
