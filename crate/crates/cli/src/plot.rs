//! SVG plots of reports: the upper hemisphere of `P^2` projected onto the
//! unit disk, or the upper half of `P^1` on the circle.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use selgrade_core::grid::CellGrid;
use selgrade_core::linalg::{Matrix, Vector};
use selgrade_core::morse::{Classification, MorseComponent};
use selgrade_core::system::{AffineControlSystem, BilinearSystem};

use crate::error::{CliError, CliResult};
use crate::report::AnalysisReport;

const SIZE: f64 = 520.0;
const RADIUS: f64 = 220.0;
const ARROW_GRID: usize = 13;
const ARROW_LENGTH: f64 = 11.0;

const PALETTE: [&str; 6] = [
    "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#e377c2",
];

fn class_color(c: Classification) -> &'static str {
    match c {
        Classification::Central => "#d62728",
        Classification::AtInfinity => "#1f77b4",
        Classification::Unclassified => "#7f7f7f",
    }
}

fn class_name(c: Classification) -> &'static str {
    match c {
        Classification::Central => "central",
        Classification::AtInfinity => "at-infinity",
        Classification::Unclassified => "unclassified",
    }
}

struct Layer<'a> {
    run: &'static str,
    ambient: usize,
    resolution: usize,
    components: &'a [MorseComponent],
    /// Color by component index instead of classification.
    palette: bool,
}

fn to_svg(x: f64, y: f64) -> (f64, f64) {
    (SIZE / 2.0 + RADIUS * x, SIZE / 2.0 - RADIUS * y)
}

/// Disk positions of a cell center: its first two coordinates, plus the
/// antipode when the cell straddles the equator.
fn positions(v: &[f64], half: f64) -> Vec<(f64, f64)> {
    let last = v[v.len() - 1];
    let mut out = vec![(v[0], v[1])];
    if last.abs() <= half {
        out.push((-v[0], -v[1]));
    }
    out
}

/// Writes the SVG to `path` and the cell dump next to it with extension
/// `csv`; returns the dump's path.
pub fn emit_plot(report: &AnalysisReport, path: &Path, arrows: bool) -> CliResult<PathBuf> {
    let dec = &report.decomposition;
    let d = report.scenario.system.matrices.first().map_or(0, Vec::len);
    let mut layers = Vec::new();
    if let Some(run) = &dec.lifted {
        layers.push(Layer {
            run: "lifted",
            ambient: run.summary.ambient_dim,
            resolution: run.summary.resolution,
            components: &run.components,
            palette: false,
        });
    }
    if let Some(summary) = &dec.homogeneous {
        layers.push(Layer {
            run: "homogeneous",
            ambient: summary.ambient_dim,
            resolution: summary.resolution,
            components: &dec.at_infinity_components,
            palette: true,
        });
    }
    // the disk or circle is the space of the first layer; without runs it
    // is the lifted space
    let ambient = layers.first().map_or(d + 1, |l| l.ambient);
    if ambient != 2 && ambient != 3 {
        return Err(CliError::Config(format!(
            "plots need a projective line or plane, not P^{} (state dimension {d})",
            ambient.saturating_sub(1)
        )));
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<circle cx="{c}" cy="{c}" r="{RADIUS}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        c = SIZE / 2.0
    );
    let mut rows: Vec<Vec<String>> = Vec::new();

    for layer in &layers {
        let grid = CellGrid::new(layer.ambient, layer.resolution)?;
        let half = grid.half_diameter();
        let on_rim = layer.ambient + 1 == ambient;
        let r = (RADIUS * half).clamp(1.0, 8.0);
        for (k, comp) in layer.components.iter().enumerate() {
            let color = if layer.palette {
                PALETTE[k % PALETTE.len()]
            } else {
                class_color(comp.classification)
            };
            let _ = writeln!(
                svg,
                r#"<g fill="{color}" fill-opacity="0.75" data-run="{}" data-component="{k}">"#,
                layer.run
            );
            for &cell in &comp.cells {
                let v = grid.center(cell);
                let mut row = vec![
                    layer.run.to_string(),
                    k.to_string(),
                    comp.index_in_order.to_string(),
                    class_name(comp.classification).to_string(),
                    cell.0.to_string(),
                ];
                row.extend(v.iter().map(|x| format!("{x}")));
                rows.push(row);
                let points = if on_rim {
                    // a direction of the equator: both ends of its diameter
                    let (x, y) = if ambient == 3 {
                        (v[0], v[1])
                    } else {
                        (v[0], 0.0)
                    };
                    vec![(x, y), (-x, -y)]
                } else {
                    positions(v, half)
                };
                for (x, y) in points {
                    let (sx, sy) = to_svg(x, y);
                    let _ = writeln!(svg, r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="{r:.2}"/>"#);
                }
            }
            let _ = writeln!(svg, "</g>");
        }
    }

    if arrows {
        let sys = report.scenario.system()?;
        draw_arrows(&mut svg, &sys, ambient)?;
    }
    let _ = writeln!(
        svg,
        r#"<text x="10" y="{}" font-family="sans-serif" font-size="13">{}</text>"#,
        SIZE - 10.0,
        escape(&report.scenario.name)
    );
    let _ = writeln!(svg, "</svg>");

    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, svg).map_err(|e| CliError::io(path, e))?;

    let csv_path = path.with_extension("csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
    let mut header: Vec<String> = ["run", "component", "order", "classification", "cell"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..ambient).map(|i| format!("x{i}")));
    w.write_record(&header)
        .map_err(|e| CliError::io(&csv_path, e))?;
    for row in rows {
        // the equator run has one coordinate less
        let mut row = row;
        row.resize(header.len(), String::new());
        w.write_record(&row)
            .map_err(|e| CliError::io(&csv_path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&csv_path, e))?;
    Ok(csv_path)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Vertices of the control range, or the zero control when there is none.
fn extreme_controls(sys: &AffineControlSystem<f64>) -> Vec<Vec<f64>> {
    let omega = sys.omega();
    let mut out = vec![Vec::new()];
    for i in 0..omega.dim() {
        let mut vals = vec![omega.lower()[i], omega.upper()[i]];
        vals.dedup();
        out = out
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Projected vector field `Mv - <v, Mv> v` on the sphere.
fn tangent(m: &Matrix<f64>, v: &[f64]) -> Vec<f64> {
    let v = Vector::from_slice(v).expect("nonempty");
    let w = m.mul_vec(&v);
    let along = w.dot(&v);
    (0..v.len()).map(|i| w[i] - along * v[i]).collect()
}

fn draw_arrows(svg: &mut String, sys: &AffineControlSystem<f64>, ambient: usize) -> CliResult<()> {
    let generators: Vec<Matrix<f64>> = if ambient == sys.state_dim() + 1 {
        let lift = sys.lift();
        extreme_controls(sys)
            .iter()
            .map(|u| lift.generator(u))
            .collect()
    } else {
        let lin = sys.linear_part();
        extreme_controls(sys)
            .iter()
            .map(|u| lin.generator(u))
            .collect()
    };
    let mut points: Vec<Vec<f64>> = Vec::new();
    if ambient == 3 {
        for i in 0..ARROW_GRID {
            for j in 0..ARROW_GRID {
                let x = -1.0 + 2.0 * (i as f64 + 0.5) / ARROW_GRID as f64;
                let y = -1.0 + 2.0 * (j as f64 + 0.5) / ARROW_GRID as f64;
                let z2 = 1.0 - x * x - y * y;
                if z2 > 0.02 {
                    points.push(vec![x, y, z2.sqrt()]);
                }
            }
        }
    } else {
        for k in 0..4 * ARROW_GRID {
            let t = std::f64::consts::PI * (k as f64 + 0.5) / (4 * ARROW_GRID) as f64;
            points.push(vec![t.cos(), t.sin()]);
        }
    }
    for (g, m) in generators.iter().enumerate() {
        let color = PALETTE[(g + 2) % PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"<g stroke="{color}" stroke-width="1" fill="none" data-control="{g}">"#
        );
        for p in &points {
            let f = tangent(m, p);
            let len = (f[0] * f[0] + f[1] * f[1]).sqrt();
            if len < 1e-9 {
                continue;
            }
            let (x0, y0) = to_svg(p[0], p[1]);
            let (dx, dy) = (ARROW_LENGTH * f[0] / len, -ARROW_LENGTH * f[1] / len);
            let (x1, y1) = (x0 + dx, y0 + dy);
            // head: two short strokes back from the tip
            let (hx, hy) = (-dx * 0.35, -dy * 0.35);
            let _ = writeln!(
                svg,
                r#"<path d="M{x0:.1},{y0:.1} L{x1:.1},{y1:.1} M{:.1},{:.1} L{x1:.1},{y1:.1} L{:.1},{:.1}"/>"#,
                x1 + hx - hy * 0.6,
                y1 + hy + hx * 0.6,
                x1 + hx + hy * 0.6,
                y1 + hy - hx * 0.6
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    Ok(())
}
