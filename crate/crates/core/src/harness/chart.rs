//! Minimal SVG line charts of result tables.
//!
//! Rows sharing a series key and an x value are pooled. When the y column is
//! `ber` and the table carries `bit_errors` / `bits`, pooling sums the
//! counts; a pooled count with no errors is drawn at 3/bits with a hollow
//! marker. Other y columns are averaged. A BER axis is logarithmic.

use std::fmt::Write as _;
use std::path::Path;

use super::config::ChartSpec;
use super::table::Table;
use super::{HarnessError, HarnessResult};
use crate::analytics::rule_of_three;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
struct Point {
    x: f64,
    y: f64,
    /// Drawn at its upper bound because no errors were seen.
    bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
struct Series {
    label: String,
    points: Vec<Point>,
}

fn lookup(t: &Table, name: &str) -> HarnessResult<usize> {
    t.column(name)
        .ok_or_else(|| HarnessError::config(name, format!("no such column (have: {})", t.columns.join(", "))))
}

fn parse_cell(v: &str) -> Option<f64> {
    v.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

fn collect_series(t: &Table, x: &str, y: &str, series: &str) -> HarnessResult<Vec<Series>> {
    let xi = lookup(t, x)?;
    let yi = lookup(t, y)?;
    let si = series
        .split('+')
        .map(|s| lookup(t, s.trim()))
        .collect::<HarnessResult<Vec<_>>>()?;
    let counts = if y == "ber" {
        t.column("bit_errors").zip(t.column("bits"))
    } else {
        None
    };

    // label -> x -> (sum_y, n, errors, bits)
    let mut groups: Vec<(String, Vec<(f64, f64, usize, u64, u64)>)> = Vec::new();
    for row in &t.rows {
        let Some(xv) = parse_cell(&row[xi]) else { continue };
        let label = si.iter().map(|&i| row[i].as_str()).collect::<Vec<_>>().join(" / ");
        let gi = match groups.iter().position(|(l, _)| *l == label) {
            Some(i) => i,
            None => {
                groups.push((label, Vec::new()));
                groups.len() - 1
            }
        };
        let pts = &mut groups[gi].1;
        let slot = match pts.iter().position(|p| p.0 == xv) {
            Some(i) => i,
            None => {
                pts.push((xv, 0.0, 0, 0, 0));
                pts.len() - 1
            }
        };
        let p = &mut pts[slot];
        if let Some((ei, bi)) = counts {
            let (Ok(e), Ok(b)) = (row[ei].trim().parse::<u64>(), row[bi].trim().parse::<u64>()) else {
                continue;
            };
            p.3 += e;
            p.4 += b;
            p.2 += 1;
        } else if let Some(yv) = parse_cell(&row[yi]) {
            p.1 += yv;
            p.2 += 1;
        }
    }

    Ok(groups
        .into_iter()
        .map(|(label, pts)| {
            let mut points: Vec<Point> = pts
                .into_iter()
                .filter(|p| p.2 > 0)
                .filter_map(|(x, sum, n, e, b)| {
                    if counts.is_some() {
                        if b == 0 {
                            None
                        } else if e == 0 {
                            Some(Point { x, y: rule_of_three(b), bound: true })
                        } else {
                            Some(Point { x, y: e as f64 / b as f64, bound: false })
                        }
                    } else {
                        Some(Point { x, y: sum / n as f64, bound: false })
                    }
                })
                .collect();
            points.sort_by(|a, b| a.x.total_cmp(&b.x));
            Series { label, points }
        })
        .collect())
}

fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut v = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while v <= hi + 1e-9 * span {
        out.push(if v.abs() < 1e-12 * span { 0.0 } else { v });
        v += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-2) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders `y` against `x` with one line per distinct value of `series`
/// (several columns can be combined with `+`).
pub fn render_chart(t: &Table, x: &str, y: &str, series: &str, title: &str) -> HarnessResult<String> {
    let data = collect_series(t, x, y, series)?;
    let log_y = y == "ber";
    let all: Vec<&Point> = data.iter().flat_map(|s| &s.points).collect();

    let (mut x0, mut x1) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        (x0, x1) = (x0 - 0.5, x1 + 0.5);
    }
    let ys = all.iter().map(|p| p.y).filter(|&v| !log_y || v > 0.0);
    let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if log_y {
        if !y0.is_finite() {
            (y0, y1) = (1e-6, 1.0);
        }
        y0 = 10f64.powf(y0.log10().floor());
        y1 = 10f64.powf(y1.log10().ceil());
        if y1 <= y0 {
            y1 = y0 * 10.0;
        }
    } else {
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        if y1 - y0 < 1e-12 {
            (y0, y1) = (y0 - 0.5, y1 + 0.5);
        }
    }

    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| {
        let f = if log_y {
            (v.log10() - y0.log10()) / (y1.log10() - y0.log10())
        } else {
            (v - y0) / (y1 - y0)
        };
        TOP + (1.0 - f) * ph
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );

    // Grid and ticks.
    for v in linear_ticks(x0, x1) {
        let px = sx(v);
        let _ = writeln!(s, r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/>"##, TOP + ph);
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            fmt_tick(v)
        );
    }
    let yticks: Vec<f64> = if log_y {
        let (a, b) = (y0.log10().round() as i32, y1.log10().round() as i32);
        (a..=b).map(|e| 10f64.powi(e)).collect()
    } else {
        linear_ticks(y0, y1)
    };
    for v in yticks {
        let py = sy(v);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/>"##, LEFT + pw);
        let label = if log_y { format!("1e{}", v.log10().round() as i32) } else { fmt_tick(v) };
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 6.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 16.0,
        escape(x)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y)
    );

    for (i, ser) in data.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<&Point> = ser.points.iter().filter(|p| !log_y || p.y > 0.0).collect();
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        for p in &pts {
            let fill = if p.bound { "white" } else { color };
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{fill}" stroke="{color}"/>"#,
                sx(p.x),
                sy(p.y)
            );
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    if all.iter().any(|p| p.bound) {
        let ly = TOP + 10.0 + 18.0 * data.len() as f64;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{ly}" r="3.5" fill="white" stroke="black"/>"#,
            lx + 10.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">no errors (3/bits)</text>"#, lx + 26.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_chart(path: impl AsRef<Path>, t: &Table, spec: &ChartSpec, title: &str) -> HarnessResult<()> {
    let svg = render_chart(t, &spec.x, &spec.y, &spec.series, title)?;
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    std::fs::write(path, svg).map_err(|e| HarnessError::io(path, e))
}
