//! Static SVG charts drawn from bench CSV rows.
//!
//! Both charts put `log10(1/tau_rel)` (roughly, digits of precision) on the
//! x axis and use a log-scaled y axis. Converged runs are filled circles;
//! anything else is drawn as a hollow cross so failures stand out.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::record::BenchRecord;

pub const ACCURACY_FILE: &str = "accuracy.svg";
pub const REGIONS_FILE: &str = "regions.svg";

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
/// Stand-in for an exact result on a log axis.
const LOG_FLOOR: f64 = -17.0;

struct Point {
    x: f64,
    y: f64,
    converged: bool,
}

struct Series {
    label: String,
    points: Vec<Point>,
}

fn digits(tau: f64) -> f64 {
    (1.0 / tau).log10()
}

fn log_or_floor(v: f64) -> f64 {
    if v > 0.0 && v.is_finite() {
        v.log10().max(LOG_FLOOR)
    } else if v.is_infinite() {
        1.0
    } else {
        LOG_FLOOR
    }
}

fn group(records: &[BenchRecord], y: impl Fn(&BenchRecord) -> f64) -> Vec<Series> {
    let mut series: Vec<Series> = vec![];
    for r in records {
        let label = format!("{}:{}", r.integrand_id, r.dim);
        let point = Point { x: digits(r.tau_rel), y: y(r), converged: r.converged() };
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push(point),
            None => series.push(Series { label, points: vec![point] }),
        }
    }
    series
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: &[f64], ys: &[f64]) -> Self {
        let lo = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min).floor() - 0.5;
        let hi = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil() + 0.5;
        Self { x0: lo(xs), x1: hi(xs), y0: lo(ys), y1: hi(ys) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn render(title: &str, y_label: &str, series: &[Series], frame: &Frame, tolerance_line: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, (LEFT + WIDTH - RIGHT) / 2.0, escape(title));

    let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(s, r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#333"/>"##, r - l, b - t);
    for k in (frame.x0.ceil() as i64)..=(frame.x1.floor() as i64) {
        let x = frame.px(k as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{t}" stroke="#ddd"/><text x="{x:.2}" y="{}" text-anchor="middle">{k}</text>"##,
            b + 16.0
        );
    }
    for k in (frame.y0.ceil() as i64)..=(frame.y1.floor() as i64) {
        let y = frame.py(k as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{l}" y1="{y:.2}" x2="{r}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{k}</text>"##,
            l - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">digits of precision, log10(1/tau_rel)</text>"#,
        (l + r) / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(s, r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">{}</text>"#, (t + b) / 2.0, escape(y_label));

    if tolerance_line {
        // true error = tau_rel, i.e. y = -x on these axes.
        let (xa, xb) = (frame.x0.max(-frame.y1), frame.x1.min(-frame.y0));
        if xa < xb {
            let _ = writeln!(
                s,
                r#"<line class="tolerance" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="2 4" stroke-width="1.5"/>"#,
                frame.px(xa),
                frame.py(-xa),
                frame.px(xb),
                frame.py(-xb)
            );
        }
    }

    for (i, series) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for p in &series.points {
            let (x, y) = (frame.px(p.x), frame.py(p.y));
            if p.converged {
                let _ = writeln!(s, r#"<circle class="converged" cx="{x:.2}" cy="{y:.2}" r="4" fill="{color}"/>"#);
            } else {
                let _ = writeln!(
                    s,
                    r#"<path class="nonconverged" d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="{color}" stroke-width="2" fill="none"/>"#,
                    x - 5.0,
                    y - 5.0,
                    x + 5.0,
                    y + 5.0,
                    x - 5.0,
                    y + 5.0,
                    x + 5.0,
                    y - 5.0
                );
            }
        }
        let ly = t + 14.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{ly}" r="4" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            r + 16.0,
            r + 26.0,
            ly + 4.0,
            escape(&series.label)
        );
    }
    let ly = t + 14.0 + 18.0 * series.len() as f64 + 8.0;
    let _ = writeln!(
        s,
        r##"<path d="M{} {}L{} {}M{} {}L{} {}" stroke="#333" stroke-width="2"/><text x="{}" y="{}">not converged</text>"##,
        r + 12.0,
        ly - 4.0,
        r + 20.0,
        ly + 4.0,
        r + 12.0,
        ly + 4.0,
        r + 20.0,
        ly - 4.0,
        r + 26.0,
        ly + 4.0
    );
    s.push_str("</svg>\n");
    s
}

/// True relative error against digits of precision, with the
/// `error = tau_rel` line; points under the line met the tolerance.
pub fn accuracy_svg(records: &[BenchRecord]) -> String {
    let series = group(records, |r| log_or_floor(r.true_rel_err));
    let xs: Vec<f64> = records.iter().map(|r| digits(r.tau_rel)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.y)).chain(xs.iter().map(|x| -x)).collect();
    render("True relative error vs requested precision", "true relative error", &series, &Frame::fit(&xs, &ys), true)
}

/// Regions generated against digits of precision.
pub fn regions_svg(records: &[BenchRecord]) -> String {
    let series = group(records, |r| log_or_floor(r.regions_generated as f64));
    let xs: Vec<f64> = records.iter().map(|r| digits(r.tau_rel)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.y)).collect();
    render("Regions generated vs requested precision", "regions generated", &series, &Frame::fit(&xs, &ys), false)
}

/// Writes both charts into `out_dir`, creating it if needed.
pub fn write_plots(records: &[BenchRecord], out_dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let files = [(ACCURACY_FILE, accuracy_svg(records)), (REGIONS_FILE, regions_svg(records))];
    files
        .into_iter()
        .map(|(name, body)| {
            let path = out_dir.join(name);
            fs::write(&path, body)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, tau: f64, err: f64, status: &str) -> BenchRecord {
        BenchRecord {
            integrand_id: id.into(),
            dim: 3,
            tau_rel: tau,
            estimate: 1.0,
            errorest: tau / 2.0,
            reference_value: 1.0,
            true_rel_err: err,
            claimed_rel_err: tau / 2.0,
            status: status.into(),
            iterations: 4,
            regions_generated: 5000,
            eval_count: 1 << 20,
            wall_ms: 1.0,
        }
    }

    #[test]
    fn markers_follow_status() {
        let rows = [rec("f3", 1e-3, 1e-5, "Converged"), rec("f3", 2e-4, 1e-3, "MemoryExhausted"), rec("f4", 1e-3, 0.0, "Converged")];
        for svg in [accuracy_svg(&rows), regions_svg(&rows)] {
            assert_eq!(svg.matches(r#"class="converged""#).count(), 2);
            assert_eq!(svg.matches(r#"class="nonconverged""#).count(), 1);
            assert!(svg.contains(">f3:3<") && svg.contains(">f4:3<"));
            assert!(!svg.contains("NaN") && !svg.contains("inf"));
        }
        assert!(accuracy_svg(&rows).contains(r#"class="tolerance""#));
        assert!(!regions_svg(&rows).contains(r#"class="tolerance""#));
    }

    #[test]
    fn single_row_writes_two_files() {
        let dir = std::env::temp_dir().join(format!("pagani-plot-{}", std::process::id()));
        let files = write_plots(&[rec("f5", 1e-3, 1e-6, "Converged")], &dir).unwrap();
        assert_eq!(files.len(), 2);
        for f in &files {
            assert!(fs::read_to_string(f).unwrap().starts_with("<svg"));
        }
        fs::remove_dir_all(dir).unwrap();
    }
}
