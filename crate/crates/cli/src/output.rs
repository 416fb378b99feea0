//! CSV and standalone SVG emitters.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;

/// Line appended to an artifact whose producer failed part-way.
pub const FAILED_MARKER: &str = "# FAILED";

/// Comma-separated values, one header line, every number at 17 significant
/// digits, LF line endings.
pub struct CsvWriter<W: Write> {
    out: W,
    width: usize,
}

pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

impl<W: Write> CsvWriter<W> {
    pub fn new<S: AsRef<str>>(mut out: W, header: &[S]) -> std::io::Result<Self> {
        let line: Vec<&str> = header.iter().map(|s| s.as_ref()).collect();
        writeln!(out, "{}", line.join(","))?;
        Ok(Self { out, width: header.len() })
    }

    pub fn row(&mut self, values: &[f64]) -> std::io::Result<()> {
        debug_assert_eq!(values.len(), self.width);
        let line: Vec<String> = values.iter().map(|&x| format_value(x)).collect();
        writeln!(self.out, "{}", line.join(","))
    }

    /// Marks the artifact as incomplete and flushes it.
    pub fn fail(mut self, reason: &str) -> std::io::Result<()> {
        writeln!(self.out, "{FAILED_MARKER}: {}", reason.replace('\n', " "))?;
        self.out.flush()
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

pub fn create_file(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `dir/name`, or `dir/<stem>_suffix.svg` for plots derived from a data file.
pub fn sibling_plot(dir: &Path, data_name: &str, suffix: &str) -> PathBuf {
    let stem = Path::new(data_name).file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    dir.join(format!("{stem}_{suffix}.svg"))
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    /// Reference lines are dashed and carry their slope as an attribute.
    pub reference_slope: Option<f64>,
    pub markers: bool,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: [f64; 4] = [60.0, 20.0, 40.0, 70.0]; // top, right, bottom, left

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    fn transform(&self, (x, y): (f64, f64)) -> Option<(f64, f64)> {
        let x = if self.log_x { x.log10() } else { x };
        let y = if self.log_y { y.log10() } else { y };
        (x.is_finite() && y.is_finite()).then_some((x, y))
    }

    pub fn to_svg(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().filter_map(|&p| self.transform(p)))
            .collect();
        let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
        );
        if pts.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-300 {
            (x0, x1) = (x0 - 0.5, x1 + 0.5);
        }
        if y1 - y0 < 1e-300 {
            (y0, y1) = (y0 - 0.5, y1 + 0.5);
        }
        let [top, right, bottom, left] = MARGIN;
        let pw = WIDTH - left - right;
        let ph = HEIGHT - top - bottom;
        let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect class="frame" x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let label = |v: f64, log: bool| if log { format!("1e{v:.2}") } else { format!("{v:.3e}") };
            let _ = writeln!(
                s,
                r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                sx(xv),
                top + ph + 16.0,
                label(xv, self.log_x)
            );
            let _ = writeln!(
                s,
                r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                left - 4.0,
                sy(yv) + 4.0,
                label(yv, self.log_y)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            left + pw / 2.0,
            HEIGHT - 8.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            top + ph / 2.0,
            top + ph / 2.0,
            escape(&self.y_label)
        );

        for (i, series) in self.series.iter().enumerate() {
            let mapped: Vec<(f64, f64)> = series
                .points
                .iter()
                .filter_map(|&p| self.transform(p))
                .map(|(x, y)| (sx(x), sy(y)))
                .collect();
            if mapped.is_empty() {
                continue;
            }
            let d: Vec<String> = mapped
                .iter()
                .enumerate()
                .map(|(k, (x, y))| format!("{}{x:.2},{y:.2}", if k == 0 { 'M' } else { 'L' }))
                .collect();
            let (class, extra) = match series.reference_slope {
                Some(slope) => ("reference", format!(r#" stroke-dasharray="6,4" data-slope="{slope}""#)),
                None => ("data", String::new()),
            };
            let _ = writeln!(
                s,
                r#"<path class="{class}" d="{}" fill="none" stroke="{}" stroke-width="1.5"{extra}/>"#,
                d.join(" "),
                series.color
            );
            if series.markers {
                for (x, y) in &mapped {
                    let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{}"/>"#, series.color);
                }
            }
            let ly = top + 14.0 + 16.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<text class="legend" x="{:.2}" y="{ly:.2}" fill="{}">{}</text>"#,
                left + 10.0,
                series.color,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
