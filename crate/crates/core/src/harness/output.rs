use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::PolyCurve;
use crate::shape::SweepRecord;

pub const SWEEP_HEADER: [&str; 6] = ["p", "value", "r", "efit_log10", "eccentricity", "converged"];

const SIZE: f64 = 800.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// 17 significant digits, enough to round-trip any `f64`.
fn exact(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|e| Error::io(path, e))
}

/// Writes the sweep table with a header row to any writer.
pub fn write_sweep<W: std::io::Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(SWEEP_HEADER)?;
    for r in records {
        writer.write_record([
            exact(r.p),
            exact(r.value),
            exact(r.r),
            exact(r.efit_log10),
            exact(r.eccentricity),
            r.converged.to_string(),
        ])?;
    }
    writer.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn write_sweep_csv(records: &[SweepRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_sweep(records, create(path)?).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    if reader.headers()?.iter().ne(SWEEP_HEADER) {
        return Err(Error::Precondition(format!(
            "{}: header is not {}",
            path.display(),
            SWEEP_HEADER.join(",")
        )));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn open_svg() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Draws planar curves as closed paths in one 800×800 document, scaled
/// together so that their common bounding box fills the frame. Each curve
/// gets a colored label in the legend.
pub fn emit_svg(curves: &[PolyCurve], labels: &[String], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if labels.len() != curves.len() {
        return Err(Error::Precondition(format!(
            "{} curves but {} labels",
            curves.len(),
            labels.len()
        )));
    }
    if curves.iter().any(|c| c.dim() != 2) {
        return Err(Error::Precondition("only planar curves can be drawn".into()));
    }
    let mut svg = open_svg();
    if curves.is_empty() {
        log::warn!("{}: no curves to draw, writing an empty document", path.display());
        svg.push_str("</svg>\n");
        return write_file(path, &svg);
    }

    let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in curves.iter().flat_map(|c| c.vertices()) {
        lo_x = lo_x.min(v.x);
        hi_x = hi_x.max(v.x);
        lo_y = lo_y.min(v.y);
        hi_y = hi_y.max(v.y);
    }
    let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-12);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let (cx, cy) = (0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y));
    let map = |x: f64, y: f64| (0.5 * SIZE + scale * (x - cx), 0.5 * SIZE - scale * (y - cy));

    for (i, (curve, label)) in curves.iter().zip(labels).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, v) in curve.vertices().iter().enumerate() {
            let (x, y) = map(v.x, v.y);
            let _ = write!(d, "{}{x:.3} {y:.3} ", if j == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(svg, "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>");
        let _ = writeln!(
            svg,
            "<text x=\"12\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"14\" fill=\"{color}\">{}</text>",
            22.0 + 18.0 * i as f64,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    write_file(path, &svg)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

/// Line plot of `(x, y)` points with axes, ticks and labels. Non-finite
/// points are skipped.
pub fn emit_plot(points: &[(f64, f64)], title: &str, x_label: &str, y_label: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let finite: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let mut svg = open_svg();
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">{}</text>",
        SIZE / 2.0,
        escape(title)
    );
    if finite.is_empty() {
        log::warn!("{}: no finite points to plot", path.display());
        svg.push_str("</svg>\n");
        return write_file(path, &svg);
    }
    let fold = |f: fn(&(f64, f64)) -> f64| {
        finite.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (mut x0, mut x1) = fold(|p| p.0);
    let (mut y0, mut y1) = fold(|p| p.1);
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let (left, right, top, bottom) = (80.0, SIZE - 30.0, 50.0, SIZE - 70.0);
    let map = |x: f64, y: f64| {
        (
            left + (x - x0) / (x1 - x0) * (right - left),
            bottom - (y - y0) / (y1 - y0) * (bottom - top),
        )
    };

    let _ = writeln!(
        svg,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        right - left,
        bottom - top
    );
    for t in ticks(x0, x1) {
        let (x, _) = map(t, y0);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{bottom}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>\
             <text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            bottom + 6.0,
            bottom + 22.0,
            format_tick(t)
        );
    }
    for t in ticks(y0, y1) {
        let (_, y) = map(x0, t);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{left}\" y2=\"{y:.2}\" stroke=\"black\"/>\
             <text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            left - 6.0,
            left - 10.0,
            y + 4.0,
            format_tick(t)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        0.5 * (left + right),
        SIZE - 25.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"20\" y=\"{0}\" transform=\"rotate(-90 20 {0})\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{1}</text>",
        0.5 * (top + bottom),
        escape(y_label)
    );

    let mut d = String::new();
    for (i, (x, y)) in finite.iter().enumerate() {
        let (px, py) = map(*x, *y);
        let _ = write!(d, "{}{px:.2} {py:.2} ", if i == 0 { "M" } else { "L" });
    }
    let _ = writeln!(svg, "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>", d.trim_end(), PALETTE[0]);
    for (x, y) in &finite {
        let (px, py) = map(*x, *y);
        let _ = writeln!(svg, "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"2.5\" fill=\"{}\"/>", PALETTE[0]);
    }
    svg.push_str("</svg>\n");
    write_file(path, &svg)
}

fn format_tick(t: f64) -> String {
    let s = format!("{t:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}
