//! Result persistence: CSV table, JSON document, SVG log-log plot.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::SlowField;
use crate::harness::sweep::{FitStatus, SweepResult};

/// Decimal text with 17 significant digits, which round-trips every `f64`.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::IoFailure(format!("{}: {e}", path.display()))
}

/// RFC-4180 table: `eps`, every column, then the `;`-joined error columns below the fit floor.
/// Timings are left out so identical configurations give identical bytes.
pub fn csv_string(result: &SweepResult) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let mut header = vec!["eps".to_string()];
    header.extend(result.columns.iter().map(|c| c.name.clone()));
    header.push("below_floor".into());
    w.write_record(&header).map_err(|e| Error::IoFailure(e.to_string()))?;
    for row in &result.rows {
        let mut record = vec![format_value(row.eps)];
        record.extend(row.values.iter().map(|&v| format_value(v)));
        record.push(result.below_floor(row).join(";"));
        w.write_record(&record).map_err(|e| Error::IoFailure(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::IoFailure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::IoFailure(e.to_string()))
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(result)?).map_err(|e| io(path, e))
}

pub fn write_json(result: &SweepResult, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(result).map_err(|e| io(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| io(path, e))
}

pub fn read_json(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).map_err(|e| io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// Decade-aligned `[lo, hi]` in log10 covering `values`.
fn decades(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite() && *v > 0.0)
        .map(f64::log10)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (-1.0, 0.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil());
    if lo == hi {
        (lo, lo + 1.0)
    } else {
        (lo, hi)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Log-log plot of every error column against ε: one `<polyline>` per column
/// and a dashed `<line>` for each fitted rate.
pub fn render_svg(result: &SweepResult) -> String {
    let errors: Vec<usize> = (0..result.columns.len()).filter(|&i| result.columns[i].error).collect();
    let (x0, x1) = decades(result.rows.iter().map(|r| r.eps));
    let (y0, y1) = decades(
        result
            .rows
            .iter()
            .flat_map(|r| errors.iter().map(move |&i| r.values[i])),
    );
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |e: f64| LEFT + (e.log10() - x0) / (x1 - x0) * pw;
    let sy = |v: f64| TOP + (y1 - v.log10()) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for d in x0 as i32..=x1 as i32 {
        let x = sx(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line class="grid" x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"##,
            TOP + ph,
            TOP + ph + 18.0
        );
    }
    for d in y0 as i32..=y1 as i32 {
        let y = sy(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line class="grid" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">eps</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">error</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (slot, &i) in errors.iter().enumerate() {
        let column = &result.columns[i];
        let color = PALETTE[slot % PALETTE.len()];
        let points: Vec<String> = result
            .rows
            .iter()
            .filter(|r| r.values[i] > 0.0 && r.values[i].is_finite())
            .map(|r| format!("{:.2},{:.2}", sx(r.eps), sy(r.values[i])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-column="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            escape(&column.name),
            points.join(" ")
        );
        let mut label = escape(&column.name);
        if let Some(FitStatus::Fitted(fit)) = result.fit(&column.name).map(|f| &f.status) {
            let eps: Vec<f64> = result.rows.iter().map(|r| r.eps).collect();
            let (lo, hi) = eps
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
            let line = |e: f64| (fit.intercept + fit.slope * e.ln()).exp();
            let _ = writeln!(
                s,
                r#"<line class="fit" data-column="{}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="5,4"/>"#,
                escape(&column.name),
                sx(lo),
                sy(line(lo)),
                sx(hi),
                sy(line(hi))
            );
            let _ = write!(label, " (slope {:.2})", fit.slope);
        }
        let ly = TOP + 14.0 + 16.0 * slot as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}" fill="{color}">{label}</text>"#,
            LEFT + pw + 10.0
        );
    }
    if result.exact_case {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">exact case: no rates fitted</text>"#,
            LEFT + 10.0,
            TOP + 16.0
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(result)).map_err(|e| io(path, e))
}

/// Writes `<stem>.csv`, `<stem>.json` and, if requested, `<stem>.svg` under `dir`.
pub fn emit(result: &SweepResult, dir: &Path, stem: &str, svg: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();
    let csv = dir.join(format!("{stem}.csv"));
    write_csv(result, &csv)?;
    written.push(csv);
    let json = dir.join(format!("{stem}.json"));
    write_json(result, &json)?;
    written.push(json);
    if svg {
        let path = dir.join(format!("{stem}.svg"));
        write_svg(result, &path)?;
        written.push(path);
    }
    Ok(written)
}

/// `x,re,im` table of a field, one row per node.
pub fn field_csv_string(field: &SlowField) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(["x", "re", "im"])
        .map_err(|e| Error::IoFailure(e.to_string()))?;
    for (x, v) in field.grid().nodes().zip(field.values()) {
        w.write_record([format_value(x), format_value(v.re), format_value(v.im)])
            .map_err(|e| Error::IoFailure(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::IoFailure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::IoFailure(e.to_string()))
}
