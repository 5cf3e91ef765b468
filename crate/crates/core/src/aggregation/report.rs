use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::ReportRow;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    /// Parses a comma-separated list such as `csv,json,svg`.
    pub fn parse_list(s: &str) -> Result<Vec<Format>> {
        let mut out: Vec<Format> = s
            .split(',')
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .map(|f| match f {
                "csv" => Ok(Format::Csv),
                "json" => Ok(Format::Json),
                "svg" => Ok(Format::Svg),
                other => Err(Error::config("formats", format!("unknown format `{other}`"))),
            })
            .collect::<Result<_>>()?;
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err(Error::config("formats", "no output format given"));
        }
        Ok(out)
    }
}

pub fn write_csv(rows: &[ReportRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_error(path, e))).collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Data(format!("{}: {e}", path.display()))
}

pub fn write_json(rows: &[ReportRow], path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(rows)
        .map_err(|source| Error::Json { context: path.display().to_string(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the requested formats under `out_dir` and returns the files written.
pub fn emit_report(rows: &[ReportRow], formats: &[Format], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::Data("nothing to emit".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for f in formats {
        match f {
            Format::Csv => {
                let p = out_dir.join("report.csv");
                write_csv(rows, &p)?;
                written.push(p);
            }
            Format::Json => {
                let p = out_dir.join("report.json");
                write_json(rows, &p)?;
                written.push(p);
            }
            Format::Svg => {
                let dir = out_dir.join("charts");
                fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                for (name, chart) in charts(rows) {
                    let p = dir.join(format!("{name}.svg"));
                    fs::write(&p, render_svg(&chart)).map_err(|e| Error::io(&p, e))?;
                    written.push(p);
                }
            }
        }
    }
    Ok(written)
}

fn charts(rows: &[ReportRow]) -> BTreeMap<String, Vec<ReportRow>> {
    let mut out: BTreeMap<String, Vec<ReportRow>> = BTreeMap::new();
    for r in rows {
        let mut name = format!("{}_{}_{}_{}", r.game_label, r.encoding, r.logic, r.mode);
        if let Some(c) = &r.criterion {
            name.push('_');
            name.push_str(c);
        }
        let name: String = name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        out.entry(name).or_default().push(r.clone());
    }
    for v in out.values_mut() {
        v.sort_by_key(|r| r.n);
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 60.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Line chart of one series of rows: percentiles on a log axis (left),
/// mean success rate in red (right), scans on the X axis.
pub fn render_svg(rows: &[ReportRow]) -> String {
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let n_min = rows.iter().map(|r| r.n).min().unwrap_or(1) as f64;
    let n_max = rows.iter().map(|r| r.n).max().unwrap_or(1) as f64;
    let x = |n: usize| {
        if n_max > n_min {
            LEFT + (n as f64 - n_min) / (n_max - n_min) * pw
        } else {
            LEFT + pw / 2.0
        }
    };
    let top_value = rows.iter().map(|r| r.p75).max().unwrap_or(1).max(10);
    let decades = (top_value as f64).log10().ceil().max(1.0);
    let y_log = |v: u64| TOP + ph - (v.max(1) as f64).log10() / decades * ph;
    let y_rate = |r: f64| TOP + ph - r.clamp(0.0, 1.0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    if let Some(r) = rows.first() {
        let mut title = format!("{} / {} / {} ({})", r.game_label, r.encoding, r.logic, r.mode);
        if let Some(c) = &r.criterion {
            let _ = write!(title, ", {c}");
        }
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, escape(&title));
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    // left axis: one tick per decade
    let _ = writeln!(s, r#"<g class="log-axis" data-scale="log">"#);
    for k in 0..=decades as u32 {
        let v = 10u64.pow(k);
        let y = y_log(v);
        let _ = writeln!(s, r##"<line x1="{}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/><line x1="{LEFT}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/>"##, LEFT - 5.0, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">1e{k}</text>"#, LEFT - 8.0, y + 4.0);
    }
    let _ = writeln!(s, "</g>");
    let label = if rows.first().is_some_and(|r| r.mode == super::Mode::Statistical) {
        "ground-truth rank"
    } else {
        "remaining candidates"
    };
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">{label} (P25/P50/P75)</text>"#,
        TOP + ph / 2.0
    );

    // right axis: success rate
    let _ = writeln!(s, r#"<g class="rate-axis" fill="red">"#);
    for r in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y = y_rate(r);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="red"/>"#, LEFT + pw, LEFT + pw + 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}">{r}</text>"#, LEFT + pw + 8.0, y + 4.0);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text transform="translate({:.1} {:.1}) rotate(90)" text-anchor="middle" fill="red">mean success rate</text>"#,
        W - 12.0,
        TOP + ph / 2.0
    );

    // x axis
    for r in rows {
        let xx = x(r.n);
        let _ = writeln!(
            s,
            r#"<text x="{xx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            TOP + ph + 16.0,
            r.n
        );
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">scans n</text>"#, LEFT + pw / 2.0, H - 10.0);

    let poly = |f: &dyn Fn(&ReportRow) -> f64| -> String {
        rows.iter().map(|r| format!("{:.1},{:.1}", x(r.n), f(r))).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(s, r##"<polyline class="p25" fill="none" stroke="#555" stroke-dasharray="4 3" points="{}"/>"##, poly(&|r| y_log(r.p25)));
    let _ = writeln!(s, r##"<polyline class="p75" fill="none" stroke="#555" stroke-dasharray="4 3" points="{}"/>"##, poly(&|r| y_log(r.p75)));
    let _ = writeln!(s, r#"<polyline class="p50" fill="none" stroke="black" stroke-width="2" points="{}"/>"#, poly(&|r| y_log(r.p50)));
    let _ = writeln!(s, r#"<polyline class="success" fill="none" stroke="red" stroke-width="2" points="{}"/>"#, poly(&|r| y_rate(r.mean_success_rate)));
    s.push_str("</svg>\n");
    s
}
