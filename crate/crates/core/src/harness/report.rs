//! CSV and SVG emission for sweep reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::kv::KvDoc;
use crate::{Error, Result};

use super::sweep::SweepReport;

pub const CSV_HEADER: &str = "axis_value,observability,map_id,accuracy";

/// One parsed CSV row; `map_id` is `None` for mean rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub axis_value: f64,
    pub observability: u8,
    pub map_id: Option<usize>,
    pub accuracy: f64,
}

/// Per value: one row per (observability, map), then one mean row per
/// observability with `map_id` set to `mean`.
pub fn report_csv(report: &SweepReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (vi, value) in report.values.iter().enumerate() {
        let cells: Vec<_> = report.cells_for(vi).collect();
        for (oi, obs) in report.observabilities.iter().enumerate() {
            for c in &cells {
                let _ = writeln!(out, "{value},{obs},{},{}", c.map_id, c.accuracy[oi]);
            }
        }
        for (obs, mean) in report.observabilities.iter().zip(report.mean(vi)) {
            let _ = writeln!(out, "{value},{obs},mean,{mean}");
        }
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let bad = |line: usize, msg: &str| Error::Usage(format!("csv line {line}: {msg}"));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(bad(1, "missing header")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad(i + 1, "expected 4 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "bad number"));
        rows.push(CsvRow {
            axis_value: num(f[0])?,
            observability: f[1].parse().map_err(|_| bad(i + 1, "bad observability"))?,
            map_id: match f[2] {
                "mean" => None,
                s => Some(s.parse().map_err(|_| bad(i + 1, "bad map id"))?),
            },
            accuracy: num(f[3])?,
        });
    }
    Ok(rows)
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

fn axis_label(report: &SweepReport) -> &'static str {
    match report.axis {
        super::SweepAxis::Frozen => "frozen blocks",
        super::SweepAxis::Shots => "shots",
        super::SweepAxis::Lr => "transfer learning rate (log10)",
    }
}

/// Line chart: one solid series per observability level (mean over maps)
/// and, when present, the baseline as a dashed series at each level.
pub fn report_svg(report: &SweepReport) -> String {
    let log = report.axis == super::SweepAxis::Lr;
    let xs: Vec<f64> = report.values.iter().map(|&v| if log { v.log10() } else { v }).collect();
    let (xmin, xmax) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let span = if xmax > xmin { xmax - xmin } else { 1.0 };
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - xmin) / span * pw;
    let py = |y: f64| TOP + (1.0 - y) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">
<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>
<text x="{}" y="18" font-family="sans-serif" font-size="14" text-anchor="middle">{} sweep</text>"#,
        W / 2.0,
        report.axis
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>
<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#,
        TOP + ph,
        LEFT + pw,
        TOP + ph,
        TOP + ph
    );
    for k in 0..=5 {
        let y = k as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{2:.1}" x2="{LEFT}" y2="{2:.1}" stroke="black"/><text x="{1}" y="{3:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{y:.1}</text>"#,
            LEFT - 4.0,
            LEFT - 6.0,
            py(y),
            py(y) + 3.0
        );
    }
    for (&x, &v) in xs.iter().zip(&report.values) {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            px(x),
            TOP + ph + 14.0,
            if log { format!("{x}") } else { format!("{v}") }
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 12.0,
        axis_label(report)
    );
    let means: Vec<Vec<f64>> = (0..report.values.len()).map(|vi| report.mean(vi)).collect();
    for (oi, obs) in report.observabilities.iter().enumerate() {
        let color = COLORS[oi % COLORS.len()];
        let points: Vec<String> = xs
            .iter()
            .zip(&means)
            .map(|(&x, m)| format!("{:.2},{:.2}", px(x), py(m[oi])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        if let Some(base) = &report.baseline {
            if let Some(&b) = base.get(oi) {
                let _ = writeln!(
                    s,
                    r#"<line x1="{LEFT}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="{color}" stroke-width="1.5" stroke-dasharray="6,4"/>"#,
                    py(b),
                    LEFT + pw
                );
            }
        }
        let ly = TOP + 16.0 * oi as f64 + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{2}" y="{3}" font-family="sans-serif" font-size="11">{obs}% observed</text>"#,
            W - RIGHT + 10.0,
            W - RIGHT + 30.0,
            W - RIGHT + 34.0,
            ly + 4.0
        );
    }
    if report.baseline.is_some() {
        let ly = TOP + 16.0 * report.observabilities.len() as f64 + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="black" stroke-dasharray="6,4"/><text x="{2}" y="{3}" font-family="sans-serif" font-size="11">baseline</text>"#,
            W - RIGHT + 10.0,
            W - RIGHT + 30.0,
            W - RIGHT + 34.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Report metadata: seed, swept values, maps, baseline and dataset hashes.
pub fn report_meta(report: &SweepReport) -> KvDoc {
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let mut doc = KvDoc::default();
    doc.set("axis", report.axis)
        .set("seed", report.seed)
        .set("values", join(&report.values))
        .set("maps", report.map_names.join(","));
    if let Some(b) = &report.baseline {
        doc.set("baseline", join(b));
    }
    for (k, v) in &report.dataset_hashes {
        doc.set(k, v);
    }
    doc
}

/// Writes `<stem>.csv`, `<stem>.svg` and `<stem>.meta` into `dir`.
pub fn emit_report(report: &SweepReport, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let files = [
        (format!("{stem}.csv"), report_csv(report)),
        (format!("{stem}.svg"), report_svg(report)),
        (format!("{stem}.meta"), report_meta(report).to_string()),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(|e| Error::io(p.display().to_string(), e))?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{SweepAxis, SweepCell};

    fn report() -> SweepReport {
        let values = vec![0.0, 1.0, 2.0];
        let mut cells = Vec::new();
        for vi in 0..3 {
            for m in 0..5 {
                cells.push(SweepCell {
                    value_index: vi,
                    map_id: m,
                    accuracy: (0..4)
                        .map(|o| ((vi * 7 + m * 3 + o) % 11) as f64 / 10.0 + 1.0 / 3.0 * 0.01)
                        .collect(),
                });
            }
        }
        SweepReport {
            axis: SweepAxis::Shots,
            values,
            observabilities: vec![25, 50, 75, 100],
            map_names: (0..5).map(|i| format!("m{i}")).collect(),
            cells,
            baseline: Some(vec![0.4, 0.5, 0.7, 0.9]),
            seed: 3,
            dataset_hashes: vec![],
        }
    }

    #[test]
    fn csv_row_count() {
        let r = report();
        let rows = parse_csv(&report_csv(&r)).unwrap();
        assert_eq!(rows.len(), 3 * 4 * 5 + 3 * 4);
    }

    #[test]
    fn csv_means_round_trip() {
        let r = report();
        let rows = parse_csv(&report_csv(&r)).unwrap();
        for (vi, v) in r.values.iter().enumerate() {
            for (oi, o) in r.observabilities.iter().enumerate() {
                let row = rows
                    .iter()
                    .find(|x| x.axis_value == *v && x.observability == *o && x.map_id.is_none())
                    .unwrap();
                assert!((row.accuracy - r.mean(vi)[oi]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(parse_csv("nope\n").is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\n1,2,3\n")).is_err());
    }

    #[test]
    fn svg_has_dashed_baseline() {
        let svg = report_svg(&report());
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(!svg.contains("href"));
    }
}
