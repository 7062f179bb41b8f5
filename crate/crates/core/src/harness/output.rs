use std::fmt::Write as _;
use std::path::Path;

use super::sweep::{SweepResult, SweepRow};
use crate::error::{Error, Result};
use crate::lsr::write_file;
use crate::mac::MacCurve;

pub const CSV_HEADER: [&str; 9] = [
    "detector",
    "snr_total_db",
    "ser",
    "ser_ci",
    "mean_nodes",
    "mean_kr",
    "p_kr0",
    "trials",
    "seed",
];

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV text of `result`; floats use the shortest round-trip form.
pub fn to_csv(result: &SweepResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in &result.rows {
        w.write_record([
            r.detector.clone(),
            r.snr_total_db.to_string(),
            opt(r.ser),
            opt(r.ser_ci),
            r.mean_nodes.to_string(),
            opt(r.mean_kr),
            opt(r.p_kr0),
            r.trials.to_string(),
            r.seed.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    write_file(path, &to_csv(result))
}

pub fn parse_csv(text: &str, path: &Path) -> Result<SweepResult> {
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(parse_err(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i).parse().map_err(|_| {
                parse_err(format!(
                    "row {}: bad {} {:?}",
                    line + 1,
                    CSV_HEADER[i],
                    field(i)
                ))
            })
        };
        let maybe = |i: usize| -> Result<Option<f64>> {
            if field(i).is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let int = |i: usize| -> Result<u64> {
            field(i).parse().map_err(|_| {
                parse_err(format!(
                    "row {}: bad {} {:?}",
                    line + 1,
                    CSV_HEADER[i],
                    field(i)
                ))
            })
        };
        rows.push(SweepRow {
            detector: field(0).to_string(),
            snr_total_db: num(1)?,
            ser: maybe(2)?,
            ser_ci: maybe(3)?,
            mean_nodes: num(4)?,
            mean_kr: maybe(5)?,
            p_kr0: maybe(6)?,
            trials: int(7)?,
            seed: int(8)?,
        });
    }
    Ok(SweepResult {
        rows,
        wall_time_s: Vec::new(),
    })
}

pub fn load_csv(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_csv(&text, path)
}

/// A MAC curve as CSV rows: the MAC value goes in `mean_nodes`, and the
/// trial count is outer × inner.
pub fn mac_rows(curve: &MacCurve, label: &str) -> SweepResult {
    let rows = curve
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &db)| SweepRow {
            detector: label.to_string(),
            snr_total_db: db,
            ser: None,
            ser_ci: None,
            mean_nodes: curve.mac_values[i],
            mean_kr: curve.mean_kr.as_ref().map(|v| v[i]),
            p_kr0: curve.p_kr0.as_ref().map(|v| v[i]),
            trials: (curve.trials_outer * curve.trials_inner) as u64,
            seed: curve.seed,
        })
        .collect();
    SweepResult {
        rows,
        wall_time_s: Vec::new(),
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];
const PANEL_W: f64 = 440.0;
const PANEL_H: f64 = 320.0;
const MARGIN: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn frac(&self, v: f64) -> f64 {
        let (v, lo, hi) = if self.log {
            (v.log10(), self.lo.log10(), self.hi.log10())
        } else {
            (v, self.lo, self.hi)
        };
        if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.5
        }
    }
}

/// SER (log scale) and mean visited nodes (linear) against total SNR, one
/// series per detector.
pub fn to_svg(result: &SweepResult) -> String {
    let detectors = result.detectors();
    let snrs: Vec<f64> = result.rows.iter().map(|r| r.snr_total_db).collect();
    let x = Axis {
        lo: snrs.iter().copied().fold(f64::INFINITY, f64::min).min(0.0),
        hi: snrs
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
            .max(1.0),
        log: false,
    };
    let min_ser = result
        .rows
        .iter()
        .filter_map(|r| r.ser)
        .filter(|&s| s > 0.0)
        .fold(1.0, f64::min);
    let ser_axis = Axis {
        lo: 10f64.powf(min_ser.log10().floor()).min(0.1),
        hi: 1.0,
        log: true,
    };
    let max_nodes = result.rows.iter().map(|r| r.mean_nodes).fold(1.0, f64::max);
    let node_axis = Axis {
        lo: 0.0,
        hi: max_nodes * 1.05,
        log: false,
    };

    let width = 2.0 * (PANEL_W + 2.0 * MARGIN);
    let height = PANEL_H + 2.0 * MARGIN + 18.0 * detectors.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    );

    let panels: [(&str, &Axis, fn(&SweepRow) -> Option<f64>); 2] = [
        ("Symbol error rate", &ser_axis, |r| {
            r.ser.filter(|&s| s > 0.0)
        }),
        ("Mean visited nodes", &node_axis, |r| Some(r.mean_nodes)),
    ];
    for (p, (title, y, value)) in panels.iter().enumerate() {
        let ox = MARGIN + p as f64 * (PANEL_W + 2.0 * MARGIN);
        let oy = MARGIN;
        let px = |v: f64| ox + x.frac(v) * PANEL_W;
        let py = |v: f64| oy + (1.0 - y.frac(v)) * PANEL_H;
        let _ = writeln!(
            svg,
            r#"<rect x="{ox}" y="{oy}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{title}</text>"#,
            ox + PANEL_W / 2.0,
            oy - 10.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">Total SNR (dB)</text>"#,
            ox + PANEL_W / 2.0,
            oy + PANEL_H + 36.0
        );
        for t in 0..=4 {
            let v = x.lo + (x.hi - x.lo) * t as f64 / 4.0;
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{:.1}</text>"#,
                px(v),
                oy + PANEL_H + 16.0,
                v
            );
        }
        if y.log {
            let (a, b) = (y.lo.log10().round() as i32, y.hi.log10().round() as i32);
            for e in a..=b {
                let yy = py(10f64.powi(e));
                let _ = writeln!(
                    svg,
                    r##"<line x1="{ox}" y1="{yy:.2}" x2="{}" y2="{yy:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"##,
                    ox + PANEL_W,
                    ox - 6.0,
                    yy + 4.0
                );
            }
        } else {
            for t in 0..=4 {
                let v = y.lo + (y.hi - y.lo) * t as f64 / 4.0;
                let yy = py(v);
                let _ = writeln!(
                    svg,
                    r##"<line x1="{ox}" y1="{yy:.2}" x2="{}" y2="{yy:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{v:.1}</text>"##,
                    ox + PANEL_W,
                    ox - 6.0,
                    yy + 4.0
                );
            }
        }
        for (i, name) in detectors.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let points: Vec<(f64, f64)> = result
                .series(name)
                .iter()
                .filter_map(|r| value(r).map(|v| (px(r.snr_total_db), py(v))))
                .collect();
            if points.is_empty() {
                continue;
            }
            let coords: Vec<String> = points
                .iter()
                .map(|(a, b)| format!("{a:.2},{b:.2}"))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                coords.join(" ")
            );
            for (a, b) in points {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{a:.2}" cy="{b:.2}" r="2.5" fill="{color}"/>"#
                );
            }
        }
    }
    for (i, name) in detectors.iter().enumerate() {
        let yy = MARGIN + PANEL_H + 56.0 + 18.0 * i as f64;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"<line x1="{MARGIN}" y1="{yy}" x2="{}" y2="{yy}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            MARGIN + 24.0,
            MARGIN + 30.0,
            yy + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_svg(result: &SweepResult, path: &Path) -> Result<()> {
    write_file(path, &to_svg(result))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(detector: &str, db: f64, ser: Option<f64>) -> SweepRow {
        SweepRow {
            detector: detector.into(),
            snr_total_db: db,
            ser,
            ser_ci: ser.map(|s| s / 10.0),
            mean_nodes: 12.25,
            mean_kr: None,
            p_kr0: Some(0.5),
            trials: 100,
            seed: 7,
        }
    }

    #[test]
    fn empty_result_is_header_only() {
        let text = to_csv(&SweepResult::default());
        assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));
        assert_eq!(
            parse_csv(&text, Path::new("e.csv")).unwrap(),
            SweepResult::default()
        );
    }

    #[test]
    fn csv_round_trip() {
        let r = SweepResult {
            rows: vec![
                row("ML", -2.22, Some(0.1 + 0.2)),
                row("LSR-SE-SD(MMSE)", 31.78, Some(4.627e-7)),
                row("x,\"y\"", 0.0, None),
            ],
            wall_time_s: vec![1.0],
        };
        let back = parse_csv(&to_csv(&r), Path::new("r.csv")).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(matches!(
            parse_csv("a,b\n1,2\n", Path::new("b.csv")),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn svg_escapes_labels() {
        let r = SweepResult {
            rows: vec![
                row("A<B>&C", 0.0, Some(0.01)),
                row("A<B>&C", 10.0, Some(0.0)),
            ],
            wall_time_s: vec![],
        };
        let svg = to_svg(&r);
        assert!(svg.contains("A&lt;B&gt;&amp;C"));
        assert!(svg.starts_with("<svg"));
    }
}
