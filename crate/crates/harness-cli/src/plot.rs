//! SVG figure emission from telemetry CSVs.
//!
//! Three fixed figures per run: attitude error (deg), bias estimate error
//! components, and apparent-acceleration error norm, each against time.
//! Rendering is plain SVG text with no styling dependencies; reset instants
//! appear as dashed vertical markers. Non-finite samples (the φ guard and
//! anything downstream of it) split the polyline instead of poisoning it.

use crate::telemetry::{read_csv, TelemetryRow};
use crate::HarnessError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const TICKS: usize = 5;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    values: Vec<f64>,
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e-2 && v.abs() < 1e4 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, fallback: (f64, f64)) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo > hi {
            (lo, hi) = fallback;
        }
        if hi - lo < 1e-12 {
            let pad = lo.abs().max(1.0) * 1e-3;
            lo -= pad;
            hi += pad;
        }
        Self { lo, hi }
    }

    fn to_x(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.lo) / (self.hi - self.lo) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn to_y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_B - (v - self.lo) / (self.hi - self.lo) * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    fn ticks(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=TICKS).map(|i| self.lo + (self.hi - self.lo) * i as f64 / TICKS as f64)
    }
}

fn render(title: &str, y_label: &str, ts: &[f64], series: &[Series], jumps: &[f64]) -> String {
    let x = Axis::fit(ts.iter().copied(), (0.0, 1.0));
    let y = Axis::fit(series.iter().flat_map(|s| s.values.iter().copied()), (0.0, 1.0));

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = write!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n");
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{title}</text>\n",
        WIDTH / 2.0
    );

    for tv in x.ticks() {
        let px = x.to_x(tv);
        let _ = write!(
            svg,
            "<line x1=\"{px:.1}\" y1=\"{}\" x2=\"{px:.1}\" y2=\"{}\" stroke=\"#ddd\"/>\n",
            MARGIN_T,
            HEIGHT - MARGIN_B
        );
        let _ = write!(
            svg,
            "<text x=\"{px:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            HEIGHT - MARGIN_B + 18.0,
            fmt_tick(tv)
        );
    }
    for tv in y.ticks() {
        let py = y.to_y(tv);
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{py:.1}\" x2=\"{}\" y2=\"{py:.1}\" stroke=\"#ddd\"/>\n",
            MARGIN_L,
            WIDTH - MARGIN_R
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 6.0,
            py + 4.0,
            fmt_tick(tv)
        );
    }
    let _ = write!(
        svg,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        MARGIN_L,
        MARGIN_T,
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">time [s]</text>\n",
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        HEIGHT - 12.0
    );
    let _ = write!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {})\">{y_label}</text>\n",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0
    );

    for &tj in jumps {
        let px = x.to_x(tj);
        let _ = write!(
            svg,
            "<line x1=\"{px:.1}\" y1=\"{}\" x2=\"{px:.1}\" y2=\"{}\" \
             stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n",
            MARGIN_T,
            HEIGHT - MARGIN_B
        );
    }

    for s in series {
        // Split the polyline wherever a sample is non-finite.
        let mut points = String::new();
        let flush = |points: &mut String, svg: &mut String| {
            if !points.is_empty() {
                let _ = write!(
                    svg,
                    "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" \
                     points=\"{}\"/>\n",
                    s.color,
                    points.trim_end()
                );
                points.clear();
            }
        };
        for (&t, &v) in ts.iter().zip(&s.values) {
            if v.is_finite() {
                let _ = write!(points, "{:.1},{:.1} ", x.to_x(t), y.to_y(v));
            } else {
                flush(&mut points, &mut svg);
            }
        }
        flush(&mut points, &mut svg);
    }

    if series.len() > 1 {
        for (i, s) in series.iter().enumerate() {
            let ly = MARGIN_T + 14.0 + 16.0 * i as f64;
            let _ = write!(
                svg,
                "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" \
                 stroke-width=\"2\"/>\n<text x=\"{}\" y=\"{}\">{}</text>\n",
                WIDTH - MARGIN_R - 110.0,
                WIDTH - MARGIN_R - 85.0,
                s.color,
                WIDTH - MARGIN_R - 80.0,
                ly + 4.0,
                s.label
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn figure(
    out_dir: &Path,
    name: &str,
    title: &str,
    y_label: &str,
    ts: &[f64],
    series: &[Series],
    jumps: &[f64],
) -> Result<PathBuf, HarnessError> {
    let path = out_dir.join(name);
    std::fs::write(&path, render(title, y_label, ts, series, jumps))?;
    Ok(path)
}

/// Render the three standard figures for `csv_path` into `out_dir`
/// (created if missing). Returns the written paths.
pub fn emit_plots(csv_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let rows = read_csv(csv_path)?;
    if rows.is_empty() {
        return Err(HarnessError::Telemetry(format!(
            "{}: no telemetry rows to plot",
            csv_path.display()
        )));
    }
    std::fs::create_dir_all(out_dir)?;
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let jumps: Vec<f64> =
        rows.iter().filter(|r| r.jump_flag).map(|r| r.t).collect();
    let col = |f: fn(&TelemetryRow) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };

    let written = vec![
        figure(
            out_dir,
            "attitude_error.svg",
            "Attitude error",
            "error [deg]",
            &ts,
            &[Series { label: "err", color: "#1f77b4", values: col(|r| r.attitude_error_deg) }],
            &jumps,
        )?,
        figure(
            out_dir,
            "bias_error.svg",
            "Gyro bias estimate error",
            "b\u{0303} [rad/s]",
            &ts,
            &[
                Series { label: "x", color: "#1f77b4", values: col(|r| r.btilde.x) },
                Series { label: "y", color: "#d62728", values: col(|r| r.btilde.y) },
                Series { label: "z", color: "#2ca02c", values: col(|r| r.btilde.z) },
            ],
            &jumps,
        )?,
        figure(
            out_dir,
            "accel_error.svg",
            "Apparent-acceleration error",
            "|r\u{0303}_a| [m/s\u{00b2}]",
            &ts,
            &[Series { label: "err", color: "#1f77b4", values: col(|r| r.ratilde_norm) }],
            &jumps,
        )?,
    ];
    Ok(written)
}
