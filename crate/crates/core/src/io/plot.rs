//! Self-contained SVG line plots of CSV columns.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::csv::{read_csv, Table};
use crate::error::{LandauError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotStyle {
    Linear,
    Semilogy,
    Loglog,
}

impl std::str::FromStr for PlotStyle {
    type Err = LandauError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(PlotStyle::Linear),
            "semilogy" => Ok(PlotStyle::Semilogy),
            "loglog" => Ok(PlotStyle::Loglog),
            _ => Err(LandauError::InvalidParameter(format!(
                "plot style must be linear, semilogy or loglog, got `{s}`"
            ))),
        }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Option<Axis> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return None;
        }
        if hi - lo <= 1e-300_f64.max(1e-12 * hi.abs()) {
            let pad = if hi == 0.0 { 1.0 } else { 0.5 * hi.abs() };
            lo -= pad;
            hi += pad;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        Some(Axis { log, lo, hi })
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions (in data units) and labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo as i64, self.hi as i64);
            let stride = ((b - a) / 8 + 1).max(1);
            (a..=b)
                .filter(|e| (e - a) % stride == 0)
                .map(|e| (10f64.powi(e as i32), format!("1e{e}")))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last)
                .map(|i| {
                    let v = i as f64 * step;
                    (v, format!("{}", (v / mag).round() * mag))
                })
                .map(|(v, l)| (v, l.trim_end_matches(".0").to_string()))
                .collect()
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// SVG plot of `columns` against `x`. Log axes drop nonpositive samples.
pub fn render_svg(table: &Table, x: &str, columns: &[String], style: PlotStyle) -> Result<String> {
    if columns.is_empty() {
        return Err(LandauError::InvalidParameter("no columns to plot".into()));
    }
    let (xlog, ylog) = match style {
        PlotStyle::Linear => (false, false),
        PlotStyle::Semilogy => (false, true),
        PlotStyle::Loglog => (true, true),
    };
    let keep = |v: f64, log: bool| v.is_finite() && (!log || v > 0.0);
    let mut series = Vec::new();
    for name in columns {
        let pts: Vec<(f64, f64)> = table
            .series(x, name)?
            .into_iter()
            .filter(|p| keep(p.0, xlog) && keep(p.1, ylog))
            .collect();
        if pts.is_empty() {
            return Err(LandauError::InvalidParameter(format!("column `{name}` has no plottable samples")));
        }
        series.push((name.as_str(), pts));
    }
    let xa = Axis::fit(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)), xlog).expect("nonempty series");
    let ya = Axis::fit(series.iter().flat_map(|s| s.1.iter().map(|p| p.1)), ylog).expect("nonempty series");
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |v: f64| MARGIN_LEFT + pw * xa.unit(v);
    let sy = |v: f64| MARGIN_TOP + ph * (1.0 - ya.unit(v));

    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for (v, label) in xa.ticks() {
        let px = sx(v);
        let _ = writeln!(
            w,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#cccccc"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            MARGIN_TOP,
            MARGIN_TOP + ph,
            MARGIN_TOP + ph + 18.0,
            escape(&label)
        );
    }
    for (v, label) in ya.ticks() {
        let py = sy(v);
        let _ = writeln!(
            w,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#cccccc"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT,
            MARGIN_LEFT + pw,
            MARGIN_LEFT - 6.0,
            py + 4.0,
            escape(&label)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + 0.5 * pw,
        HEIGHT - 15.0,
        escape(x)
    );
    let ylabel = if columns.len() == 1 { columns[0].as_str() } else { "value" };
    let _ = writeln!(
        w,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        MARGIN_TOP + 0.5 * ph,
        MARGIN_TOP + 0.5 * ph,
        escape(ylabel)
    );
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(a, b)| format!("{:.2},{:.2}", sx(a), sy(b))).collect();
        let _ = writeln!(
            w,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = MARGIN_TOP + 16.0 + 18.0 * k as f64;
        let lx = MARGIN_LEFT + pw + 12.0;
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(s)
}

/// Reads `csv_path` and writes an SVG of `columns` against its first column.
pub fn emit_plot(csv_path: &Path, columns: &[String], style: PlotStyle, out_path: &Path) -> Result<()> {
    let table = read_csv(csv_path)?;
    let x = table
        .columns
        .first()
        .cloned()
        .ok_or_else(|| LandauError::InvalidParameter("CSV has no columns".into()))?;
    let svg = render_svg(&table, &x, columns, style)?;
    std::fs::write(out_path, svg).map_err(|e| LandauError::io(out_path, e))
}
