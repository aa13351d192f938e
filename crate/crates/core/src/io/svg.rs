//! Self-contained SVG scatter plots with optional error bars, an overlaid
//! curve and one panel per distinct value of the panel columns.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::table::{read_csv, Schema, Table};
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    pub y_err: Option<String>,
    /// Column drawn as a line through the points.
    pub curve: Option<String>,
    /// Rows sharing the values of these columns go into one panel.
    pub panel_by: Vec<String>,
    pub x_label: String,
    pub y_label: String,
}

impl PlotSpec {
    pub fn new(x: &str, y: &str) -> Self {
        Self {
            x: x.into(),
            y: y.into(),
            y_err: None,
            curve: None,
            panel_by: Vec::new(),
            x_label: x.into(),
            y_label: y.into(),
        }
    }

    fn err(mut self, col: &str) -> Self {
        self.y_err = Some(col.into());
        self
    }

    fn labels(mut self, x: &str, y: &str) -> Self {
        self.x_label = x.into();
        self.y_label = y.into();
        self
    }

    /// The natural plot of each schema.
    pub fn for_schema(schema: Schema) -> Result<Self> {
        Ok(match schema {
            Schema::Figure1 => Self {
                curve: Some("curve".into()),
                panel_by: vec!["beta".into(), "field".into()],
                ..Self::new("alpha", "f_hop_mean").err("f_hop_se").labels("alpha", "free energy")
            },
            Schema::Theorem1 => Self::new("alpha", "residual_mean").err("residual_se").labels("alpha", "residual"),
            Schema::OverlapTail => Self::new("r", "tail_mean").err("tail_se").labels("r", "G(S^2 > r)"),
            Schema::ExpMoment => Self::new("n", "value_mean").err("value_se").labels("N", "<exp(c S^2)>"),
            Schema::Interpolate => Self::new("t", "f_mean").err("f_se").labels("t", "E[F_t]"),
            Schema::Stein => Self::new("t", "diff_mean").err("diff_se").labels("t", "lhs - rhs"),
            Schema::HopfieldStein => Self::new("m", "scaled_remainder_mean")
                .err("scaled_remainder_se")
                .labels("M", "remainder M / beta^2"),
            Schema::Concentration => Self::new("n", "moment_mean").err("moment_se").labels("N", "centred moment"),
            Schema::McNodes => Self::new("beta", "minus_energy_per_site_mean")
                .err("minus_energy_per_site_se")
                .labels("beta", "<-H/N>"),
            other => return Err(Error::Schema(format!("no default plot for schema {other}"))),
        })
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Roughly five round tick values covering [lo, hi].
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

struct Panel {
    title: String,
    x: Vec<f64>,
    y: Vec<f64>,
    err: Option<Vec<f64>>,
    curve: Option<Vec<f64>>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

fn draw_panel(out: &mut String, panel: &Panel, spec: &PlotSpec, top: f64) {
    let (x0, x1) = bounds(panel.x.iter().copied());
    let ys = panel.y.iter().enumerate().flat_map(|(i, y)| {
        let e = panel.err.as_ref().map_or(0.0, |e| e[i]);
        [y - e, y + e]
    });
    let curve = panel.curve.iter().flatten().copied();
    let (y0, y1) = bounds(ys.chain(curve));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| top + MARGIN_TOP + (y1 - y) / (y1 - y0) * plot_h;
    let bottom = top + MARGIN_TOP + plot_h;

    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        top + 22.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_LEFT:.2}" y="{:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#,
        top + MARGIN_TOP
    );
    for t in ticks(x0, x1) {
        let _ = writeln!(
            out,
            r#"<line x1="{0:.2}" y1="{bottom:.2}" x2="{0:.2}" y2="{1:.2}" stroke="black"/><text x="{0:.2}" y="{2:.2}" text-anchor="middle" font-size="11">{3}</text>"#,
            sx(t),
            bottom + 5.0,
            bottom + 18.0,
            fmt_tick(t)
        );
    }
    for t in ticks(y0, y1) {
        let _ = writeln!(
            out,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="black"/><text x="{3:.2}" y="{4:.2}" text-anchor="end" font-size="11">{5}</text>"#,
            MARGIN_LEFT - 5.0,
            sy(t),
            MARGIN_LEFT,
            MARGIN_LEFT - 8.0,
            sy(t) + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        bottom + 36.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {0:.2})">{1}</text>"#,
        top + MARGIN_TOP + plot_h / 2.0,
        escape(&spec.y_label)
    );

    if let Some(c) = &panel.curve {
        let mut pts: Vec<(f64, f64)> = panel.x.iter().copied().zip(c.iter().copied()).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#, path.join(" "));
    }
    for (i, (&x, &y)) in panel.x.iter().zip(&panel.y).enumerate() {
        if let Some(e) = &panel.err {
            if e[i] > 0.0 {
                let _ = writeln!(
                    out,
                    r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/>"#,
                    sx(x),
                    sy(y - e[i]),
                    sy(y + e[i])
                );
            }
        }
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"#, sx(x), sy(y));
    }
}

/// SVG text for `table`; output depends only on the table and the spec.
pub fn render_svg(table: &Table, spec: &PlotSpec) -> Result<String> {
    let x = table.column(&spec.x)?;
    let y = table.column(&spec.y)?;
    let err = spec.y_err.as_deref().map(|c| table.column(c)).transpose()?;
    let curve = spec.curve.as_deref().map(|c| table.column(c)).transpose()?;
    let keys: Vec<Vec<f64>> = spec.panel_by.iter().map(|c| table.column(c)).collect::<Result<_>>()?;

    // panels in order of first appearance
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for i in 0..table.rows.len() {
        let key: Vec<f64> = keys.iter().map(|k| k[i]).collect();
        match groups.iter_mut().find(|(k, _)| k.iter().zip(&key).all(|(a, b)| a.to_bits() == b.to_bits())) {
            Some((_, rows)) => rows.push(i),
            None => groups.push((key, vec![i])),
        }
    }
    if groups.is_empty() {
        groups.push((Vec::new(), Vec::new()));
    }
    let pick = |v: &[f64], rows: &[usize]| rows.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let panels: Vec<Panel> = groups
        .iter()
        .map(|(key, rows)| Panel {
            title: spec
                .panel_by
                .iter()
                .zip(key)
                .map(|(c, v)| format!("{c} = {}", fmt_tick(*v)))
                .collect::<Vec<_>>()
                .join(", "),
            x: pick(&x, rows),
            y: pick(&y, rows),
            err: err.as_ref().map(|e| pick(e, rows)),
            curve: curve.as_ref().map(|c| pick(c, rows)),
        })
        .collect();

    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, panel) in panels.iter().enumerate() {
        draw_panel(&mut out, panel, spec, k as f64 * PANEL_HEIGHT);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Plot a CSV written by this tool next to it (same stem, `.svg`).
pub fn emit_svg_plot(csv_path: &Path, spec: Option<&PlotSpec>) -> Result<PathBuf> {
    let table = read_csv(csv_path)?;
    let spec = match spec {
        Some(s) => s.clone(),
        None => PlotSpec::for_schema(table.schema)?,
    };
    let svg = render_svg(&table, &spec)?;
    let out = csv_path.with_extension("svg");
    std::fs::write(&out, svg).map_err(|e| Error::io(&out, e))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(ticks(3.0, 3.0), vec![3.0]);
        assert_eq!(fmt_tick(0.6000000000000001), "0.6");
        assert_eq!(fmt_tick(-0.0), "0");
    }
}
